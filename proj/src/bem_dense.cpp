#include "pfmbem/bem_dense.hpp"

#include <cmath>

#include "pfmbem/element_integrals.hpp"
#include "pfmbem/errors.hpp"
#include "pfmbem/expansions.hpp"
#include "pfmbem/parallel.hpp"

namespace pfmbem {

TranslationKey translation_key(const Vec2& d, double quantum) {
  return {std::llround(d.x() / quantum), std::llround(d.y() / quantum)};
}

int tail_order(const FundamentalBlock& block) {
  double radius = 0.0;
  for (const auto& b : block.boundaries) radius = std::max(radius, b.circumradius);
  double dmin = 1e300;
  for (const auto& bt : block.boundaries)
    for (const auto& bs : block.boundaries)
      for (int m : {-2, 2}) dmin = std::min(dmin, (bt.center - bs.center - m * block.h()).norm());
  const double ratio = 2.0 * radius / dmin;
  const int p = static_cast<int>(std::ceil(std::log(1e-13) / std::log(ratio)));
  return std::clamp(p, 6, 40);
}

const Eigen::MatrixXcd& TailChannel::translation(const FundamentalBlock& block, int t, int s) const {
  const auto it = m2l.find(translation_key(block.boundaries[t].center - block.boundaries[s].center, quantum));
  if (it == m2l.end()) throw StateError("tail translation missing");
  return it->second;
}

TailChannel build_tail_channel(const FundamentalBlock& block, const WaveContext& ctx, int p, double epsilon) {
  check_resonance(ctx.k, block.H, ctx.theta);
  TailChannel tc;
  tc.p = p > 0 ? p : tail_order(block);
  tc.quantum = 1e-9 * block.a;
  const int M = block.M();
  double spread = 0.0;
  for (const auto& bt : block.boundaries)
    for (const auto& bs : block.boundaries) spread = std::max(spread, std::abs(bt.center.x() - bs.center.x()));
  tc.cfg = build_quadrature(block.H, ctx.k, epsilon, 2 * tc.p + 1, spread, ctx.beta);

  tc.p2m.resize(M);
  tc.l2p.resize(M);
  const int N = block.N;
  const int P = 2 * tc.p + 1;
  parallel_for(M, [&](int s) {
    const DiscretizedBoundary& b = block.boundaries[s];
    Eigen::MatrixXcd p2m(P, 2 * N), l2p(2 * N, P);
    for (int j = 0; j < N; ++j) {
      const BoundaryElement& e = b.elements[j];
      const Eigen::MatrixXcd a = p2m_matrix(ctx.k, ctx.eta, e, Vec2(0, 0), b.center, tc.p);
      p2m.col(j) = a.col(0);
      p2m.col(N + j) = a.col(1);
      const Eigen::MatrixXcd r = l2p_matrix(ctx.k, e.midpoint, e.normal, b.center, tc.p);
      l2p.row(j) = r.row(0);
      l2p.row(N + j) = r.row(1);
    }
    tc.p2m[s] = std::move(p2m);
    tc.l2p[s] = std::move(l2p);
  });

  std::vector<std::pair<TranslationKey, Vec2>> todo;
  for (int t = 0; t < M; ++t) {
    for (int s = 0; s < M; ++s) {
      const Vec2 d = block.boundaries[t].center - block.boundaries[s].center;
      const TranslationKey key = translation_key(d, tc.quantum);
      if (tc.m2l.emplace(key, Eigen::MatrixXcd()).second) todo.emplace_back(key, d);
    }
  }
  parallel_for(static_cast<int>(todo.size()), [&](int i) {
    std::vector<cdouble> z(4 * tc.p + 1);
    lattice_sum_table(2 * tc.p, todo[i].second, ctx, block.H, tc.cfg, 1, z);
    tc.m2l.at(todo[i].first) = m2l_from_sums(z, tc.p);
  });
  return tc;
}

Eigen::MatrixXcd layer_block(double k, double eta, const DiscretizedBoundary& tgt, const DiscretizedBoundary& src,
                             const std::vector<std::pair<Vec2, cdouble>>& shifts, bool same) {
  const int nt = static_cast<int>(tgt.elements.size());
  const int ns = static_cast<int>(src.elements.size());
  Eigen::MatrixXcd out = Eigen::MatrixXcd::Zero(2 * nt, 2 * ns);
  const cdouble ie = kI * eta;
  for (int i = 0; i < nt; ++i) {
    const BoundaryElement& ei = tgt.elements[i];
    for (const auto& [shift, w] : shifts) {
      const bool zero = shift.x() == 0.0 && shift.y() == 0.0;
      for (int j = 0; j < ns; ++j) {
        const ElementIntegrals g =
            integrate_element(k, src.elements[j], shift, ei.midpoint, ei.normal, same && zero && i == j);
        out(i, j) += w * g.D;
        out(i, ns + j) += -w * ie * g.S;
        out(nt + i, j) += w * g.T;
        out(nt + i, ns + j) += -w * ie * g.K;
      }
    }
  }
  return out;
}

std::vector<std::pair<Vec2, cdouble>> near_images(const WaveContext& ctx) {
  const Vec2 h(0.0, ctx.H);
  return {{-h, 1.0 / ctx.alpha}, {Vec2(0, 0), 1.0}, {h, ctx.alpha}};
}

cdouble derivative_row_scale(const WaveContext& ctx) { return -2.0 * kI / (ctx.eta * (1.0 + ctx.varrho)); }

Eigen::MatrixXcd interior_block(const FundamentalBlock& block, const WaveContext& ctx, int s) {
  const DiscretizedBoundary& b = block.boundaries[s];
  Eigen::MatrixXcd out = layer_block(ctx.k1, ctx.eta, b, b, {{Vec2(0, 0), 1.0}}, true);
  const int N = block.N;
  out.topRows(N) *= -1.0;
  out.bottomRows(N) *= -derivative_row_scale(ctx) * ctx.varrho;
  return out;
}

namespace {

Eigen::MatrixXcd exterior_block(const FundamentalBlock& block, const WaveContext& ctx, const TailChannel& tail, int t,
                                int s) {
  Eigen::MatrixXcd out =
      layer_block(ctx.k, ctx.eta, block.boundaries[t], block.boundaries[s], near_images(ctx), t == s);
  out.noalias() += tail.l2p[t] * (tail.translation(block, t, s) * tail.p2m[s]);
  out.bottomRows(block.N) *= derivative_row_scale(ctx);
  return out;
}

}  // namespace

Eigen::MatrixXcd assemble_block(const FundamentalBlock& block, const WaveContext& ctx, const TailChannel& tail, int t,
                                int s) {
  Eigen::MatrixXcd out = exterior_block(block, ctx, tail, t, s);
  if (t == s) {
    out += interior_block(block, ctx, s);
    out += Eigen::MatrixXcd::Identity(out.rows(), out.cols());
  }
  return out;
}

Eigen::MatrixXcd assemble_dense(const FundamentalBlock& block, const WaveContext& ctx, const TailChannel& tail) {
  const int M = block.M(), n2 = 2 * block.N;
  Eigen::MatrixXcd A(M * n2, M * n2);
  parallel_for(M * M, [&](int idx) {
    const int t = idx / M, s = idx % M;
    A.block(t * n2, s * n2, n2, n2) = assemble_block(block, ctx, tail, t, s);
  });
  return A;
}

Eigen::VectorXcd incident_trace(const FundamentalBlock& block, const WaveContext& ctx) {
  const int N = block.N;
  Eigen::VectorXcd b(block.unknowns());
  const cdouble scale = -derivative_row_scale(ctx);
  for (int s = 0; s < block.M(); ++s) {
    for (int i = 0; i < N; ++i) {
      const BoundaryElement& e = block.boundaries[s].elements[i];
      const cdouble u = std::exp(kI * ctx.k * ctx.d.dot(e.midpoint));
      b(2 * N * s + i) = -u;
      b(2 * N * s + N + i) = scale * kI * ctx.k * ctx.d.dot(e.normal) * u;
    }
  }
  return b;
}

Eigen::VectorXcd matvec_dense(const Eigen::MatrixXcd& A, const Eigen::VectorXcd& x) {
  if (A.cols() != x.size()) throw ShapeError("matvec_dense: dimension mismatch");
  return A * x;
}

Eigen::VectorXcd solve_dense(const Eigen::MatrixXcd& A, const Eigen::VectorXcd& b, double rcond_min) {
  if (A.rows() != A.cols() || A.rows() != b.size()) throw ShapeError("solve_dense: dimension mismatch");
  Eigen::PartialPivLU<Eigen::MatrixXcd> lu(A);
  if (!(lu.rcond() >= rcond_min)) throw ConditioningError("solve_dense: matrix is numerically singular");
  return lu.solve(b);
}

}  // namespace pfmbem
