#include "pfmbem/solver.hpp"

#include <chrono>
#include <memory>

#include "pfmbem/errors.hpp"
#include "pfmbem/parallel.hpp"

namespace pfmbem {

LinearMap identity_map() {
  return [](const Eigen::VectorXcd& x) { return x; };
}

namespace {

struct Cycle {
  Eigen::VectorXcd x;
  int iterations = 0;
};

// One restart cycle from x0; stops when the preconditioned residual drops to target.
Cycle arnoldi_cycle(const LinearMap& apply, const LinearMap& precond, const Eigen::VectorXcd& pb,
                    const Eigen::VectorXcd& x0, int m, double target, int budget, std::vector<double>& history) {
  const double pb_norm = pb.norm();
  Eigen::VectorXcd r = pb - precond(apply(x0));
  const double beta = r.norm();
  Cycle out{x0, 0};
  if (beta <= target * pb_norm) return out;

  std::vector<Eigen::VectorXcd> V{r / beta};
  Eigen::MatrixXcd Hm = Eigen::MatrixXcd::Zero(m + 1, m);
  std::vector<cdouble> cs(m), sn(m);
  Eigen::VectorXcd g = Eigen::VectorXcd::Zero(m + 1);
  g(0) = beta;
  int j = 0;
  for (; j < m && j < budget; ++j) {
    Eigen::VectorXcd w = precond(apply(V[j]));
    for (int i = 0; i <= j; ++i) {
      Hm(i, j) = V[i].dot(w);
      w -= Hm(i, j) * V[i];
    }
    const double hnext = w.norm();
    Hm(j + 1, j) = hnext;
    for (int i = 0; i < j; ++i) {
      const cdouble t = std::conj(cs[i]) * Hm(i, j) + std::conj(sn[i]) * Hm(i + 1, j);
      Hm(i + 1, j) = -sn[i] * Hm(i, j) + cs[i] * Hm(i + 1, j);
      Hm(i, j) = t;
    }
    const double den = std::hypot(std::abs(Hm(j, j)), std::abs(Hm(j + 1, j)));
    cs[j] = den == 0.0 ? 1.0 : Hm(j, j) / den;
    sn[j] = den == 0.0 ? 0.0 : Hm(j + 1, j) / den;
    Hm(j, j) = den;
    Hm(j + 1, j) = 0.0;
    g(j + 1) = -sn[j] * g(j);
    g(j) = std::conj(cs[j]) * g(j);
    history.push_back(std::abs(g(j + 1)) / pb_norm);
    if (std::abs(g(j + 1)) <= target * pb_norm || hnext == 0.0) {
      ++j;
      break;
    }
    V.push_back(w / hnext);
  }
  const Eigen::VectorXcd y =
      Hm.topLeftCorner(j, j).triangularView<Eigen::Upper>().solve(g.head(j));
  for (int i = 0; i < j; ++i) out.x += y(i) * V[i];
  out.iterations = j;
  return out;
}

}  // namespace

Eigen::VectorXcd gmres(const LinearMap& apply, const Eigen::VectorXcd& b, const GmresOptions& opt,
                       const LinearMap& precond, SolveReport* report) {
  if (!(opt.tol > 0.0) || opt.restart < 1) throw DomainError("gmres: invalid options");
  const auto start = std::chrono::steady_clock::now();
  SolveReport rep;
  const double b_norm = b.norm();
  Eigen::VectorXcd x = Eigen::VectorXcd::Zero(b.size());
  auto finish = [&](double res) {
    rep.final_relative_residual = res;
    rep.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (report) *report = rep;
  };
  if (b_norm == 0.0) {
    rep.converged = true;
    finish(0.0);
    return x;
  }
  const Eigen::VectorXcd pb = precond(b);
  double target = opt.tol;
  Eigen::VectorXcd best = x;
  double best_res = 1.0;
  while (true) {
    const Cycle c = arnoldi_cycle(apply, precond, pb, x, opt.restart, target, opt.max_iterations - rep.iterations,
                                  rep.history);
    x = c.x;
    rep.iterations += c.iterations;
    const double res = (apply(x) - b).norm() / b_norm;
    if (res < best_res) {
      best_res = res;
      best = x;
    }
    if (res <= opt.tol) {
      rep.converged = true;
      finish(res);
      return x;
    }
    const bool inner_met = rep.history.empty() || rep.history.back() <= target;
    // preconditioned residual small but true residual not: tighten the inner target
    if (inner_met || c.iterations == 0) target *= std::max(0.01, 0.5 * opt.tol / res);
    if (rep.iterations >= opt.max_iterations || target < 1e-15) {
      finish(best_res);
      throw IterationLimitError("gmres: iteration limit reached",
                                std::vector<cdouble>(best.data(), best.data() + best.size()), best_res);
    }
    ++rep.restarts;
  }
}

LinearMap block_preconditioner(const FundamentalBlock& block, const WaveContext& ctx, const TailChannel& tail) {
  const int M = block.M(), n2 = 2 * block.N;
  auto lus = std::make_shared<std::vector<Eigen::PartialPivLU<Eigen::MatrixXcd>>>(M);
  parallel_for(M, [&](int s) {
    (*lus)[s].compute(assemble_block(block, ctx, tail, s, s));
    if (!((*lus)[s].rcond() >= 1e-13)) throw ConditioningError("block_preconditioner: singular diagonal block");
  });
  return [lus, M, n2](const Eigen::VectorXcd& x) {
    if (x.size() != M * n2) throw ShapeError("block_preconditioner: dimension mismatch");
    Eigen::VectorXcd y(x.size());
    for (int s = 0; s < M; ++s) y.segment(s * n2, n2) = (*lus)[s].solve(x.segment(s * n2, n2));
    return y;
  };
}

}  // namespace pfmbem
