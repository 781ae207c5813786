#include <cmath>
#include <map>
#include <tuple>
#include <vector>

#include "doctest.h"
#include "pfmbem/element_integrals.hpp"
#include "pfmbem/errors.hpp"
#include "pfmbem/expansions.hpp"
#include "pfmbem/fmm.hpp"
#include "pfmbem/quadrature.hpp"

using namespace pfmbem;

namespace {

const Material kWater{1000.0, 1500.0};
const Material kMercury{13600.0, 1450.0};

int tree_at(const Forest& f, int row, int col) {
  for (std::size_t t = 0; t < f.trees.size(); ++t)
    if (f.trees[t].lattice_cell_index == std::pair{row, col}) return static_cast<int>(t);
  return -1;
}

struct Fixture {
  FundamentalBlock B;
  WaveContext ctx;
  Eigen::MatrixXcd A;
  Fixture(int MH, int ML, int N, double nu = 0.37)
      : B(build_block(Lattice::square, 1.0, MH, ML, Shape::circle, 0.35, N)),
        ctx(make_context(2 * kPi * nu, 0.0, B.H, kMercury, kWater)),
        A(assemble_dense(B, ctx, build_tail_channel(B, ctx))) {}
};

}  // namespace

TEST_CASE("error model table") {
  const ErrorModel sq = error_model_lookup(TreeKind::square_quadtree, 0);
  CHECK(sq.gamma == 0.4714);
  CHECK(sq.lambda == 0.6009);
  CHECK(sq.tau == 0.6009);
  const ErrorModel tr = error_model_lookup(TreeKind::triangle_quadtree, 1);
  CHECK(tr.gamma == 0.7559);
  CHECK(tr.tau == 0.7559);
  for (int l = 0; l <= 2; ++l) {
    const ErrorModel e = error_model_lookup(TreeKind::square_quadtree, l);
    CHECK(e.tau == std::max(e.gamma, e.lambda));
  }
  for (int l = 0; l <= 1; ++l) {
    const ErrorModel e = error_model_lookup(TreeKind::triangle_quadtree, l);
    CHECK(e.tau == std::max(e.gamma, e.lambda));
  }
  CHECK_THROWS_AS(error_model_lookup(TreeKind::square_quadtree, 3), RangeError);
  CHECK_THROWS_AS(error_model_lookup(TreeKind::triangle_quadtree, 2), RangeError);
}

TEST_CASE("forest adjacency") {
  SUBCASE("single cell has no far trees") {
    const Forest f = build_forest(build_block(Lattice::square, 1.0, 1, 1, Shape::circle, 0.3, 16),
                                  TreeKind::square_quadtree);
    CHECK(f.trees.size() == 1);
    for (int m = -1; m <= 1; ++m) CHECK(f.adjacent(0, 0, m));
    CHECK(f.far.empty());
  }
  SUBCASE("6 x 4 square block") {
    const Forest f = build_forest(build_block(Lattice::square, 0.5, 6, 4, Shape::circle, 0.35, 16),
                                  TreeKind::square_quadtree);
    const int t00 = tree_at(f, 0, 0), t01 = tree_at(f, 0, 1), t03 = tree_at(f, 0, 3), t50 = tree_at(f, 5, 0);
    CHECK(f.adjacent(t00, t01, 0));
    CHECK(f.adjacent(t00, tree_at(f, 1, 1), 0));
    CHECK_FALSE(f.adjacent(t00, t03, 0));
    CHECK_FALSE(f.adjacent(t00, t50, 0));
    CHECK(f.adjacent(t00, t50, -1));
  }
  SUBCASE("hexagon neighbours share an edge") {
    const Forest f = build_forest(build_block(Lattice::hexagon, 1.0, 4, 3, Shape::circle, 0.3, 16),
                                  TreeKind::triangle_quadtree);
    const int c = tree_at(f, 1, 1);
    int count = 0;
    for (std::size_t s = 0; s < f.trees.size(); ++s)
      for (int m = -1; m <= 1; ++m)
        if (static_cast<int>(s) != c || m != 0) count += f.adjacent(c, static_cast<int>(s), m);
    CHECK(count == 6);
  }
  SUBCASE("kind must match the lattice") {
    const FundamentalBlock B = build_block(Lattice::square, 1.0, 1, 1, Shape::circle, 0.3, 16);
    CHECK_THROWS_AS(build_forest(B, TreeKind::triangle_quadtree), ConfigError);
  }
}

TEST_CASE("every element sits in exactly one leaf") {
  for (Lattice lat : {Lattice::square, Lattice::hexagon}) {
    const FundamentalBlock B = build_block(lat, 0.5, 6, 4, Shape::circle, 0.35, 64);
    const TreeKind kind = lat == Lattice::square ? TreeKind::square_quadtree : TreeKind::triangle_quadtree;
    const Forest f = build_forest(B, kind, 8);
    CHECK(f.depth >= 1);
    for (const BasicTree& t : f.trees) {
      std::vector<int> seen(B.N, 0);
      for (int c : f.levels[f.depth]) {
        CHECK(static_cast<int>(t.element_ids[c].size()) <= 8);
        for (int e : t.element_ids[c]) ++seen[e];
      }
      for (int s : seen) CHECK(s == 1);
      // children partition the parent
      for (std::size_t c = 0; c < f.cells.size(); ++c) {
        if (f.cells[c].children.empty()) continue;
        std::size_t sum = 0;
        for (int ch : f.cells[c].children) sum += t.element_ids[ch].size();
        CHECK(sum == t.element_ids[c].size());
      }
    }
  }
}

TEST_CASE("partition audit on a 2 x 2 block") {
  for (Lattice lat : {Lattice::square, Lattice::hexagon}) {
    const FundamentalBlock B = build_block(lat, 1.0, 2, 2, Shape::circle, 0.35, 32);
    const TreeKind kind = lat == Lattice::square ? TreeKind::square_quadtree : TreeKind::triangle_quadtree;
    const Forest f = build_forest(B, kind, 4);
    std::map<std::tuple<int, int, int, int, int>, int> count;
    auto tally = [&](const Interaction& it) {
      for (int i : f.trees[it.target_tree].element_ids[it.target_cell])
        for (int j : f.trees[it.source_tree].element_ids[it.source_cell])
          ++count[{it.target_tree, i, it.source_tree, j, it.m}];
    };
    for (const Interaction& it : f.near) tally(it);
    for (const Interaction& it : f.far) tally(it);
    const std::size_t expect = static_cast<std::size_t>(B.M() * B.N) * (B.M() * B.N) * 3;
    CHECK(count.size() == expect);
    bool once = true;
    for (const auto& [key, c] : count) once = once && c == 1;
    CHECK(once);
    // within trees only same-level cells interact
    for (const Interaction& it : f.far) CHECK(f.cells[it.target_cell].level == f.cells[it.source_cell].level);
  }
}

TEST_CASE("moments") {
  const FundamentalBlock B = build_block(Lattice::square, 1.0, 1, 1, Shape::circle, 0.35, 64);
  const WaveContext ctx = make_context(3.0, 0.0, B.H, kMercury, kWater);
  const Forest f = build_forest(B, TreeKind::square_quadtree, 8);
  int leaf = -1;
  for (int c : f.levels[f.depth])
    if (!f.trees[0].element_ids[c].empty()) leaf = c;
  REQUIRE(leaf >= 0);
  const int p = 4;
  CHECK(compute_moments(f, B, 0, leaf, Eigen::VectorXcd::Zero(B.unknowns()), ctx, OperatorKind::S, p).norm() == 0.0);
  const Eigen::VectorXcd psi = Eigen::VectorXcd::Random(B.unknowns());
  const Vec2 O = f.trees[0].origin + f.cells[leaf].centroid;
  // definition-level oracle with 20 Gauss points and the standard library Bessel functions
  const QuadratureRule& g = gauss_legendre(20);
  for (int n = -p; n <= p; ++n) {
    cdouble ms = 0.0, md = 0.0;
    for (int e : f.trees[0].element_ids[leaf]) {
      const BoundaryElement& el = B.boundaries[0].elements[e];
      for (int q = 0; q < 20; ++q) {
        const Vec2 y = el.point(g.nodes[q]);
        const double w = 0.5 * el.arc_length * g.weights[q];
        auto jm = [&](const Vec2& v) {
          const double r = v.norm();
          const double jn = std::cyl_bessel_j(std::abs(n), ctx.k * r) * ((n < 0 && (n % 2)) ? -1.0 : 1.0);
          return jn * std::exp(-kI * (n * polar_angle(v)));
        };
        ms += w * jm(y - O) * psi(B.N + e);
        const double h = 1e-6;
        md += w * (jm(y + h * el.normal - O) - jm(y - h * el.normal - O)) / (2 * h) * psi(e);
      }
    }
    const cdouble gs = compute_moments(f, B, 0, leaf, psi, ctx, OperatorKind::S, p)(n + p);
    const cdouble gd = compute_moments(f, B, 0, leaf, psi, ctx, OperatorKind::D, p)(n + p);
    CAPTURE(n);
    CHECK(std::abs(gs - ms) < 1e-12 * std::max(1.0, std::abs(ms)));
    CHECK(std::abs(gd - md) < 1e-7 * std::max(1.0, std::abs(md)));
  }
}

TEST_CASE("translation identities") {
  const int p = 6;
  const Eigen::MatrixXcd I = Eigen::MatrixXcd::Identity(2 * p + 1, 2 * p + 1);
  CHECK((m2m_matrix(2.0, Vec2(0, 0), p) - I).norm() == 0.0);
  CHECK((l2l_matrix(2.0, Vec2(0, 0), p) - I).norm() == 0.0);
  // unit local at l = 0 evaluated at the center
  Eigen::VectorXcd L = Eigen::VectorXcd::Zero(2 * p + 1);
  L(p) = 1.0;
  const Eigen::MatrixXcd r = l2p_matrix(2.0, Vec2(0.3, 0.1), Vec2(1, 0), Vec2(0.3, 0.1), p);
  CHECK(std::abs((r * L)(0) - 0.25 * kI) < 1e-15);
  // derivative row against a finite difference of the value row
  const Vec2 x(0.41, -0.2), nx(std::cos(0.3), std::sin(0.3)), c(0.1, 0.05);
  const Eigen::VectorXcd Lr = Eigen::VectorXcd::Random(2 * p + 1);
  const double h = 1e-6;
  const cdouble fd = ((l2p_matrix(2.0, x + h * nx, nx, c, p) * Lr)(0) - (l2p_matrix(2.0, x - h * nx, nx, c, p) * Lr)(0)) / (2 * h);
  CHECK(std::abs(fd - (l2p_matrix(2.0, x, nx, c, p) * Lr)(1)) < 1e-7 * std::abs(fd));
}

TEST_CASE("periodic M2L against Cesaro-averaged image sums") {
  const double H = 3.0;
  const WaveContext ctx = make_context(2.0, 0.0, H, kMercury, kWater);
  const int p = 2;
  const Vec2 d(0.8, 0.6);
  const LatticeSumConfig cfg = build_quadrature(H, ctx.k, 1e-12, 2 * p, 1.0);
  const Eigen::VectorXcd M = Eigen::VectorXcd::Random(2 * p + 1);
  std::vector<cdouble> z(4 * p + 1);
  for (int n = -2 * p; n <= 2 * p; ++n) z[n + 2 * p] = direct_periodic_sum(n, 1, d, ctx, H, 20000, true);
  const Eigen::VectorXcd ref = m2l_from_sums(z, p) * M;
  const Eigen::VectorXcd got = m2l_periodic(M, d, ctx, H, cfg, p);
  CHECK((got - ref).norm() / ref.norm() < 1e-3);
  // the m = 0 term dominates the in-block translation
  const Eigen::VectorXcd free = m2l_matrix(ctx.k, d, p) * M;
  CHECK((got - free).norm() < (got).norm());
}

TEST_CASE("single-leaf multipole truncation decays at most like gamma") {
  const FundamentalBlock B = build_block(Lattice::square, 1.0, 1, 1, Shape::circle, 0.45, 64);
  const WaveContext ctx = make_context(2.0, 0.0, B.H, kMercury, kWater);
  const Forest f = build_forest(B, TreeKind::square_quadtree, 8);
  const double side = B.a / std::pow(2.0, f.depth);
  const Eigen::VectorXcd psi = Eigen::VectorXcd::Random(B.unknowns());
  const double gamma = error_model_lookup(TreeKind::square_quadtree, 0).gamma;
  for (int c : f.levels[f.depth]) {
    if (f.trees[0].element_ids[c].size() < 4) continue;
    const Vec2 O = f.trees[0].origin + f.cells[c].centroid;
    // nearest point of a well-separated cell, diagonal direction
    const Vec2 x = O + 1.5 * side * Vec2(1, 1).normalized();
    Eigen::Vector2cd ref = Eigen::Vector2cd::Zero();
    for (int e : f.trees[0].element_ids[c]) {
      const ElementIntegrals g = integrate_element(ctx.k, B.boundaries[0].elements[e], Vec2(0, 0), x, Vec2(1, 0), false);
      ref(0) += g.D * psi(e) - kI * ctx.eta * g.S * psi(B.N + e);
    }
    std::vector<double> err;
    for (int p : {4, 8, 12}) {
      Eigen::VectorXcd mom = Eigen::VectorXcd::Zero(2 * p + 1);
      for (int e : f.trees[0].element_ids[c]) {
        const Eigen::MatrixXcd a = p2m_matrix(ctx.k, ctx.eta, B.boundaries[0].elements[e], Vec2(0, 0), O, p);
        mom += a.col(0) * psi(e) + a.col(1) * psi(B.N + e);
      }
      err.push_back(std::abs((m2p_matrix(ctx.k, x, Vec2(1, 0), O, p) * mom)(0) - ref(0)));
    }
    const double ratio = std::pow(err[2] / err[0], 1.0 / 8);
    CAPTURE(c);
    CHECK(ratio <= gamma + 0.05);
  }
}

TEST_CASE("fmm matvec") {
  SUBCASE("pure near field equals dense") {
    Fixture fx(1, 2, 32);
    const Forest f = build_forest(fx.B, TreeKind::square_quadtree, 1000);
    CHECK(f.far.empty());
    const FmmOperator op = prepare_fmm(f, fx.B, fx.ctx, 10);
    const Eigen::VectorXcd x = Eigen::VectorXcd::Random(fx.B.unknowns());
    const Eigen::VectorXcd y = fx.A * x;
    CHECK((fmm_matvec(op, x) - y).norm() / y.norm() < 1e-12);
  }
  SUBCASE("accuracy, linearity and envelope") {
    Fixture fx(2, 1, 32);
    const Forest f = build_forest(fx.B, TreeKind::square_quadtree, 4);
    std::vector<Eigen::VectorXcd> xs;
    for (int i = 0; i < 5; ++i) xs.push_back(Eigen::VectorXcd::Random(fx.B.unknowns()));
    std::vector<double> env;
    for (int p = 4; p <= 14; p += 2) {
      const FmmOperator op = prepare_fmm(f, fx.B, fx.ctx, p);
      double e = 0.0;
      for (const auto& x : xs) {
        const Eigen::VectorXcd y = fx.A * x;
        e = std::max(e, (fmm_matvec(op, x) - y).norm() / y.norm());
      }
      env.push_back(e);
      if (p == 10) {
        CHECK(e <= 5e-3);
        const cdouble a(0.3, -1.2), b(2.0, 0.5);
        const Eigen::VectorXcd lhs = fmm_matvec(op, a * xs[0] + b * xs[1]);
        const Eigen::VectorXcd rhs = a * fmm_matvec(op, xs[0]) + b * fmm_matvec(op, xs[1]);
        CHECK((lhs - rhs).norm() / rhs.norm() < 1e-12);
      }
    }
    for (std::size_t i = 1; i < env.size(); ++i) CHECK(env[i] <= env[i - 1]);
  }
  SUBCASE("state and shape errors") {
    Fixture fx(1, 1, 16);
    CHECK_THROWS_AS(fmm_matvec(FmmOperator{}, Eigen::VectorXcd::Zero(4)), StateError);
    const Forest f = build_forest(fx.B, TreeKind::square_quadtree);
    const FmmOperator op = prepare_fmm(f, fx.B, fx.ctx, 6);
    CHECK_THROWS_AS(fmm_matvec(op, Eigen::VectorXcd::Zero(5)), ShapeError);
  }
  SUBCASE("hexagon lattice") {
    const FundamentalBlock B = build_block(Lattice::hexagon, 1.0, 2, 2, Shape::circle, 0.35, 32);
    const WaveContext ctx = make_context(2.1, 0.0, B.H, kMercury, kWater);
    const Eigen::MatrixXcd A = assemble_dense(B, ctx, build_tail_channel(B, ctx));
    const Forest f = build_forest(B, TreeKind::triangle_quadtree, 4);
    const FmmOperator op = prepare_fmm(f, B, ctx, 10);
    const Eigen::VectorXcd x = Eigen::VectorXcd::Random(B.unknowns());
    const Eigen::VectorXcd y = A * x;
    CHECK((fmm_matvec(op, x) - y).norm() / y.norm() < 5e-3);
  }
}
