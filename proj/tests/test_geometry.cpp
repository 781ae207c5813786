#include <cmath>

#include "doctest.h"
#include "pfmbem/errors.hpp"
#include "pfmbem/geometry.hpp"
#include "pfmbem/quadrature.hpp"

using namespace pfmbem;

namespace {

double perimeter(const DiscretizedBoundary& b) {
  double s = 0.0;
  for (const auto& e : b.elements) s += e.arc_length;
  return s;
}

// Divergence-theorem area: (1/2) sum (x . nu) ds
double flux_area(const DiscretizedBoundary& b) {
  double s = 0.0;
  for (const auto& e : b.elements) s += 0.5 * (e.midpoint - b.center).dot(e.normal) * e.arc_length;
  return s;
}

double shoelace_round_square(double r, int samples) {
  double area = 0.0;
  for (int i = 0; i < samples; ++i) {
    const Vec2 p = round_square_point(r, 2 * kPi * i / samples);
    const Vec2 q = round_square_point(r, 2 * kPi * (i + 1) / samples);
    area += 0.5 * (p.x() * q.y() - q.x() * p.y());
  }
  return area;
}

}  // namespace

TEST_CASE("Gauss-Legendre rules") {
  for (int n : {1, 2, 6, 16, 64}) {
    const QuadratureRule& r = gauss_legendre(n);
    double sum = 0.0;
    for (double w : r.weights) sum += w;
    CHECK(sum == doctest::Approx(2.0).epsilon(1e-14));
    // exact for x^(2n-2)
    double mom = 0.0;
    for (int i = 0; i < n; ++i) mom += r.weights[i] * std::pow(r.nodes[i], 2 * n - 2);
    CHECK(mom == doctest::Approx(2.0 / (2 * n - 1)).epsilon(1e-13));
  }
  const QuadratureRule g = graded_gauss(16, 4.0, 0.01);
  double integral = 0.0;
  for (std::size_t i = 0; i < g.nodes.size(); ++i) integral += g.weights[i] * std::sqrt(g.nodes[i]);
  CHECK(integral == doctest::Approx(2.0 / 3.0 * 8.0).epsilon(1e-6));
  CHECK_THROWS_AS(gauss_legendre(65), RangeError);
}

TEST_CASE("make_circle") {
  CHECK_THROWS_AS(make_circle(1.0, 4), ConfigError);
  const DiscretizedBoundary b = make_circle(1.0, 8);
  REQUIRE(b.elements.size() == 8);
  for (const auto& e : b.elements) {
    CHECK(e.arc_length == doctest::Approx(kPi / 4).epsilon(1e-15));
    CHECK(std::abs(e.normal.norm() - 1.0) < 1e-12);
    CHECK((e.normal - e.midpoint.normalized()).norm() < 1e-15);
  }
  CHECK(std::abs(perimeter(make_circle(0.3, 64)) - 2 * kPi * 0.3) < 1e-12);
  CHECK(scatterer_size(Lattice::square, Shape::circle, 0.5, 0.35) == doctest::Approx(0.16692).epsilon(1e-4));
}

TEST_CASE("make_round_square") {
  CHECK_THROWS_AS(make_round_square(1.0, 8), ConfigError);
  const double r = 0.05;
  CHECK(shoelace_round_square(r, 20000) == doctest::Approx(23 * kPi * r * r / 2).epsilon(1e-6));
  for (double t : {0.1, 0.7, 2.0}) {
    const Vec2 p = round_square_point(r, t);
    const Vec2 q = round_square_point(r, t + kPi / 2);
    CHECK((q - Vec2(-p.y(), p.x())).norm() < 1e-15);
  }
  CHECK(scatterer_size(Lattice::square, Shape::round_square, 0.5, 0.35) == doctest::Approx(0.04924).epsilon(1e-3));
  const DiscretizedBoundary b = make_round_square(r, 64, Vec2(1, 2));
  double turning = 0.0;
  for (const auto& e : b.elements) {
    CHECK(std::abs(e.normal.norm() - 1.0) < 1e-12);
    CHECK(e.normal.dot(e.midpoint - b.center) > 0.0);
    turning += e.curvature * e.arc_length;
  }
  CHECK(turning == doctest::Approx(2 * kPi).epsilon(1e-2));
  double fine = 0.0;
  for (const auto& e : make_round_square(r, 1024).elements) fine += e.curvature * e.arc_length;
  CHECK(fine == doctest::Approx(2 * kPi).epsilon(1e-4));
  CHECK(b.elements.front().t0 == 0.0);
  CHECK(b.elements.back().t1 == doctest::Approx(2 * kPi));
}

TEST_CASE("divergence-theorem area within 0.5%") {
  for (int N : {64, 128}) {
    const DiscretizedBoundary c = make_circle(0.2, N);
    CHECK(std::abs(flux_area(c) / (kPi * 0.04) - 1.0) < 5e-3);
    const DiscretizedBoundary s = make_round_square(0.05, N);
    CHECK(std::abs(flux_area(s) / (23 * kPi * 0.0025 / 2) - 1.0) < 5e-3);
  }
}

TEST_CASE("perimeter refinement") {
  const double r = 0.05;
  const double exact = perimeter(make_round_square(r, 4096));
  // element lengths integrate the speed exactly over each span
  CHECK(std::abs(perimeter(make_round_square(r, 32)) - exact) < 1e-13);
  // the inscribed polygon through the span endpoints converges at second order
  auto chord = [&](int N) {
    double s = 0.0;
    for (const auto& e : make_round_square(r, N).elements) s += (round_square_point(r, e.t1) - round_square_point(r, e.t0)).norm();
    return s;
  };
  double prev = std::abs(chord(32) - exact);
  for (int N : {64, 128, 256}) {
    const double err = std::abs(chord(N) - exact);
    CHECK(prev / err > 3.9);
    prev = err;
  }
}

TEST_CASE("build_block") {
  SUBCASE("square 6x4") {
    const FundamentalBlock b = build_block(Lattice::square, 0.5, 6, 4, Shape::circle, 0.35, 64);
    CHECK(b.M() == 24);
    CHECK(b.H == doctest::Approx(3.0));
    CHECK(b.L == doctest::Approx(2.0));
    CHECK(b.boundaries[0].size == doctest::Approx(0.16692).epsilon(1e-4));
    CHECK(b.unknowns() == 2 * 24 * 64);
  }
  SUBCASE("hexagon 6x4") {
    const FundamentalBlock b = build_block(Lattice::hexagon, 0.5, 6, 4, Shape::circle, 0.50, 64);
    CHECK(b.boundaries[0].size == doctest::Approx(0.5 * std::sqrt(0.5 * std::sqrt(3.0) / (2 * kPi))).epsilon(1e-12));
    CHECK(b.L == doctest::Approx(4 * 0.5 * std::sqrt(3.0) / 2));
    double dmin = 1e9;
    for (int s = 0; s < b.M(); ++s)
      for (int t = 0; t < s; ++t) dmin = std::min(dmin, (b.boundaries[s].center - b.boundaries[t].center).norm());
    CHECK(dmin == doctest::Approx(0.5));
    CHECK(dmin > 2 * b.boundaries[0].circumradius);
  }
  SUBCASE("tiny filling fraction") {
    const FundamentalBlock b = build_block(Lattice::square, 1.0, 1, 1, Shape::circle, 1e-6, 16);
    CHECK(b.M() == 1);
  }
  SUBCASE("filling fraction above the packing limit") {
    CHECK_THROWS_AS(build_block(Lattice::square, 0.5, 2, 2, Shape::circle, 0.95, 32), ConfigError);
    CHECK_THROWS_AS(build_block(Lattice::square, 0.5, 2, 2, Shape::round_square, 0.6, 32), ConfigError);
  }
}
