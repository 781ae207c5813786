#include "pfmbem/geometry.hpp"

#include <cmath>

#include "pfmbem/errors.hpp"
#include "pfmbem/quadrature.hpp"

namespace pfmbem {

namespace {

struct RoundSquareDerivs {
  Vec2 d1;
  Vec2 d2;
};

RoundSquareDerivs round_square_derivs(double r, double t) {
  const double s = std::sin(t);
  const double c = std::cos(t);
  const Vec2 d1(r * (-3.0 * s + 2.0 * (2.0 * s * c * c - s * s * s)),
                r * (3.0 * c + 2.0 * (c * c * c - 2.0 * c * s * s)));
  const Vec2 d2(r * (-3.0 * c + 2.0 * (2.0 * c * c * c - 7.0 * s * s * c)),
                r * (-3.0 * s + 2.0 * (2.0 * s * s * s - 7.0 * c * c * s)));
  return {d1, d2};
}

}  // namespace

Vec2 round_square_point(double r, double t) {
  const double s = std::sin(t);
  const double c = std::cos(t);
  return Vec2(r * (3.0 + 2.0 * s * s) * c, r * (3.0 + 2.0 * c * c) * s);
}

DiscretizedBoundary make_circle(double radius, int N, const Vec2& center) {
  if (N < 8) throw ConfigError("make_circle: need at least 8 elements");
  if (!(radius > 0.0)) throw ConfigError("make_circle: radius must be positive");
  DiscretizedBoundary b;
  b.center = center;
  b.shape = Shape::circle;
  b.size = radius;
  b.circumradius = radius;
  const double dt = 2.0 * kPi / N;
  for (int e = 0; e < N; ++e) {
    BoundaryElement el;
    el.t0 = e * dt;
    el.t1 = (e + 1) * dt;
    const double tm = (e + 0.5) * dt;
    el.normal = Vec2(std::cos(tm), std::sin(tm));
    el.midpoint = center + radius * el.normal;
    el.arc_length = radius * dt;
    el.curvature = 1.0 / radius;
    b.elements.push_back(el);
  }
  return b;
}

DiscretizedBoundary make_round_square(double r, int N, const Vec2& center) {
  if (N < 16) throw ConfigError("make_round_square: need at least 16 elements");
  if (!(r > 0.0)) throw ConfigError("make_round_square: r must be positive");
  DiscretizedBoundary b;
  b.center = center;
  b.shape = Shape::round_square;
  b.size = r;
  b.circumradius = 4.0 * r;
  const double dt = 2.0 * kPi / N;
  for (int e = 0; e < N; ++e) {
    BoundaryElement el;
    el.t0 = e * dt;
    el.t1 = (e + 1) * dt;
    const double tm = (e + 0.5) * dt;
    const QuadratureRule q = gauss_legendre(20, el.t0, el.t1);
    double len = 0.0;
    for (std::size_t i = 0; i < q.nodes.size(); ++i) len += q.weights[i] * round_square_derivs(r, q.nodes[i]).d1.norm();
    const RoundSquareDerivs d = round_square_derivs(r, tm);
    const double speed = d.d1.norm();
    const Vec2 tangent = d.d1 / speed;
    el.normal = Vec2(tangent.y(), -tangent.x());
    el.midpoint = center + round_square_point(r, tm);
    el.arc_length = len;
    el.curvature = (d.d1.x() * d.d2.y() - d.d1.y() * d.d2.x()) / (speed * speed * speed);
    b.elements.push_back(el);
  }
  return b;
}

double cell_area(Lattice lattice, double a) {
  return lattice == Lattice::square ? a * a : a * a * std::sqrt(3.0) / 2.0;
}

double packing_limit(Lattice lattice, Shape shape) {
  // Scatterers touch when the circumradius reaches a/2.
  const double area_at_touch = shape == Shape::circle ? kPi * 0.25 : 23.0 * kPi * (1.0 / 64.0) / 2.0;
  return area_at_touch / cell_area(lattice, 1.0);
}

double scatterer_size(Lattice lattice, Shape shape, double a, double filling_fraction) {
  const double area = filling_fraction * cell_area(lattice, a);
  return shape == Shape::circle ? std::sqrt(area / kPi) : std::sqrt(2.0 * area / (23.0 * kPi));
}

Vec2 lattice_center(Lattice lattice, double a, int i, int j) {
  if (lattice == Lattice::square) return Vec2(a * (j + 0.5), a * (i + 0.5));
  const double pitch = a * std::sqrt(3.0) / 2.0;
  return Vec2(pitch * (j + 0.5), a * (i + (j % 2 == 0 ? 0.25 : 0.75)));
}

FundamentalBlock empty_block(Lattice lattice, double a, int M_H, int M_L) {
  if (!(a > 0.0)) throw ConfigError("build_block: lattice constant must be positive");
  if (M_H < 1 || M_L < 1) throw ConfigError("build_block: need at least one row and one column");
  FundamentalBlock blk;
  blk.lattice = lattice;
  blk.a = a;
  blk.M_H = M_H;
  blk.M_L = M_L;
  blk.H = M_H * a;
  blk.L = lattice == Lattice::square ? M_L * a : M_L * a * std::sqrt(3.0) / 2.0;
  return blk;
}

FundamentalBlock build_block(Lattice lattice, double a, int M_H, int M_L, Shape shape,
                             double filling_fraction, int N) {
  FundamentalBlock blk = empty_block(lattice, a, M_H, M_L);
  if (!(filling_fraction > 0.0) || filling_fraction >= packing_limit(lattice, shape)) {
    throw ConfigError("build_block: filling fraction outside (0, packing limit)");
  }
  blk.N = N;
  const double size = scatterer_size(lattice, shape, a, filling_fraction);
  for (int j = 0; j < M_L; ++j) {
    for (int i = 0; i < M_H; ++i) {
      const Vec2 c = lattice_center(lattice, a, i, j);
      blk.boundaries.push_back(shape == Shape::circle ? make_circle(size, N, c) : make_round_square(size, N, c));
      blk.cells.emplace_back(i, j);
    }
  }
  // Overlap audit including the vertical images of the block.
  for (int s = 0; s < blk.M(); ++s) {
    const DiscretizedBoundary& bs = blk.boundaries[s];
    if (bs.center.x() - bs.circumradius <= 0.0 || bs.center.x() + bs.circumradius >= blk.L) {
      throw ConfigError("build_block: scatterer leaves the block footprint");
    }
    for (int t = 0; t < blk.M(); ++t) {
      for (int m = -1; m <= 1; ++m) {
        if (s == t && m == 0) continue;
        const DiscretizedBoundary& bt = blk.boundaries[t];
        const double d = (bs.center - bt.center - m * blk.h()).norm();
        if (d <= bs.circumradius + bt.circumradius) throw ConfigError("build_block: scatterers overlap");
      }
    }
  }
  return blk;
}

}  // namespace pfmbem
