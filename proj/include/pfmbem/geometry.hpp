#pragma once

#include <vector>

#include "pfmbem/specfun.hpp"

namespace pfmbem {

enum class Shape { circle, round_square };
enum class Lattice { square, hexagon };

struct Material {
  double rho = 0.0;
  double c = 0.0;
};

/// Flat segment tangent to the curve at its midpoint, with the length of the
/// arc it replaces. The tangent follows the counter-clockwise parametrisation.
struct BoundaryElement {
  Vec2 midpoint;
  Vec2 normal;
  double arc_length = 0.0;
  double t0 = 0.0;
  double t1 = 0.0;
  double curvature = 0.0;

  Vec2 tangent() const { return Vec2(-normal.y(), normal.x()); }
  /// Point at local coordinate s in [-1, 1].
  Vec2 point(double s) const { return midpoint + (0.5 * arc_length * s) * tangent(); }
};

struct DiscretizedBoundary {
  std::vector<BoundaryElement> elements;
  Vec2 center{0.0, 0.0};
  Shape shape = Shape::circle;
  double size = 0.0;          // radius, or r of the round-square curve
  double circumradius = 0.0;  // max distance from center to the curve
};

struct FundamentalBlock {
  Lattice lattice = Lattice::square;
  double a = 0.0;
  int M_H = 0;
  int M_L = 0;
  double H = 0.0;
  double L = 0.0;
  int N = 0;
  std::vector<DiscretizedBoundary> boundaries;
  /// Lattice row and column of each scatterer.
  std::vector<std::pair<int, int>> cells;

  int M() const { return static_cast<int>(boundaries.size()); }
  Vec2 h() const { return Vec2(0.0, H); }
  int unknowns() const { return 2 * M() * N; }
};

DiscretizedBoundary make_circle(double radius, int N, const Vec2& center = Vec2(0.0, 0.0));
DiscretizedBoundary make_round_square(double r, int N, const Vec2& center = Vec2(0.0, 0.0));

/// Point on the round-square curve (r(3+2 sin^2 t) cos t, r(3+2 cos^2 t) sin t).
Vec2 round_square_point(double r, double t);

/// Area of one unit lattice cell.
double cell_area(Lattice lattice, double a);

/// Largest filling fraction at which neighbouring scatterers still do not touch.
double packing_limit(Lattice lattice, Shape shape);

/// Radius (circle) or curve parameter r (round square) for a filling fraction.
double scatterer_size(Lattice lattice, Shape shape, double a, double filling_fraction);

/// Center of the scatterer in lattice row i, column j.
Vec2 lattice_center(Lattice lattice, double a, int i, int j);

FundamentalBlock build_block(Lattice lattice, double a, int M_H, int M_L, Shape shape,
                             double filling_fraction, int N);

/// Block with no scatterers but the given lattice dimensions.
FundamentalBlock empty_block(Lattice lattice, double a, int M_H, int M_L);

}  // namespace pfmbem
