#pragma once

#include "pfmbem/geometry.hpp"
#include "pfmbem/specfun.hpp"

namespace pfmbem {

/// Integrals over one source element of Phi, dPhi/dnu(y), dPhi/dnu(x) and
/// d2Phi/dnu(x)dnu(y) at a target x with unit vector nx.
struct ElementIntegrals {
  cdouble S{0.0};
  cdouble D{0.0};
  cdouble K{0.0};
  cdouble T{0.0};
};

/// Targets at least this many element lengths from the element midpoint use the
/// plain far rule.
inline constexpr double kNearRatio = 1.5;

/// Gauss points per element in the far rule; multipole moments use the same nodes.
inline constexpr int kFarNodes = 6;

/// Integrals over element e translated by shift. When self is set, x must be
/// the element midpoint and nx its normal: S uses the analytic log part, D and K
/// the curvature limit, T the finite part of the static kernel.
ElementIntegrals integrate_element(double k, const BoundaryElement& e, const Vec2& shift, const Vec2& x,
                                   const Vec2& nx, bool self);

/// Far rule only, valid when |x - midpoint| >= kNearRatio * length.
ElementIntegrals integrate_element_far(double k, const BoundaryElement& e, const Vec2& shift, const Vec2& x,
                                       const Vec2& nx);

/// Regular remainder Phi + (1/2 pi) ln r and its first two radial derivatives.
struct Remainder {
  cdouble r0;
  cdouble r1;
  cdouble r2;
};
Remainder helmholtz_remainder(double k, double r);

}  // namespace pfmbem
