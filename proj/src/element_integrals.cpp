#include "pfmbem/element_integrals.hpp"

#include <cmath>

#include "pfmbem/quadrature.hpp"

namespace pfmbem {

Remainder helmholtz_remainder(double k, double r) {
  const double z = k * r;
  const Hankel01 h = hankel01(z);
  const double j0 = h.h0.real(), j1 = h.h1.real();
  const double y0r = y0_regular(z), y1r = y1_regular(z);
  const double y0 = y0r + (2.0 / kPi) * std::log(z);
  Remainder out;
  out.r0 = cdouble(-0.25 * y0r - std::log(k) / (2.0 * kPi), 0.25 * j0);
  out.r1 = k * cdouble(0.25 * y1r, -0.25 * j1);
  out.r2 = k * k * cdouble(0.25 * (y0 - y1r / z), -0.25 * (j0 - j1 / z));
  return out;
}

namespace {

constexpr double kInv2Pi = 1.0 / (2.0 * kPi);

// Static part on a flat segment in local coordinates (xi along, zeta across).
ElementIntegrals laplace_part(double hl, double xi, double zeta, double nt, double nn) {
  const double u1 = hl - xi, u0 = -hl - xi;
  const double q1 = u1 * u1 + zeta * zeta, q0 = u0 * u0 + zeta * zeta;
  const double theta = zeta == 0.0 ? 0.0 : std::atan2(zeta * (u1 - u0), zeta * zeta + u0 * u1);
  auto antider = [&](double u, double q) {
    double v = -u;
    if (q > 0.0) v += 0.5 * u * std::log(q);
    if (zeta != 0.0) v += zeta * std::atan(u / zeta);
    return v;
  };
  const double s = -kInv2Pi * (antider(u1, q1) - antider(u0, q0));
  const double ds_xi = kInv2Pi * 0.5 * (std::log(q1) - std::log(q0));
  const double ds_zeta = -kInv2Pi * theta;
  const double dd_xi = kInv2Pi * (-zeta / q1 + zeta / q0);
  const double dd_zeta = kInv2Pi * (-u1 / q1 + u0 / q0);
  ElementIntegrals out;
  out.S = s;
  out.D = kInv2Pi * theta;
  out.K = nt * ds_xi + nn * ds_zeta;
  out.T = nt * dd_xi + nn * dd_zeta;
  return out;
}

void add_remainder(ElementIntegrals& acc, double k, const Vec2& x, const Vec2& y, const Vec2& nx, const Vec2& ny,
                   double w) {
  const Vec2 d = x - y;
  const double r = d.norm();
  const Remainder rem = helmholtz_remainder(k, r);
  const Vec2 rh = d / r;
  const double cx = rh.dot(nx), cy = rh.dot(ny);
  acc.S += w * rem.r0;
  acc.D += -w * rem.r1 * cy;
  acc.K += w * rem.r1 * cx;
  acc.T += -w * (rem.r2 * cx * cy + (rem.r1 / r) * (nx.dot(ny) - cx * cy));
}

}  // namespace

ElementIntegrals integrate_element_far(double k, const BoundaryElement& e, const Vec2& shift, const Vec2& x,
                                       const Vec2& nx) {
  const QuadratureRule& g = gauss_legendre(kFarNodes);
  const Vec2 c = e.midpoint + shift;
  const Vec2 t = e.tangent();
  const Vec2& ny = e.normal;
  const double hl = 0.5 * e.arc_length;
  const double nxny = nx.dot(ny);
  ElementIntegrals out;
  for (int i = 0; i < kFarNodes; ++i) {
    const Vec2 d = x - (c + hl * g.nodes[i] * t);
    const double r = d.norm();
    const double w = hl * g.weights[i];
    const Hankel01 h = hankel01(k * r);
    const cdouble d1 = -0.25 * kI * k * h.h1;
    const cdouble d2 = -0.25 * kI * k * k * (h.h0 - h.h1 / (k * r));
    const double cx = d.dot(nx) / r, cy = d.dot(ny) / r;
    out.S += w * 0.25 * kI * h.h0;
    out.D += -w * d1 * cy;
    out.K += w * d1 * cx;
    out.T += -w * (d2 * cx * cy + (d1 / r) * (nxny - cx * cy));
  }
  return out;
}

ElementIntegrals integrate_element(double k, const BoundaryElement& e, const Vec2& shift, const Vec2& x,
                                   const Vec2& nx, bool self) {
  const Vec2 c = e.midpoint + shift;
  const Vec2 t = e.tangent();
  const Vec2& n = e.normal;
  const double hl = 0.5 * e.arc_length;
  if (!self && (x - c).norm() >= kNearRatio * e.arc_length) return integrate_element_far(k, e, shift, x, nx);

  const double xi = self ? 0.0 : (x - c).dot(t);
  const double zeta = self ? 0.0 : (x - c).dot(n);
  ElementIntegrals out = laplace_part(hl, xi, zeta, nx.dot(t), nx.dot(n));

  const QuadratureRule& g = gauss_legendre(16);
  if (self) {
    // s = hl t^4 on each half clusters nodes at the logarithmic point
    const QuadratureRule& gs = gauss_legendre(24);
    for (int side : {-1, 1}) {
      for (int i = 0; i < 24; ++i) {
        const double tt = 0.5 * (gs.nodes[i] + 1.0);
        const double t3 = tt * tt * tt;
        const double s = side * hl * t3 * tt;
        const double w = 0.5 * gs.weights[i] * 4.0 * hl * t3;
        add_remainder(out, k, x, c + s * t, nx, n, w);
      }
    }
    const double curv = -e.curvature * e.arc_length / (4.0 * kPi);
    out.D += curv;
    out.K += curv;
    return out;
  }
  const int panels = 4;
  const double pw = 2.0 * hl / panels;
  for (int p = 0; p < panels; ++p) {
    const double a = -hl + p * pw;
    for (int i = 0; i < 16; ++i) {
      const double s = a + 0.5 * pw * (g.nodes[i] + 1.0);
      add_remainder(out, k, x, c + s * t, nx, n, 0.5 * pw * g.weights[i]);
    }
  }
  return out;
}

}  // namespace pfmbem
