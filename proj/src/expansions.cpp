#include "pfmbem/expansions.hpp"

#include <vector>

#include "pfmbem/element_integrals.hpp"
#include "pfmbem/errors.hpp"
#include "pfmbem/quadrature.hpp"

namespace pfmbem {

void regular_basis(int p, double k, const Vec2& v, int sign, std::span<cdouble> out) {
  const double z = k * v.norm();
  const double th = polar_angle(v);
  std::vector<double> j(p + 1);
  bessel_j_sequence(p, z, j);
  out[p] = j[0];
  const cdouble step = std::exp(kI * (sign * th));
  cdouble e = 1.0;
  for (int n = 1; n <= p; ++n) {
    e *= step;
    out[p + n] = j[n] * e;
    out[p - n] = (n % 2 ? -j[n] : j[n]) * std::conj(e);
  }
}

void singular_basis(int p, double k, const Vec2& v, std::span<cdouble> out) {
  const double z = k * v.norm();
  if (!(z > 0.0)) throw DomainError("singular_basis: zero argument");
  std::vector<double> j(p + 1), y(p + 1);
  bessel_jy_sequence(p, z, j, y);
  const cdouble step = std::exp(kI * polar_angle(v));
  cdouble e = 1.0;
  for (int n = 0; n <= p; ++n) {
    const cdouble h(j[n], y[n]);
    if (!std::isfinite(h.imag())) throw RangeError("singular_basis: overflow");
    out[p + n] = h * e;
    out[p - n] = (n % 2 ? -h : h) * std::conj(e);
    e *= step;
  }
}

Eigen::MatrixXcd p2m_matrix(double k, double eta, const BoundaryElement& e, const Vec2& shift, const Vec2& center,
                            int p) {
  const QuadratureRule& g = gauss_legendre(kFarNodes);
  const Vec2 t = e.tangent();
  const double hl = 0.5 * e.arc_length;
  const cdouble nu(e.normal.x(), e.normal.y());
  Eigen::MatrixXcd out = Eigen::MatrixXcd::Zero(2 * p + 1, 2);
  std::vector<cdouble> jm(2 * p + 3);
  for (int i = 0; i < kFarNodes; ++i) {
    const Vec2 y = e.midpoint + shift + hl * g.nodes[i] * t;
    const double w = hl * g.weights[i];
    regular_basis(p + 1, k, y - center, -1, jm);
    for (int n = -p; n <= p; ++n) {
      const cdouble dn = 0.5 * k * (std::conj(nu) * jm[n - 1 + p + 1] - nu * jm[n + 1 + p + 1]);
      out(n + p, 0) += w * dn;
      out(n + p, 1) += -kI * eta * w * jm[n + p + 1];
    }
  }
  return out;
}

namespace {

// Rows (value, derivative) from the basis b of orders |n| <= p + 1.
Eigen::MatrixXcd evaluation_rows(double k, const Vec2& nx, const std::vector<cdouble>& b, int p) {
  const cdouble nu(nx.x(), nx.y());
  const cdouble pre = 0.25 * kI;
  Eigen::MatrixXcd out(2, 2 * p + 1);
  for (int n = -p; n <= p; ++n) {
    out(0, n + p) = pre * b[n + p + 1];
    out(1, n + p) = pre * 0.5 * k * (nu * b[n - 1 + p + 1] - std::conj(nu) * b[n + 1 + p + 1]);
  }
  return out;
}

}  // namespace

Eigen::MatrixXcd l2p_matrix(double k, const Vec2& x, const Vec2& nx, const Vec2& center, int p) {
  std::vector<cdouble> b(2 * p + 3);
  regular_basis(p + 1, k, x - center, 1, b);
  return evaluation_rows(k, nx, b, p);
}

Eigen::MatrixXcd m2p_matrix(double k, const Vec2& x, const Vec2& nx, const Vec2& center, int p) {
  std::vector<cdouble> b(2 * p + 3);
  singular_basis(p + 1, k, x - center, b);
  return evaluation_rows(k, nx, b, p);
}

Eigen::MatrixXcd m2m_matrix(double k, const Vec2& d, int p) {
  std::vector<cdouble> b(4 * p + 1);
  regular_basis(2 * p, k, d, -1, b);
  Eigen::MatrixXcd out(2 * p + 1, 2 * p + 1);
  for (int n = -p; n <= p; ++n)
    for (int l = -p; l <= p; ++l) out(n + p, l + p) = b[n - l + 2 * p];
  return out;
}

Eigen::MatrixXcd l2l_matrix(double k, const Vec2& d, int p) {
  std::vector<cdouble> b(4 * p + 1);
  regular_basis(2 * p, k, d, 1, b);
  Eigen::MatrixXcd out(2 * p + 1, 2 * p + 1);
  for (int n = -p; n <= p; ++n)
    for (int l = -p; l <= p; ++l) out(n + p, l + p) = b[l - n + 2 * p];
  return out;
}

Eigen::MatrixXcd m2l_from_sums(std::span<const cdouble> z, int p) {
  Eigen::MatrixXcd out(2 * p + 1, 2 * p + 1);
  for (int l = -p; l <= p; ++l)
    for (int n = -p; n <= p; ++n) out(l + p, n + p) = z[n - l + 2 * p];
  return out;
}

Eigen::MatrixXcd m2l_matrix(double k, const Vec2& d, int p) {
  std::vector<cdouble> z(4 * p + 1);
  singular_basis(2 * p, k, d, z);
  return m2l_from_sums(z, p);
}

}  // namespace pfmbem
