#include "pfmbem/specfun.hpp"

#include <cmath>
#include <vector>

#include "pfmbem/errors.hpp"

namespace pfmbem {

namespace {

// Above this argument the Hankel asymptotic expansion is used for orders 0
// and 1; its smallest term is of order e^{-2x}.
constexpr double kAsymptoticThreshold = 25.0;
constexpr double kRescale = 1e250;

int miller_start(int nmax, double x) {
  int n = nmax + static_cast<int>(std::ceil(1.4 * x)) + 30;
  return n + (n % 2);
}

// Backward Miller recurrence for J_0..J_nmax at 0 < x, normalised with
// J_0 + 2 sum J_2k = 1. Storage is filled from the recurrence directly.
void miller_j(int nmax, double x, double* out) {
  const int start = miller_start(nmax, x);
  double jp = 0.0;   // J_{k+1}
  double jk = 1e-300; // J_k, arbitrary seed
  double norm = 0.0;
  for (int k = start; k >= 1; --k) {
    const double jm = (2.0 * k / x) * jk - jp;  // J_{k-1}
    jp = jk;
    jk = jm;
    const int idx = k - 1;
    if (idx <= nmax) out[idx] = jk;
    if (idx % 2 == 0) norm += (idx == 0 ? 1.0 : 2.0) * jk;
    if (std::abs(jk) > kRescale) {
      jk /= kRescale;
      jp /= kRescale;
      norm /= kRescale;
      for (int i = idx; i <= nmax; ++i) out[i] /= kRescale;
    }
  }
  for (int i = 0; i <= nmax; ++i) out[i] /= norm;
}

// Hankel asymptotic expansion: returns (J_nu, Y_nu) for nu in {0, 1}.
void asymptotic_jy(int nu, double x, double& j, double& y) {
  const double mu = 4.0 * nu * nu;
  double p = 1.0;
  double q = 0.0;
  double term = 1.0;
  const double eight_x = 8.0 * x;
  for (int k = 1; k < 60; ++k) {
    const double odd = 2.0 * k - 1.0;
    term *= (mu - odd * odd) / (k * eight_x);
    if (k % 2 == 1) {
      q += ((k / 2) % 2 == 0 ? term : -term);
    } else {
      p += ((k / 2) % 2 == 1 ? -term : term);
    }
    if (std::abs(term) < 1e-17) break;
  }
  const double chi = x - (0.5 * nu + 0.25) * kPi;
  const double amp = std::sqrt(2.0 / (kPi * x));
  const double c = std::cos(chi);
  const double s = std::sin(chi);
  j = amp * (p * c - q * s);
  y = amp * (p * s + q * c);
}

// Y_0 and Y_1 from a J sequence via the Neumann series; J must reach the
// Miller start index so the alternating tails are negligible.
void neumann_y01(double x, const std::vector<double>& j, double& y0, double& y1) {
  const double lg = std::log(0.5 * x) + kEulerGamma;
  double s0 = 0.0;
  double s1 = 0.0;
  const int kmax = static_cast<int>(j.size() - 2) / 2;
  for (int k = kmax; k >= 1; --k) {
    const double sgn = (k % 2 == 0) ? 1.0 : -1.0;
    s0 += sgn * j[2 * k] / k;
    s1 += sgn * (j[2 * k - 1] - j[2 * k + 1]) / k;
  }
  y0 = (2.0 / kPi) * lg * j[0] - (4.0 / kPi) * s0;
  y1 = -(2.0 / kPi) * j[0] / x + (2.0 / kPi) * lg * j[1] + (2.0 / kPi) * s1;
}

// Small-argument power series for the regular parts of Y_0 and Y_1.
void small_y_regular(double x, double& y0reg, double& y1reg) {
  const double h = 0.5 * x;
  const double lnh = std::log(h);
  const double z2 = -h * h;
  // J_0, J_1 series and psi sums.
  double j0 = 0.0, j1 = 0.0, s0 = 0.0, s1 = 0.0;
  double t0 = 1.0;  // z2^k / (k!)^2
  double t1 = h;    // h * z2^k / (k!(k+1)!)
  double psi_k1 = -kEulerGamma;  // psi(k+1)
  for (int k = 0; k < 40; ++k) {
    const double psi_k2 = psi_k1 + 1.0 / (k + 1);  // psi(k+2)
    j0 += t0;
    j1 += t1;
    s0 += 2.0 * psi_k1 * t0;
    s1 += (psi_k1 + psi_k2) * t1;
    if (std::abs(t0) < 1e-18 && std::abs(t1) < 1e-18) break;
    t0 *= z2 / ((k + 1.0) * (k + 1.0));
    t1 *= z2 / ((k + 1.0) * (k + 2.0));
    psi_k1 = psi_k2;
  }
  // Y_0 = (2/pi) ln(x/2) J_0 - (1/pi) s0; subtract (2/pi) ln x.
  y0reg = (2.0 / kPi) * (lnh * j0 - std::log(x)) - s0 / kPi;
  y1reg = (2.0 / kPi) * lnh * j1 - s1 / kPi;
}

void check_order(int n) {
  if (n > kMaxCylinderOrder || n < -kMaxCylinderOrder) {
    throw RangeError("cylinder order " + std::to_string(n) + " exceeds cap");
  }
}

double j_series(int n, double x) {
  // n >= 0; ascending series, first term via lgamma to avoid overflow.
  if (x == 0.0) return n == 0 ? 1.0 : 0.0;
  const double h = 0.5 * x;
  double term = std::exp(n * std::log(h) - std::lgamma(n + 1.0));
  double sum = term;
  const double z2 = -h * h;
  for (int k = 1; k < 300; ++k) {
    term *= z2 / (static_cast<double>(k) * (n + k));
    sum += term;
    if (std::abs(term) < 1e-17 * std::abs(sum)) break;
  }
  return sum;
}

}  // namespace

void bessel_j_sequence(int nmax, double x, std::span<double> out) {
  if (x < 0.0) throw DomainError("bessel_j_sequence: negative argument");
  if (nmax < 0 || static_cast<int>(out.size()) < nmax + 1) {
    throw ShapeError("bessel_j_sequence: output span too short");
  }
  if (x == 0.0) {
    out[0] = 1.0;
    for (int i = 1; i <= nmax; ++i) out[i] = 0.0;
    return;
  }
  if (x < kAsymptoticThreshold) {
    miller_j(nmax, x, out.data());
    return;
  }
  double y0, y1;
  asymptotic_jy(0, x, out[0], y0);
  if (nmax == 0) return;
  asymptotic_jy(1, x, out[1], y1);
  const int up = std::min(nmax, static_cast<int>(x));
  for (int k = 1; k < up; ++k) out[k + 1] = (2.0 * k / x) * out[k] - out[k - 1];
  if (up >= nmax) return;
  // Orders beyond x: Miller ratios scaled to the last upward value.
  const int start = nmax + 30 + static_cast<int>(std::ceil(3.0 * std::cbrt(x) * 2.0));
  double jp = 0.0, jk = 1e-300;
  std::vector<double> tmp(nmax + 1, 0.0);
  for (int k = start; k > up; --k) {
    const double jm = (2.0 * k / x) * jk - jp;
    jp = jk;
    jk = jm;
    if (k - 1 <= nmax) tmp[k - 1] = jk;
    if (std::abs(jk) > kRescale) {
      jk /= kRescale;
      jp /= kRescale;
      for (int i = k - 1; i <= nmax; ++i) tmp[i] /= kRescale;
    }
  }
  const double scale = out[up] / tmp[up];
  for (int i = up + 1; i <= nmax; ++i) out[i] = tmp[i] * scale;
}

void bessel_jy_sequence(int nmax, double x, std::span<double> j, std::span<double> y) {
  if (!(x > 0.0)) throw DomainError("bessel_jy_sequence: argument must be positive");
  const int n1 = std::max(nmax, 1);
  if (static_cast<int>(j.size()) < nmax + 1 || static_cast<int>(y.size()) < nmax + 1) {
    throw ShapeError("bessel_jy_sequence: output span too short");
  }
  double y0, y1;
  if (x < kAsymptoticThreshold) {
    const int start = miller_start(n1, x);
    std::vector<double> jj(start + 2, 0.0);
    miller_j(start + 1, x, jj.data());
    for (int i = 0; i <= nmax; ++i) j[i] = jj[i];
    if (x < 0.5) {
      double y0r, y1r;
      small_y_regular(x, y0r, y1r);
      y0 = y0r + (2.0 / kPi) * std::log(x);
      y1 = y1r - 2.0 / (kPi * x);
    } else {
      neumann_y01(x, jj, y0, y1);
    }
  } else {
    bessel_j_sequence(nmax, x, j);
    double jt;
    asymptotic_jy(0, x, jt, y0);
    asymptotic_jy(1, x, jt, y1);
  }
  y[0] = y0;
  if (nmax >= 1) y[1] = y1;
  for (int k = 1; k < nmax; ++k) {
    y[k + 1] = (2.0 * k / x) * y[k] - y[k - 1];
    if (!std::isfinite(y[k + 1])) throw RangeError("Y_n overflow in upward recurrence");
  }
}

void bessel_y_sequence(int nmax, double x, std::span<double> out) {
  std::vector<double> j(nmax + 1);
  bessel_jy_sequence(nmax, x, j, out);
}

Hankel01 hankel01(double x) {
  if (!(x > 0.0)) throw DomainError("hankel01: argument must be positive");
  double j0, j1, y0, y1;
  if (x >= kAsymptoticThreshold) {
    asymptotic_jy(0, x, j0, y0);
    asymptotic_jy(1, x, j1, y1);
  } else {
    const int start = miller_start(1, x);
    std::vector<double> jj(start + 2, 0.0);
    miller_j(start + 1, x, jj.data());
    j0 = jj[0];
    j1 = jj[1];
    if (x < 0.5) {
      double y0r, y1r;
      small_y_regular(x, y0r, y1r);
      y0 = y0r + (2.0 / kPi) * std::log(x);
      y1 = y1r - 2.0 / (kPi * x);
    } else {
      neumann_y01(x, jj, y0, y1);
    }
  }
  return {cdouble(j0, y0), cdouble(j1, y1)};
}

double y0_regular(double x) {
  if (!(x > 0.0)) throw DomainError("y0_regular: argument must be positive");
  if (x < 0.5) {
    double a, b;
    small_y_regular(x, a, b);
    return a;
  }
  return hankel01(x).h0.imag() - (2.0 / kPi) * std::log(x);
}

double y1_regular(double x) {
  if (!(x > 0.0)) throw DomainError("y1_regular: argument must be positive");
  if (x < 0.5) {
    double a, b;
    small_y_regular(x, a, b);
    return b;
  }
  return hankel01(x).h1.imag() + 2.0 / (kPi * x);
}

namespace {

bool use_j_series(int an, double x) { return x < 1.0 || 0.25 * x * x < an + 1.0; }

// No cap check; orders up to kMaxCylinderOrder + 1 reach here.
cdouble cylinder_impl(CylinderKind kind, int n, double x) {
  const int an = std::abs(n);
  const double refl = (n < 0 && (an % 2 == 1)) ? -1.0 : 1.0;
  if (kind == CylinderKind::J) {
    if (x < 0.0) throw DomainError("J_n: negative argument");
    if (use_j_series(an, x)) return refl * j_series(an, x);
    std::vector<double> j(an + 1);
    bessel_j_sequence(an, x, j);
    return refl * j[an];
  }
  if (!(x > 0.0)) throw DomainError("Y_n/H1_n: argument must be positive");
  std::vector<double> j(an + 1), y(an + 1);
  bessel_jy_sequence(an, x, j, y);
  if (kind == CylinderKind::Y) return refl * y[an];
  const double jv = use_j_series(an, x) ? j_series(an, x) : j[an];
  return refl * cdouble(jv, y[an]);
}

}  // namespace

cdouble cylinder(CylinderKind kind, int n, double x) {
  check_order(n);
  return cylinder_impl(kind, n, x);
}

cdouble cylinder_derivative(CylinderKind kind, int n, double x) {
  check_order(n);
  return 0.5 * (cylinder_impl(kind, n - 1, x) - cylinder_impl(kind, n + 1, x));
}

double incomplete_gamma_upper(int n, double x) {
  if (n < 1) throw DomainError("incomplete_gamma_upper: order must be >= 1");
  if (!(x > 0.0)) throw DomainError("incomplete_gamma_upper: argument must be positive");
  // (n-1)! sum_{k<n} x^k/k! = sum_{k<n} (n-1)!/k! x^k, accumulated by Horner.
  double acc = 1.0;
  for (int k = n - 1; k >= 1; --k) acc = 1.0 + acc * x / k;
  double fact = 1.0;
  for (int k = 2; k < n; ++k) fact *= k;
  return fact * acc * std::exp(-x);
}

cdouble graf_exact(CylinderKind kind, int m, const Vec2& x, const Vec2& y, int sign) {
  const Vec2 d = x - y;
  const double s = sign >= 0 ? 1.0 : -1.0;
  return cylinder(kind, m, d.norm()) * std::exp(kI * (s * m * polar_angle(d)));
}

cdouble graf_partial_sum(CylinderKind kind, int m, int p, const Vec2& x, const Vec2& y, int sign) {
  if (p < 0) throw DomainError("graf_partial_sum: negative truncation");
  const double rx = x.norm();
  const double ry = y.norm();
  if (kind != CylinderKind::J && !(ry < rx)) {
    throw DomainError("graf_partial_sum: requires |y| < |x|");
  }
  const double s = sign >= 0 ? 1.0 : -1.0;
  const double tx = polar_angle(x);
  const double ty = polar_angle(y);
  cdouble sum = 0.0;
  for (int n = -p; n <= p; ++n) {
    const cdouble b = cylinder(kind, m + n, rx) * std::exp(kI * (s * (m + n) * tx));
    const cdouble jn = cylinder(CylinderKind::J, n, ry) * std::exp(kI * (-s * n * ty));
    sum += b * jn;
  }
  return sum;
}

}  // namespace pfmbem
