#pragma once

#include <complex>
#include <span>

#include <Eigen/Core>

namespace pfmbem {

using cdouble = std::complex<double>;
using Vec2 = Eigen::Vector2d;

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kEulerGamma = 0.57721566490153286061;
inline constexpr cdouble kI{0.0, 1.0};

/// Largest |order| accepted by the public cylinder-function entry points.
inline constexpr int kMaxCylinderOrder = 200;

enum class CylinderKind { J, Y, H1 };

/// Cylinder function B_n(x) for B in {J, Y, H1}. Negative orders follow
/// B_{-n} = (-1)^n B_n. Throws DomainError for x <= 0 with Y/H1 (x < 0 for J)
/// and RangeError for |n| above the order cap or a non-finite result.
cdouble cylinder(CylinderKind kind, int n, double x);

/// (B_{n-1}(x) - B_{n+1}(x)) / 2.
cdouble cylinder_derivative(CylinderKind kind, int n, double x);

/// J_0(x) .. J_nmax(x) written into out[0..nmax]. Valid for any x >= 0.
void bessel_j_sequence(int nmax, double x, std::span<double> out);

/// Y_0(x) .. Y_nmax(x) by upward recurrence. Requires x > 0.
void bessel_y_sequence(int nmax, double x, std::span<double> out);

/// Both Bessel sequences for the same argument; cheaper than two calls.
void bessel_jy_sequence(int nmax, double x, std::span<double> j, std::span<double> y);

struct Hankel01 {
  cdouble h0;
  cdouble h1;
};

/// H^(1)_0(x) and H^(1)_1(x) for x > 0; the hot path of every kernel evaluation.
Hankel01 hankel01(double x);

/// Regular parts of Y_0 and Y_1 near the origin:
///   y0_reg(x) = Y_0(x) - (2/pi) ln(x),   y1_reg(x) = Y_1(x) + 2/(pi x).
/// Both are evaluated without cancellation for small x.
double y0_regular(double x);
double y1_regular(double x);

/// Upper incomplete gamma function for positive integer order, via the finite
/// sum Gamma(n, x) = (n-1)! e^{-x} sum_{k<n} x^k / k!.
double incomplete_gamma_upper(int n, double x);

/// Angle of a 2-vector measured from the x axis; zero for the zero vector.
inline double polar_angle(const Vec2& v) {
  return (v.x() == 0.0 && v.y() == 0.0) ? 0.0 : std::atan2(v.y(), v.x());
}

/// Left side of Graf's addition theorem, B_m(|x-y|) e^{+-i m theta_{x-y}}.
cdouble graf_exact(CylinderKind kind, int m, const Vec2& x, const Vec2& y, int sign);

/// Partial sum over n in [-p, p] of
///   B_{m+n}(|x|) e^{+-i(m+n) theta_x} J_n(|y|) e^{-+i n theta_y}.
/// sign is +1 or -1. Requires |y| < |x| unless kind is J.
cdouble graf_partial_sum(CylinderKind kind, int m, int p, const Vec2& x, const Vec2& y, int sign);

}  // namespace pfmbem
