#pragma once

#include <optional>
#include <span>
#include <vector>

#include "pfmbem/geometry.hpp"
#include "pfmbem/specfun.hpp"

namespace pfmbem {

struct WaveContext {
  double omega = 0.0;
  double k = 0.0;   // matrix wavenumber
  double k1 = 0.0;  // scatterer wavenumber
  double theta = 0.0;
  Vec2 d{1.0, 0.0};
  cdouble alpha{1.0, 0.0};
  double beta = 0.0;
  double varrho = 1.0;
  double eta = 1.0;
  double H = 0.0;
};

/// Context for matrix wavenumber k. eta defaults to k.
WaveContext make_context(double k, double theta, double H, const Material& matrix, const Material& scatterer,
                         std::optional<double> eta = std::nullopt);

/// Distance of kH(1 +- sin theta) from the nearest nonzero multiple of 2 pi, relative to 2 pi.
double resonance_distance(double k, double H, double theta);
void check_resonance(double k, double H, double theta);

cdouble fundamental_solution(double k, const Vec2& x, const Vec2& y);

struct KernelTriple {
  cdouble dny;     // dPhi/dnu(y)
  cdouble dnx;     // dPhi/dnu(x)
  cdouble dnxdny;  // d2Phi/dnu(x)dnu(y)
};

KernelTriple kernel_normal_derivatives(double k, const Vec2& x, const Vec2& y, const Vec2& nx, const Vec2& ny);

struct LatticeSumConfig {
  int q = 1;
  std::vector<double> nodes;    // u_i
  std::vector<double> weights;  // omega_i
  double omega_cut = 0.0;

  int P() const { return static_cast<int>(nodes.size()); }
};

/// Sum over m in [-m_max, m_max] of alpha^m H_n(k|delta - m h|) e^{sign i n theta}.
/// With cesaro set, returns the mean of the symmetric partial sums S_0..S_{m_max}.
cdouble direct_periodic_sum(int n, int sign, const Vec2& delta, const WaveContext& ctx, double H, long m_max,
                            bool cesaro = false);

/// Full lattice sum by direct terms |m| <= q plus the two Fourier tails.
/// Terms with |m| <= skip are left out (skip = -1 keeps all).
cdouble accelerated_periodic_sum(int n, int sign, const Vec2& delta, const WaveContext& ctx, double H,
                                 const LatticeSumConfig& cfg, int skip = -1);

/// All orders n in [-nmax, nmax] (sign +) at once; out[n + nmax].
void lattice_sum_table(int nmax, const Vec2& delta, const WaveContext& ctx, double H, const LatticeSumConfig& cfg,
                       int skip, std::span<cdouble> out);

/// Tail remainder estimate 4 e^{kL} (sqrt2+sqrt3)^n omega^{n-1} e^{-qH omega} / (qH).
double tail_remainder_bound(int n, int q, double k, double L, double H, double omega);

/// Smallest q with tail_remainder_bound <= epsilon and q >= 2(n-1)/(H omega).
int select_q(int n, double epsilon, double k, double L, double H, double omega_cut);

/// Closed-form q estimate reading the printed formula as n ln((sqrt2+sqrt3) omega).
int select_q_closed_form(int n, double epsilon, double k, double L, double H, double omega_cut);

/// Composite Gauss rule on [0, omega_cut], graded toward u = 0 in the variable s = sqrt(u).
/// nmax and L size q and omega_cut for every order up to nmax; beta sets the grading
/// needed near a resonance. A positive q_fixed overrides the selected q.
LatticeSumConfig build_quadrature(double H, double k, double epsilon, int nmax = 0, double L = 0.0,
                                  double beta = 0.0, int q_fixed = 0);

/// Integrand of the upper tail on the contour, for the remainder study:
/// printed = true uses 1/(u - ik) as printed, otherwise the exact Jacobian 1/t.
cdouble upper_tail_integrand(int n, double u, const Vec2& delta, double k, double beta, double H, int q,
                             bool printed);

}  // namespace pfmbem
