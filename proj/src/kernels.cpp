#include "pfmbem/kernels.hpp"

#include <algorithm>
#include <cmath>

#include "pfmbem/errors.hpp"
#include "pfmbem/quadrature.hpp"

namespace pfmbem {

namespace {

constexpr double kResonanceTol = 1e-12;
constexpr int kQCap = 40;
constexpr int kPanelNodes = 16;
const double kSqrt2PlusSqrt3 = std::sqrt(2.0) + std::sqrt(3.0);

double two_pi_distance(double x) {
  const double r = x / (2.0 * kPi);
  return std::abs(r - std::round(r));
}

// H_n(kr) e^{i n theta} for n in [-nmax, nmax], accumulated with weight w.
void accumulate_direct(int nmax, const Vec2& x, double k, cdouble w, std::span<cdouble> out,
                       std::vector<double>& jbuf, std::vector<double>& ybuf) {
  const double r = x.norm();
  if (r == 0.0) throw SingularityError("lattice sum: evaluation point on a lattice site");
  bessel_jy_sequence(nmax, k * r, jbuf, ybuf);
  const double th = polar_angle(x);
  const cdouble step = std::exp(kI * th);
  cdouble ph = 1.0;
  for (int n = 0; n <= nmax; ++n) {
    const cdouble h(jbuf[n], ybuf[n]);
    out[nmax + n] += w * h * ph;
    if (n > 0) {
      // H_{-n} e^{-i n theta} = (-1)^n H_n e^{-i n theta}
      const double sgn = (n % 2 == 0) ? 1.0 : -1.0;
      out[nmax - n] += w * sgn * h * std::conj(ph);
    }
    ph *= step;
  }
}

// mu + t and mu - t without cancellation; their product is -k^2.
void sum_difference(cdouble mu, cdouble t, double k, cdouble& plus, cdouble& minus) {
  plus = mu + t;
  minus = mu - t;
  if (std::abs(plus) >= std::abs(minus)) {
    minus = -k * k / plus;
  } else {
    plus = -k * k / minus;
  }
}

void accumulate_powers(int nmax, cdouble base, cdouble g, cdouble ginv, std::span<cdouble> out) {
  cdouble a = base;
  cdouble b = base;
  out[nmax] += base;
  for (int n = 1; n <= nmax; ++n) {
    a *= g;
    b *= ginv;
    out[nmax + n] += a;
    out[nmax - n] += b;
  }
}

void accumulate_tails(int nmax, const Vec2& X, const WaveContext& ctx, double H, const LatticeSumConfig& cfg,
                      std::span<cdouble> out) {
  const double k = ctx.k;
  const double beta = ctx.beta;
  const int q = cfg.q;
  std::vector<cdouble> acc(2 * nmax + 1, 0.0);
  const cdouble e_up_phase = std::exp(kI * (q * beta));
  const cdouble e_lo_phase = std::exp(-kI * (q * beta));
  for (int i = 0; i < cfg.P(); ++i) {
    const double u = cfg.nodes[i];
    const double s = std::sqrt(u);
    const cdouble root = std::sqrt(cdouble(u, -2.0 * k));  // sqrt(s^2 - 2ik)
    const cdouble tau = s * root;
    const cdouble mu(u, -k);
    const cdouble wt = cfg.weights[i] / tau;
    const cdouble den_up = std::exp(H * mu - kI * beta) - 1.0;
    const cdouble den_lo = std::exp(H * mu + kI * beta) - 1.0;
    const cdouble dec_up = std::exp((X.y() - q * H) * mu);
    const cdouble dec_lo = std::exp(-(X.y() + q * H) * mu);
    for (int sgn : {1, -1}) {
      const cdouble t = double(sgn) * tau;
      cdouble plus, minus;
      sum_difference(mu, t, k, plus, minus);
      const cdouble osc = std::exp(kI * t * X.x());
      const cdouble base_up = wt * e_up_phase * osc * dec_up / den_up;
      const cdouble base_lo = wt * e_lo_phase * osc * dec_lo / den_lo;
      accumulate_powers(nmax, base_up, -kI * plus / k, -kI * minus / k, acc);
      accumulate_powers(nmax, base_lo, kI * minus / k, kI * plus / k, acc);
    }
  }
  const cdouble pref = 1.0 / (kI * kPi);
  for (int n = 0; n <= 2 * nmax; ++n) out[n] += pref * acc[n];
}

}  // namespace

WaveContext make_context(double k, double theta, double H, const Material& matrix, const Material& scatterer,
                         std::optional<double> eta) {
  if (!(k > 0.0)) throw DomainError("make_context: wavenumber must be positive");
  if (!(matrix.rho > 0.0 && matrix.c > 0.0 && scatterer.rho > 0.0 && scatterer.c > 0.0)) {
    throw DomainError("make_context: material parameters must be positive");
  }
  WaveContext ctx;
  ctx.k = k;
  ctx.omega = k * matrix.c;
  ctx.k1 = ctx.omega / scatterer.c;
  ctx.theta = theta;
  ctx.d = Vec2(std::cos(theta), std::sin(theta));
  ctx.H = H;
  ctx.beta = k * H * std::sin(theta);
  ctx.alpha = std::exp(kI * ctx.beta);
  ctx.varrho = matrix.rho / scatterer.rho;
  ctx.eta = eta.value_or(k);
  if (ctx.eta == 0.0) throw DomainError("make_context: eta must be nonzero");
  return ctx;
}

double resonance_distance(double k, double H, double theta) {
  const double s = std::sin(theta);
  return std::min(two_pi_distance(k * H * (1.0 + s)), two_pi_distance(k * H * (1.0 - s)));
}

void check_resonance(double k, double H, double theta) {
  if (resonance_distance(k, H, theta) < kResonanceTol) {
    throw ResonanceError("kH(1 +- sin theta) is a multiple of 2 pi");
  }
}

cdouble fundamental_solution(double k, const Vec2& x, const Vec2& y) {
  const double r = (x - y).norm();
  if (r == 0.0) throw SingularityError("fundamental_solution: x == y");
  return 0.25 * kI * hankel01(k * r).h0;
}

KernelTriple kernel_normal_derivatives(double k, const Vec2& x, const Vec2& y, const Vec2& nx, const Vec2& ny) {
  const Vec2 d = x - y;
  const double r = d.norm();
  if (r == 0.0) throw SingularityError("kernel_normal_derivatives: x == y");
  const Vec2 rh = d / r;
  const Hankel01 h = hankel01(k * r);
  const cdouble d1 = -0.25 * kI * k * h.h1;
  const cdouble d2 = -0.25 * kI * k * k * (h.h0 - h.h1 / (k * r));
  const double cx = rh.dot(nx);
  const double cy = rh.dot(ny);
  KernelTriple t;
  t.dny = -d1 * cy;
  t.dnx = d1 * cx;
  t.dnxdny = -(d2 * cx * cy + (d1 / r) * (nx.dot(ny) - cx * cy));
  return t;
}

cdouble direct_periodic_sum(int n, int sign, const Vec2& delta, const WaveContext& ctx, double H, long m_max,
                            bool cesaro) {
  const int order = sign >= 0 ? n : -n;
  const double refl = (sign < 0 && n % 2 != 0) ? -1.0 : 1.0;
  auto term = [&](long m) {
    const Vec2 x = delta - double(m) * Vec2(0.0, H);
    const double r = x.norm();
    if (r == 0.0) throw SingularityError("direct_periodic_sum: lattice point");
    const cdouble phase = std::exp(kI * (double(m) * ctx.beta + order * polar_angle(x)));
    return phase * cylinder(CylinderKind::H1, order, ctx.k * r);
  };
  cdouble partial = term(0);
  cdouble mean = partial;
  for (long m = 1; m <= m_max; ++m) {
    partial += term(m) + term(-m);
    mean += partial;
  }
  return refl * (cesaro ? mean / double(m_max + 1) : partial);
}

void lattice_sum_table(int nmax, const Vec2& delta, const WaveContext& ctx, double H, const LatticeSumConfig& cfg,
                       int skip, std::span<cdouble> out) {
  check_resonance(ctx.k, H, ctx.theta);
  if (skip > cfg.q) throw DomainError("lattice_sum_table: skip exceeds the direct range q");
  if (std::abs(delta.y()) >= H) throw DomainError("lattice_sum_table: |delta_y| must be below H");
  std::fill(out.begin(), out.end(), cdouble(0.0));
  std::vector<double> jb(nmax + 1), yb(nmax + 1);
  for (int m = -cfg.q; m <= cfg.q; ++m) {
    if (std::abs(m) <= skip) continue;
    accumulate_direct(nmax, delta - double(m) * Vec2(0.0, H), ctx.k, std::exp(kI * (m * ctx.beta)), out, jb, yb);
  }
  accumulate_tails(nmax, delta, ctx, H, cfg, out);
  for (const cdouble& v : out) {
    if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) throw RangeError("lattice_sum_table: overflow");
  }
}

cdouble accelerated_periodic_sum(int n, int sign, const Vec2& delta, const WaveContext& ctx, double H,
                                 const LatticeSumConfig& cfg, int skip) {
  const int nmax = std::abs(n);
  if (nmax > kMaxCylinderOrder) throw RangeError("accelerated_periodic_sum: order above cap");
  std::vector<cdouble> table(2 * nmax + 1);
  lattice_sum_table(nmax, delta, ctx, H, cfg, skip, table);
  const int order = sign >= 0 ? n : -n;
  const double refl = (sign < 0 && n % 2 != 0) ? -1.0 : 1.0;
  return refl * table[nmax + order];
}

double tail_remainder_bound(int n, int q, double k, double L, double H, double omega) {
  const double log_b = std::log(4.0) + k * L + n * std::log(kSqrt2PlusSqrt3) + (n - 1) * std::log(omega) -
                       q * H * omega - std::log(q * H);
  return std::exp(log_b);
}

int select_q(int n, double epsilon, double k, double L, double H, double omega_cut) {
  int q = std::max(1, static_cast<int>(std::ceil(2.0 * (n - 1) / (H * omega_cut) - 1e-12)));
  while (tail_remainder_bound(n, q, k, L, H, omega_cut) > epsilon) ++q;
  return q;
}

int select_q_closed_form(int n, double epsilon, double k, double L, double H, double omega_cut) {
  const double a = (std::log(4.0) + k * L + n * std::log(kSqrt2PlusSqrt3 * omega_cut) - std::log(epsilon)) /
                   (H * omega_cut);
  const double b = (2.0 * n - 2.0) / (H * omega_cut);
  return std::max(static_cast<int>(std::floor(a)) + 1, static_cast<int>(std::floor(b)) + 1);
}

LatticeSumConfig build_quadrature(double H, double k, double epsilon, int nmax, double L, double beta,
                                  int q_fixed) {
  if (!(epsilon > 0.0)) throw DomainError("build_quadrature: epsilon must be positive");
  LatticeSumConfig cfg;
  double omega = std::max(std::log(2.0) / H, k);
  cfg.q = q_fixed > 0 ? q_fixed : std::min(select_q(nmax, epsilon, k, L, H, omega), kQCap);
  const double target = 0.1 * epsilon;
  while (omega < (nmax - 1) / (cfg.q * H) || tail_remainder_bound(nmax, cfg.q, k, L, H, omega) > target) omega *= 1.1;
  cfg.omega_cut = omega;

  // Grading in s = sqrt(u): the first panel resolves both the u^{-1/2} endpoint and,
  // near a resonance, the pole-like peak of width sqrt(delta/H) in s.
  const double delta = 2.0 * kPi * std::min(two_pi_distance(k * H + beta), two_pi_distance(k * H - beta));
  double s_min = std::sqrt(std::min(k, 1.0 / H) / 8.0);
  if (delta > 0.0) s_min = std::min(s_min, 0.25 * std::sqrt(delta / H));
  const double s_max = std::sqrt(omega);
  const double du_max = 6.0 / (L + (cfg.q + 1) * H);
  std::vector<double> edges{s_max};
  while (edges.back() > s_min) edges.push_back(0.5 * edges.back());
  edges.push_back(0.0);
  std::reverse(edges.begin(), edges.end());
  for (std::size_t j = 0; j + 1 < edges.size(); ++j) {
    const double s0 = edges[j];
    const double s1 = edges[j + 1];
    const int pieces = std::max(1, static_cast<int>(std::ceil((s1 * s1 - s0 * s0) / du_max)));
    const QuadratureRule r = composite_gauss(kPanelNodes, pieces, s0, s1);
    for (std::size_t i = 0; i < r.nodes.size(); ++i) {
      const double s = r.nodes[i];
      cfg.nodes.push_back(s * s);
      cfg.weights.push_back(2.0 * s * r.weights[i]);
    }
  }
  return cfg;
}

cdouble upper_tail_integrand(int n, double u, const Vec2& delta, double k, double beta, double H, int q,
                             bool printed) {
  const cdouble mu(u, -k);
  const cdouble tau = std::sqrt(u) * std::sqrt(cdouble(u, -2.0 * k));
  const cdouble num = std::exp(kI * (q * beta) + kI * delta.x() * tau + (delta.y() - q * H) * mu) *
                      std::pow(mu + tau, n);
  const cdouble den = (printed ? mu : tau) * (std::exp(H * mu - kI * beta) - 1.0);
  return num / den;
}

}  // namespace pfmbem
