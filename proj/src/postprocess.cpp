#include "pfmbem/postprocess.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

#include "pfmbem/element_integrals.hpp"
#include "pfmbem/errors.hpp"
#include "pfmbem/parallel.hpp"
#include "pfmbem/quadrature.hpp"

namespace pfmbem {

FieldEvaluator::FieldEvaluator(const FundamentalBlock& block, const WaveContext& ctx, const TailChannel& tail,
                               const Eigen::VectorXcd& psi)
    : block_(block), ctx_(ctx), tail_(tail), psi_(psi) {
  if (psi.size() != block.unknowns()) throw ShapeError("FieldEvaluator: density size does not match the block");
  for (int s = 0; s < block.M(); ++s) moments_.push_back(tail.p2m[s] * psi.segment(2 * block.N * s, 2 * block.N));
}

bool FieldEvaluator::inside(const Vec2& x0) const {
  const Vec2 x = x0 - std::floor(x0.y() / block_.H) * block_.h();
  for (const DiscretizedBoundary& b : block_.boundaries) {
    for (int m = -1; m <= 1; ++m) {
      const Vec2 y = x - m * block_.h();
      if ((y - b.center).norm() > 1.01 * b.circumradius) continue;
      bool in = false;
      const std::size_t n = b.elements.size();
      for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
        const Vec2& p = b.elements[i].midpoint;
        const Vec2& q = b.elements[j].midpoint;
        if ((p.y() > y.y()) != (q.y() > y.y()) &&
            y.x() < (q.x() - p.x()) * (y.y() - p.y()) / (q.y() - p.y()) + p.x())
          in = !in;
      }
      if (in) return true;
    }
  }
  return false;
}

std::vector<cdouble> FieldEvaluator::tail_table(const Vec2& d) const {
  const TranslationKey key = translation_key(d, tail_.quantum);
  {
    const std::lock_guard<std::mutex> lock(mutex_);
    const auto it = tables_.find(key);
    if (it != tables_.end()) return it->second;
  }
  const Vec2 dq(static_cast<double>(key.first) * tail_.quantum, static_cast<double>(key.second) * tail_.quantum);
  std::vector<cdouble> z(2 * tail_.p + 3);
  lattice_sum_table(tail_.p + 1, dq, ctx_, block_.H, tail_.cfg, 1, z);
  const std::lock_guard<std::mutex> lock(mutex_);
  return tables_.emplace(key, std::move(z)).first->second;
}

cdouble FieldEvaluator::incident(const Vec2& x) const { return std::exp(kI * ctx_.k * ctx_.d.dot(x)); }

std::pair<cdouble, cdouble> FieldEvaluator::scattered(const Vec2& x, const Vec2& dir) const {
  const double H = block_.H;
  const long j = static_cast<long>(std::floor(x.y() / H));
  const Vec2 xf = x - static_cast<double>(j) * block_.h();
  if (inside(xf)) throw DomainError("eval_scattered_field: point inside a scatterer");
  const cdouble phase = std::exp(kI * (static_cast<double>(j) * ctx_.beta));
  const int N = block_.N;
  const cdouble ie = kI * ctx_.eta;
  cdouble val = 0.0, der = 0.0;
  const auto images = near_images(ctx_);
  const int p = tail_.p;
  const cdouble nu(dir.x(), dir.y());
  for (int s = 0; s < block_.M(); ++s) {
    const DiscretizedBoundary& b = block_.boundaries[s];
    const auto phi = psi_.segment(2 * N * s, N);
    const auto dens = psi_.segment(2 * N * s + N, N);
    for (const auto& [shift, w] : images) {
      for (int e = 0; e < N; ++e) {
        const ElementIntegrals g = integrate_element(ctx_.k, b.elements[e], shift, xf, dir, false);
        val += w * (g.D * phi(e) - ie * g.S * dens(e));
        der += w * (g.T * phi(e) - ie * g.K * dens(e));
      }
    }
    const std::vector<cdouble> z = tail_table(xf - b.center);
    const Eigen::VectorXcd& M = moments_[s];
    for (int n = -p; n <= p; ++n) {
      val += 0.25 * kI * z[n + p + 1] * M(n + p);
      der += 0.25 * kI * 0.5 * ctx_.k * (nu * z[n + p] - std::conj(nu) * z[n + p + 2]) * M(n + p);
    }
  }
  return {phase * val, phase * der};
}

cdouble eval_scattered_field(const Vec2& x, const Eigen::VectorXcd& psi, const FundamentalBlock& block,
                             const WaveContext& ctx, const TailChannel& tail) {
  return FieldEvaluator(block, ctx, tail, psi).scattered(x);
}

double compute_etc(const Eigen::VectorXcd& psi, const FundamentalBlock& block, const WaveContext& ctx,
                   const TailChannel& tail, int n_quad, EtcVariant variant) {
  const FieldEvaluator field(block, ctx, tail, psi);
  const int panels = std::max(block.M_H, (std::max(n_quad, 64) + 15) / 16);
  const QuadratureRule q = composite_gauss(16, panels, 0.0, block.H);
  const int n = static_cast<int>(q.nodes.size());
  for (const DiscretizedBoundary& b : block.boundaries)
    if (std::abs(b.center.x() - block.L) <= b.circumradius)
      throw DomainError("compute_etc: exit line crosses a scatterer");
  std::vector<double> f(n);
  parallel_for(n, [&](int i) {
    const Vec2 x(block.L, q.nodes[i]);
    const cdouble du = field.scattered(x, Vec2(1.0, 0.0)).second + kI * ctx.k * ctx.d.x() * field.incident(x);
    f[i] = variant == EtcVariant::modulus ? std::abs(du) : std::norm(du);
  });
  double sum = 0.0;
  for (int i = 0; i < n; ++i) sum += q.weights[i] * f[i];
  const double norm = variant == EtcVariant::modulus ? ctx.k * block.H : ctx.k * ctx.k * block.H;
  return sum / norm;
}

std::vector<Gap> extract_gaps(const std::vector<Sample>& samples, double threshold) {
  std::vector<Gap> gaps;
  const std::size_t n = samples.size();
  auto below = [&](std::size_t i) { return std::isfinite(samples[i].etc) && samples[i].etc < threshold; };
  auto cross = [&](std::size_t i, std::size_t j) {
    const double a = samples[i].etc, b = samples[j].etc;
    if (!std::isfinite(a) || !std::isfinite(b) || a == b) return 0.5 * (samples[i].nu + samples[j].nu);
    return samples[i].nu + (threshold - a) / (b - a) * (samples[j].nu - samples[i].nu);
  };
  std::size_t i = 0;
  while (i < n) {
    if (!below(i)) {
      ++i;
      continue;
    }
    std::size_t j = i;
    while (j + 1 < n && below(j + 1)) ++j;
    const double lo = i == 0 ? samples[0].nu : cross(i - 1, i);
    const double hi = j + 1 == n ? samples[j].nu : cross(j, j + 1);
    if (lo < hi) gaps.push_back({lo, hi});
    i = j + 1;
  }
  return gaps;
}

double avoid_resonance(double nu, double a, double H, double theta) {
  const double k = 2.0 * kPi * nu / a;
  return resonance_distance(k, H, theta) < 1e-9 ? nu * (1.0 + 1e-6) : nu;
}

SweepResult sweep(const std::function<Sample(double)>& f, const SweepOptions& opt) {
  if (!(opt.step > 0.0) || !(opt.nu_max >= opt.nu_min) || !(opt.nu_min > 0.0))
    throw ConfigError("sweep: empty or invalid frequency grid");
  const int count = static_cast<int>(std::floor((opt.nu_max - opt.nu_min) / opt.step + 1e-9)) + 1;
  std::vector<double> grid(count);
  for (int i = 0; i < count; ++i) grid[i] = opt.nu_min + i * opt.step;

  auto evaluate = [&](const std::vector<double>& nus) {
    std::vector<Sample> out(nus.size());
    parallel_for(static_cast<int>(nus.size()), [&](int i) {
      try {
        out[i] = f(nus[i]);
      } catch (const std::exception& e) {
        out[i].nu = nus[i];
        out[i].etc = std::numeric_limits<double>::quiet_NaN();
        out[i].error = e.what();
      }
    });
    return out;
  };

  SweepResult res;
  res.threshold = opt.threshold;
  res.samples = evaluate(grid);
  std::vector<std::pair<Sample, Sample>> brackets;
  for (std::size_t i = 0; i + 1 < res.samples.size(); ++i) {
    const Sample& a = res.samples[i];
    const Sample& b = res.samples[i + 1];
    if (std::isfinite(a.etc) && std::isfinite(b.etc) && ((a.etc < opt.threshold) != (b.etc < opt.threshold)))
      brackets.emplace_back(a, b);
  }
  for (int step = 0; step < opt.refine_steps && !brackets.empty(); ++step) {
    std::vector<double> mids;
    for (const auto& [a, b] : brackets) mids.push_back(0.5 * (a.nu + b.nu));
    const std::vector<Sample> got = evaluate(mids);
    for (std::size_t i = 0; i < brackets.size(); ++i) {
      res.samples.push_back(got[i]);
      auto& [a, b] = brackets[i];
      if (!std::isfinite(got[i].etc)) continue;
      if ((got[i].etc < opt.threshold) == (a.etc < opt.threshold)) {
        a = got[i];
      } else {
        b = got[i];
      }
    }
  }
  std::sort(res.samples.begin(), res.samples.end(), [](const Sample& a, const Sample& b) { return a.nu < b.nu; });
  res.gaps = extract_gaps(res.samples, opt.threshold);
  return res;
}

}  // namespace pfmbem
