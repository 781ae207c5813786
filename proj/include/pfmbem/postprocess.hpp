#pragma once

#include <functional>
#include <map>
#include <mutex>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "pfmbem/bem_dense.hpp"
#include "pfmbem/solver.hpp"

namespace pfmbem {

enum class EtcVariant { modulus, modulus_squared };

/// Scattered field of solved densities. Points are folded into the strip
/// 0 <= x2 < H with the quasi-periodic phase; images |m| <= 1 are integrated
/// directly and the rest come from the tail multipoles.
class FieldEvaluator {
 public:
  FieldEvaluator(const FundamentalBlock& block, const WaveContext& ctx, const TailChannel& tail,
                 const Eigen::VectorXcd& psi);

  /// Scattered value and its derivative along dir. Throws DomainError inside a scatterer.
  std::pair<cdouble, cdouble> scattered(const Vec2& x, const Vec2& dir) const;
  cdouble scattered(const Vec2& x) const { return scattered(x, Vec2(1.0, 0.0)).first; }
  cdouble incident(const Vec2& x) const;
  cdouble total(const Vec2& x) const { return incident(x) + scattered(x); }

  bool inside(const Vec2& x) const;

 private:
  const FundamentalBlock& block_;
  const WaveContext& ctx_;
  const TailChannel& tail_;
  const Eigen::VectorXcd& psi_;
  std::vector<Eigen::VectorXcd> moments_;
  mutable std::mutex mutex_;
  mutable std::map<TranslationKey, std::vector<cdouble>> tables_;

  std::vector<cdouble> tail_table(const Vec2& d) const;
};

cdouble eval_scattered_field(const Vec2& x, const Eigen::VectorXcd& psi, const FundamentalBlock& block,
                             const WaveContext& ctx, const TailChannel& tail);

/// (1/(kH)) int_0^H |du/dx1(L, x2)| dx2, or the squared variant normalized by (kH) k.
/// Composite 16-point Gauss with at least n_quad nodes and one panel per lattice row.
double compute_etc(const Eigen::VectorXcd& psi, const FundamentalBlock& block, const WaveContext& ctx,
                   const TailChannel& tail, int n_quad = 64, EtcVariant variant = EtcVariant::modulus);

struct Sample {
  double nu = 0.0;
  double etc = 0.0;
  SolveReport solve;
  double wall_time = 0.0;  // whole frequency, seconds
  std::string error;       // empty on success
};

struct Gap {
  double lo;
  double hi;
};

struct SweepResult {
  std::vector<Sample> samples;
  std::vector<Gap> gaps;
  double threshold = 0.03;
};

/// Maximal runs of samples below threshold; interior edges by linear interpolation.
std::vector<Gap> extract_gaps(const std::vector<Sample>& samples, double threshold);

struct SweepOptions {
  double nu_min = 0.05;
  double nu_max = 1.3;
  double step = 0.01;
  int refine_steps = 3;
  double threshold = 0.03;
};

/// Evaluates f on the grid (in parallel), refines every threshold crossing by
/// bisection and extracts gaps. f must be thread-safe; its failures are recorded.
SweepResult sweep(const std::function<Sample(double)>& f, const SweepOptions& opt);

/// Normalized frequency moved by one part in 1e6 when it hits a Rayleigh resonance.
double avoid_resonance(double nu, double a, double H, double theta);

}  // namespace pfmbem
