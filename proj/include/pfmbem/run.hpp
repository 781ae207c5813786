#pragma once

#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "pfmbem/config.hpp"
#include "pfmbem/fmm.hpp"

namespace pfmbem {

/// Geometry shared by every frequency of a run.
struct Problem {
  RunConfig cfg;
  FundamentalBlock block;
  std::optional<Forest> forest;  // fmm path with scatterers only

  explicit Problem(RunConfig c);
  Problem(const Problem&) = delete;
  Problem& operator=(const Problem&) = delete;
};

struct Solution {
  double nu = 0.0;
  WaveContext ctx;
  TailChannel tail;
  Eigen::VectorXcd psi;
  SolveReport report;
};

/// Solves at nu (moved off Rayleigh resonances) along the configured path.
Solution solve_frequency(const Problem& problem, double nu);

/// Solve plus ETC, timed. Errors propagate.
Sample sample_frequency(const Problem& problem, double nu);

SweepResult run_sweep(const Problem& problem);

/// Header nu,etc,iterations,residual,wall_time; shortest round-trip numbers.
std::string samples_to_csv(const std::vector<Sample>& samples);
std::vector<Sample> samples_from_csv(const std::string& text);

/// {"threshold": t, "gaps": [[lo, hi], ...]}
std::string gaps_to_json(const SweepResult& result);

/// ETC against nu with shaded gaps and the threshold line.
std::string sweep_svg(const SweepResult& result);

std::string format_double(double x);

struct Check {
  std::string name;
  bool pass = false;
  std::string detail;
};

/// Dense-versus-FMM, solver-path, lattice-sum and quasi-periodicity checks.
std::vector<Check> verify_checks(const Problem& problem);

/// Runs the configured mode, writing outputs under out_dir. Returns the exit status.
int run(const RunConfig& cfg, const std::filesystem::path& out_dir, std::ostream& log);

}  // namespace pfmbem
