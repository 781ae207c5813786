#pragma once

#include <filesystem>
#include <optional>
#include <string>

#include "pfmbem/geometry.hpp"
#include "pfmbem/kernels.hpp"
#include "pfmbem/postprocess.hpp"
#include "pfmbem/solver.hpp"

namespace pfmbem {

enum class Mode { sweep, single_frequency, verify };
enum class SolverPath { fmm, dense };

struct RunConfig {
  Mode mode = Mode::sweep;
  Material matrix;
  Material scatterer;
  Lattice lattice = Lattice::square;
  double a = 0.0;
  double filling_fraction = 0.0;  // 0 gives an empty block
  int M_H = 0;
  int M_L = 0;
  Shape shape = Shape::circle;
  int N = 64;
  double theta = 0.0;  // radians
  std::optional<double> eta;
  int p = 10;
  double epsilon = 1e-12;

  SweepOptions sweep;
  std::optional<double> nu;  // single_frequency
  EtcVariant etc_variant = EtcVariant::modulus;
  int etc_points = 64;

  GmresOptions gmres;
  bool preconditioner = true;
  SolverPath solver = SolverPath::fmm;
  int leaf_capacity = 32;
  int threads = 0;  // 0 keeps the hardware default

  int probe_count = 16;
  std::string samples_csv = "samples.csv";
  std::string gaps_json = "gaps.json";
  std::string plot_svg = "etc.svg";  // empty disables the plot
  std::string probes_csv = "probes.csv";
  std::string verify_report = "verify.txt";

  int M() const { return filling_fraction > 0.0 ? M_H * M_L : 0; }
};

/// JSON document with flat scalar keys and one {rho, c} table per material.
/// Throws ParseError naming the offending key.
RunConfig parse_config(const std::string& text);
RunConfig load_config(const std::filesystem::path& path);

Mode parse_mode(const std::string& name);
std::string mode_name(Mode mode);

FundamentalBlock make_block(const RunConfig& cfg);

/// Wave context at normalized frequency nu = k a / (2 pi).
WaveContext make_wave(const RunConfig& cfg, double nu);

}  // namespace pfmbem
