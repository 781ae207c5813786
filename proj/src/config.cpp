#include "pfmbem/config.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"

#include "pfmbem/errors.hpp"

namespace pfmbem {

namespace {

using nlohmann::json;

const std::set<std::string> kKeys = {
    "mode",     "matrix",        "scatterer",    "lattice",      "a",          "filling_fraction",
    "M_H",      "M_L",           "shape",        "N",            "theta",      "eta",
    "p",        "epsilon",       "nu_min",       "nu_max",       "nu_step",    "refine_steps",
    "threshold", "nu",           "etc_variant",  "etc_points",   "tol",        "restart",
    "max_iterations", "preconditioner", "solver", "leaf_capacity", "threads",  "probe_count",
    "samples_csv", "gaps_json",  "plot_svg",     "probes_csv",   "verify_report"};

const json* find(const json& doc, const std::string& key) {
  const auto it = doc.find(key);
  return it == doc.end() ? nullptr : &*it;
}

double number(const json& v, const std::string& key) {
  if (!v.is_number()) throw ParseError(key, "expected a number");
  const double x = v.get<double>();
  if (!std::isfinite(x)) throw ParseError(key, "not finite");
  return x;
}

int integer(const json& v, const std::string& key) {
  if (!v.is_number_integer()) throw ParseError(key, "expected an integer");
  const auto x = v.get<long long>();
  if (x < -1000000000LL || x > 1000000000LL) throw ParseError(key, "out of range");
  return static_cast<int>(x);
}

std::string text(const json& v, const std::string& key) {
  if (!v.is_string()) throw ParseError(key, "expected a string");
  return v.get<std::string>();
}

void read(const json& doc, const std::string& key, double& out) {
  if (const json* v = find(doc, key)) out = number(*v, key);
}
void read(const json& doc, const std::string& key, int& out) {
  if (const json* v = find(doc, key)) out = integer(*v, key);
}
void read(const json& doc, const std::string& key, std::string& out) {
  if (const json* v = find(doc, key)) out = text(*v, key);
}

const json& required(const json& doc, const std::string& key, const std::string& prefix = "") {
  const json* v = find(doc, key);
  if (!v) throw ParseError(prefix + key, "missing required key");
  return *v;
}

Material material(const json& v, const std::string& key) {
  if (!v.is_object()) throw ParseError(key, "expected a table with rho and c");
  for (const auto& [k, _] : v.items())
    if (k != "rho" && k != "c") throw ParseError(key + "." + k, "unknown key");
  Material m;
  m.rho = number(required(v, "rho", key + "."), key + ".rho");
  m.c = number(required(v, "c", key + "."), key + ".c");
  if (!(m.rho > 0.0)) throw ParseError(key + ".rho", "must be positive");
  if (!(m.c > 0.0)) throw ParseError(key + ".c", "must be positive");
  return m;
}

void check(bool ok, const std::string& key, const std::string& what) {
  if (!ok) throw ParseError(key, what);
}

}  // namespace

Mode parse_mode(const std::string& name) {
  if (name == "sweep") return Mode::sweep;
  if (name == "single_frequency") return Mode::single_frequency;
  if (name == "verify") return Mode::verify;
  throw ParseError("mode", "unknown mode '" + name + "'");
}

std::string mode_name(Mode mode) {
  switch (mode) {
    case Mode::sweep:
      return "sweep";
    case Mode::single_frequency:
      return "single_frequency";
    case Mode::verify:
      return "verify";
  }
  return "";
}

RunConfig parse_config(const std::string& source) {
  json doc;
  try {
    doc = json::parse(source);
  } catch (const json::parse_error& e) {
    throw ParseError("<document>", e.what());
  }
  if (!doc.is_object()) throw ParseError("<document>", "expected a top-level table");
  for (const auto& [k, _] : doc.items())
    if (!kKeys.count(k)) throw ParseError(k, "unknown key");

  RunConfig c;
  if (const json* v = find(doc, "mode")) c.mode = parse_mode(text(*v, "mode"));
  c.matrix = material(required(doc, "matrix"), "matrix");
  c.scatterer = material(required(doc, "scatterer"), "scatterer");

  const std::string lattice = text(required(doc, "lattice"), "lattice");
  if (lattice == "square") {
    c.lattice = Lattice::square;
  } else if (lattice == "hexagon") {
    c.lattice = Lattice::hexagon;
  } else {
    throw ParseError("lattice", "expected square or hexagon");
  }
  c.a = number(required(doc, "a"), "a");
  c.filling_fraction = number(required(doc, "filling_fraction"), "filling_fraction");
  c.M_H = integer(required(doc, "M_H"), "M_H");
  c.M_L = integer(required(doc, "M_L"), "M_L");

  std::string shape = "circle";
  read(doc, "shape", shape);
  if (shape == "circle") {
    c.shape = Shape::circle;
  } else if (shape == "round_square") {
    c.shape = Shape::round_square;
  } else {
    throw ParseError("shape", "expected circle or round_square");
  }

  read(doc, "N", c.N);
  read(doc, "theta", c.theta);
  if (const json* v = find(doc, "eta")) c.eta = number(*v, "eta");
  read(doc, "p", c.p);
  read(doc, "epsilon", c.epsilon);
  read(doc, "nu_min", c.sweep.nu_min);
  read(doc, "nu_max", c.sweep.nu_max);
  read(doc, "nu_step", c.sweep.step);
  read(doc, "refine_steps", c.sweep.refine_steps);
  read(doc, "threshold", c.sweep.threshold);
  if (const json* v = find(doc, "nu")) c.nu = number(*v, "nu");

  std::string variant = "modulus";
  read(doc, "etc_variant", variant);
  if (variant == "modulus") {
    c.etc_variant = EtcVariant::modulus;
  } else if (variant == "modulus_squared") {
    c.etc_variant = EtcVariant::modulus_squared;
  } else {
    throw ParseError("etc_variant", "expected modulus or modulus_squared");
  }
  read(doc, "etc_points", c.etc_points);

  read(doc, "tol", c.gmres.tol);
  read(doc, "restart", c.gmres.restart);
  read(doc, "max_iterations", c.gmres.max_iterations);
  if (const json* v = find(doc, "preconditioner")) {
    if (!v->is_boolean()) throw ParseError("preconditioner", "expected true or false");
    c.preconditioner = v->get<bool>();
  }
  std::string solver = "fmm";
  read(doc, "solver", solver);
  if (solver == "fmm") {
    c.solver = SolverPath::fmm;
  } else if (solver == "dense") {
    c.solver = SolverPath::dense;
  } else {
    throw ParseError("solver", "expected fmm or dense");
  }
  read(doc, "leaf_capacity", c.leaf_capacity);
  read(doc, "threads", c.threads);
  read(doc, "probe_count", c.probe_count);
  read(doc, "samples_csv", c.samples_csv);
  read(doc, "gaps_json", c.gaps_json);
  read(doc, "plot_svg", c.plot_svg);
  read(doc, "probes_csv", c.probes_csv);
  read(doc, "verify_report", c.verify_report);

  check(c.a > 0.0, "a", "must be positive");
  check(c.M_H >= 1, "M_H", "must be at least 1");
  check(c.M_L >= 1, "M_L", "must be at least 1");
  check(c.filling_fraction >= 0.0, "filling_fraction", "must not be negative");
  check(c.filling_fraction < packing_limit(c.lattice, c.shape), "filling_fraction",
        "exceeds the packing limit of the lattice");
  check(c.N >= 8, "N", "must be at least 8");
  check(std::abs(c.theta) < 0.5 * kPi, "theta", "must lie in (-pi/2, pi/2)");
  if (c.eta) check(*c.eta > 0.0, "eta", "must be positive");
  check(c.p >= 1 && c.p <= 40, "p", "must lie in [1, 40]");
  check(c.epsilon > 0.0 && c.epsilon < 1e-2, "epsilon", "must lie in (0, 1e-2)");
  check(c.sweep.nu_min > 0.0, "nu_min", "must be positive");
  check(c.sweep.nu_max >= c.sweep.nu_min, "nu_max", "must not be below nu_min");
  check(c.sweep.step > 0.0, "nu_step", "must be positive");
  check(c.sweep.refine_steps >= 0, "refine_steps", "must not be negative");
  check(c.sweep.threshold > 0.0 && c.sweep.threshold < 1.0, "threshold", "must lie in (0, 1)");
  if (c.nu) check(*c.nu > 0.0, "nu", "must be positive");
  check(c.etc_points >= 16, "etc_points", "must be at least 16");
  check(c.gmres.tol > 0.0 && c.gmres.tol < 1.0, "tol", "must lie in (0, 1)");
  check(c.gmres.restart >= 1, "restart", "must be at least 1");
  check(c.gmres.max_iterations >= 1, "max_iterations", "must be at least 1");
  check(c.leaf_capacity >= 1, "leaf_capacity", "must be at least 1");
  check(c.threads >= 0, "threads", "must not be negative");
  check(c.probe_count >= 1, "probe_count", "must be at least 1");
  check(!c.samples_csv.empty(), "samples_csv", "must not be empty");
  check(!c.gaps_json.empty(), "gaps_json", "must not be empty");
  check(!c.probes_csv.empty(), "probes_csv", "must not be empty");
  check(!c.verify_report.empty(), "verify_report", "must not be empty");
  return c;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("<document>", "cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

FundamentalBlock make_block(const RunConfig& cfg) {
  if (cfg.M() == 0) {
    FundamentalBlock b = empty_block(cfg.lattice, cfg.a, cfg.M_H, cfg.M_L);
    b.N = cfg.N;
    return b;
  }
  return build_block(cfg.lattice, cfg.a, cfg.M_H, cfg.M_L, cfg.shape, cfg.filling_fraction, cfg.N);
}

WaveContext make_wave(const RunConfig& cfg, double nu) {
  return make_context(2.0 * kPi * nu / cfg.a, cfg.theta, cfg.M_H * cfg.a, cfg.matrix, cfg.scatterer, cfg.eta);
}

}  // namespace pfmbem
