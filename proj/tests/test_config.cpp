#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "json.hpp"
#include "pfmbem/errors.hpp"
#include "pfmbem/parallel.hpp"
#include "pfmbem/run.hpp"

using namespace pfmbem;

namespace {

nlohmann::json minimal() {
  return {{"matrix", {{"rho", 13600.0}, {"c", 1450.0}}},
          {"scatterer", {{"rho", 1000.0}, {"c", 1500.0}}},
          {"lattice", "square"},
          {"a", 0.5},
          {"filling_fraction", 0.35},
          {"M_H", 6},
          {"M_L", 4}};
}

std::string key_of(const nlohmann::json& doc) {
  try {
    parse_config(doc.dump());
  } catch (const ParseError& e) {
    return e.key();
  }
  return "";
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::filesystem::path scratch_dir(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / ("pfmbem_test_" + name);
  std::filesystem::remove_all(dir);
  return dir;
}

}  // namespace

TEST_CASE("minimal config gets defaults") {
  const RunConfig c = parse_config(minimal().dump());
  CHECK(c.mode == Mode::sweep);
  CHECK(c.p == 10);
  CHECK(c.N == 64);
  CHECK(c.gmres.tol == 1e-6);
  CHECK(c.gmres.restart == 60);
  CHECK(c.sweep.threshold == 0.03);
  CHECK(c.etc_variant == EtcVariant::modulus);
  CHECK(c.solver == SolverPath::fmm);
  CHECK(c.shape == Shape::circle);
  CHECK_FALSE(c.eta.has_value());
  CHECK(c.M() == 24);
  CHECK(make_block(c).M() == 24);
}

TEST_CASE("material speeds give the wavenumber ratio") {
  const RunConfig c = parse_config(minimal().dump());
  const WaveContext ctx = make_wave(c, 0.3);
  CHECK(ctx.k / ctx.k1 == doctest::Approx(1500.0 / 1450.0).epsilon(1e-14));
  CHECK(ctx.k / ctx.k1 == doctest::Approx(1.0345).epsilon(1e-4));
  CHECK(ctx.k == doctest::Approx(2.0 * kPi * 0.3 / 0.5));
  CHECK(ctx.varrho == doctest::Approx(13.6));
}

TEST_CASE("every key is read") {
  nlohmann::json d = minimal();
  d["mode"] = "verify";
  d["shape"] = "round_square";
  d["filling_fraction"] = 0.3;
  d["N"] = 40;
  d["theta"] = 0.2;
  d["eta"] = 3.5;
  d["p"] = 12;
  d["epsilon"] = 1e-10;
  d["nu_min"] = 0.2;
  d["nu_max"] = 0.4;
  d["nu_step"] = 0.05;
  d["refine_steps"] = 1;
  d["threshold"] = 0.05;
  d["nu"] = 0.33;
  d["etc_variant"] = "modulus_squared";
  d["etc_points"] = 96;
  d["tol"] = 1e-8;
  d["restart"] = 30;
  d["max_iterations"] = 50;
  d["preconditioner"] = false;
  d["solver"] = "dense";
  d["leaf_capacity"] = 8;
  d["threads"] = 2;
  d["probe_count"] = 5;
  d["samples_csv"] = "s.csv";
  d["gaps_json"] = "g.json";
  d["plot_svg"] = "";
  d["probes_csv"] = "p.csv";
  d["verify_report"] = "v.txt";
  const RunConfig c = parse_config(d.dump());
  CHECK(c.mode == Mode::verify);
  CHECK(c.shape == Shape::round_square);
  CHECK(c.N == 40);
  CHECK(c.theta == 0.2);
  CHECK(*c.eta == 3.5);
  CHECK(c.p == 12);
  CHECK(c.epsilon == 1e-10);
  CHECK(c.sweep.nu_min == 0.2);
  CHECK(c.sweep.nu_max == 0.4);
  CHECK(c.sweep.step == 0.05);
  CHECK(c.sweep.refine_steps == 1);
  CHECK(c.sweep.threshold == 0.05);
  CHECK(*c.nu == 0.33);
  CHECK(c.etc_variant == EtcVariant::modulus_squared);
  CHECK(c.etc_points == 96);
  CHECK(c.gmres.tol == 1e-8);
  CHECK(c.gmres.restart == 30);
  CHECK(c.gmres.max_iterations == 50);
  CHECK_FALSE(c.preconditioner);
  CHECK(c.solver == SolverPath::dense);
  CHECK(c.leaf_capacity == 8);
  CHECK(c.threads == 2);
  CHECK(c.probe_count == 5);
  CHECK(c.samples_csv == "s.csv");
  CHECK(c.gaps_json == "g.json");
  CHECK(c.plot_svg.empty());
  CHECK(c.probes_csv == "p.csv");
  CHECK(c.verify_report == "v.txt");
  CHECK(make_wave(c, 0.3).eta == 3.5);
}

TEST_CASE("parse errors name the key") {
  nlohmann::json d = minimal();
  d["filling_fraction"] = 0.95;  // beyond pi/4
  CHECK(key_of(d) == "filling_fraction");

  d = minimal();
  d["lattice"] = "hexagon";
  d["filling_fraction"] = 0.9;  // hexagon limit is about 0.907
  CHECK(key_of(d) == "");
  d["filling_fraction"] = 0.91;
  CHECK(key_of(d) == "filling_fraction");

  d = minimal();
  d["colour"] = "red";
  CHECK(key_of(d) == "colour");

  d = minimal();
  d.erase("a");
  CHECK(key_of(d) == "a");

  d = minimal();
  d.erase("matrix");
  CHECK(key_of(d) == "matrix");

  d = minimal();
  d["matrix"].erase("c");
  CHECK(key_of(d) == "matrix.c");

  d = minimal();
  d["scatterer"]["rho"] = -1.0;
  CHECK(key_of(d) == "scatterer.rho");

  d = minimal();
  d["scatterer"]["mu"] = 1.0;
  CHECK(key_of(d) == "scatterer.mu");

  d = minimal();
  d["M_H"] = 2.5;
  CHECK(key_of(d) == "M_H");

  d = minimal();
  d["N"] = 4;
  CHECK(key_of(d) == "N");

  d = minimal();
  d["a"] = "big";
  CHECK(key_of(d) == "a");

  d = minimal();
  d["mode"] = "dance";
  CHECK(key_of(d) == "mode");

  d = minimal();
  d["nu_max"] = 0.01;
  CHECK(key_of(d) == "nu_max");

  d = minimal();
  d["nu_step"] = 0.0;
  CHECK(key_of(d) == "nu_step");

  d = minimal();
  d["theta"] = 2.0;
  CHECK(key_of(d) == "theta");

  d = minimal();
  d["etc_variant"] = "energy";
  CHECK(key_of(d) == "etc_variant");

  d = minimal();
  d["tol"] = 0.0;
  CHECK(key_of(d) == "tol");

  CHECK_THROWS_AS(parse_config("{not json"), ParseError);
  CHECK_THROWS_AS(parse_config("[1, 2]"), ParseError);
  CHECK_THROWS_AS(load_config("/nonexistent/pfmbem.json"), ParseError);
}

TEST_CASE("filling fraction zero builds an empty block") {
  nlohmann::json d = minimal();
  d["filling_fraction"] = 0.0;
  const RunConfig c = parse_config(d.dump());
  CHECK(c.M() == 0);
  const FundamentalBlock b = make_block(c);
  CHECK(b.M() == 0);
  CHECK(b.H == doctest::Approx(3.0));
  CHECK(b.L == doctest::Approx(2.0));
}

TEST_CASE("shortest round-trip numbers and CSV round trip") {
  CHECK(format_double(0.1) == "0.1");
  CHECK(format_double(1e-300) == "1e-300");
  CHECK(format_double(0.30000000000000004) == "0.30000000000000004");
  std::vector<Sample> s(3);
  s[0].nu = 0.05;
  s[0].etc = 0.1 + 0.2;
  s[0].solve.iterations = 11;
  s[0].solve.final_relative_residual = 5.387e-7;
  s[0].wall_time = 3.14159265358979;
  s[1].nu = 1.0 / 3.0;
  s[1].etc = std::nan("");
  s[2].nu = 1.3;
  s[2].etc = 2.2250738585072014e-308;
  const std::string csv = samples_to_csv(s);
  CHECK(csv.rfind("nu,etc,iterations,residual,wall_time\n", 0) == 0);
  CHECK(csv.find('\r') == std::string::npos);
  const std::vector<Sample> back = samples_from_csv(csv);
  REQUIRE(back.size() == s.size());
  for (std::size_t i = 0; i < s.size(); ++i) {
    CHECK(back[i].nu == s[i].nu);
    CHECK((back[i].etc == s[i].etc || (std::isnan(back[i].etc) && std::isnan(s[i].etc))));
    CHECK(back[i].solve.iterations == s[i].solve.iterations);
    CHECK(back[i].solve.final_relative_residual == s[i].solve.final_relative_residual);
    CHECK(back[i].wall_time == s[i].wall_time);
  }
  CHECK(samples_to_csv(back) == csv);
  CHECK_THROWS_AS(samples_from_csv("a,b\n"), ParseError);
  CHECK_THROWS_AS(samples_from_csv("nu,etc,iterations,residual,wall_time\n1,2,3\n"), ParseError);
  CHECK_THROWS_AS(samples_from_csv("nu,etc,iterations,residual,wall_time\n1,x,3,4,5\n"), ParseError);
}

TEST_CASE("gap report and plot") {
  SweepResult r;
  r.threshold = 0.03;
  for (double nu : {0.2, 0.3, 0.4}) {
    Sample s;
    s.nu = nu;
    s.etc = nu == 0.3 ? 0.01 : 0.5;
    r.samples.push_back(s);
  }
  r.gaps = extract_gaps(r.samples, r.threshold);
  const auto doc = nlohmann::json::parse(gaps_to_json(r));
  CHECK(doc["threshold"].get<double>() == 0.03);
  REQUIRE(doc["gaps"].size() == 1);
  CHECK(doc["gaps"][0][0].get<double>() == r.gaps[0].lo);
  CHECK(doc["gaps"][0][1].get<double>() == r.gaps[0].hi);
  const std::string svg = sweep_svg(r);
  CHECK(svg.rfind("<svg", 0) == 0);
  CHECK(svg.find("<polyline") != std::string::npos);
  CHECK(svg.find("#dde6f5") != std::string::npos);
  CHECK(svg.find("</svg>") != std::string::npos);
}

TEST_CASE("empty block sweep writes unit ETC") {
  nlohmann::json d = minimal();
  d["filling_fraction"] = 0.0;
  d["nu_min"] = 0.1;
  d["nu_max"] = 1.2;
  d["nu_step"] = 0.1;
  const auto dir = scratch_dir("empty");
  std::ostringstream log;
  CHECK(run(parse_config(d.dump()), dir, log) == 0);
  const std::vector<Sample> s = samples_from_csv(slurp(dir / "samples.csv"));
  CHECK(s.size() == 12);
  for (const Sample& x : s) CHECK(std::abs(x.etc - 1.0) <= 1e-3);
  const auto gaps = nlohmann::json::parse(slurp(dir / "gaps.json"));
  CHECK(gaps["gaps"].empty());
  CHECK(std::filesystem::exists(dir / "etc.svg"));
}

TEST_CASE("verify and single frequency on the two-scatterer fixture") {
  nlohmann::json d = minimal();
  d["a"] = 1.0;
  d["M_H"] = 2;
  d["M_L"] = 1;
  d["N"] = 32;
  d["leaf_capacity"] = 4;
  d["nu"] = 0.37;
  const auto dir = scratch_dir("fixture");
  std::ostringstream log;
  RunConfig c = parse_config(d.dump());
  c.mode = Mode::verify;
  CHECK(run(c, dir, log) == 0);
  const std::string report = slurp(dir / "verify.txt");
  CHECK(report.find("FAIL") == std::string::npos);
  CHECK(report.find("PASS fmm_vs_dense_matvec") != std::string::npos);
  CHECK(report.find("PASS lattice_sum_vs_direct") != std::string::npos);

  c.mode = Mode::single_frequency;
  CHECK(run(c, dir, log) == 0);
  const std::string probes = slurp(dir / "probes.csv");
  int lines = 0;
  for (char ch : probes) lines += ch == '\n';
  CHECK(lines == 1 + c.probe_count);
  const std::vector<Sample> one = samples_from_csv(slurp(dir / "samples.csv"));
  REQUIRE(one.size() == 1);
  CHECK(one[0].nu == 0.37);
  CHECK(one[0].etc > 0.0);

  // dense path gives the same ETC
  RunConfig dense = c;
  dense.solver = SolverPath::dense;
  const Problem pf(c), pd(dense);
  CHECK(std::abs(sample_frequency(pf, 0.37).etc - sample_frequency(pd, 0.37).etc) < 1e-4);

  c.nu.reset();
  CHECK_THROWS_AS(run(c, dir, log), ParseError);
}

TEST_CASE("sweep output does not depend on the thread count") {
  nlohmann::json d = minimal();
  d["a"] = 1.0;
  d["M_H"] = 2;
  d["M_L"] = 1;
  d["N"] = 16;
  d["leaf_capacity"] = 4;
  d["nu_min"] = 0.3;
  d["nu_max"] = 0.5;
  d["nu_step"] = 0.1;
  const RunConfig c = parse_config(d.dump());
  const int saved = thread_count();
  const Problem prob(c);
  set_thread_count(1);
  const std::string one = samples_to_csv(run_sweep(prob).samples);
  set_thread_count(3);
  const std::string three = samples_to_csv(run_sweep(prob).samples);
  set_thread_count(saved);
  // wall times differ; compare the other columns
  auto strip = [](const std::string& csv) {
    std::string out;
    std::istringstream in(csv);
    for (std::string line; std::getline(in, line);) out += line.substr(0, line.rfind(',')) + "\n";
    return out;
  };
  CHECK(strip(one) == strip(three));
}
