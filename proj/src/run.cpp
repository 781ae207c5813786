#include "pfmbem/run.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <fstream>
#include <limits>
#include <random>
#include <sstream>

#include "json.hpp"

#include "pfmbem/errors.hpp"
#include "pfmbem/parallel.hpp"

namespace pfmbem {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

TreeKind tree_kind(Lattice lattice) {
  return lattice == Lattice::square ? TreeKind::square_quadtree : TreeKind::triangle_quadtree;
}

double relative(const Eigen::VectorXcd& a, const Eigen::VectorXcd& b) {
  const double nb = b.norm();
  return nb > 0.0 ? (a - b).norm() / nb : (a - b).norm();
}

void write_file(const std::filesystem::path& path, const std::string& body) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  out << body;
  if (!out) throw Error("write failed for " + path.string());
}

double parse_double(std::string_view s) {
  double x = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), x);
  if (ec != std::errc() || ptr != s.data() + s.size()) throw ParseError("csv", "bad number '" + std::string(s) + "'");
  return x;
}

}  // namespace

Problem::Problem(RunConfig c) : cfg(std::move(c)), block(make_block(cfg)) {
  if (cfg.solver == SolverPath::fmm && block.M() > 0)
    forest.emplace(build_forest(block, tree_kind(cfg.lattice), cfg.leaf_capacity));
}

Solution solve_frequency(const Problem& problem, double nu) {
  const RunConfig& cfg = problem.cfg;
  const FundamentalBlock& block = problem.block;
  Solution sol;
  sol.nu = avoid_resonance(nu, cfg.a, block.H, cfg.theta);
  sol.ctx = make_wave(cfg, sol.nu);
  const Eigen::VectorXcd b = incident_trace(block, sol.ctx);
  if (block.M() == 0) {
    sol.tail = build_tail_channel(block, sol.ctx, 0, cfg.epsilon);
    sol.psi = Eigen::VectorXcd(0);
    sol.report.converged = true;
    return sol;
  }
  const auto t0 = Clock::now();
  if (cfg.solver == SolverPath::dense) {
    sol.tail = build_tail_channel(block, sol.ctx, 0, cfg.epsilon);
    const Eigen::MatrixXcd A = assemble_dense(block, sol.ctx, sol.tail);
    sol.psi = solve_dense(A, b);
    sol.report.final_relative_residual = relative(A * sol.psi, b);
    sol.report.converged = true;
    sol.report.wall_time = seconds_since(t0);
    return sol;
  }
  FmmOperator op = prepare_fmm(*problem.forest, block, sol.ctx, cfg.p, cfg.epsilon);
  const LinearMap precond = cfg.preconditioner ? block_preconditioner(block, sol.ctx, op.tail) : identity_map();
  const LinearMap apply = [&op](const Eigen::VectorXcd& v) { return fmm_matvec(op, v); };
  sol.psi = gmres(apply, b, cfg.gmres, precond, &sol.report);
  sol.tail = std::move(op.tail);
  return sol;
}

Sample sample_frequency(const Problem& problem, double nu) {
  const auto t0 = Clock::now();
  const Solution sol = solve_frequency(problem, nu);
  Sample s;
  s.nu = sol.nu;
  s.solve = sol.report;
  s.etc = compute_etc(sol.psi, problem.block, sol.ctx, sol.tail, problem.cfg.etc_points, problem.cfg.etc_variant);
  s.wall_time = seconds_since(t0);
  return s;
}

SweepResult run_sweep(const Problem& problem) {
  return sweep([&problem](double nu) { return sample_frequency(problem, nu); }, problem.cfg.sweep);
}

std::string format_double(double x) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), x);
  return std::string(buf, res.ptr);
}

std::string samples_to_csv(const std::vector<Sample>& samples) {
  std::string out = "nu,etc,iterations,residual,wall_time\n";
  for (const Sample& s : samples) {
    out += format_double(s.nu) + "," + format_double(s.etc) + "," + std::to_string(s.solve.iterations) + "," +
           format_double(s.solve.final_relative_residual) + "," + format_double(s.wall_time) + "\n";
  }
  return out;
}

std::vector<Sample> samples_from_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || line != "nu,etc,iterations,residual,wall_time")
    throw ParseError("csv", "unexpected header");
  std::vector<Sample> out;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string_view> f;
    std::string_view rest(line);
    for (std::size_t pos; (pos = rest.find(',')) != std::string_view::npos; rest.remove_prefix(pos + 1))
      f.push_back(rest.substr(0, pos));
    f.push_back(rest);
    if (f.size() != 5) throw ParseError("csv", "expected 5 columns");
    Sample s;
    s.nu = parse_double(f[0]);
    s.etc = parse_double(f[1]);
    const auto [ptr, ec] = std::from_chars(f[2].data(), f[2].data() + f[2].size(), s.solve.iterations);
    if (ec != std::errc() || ptr != f[2].data() + f[2].size()) throw ParseError("csv", "bad iteration count");
    s.solve.final_relative_residual = parse_double(f[3]);
    s.wall_time = parse_double(f[4]);
    out.push_back(s);
  }
  return out;
}

std::string gaps_to_json(const SweepResult& result) {
  nlohmann::json doc;
  doc["threshold"] = result.threshold;
  doc["gaps"] = nlohmann::json::array();
  for (const Gap& g : result.gaps) doc["gaps"].push_back({g.lo, g.hi});
  return doc.dump(2) + "\n";
}

std::string sweep_svg(const SweepResult& result) {
  const double W = 800.0, Hgt = 420.0, left = 60.0, right = 20.0, top = 20.0, bottom = 50.0;
  double x0 = std::numeric_limits<double>::infinity(), x1 = -x0, y1 = 1.0;
  for (const Sample& s : result.samples) {
    x0 = std::min(x0, s.nu);
    x1 = std::max(x1, s.nu);
    if (std::isfinite(s.etc)) y1 = std::max(y1, s.etc);
  }
  if (!(x1 > x0)) {
    x0 = result.samples.empty() ? 0.0 : x0 - 0.5;
    x1 = x0 + 1.0;
  }
  y1 *= 1.05;
  const double pw = W - left - right, ph = Hgt - top - bottom;
  auto X = [&](double nu) { return left + (nu - x0) / (x1 - x0) * pw; };
  auto Y = [&](double e) { return top + ph - e / y1 * ph; };
  std::ostringstream o;
  o << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << Hgt << "\" viewBox=\"0 0 "
    << W << " " << Hgt << "\">\n";
  o << "<rect x=\"0\" y=\"0\" width=\"" << W << "\" height=\"" << Hgt << "\" fill=\"white\"/>\n";
  for (const Gap& g : result.gaps) {
    o << "<rect x=\"" << X(g.lo) << "\" y=\"" << top << "\" width=\"" << X(g.hi) - X(g.lo) << "\" height=\"" << ph
      << "\" fill=\"#dde6f5\"/>\n";
  }
  o << "<line x1=\"" << left << "\" y1=\"" << Y(result.threshold) << "\" x2=\"" << left + pw << "\" y2=\""
    << Y(result.threshold) << "\" stroke=\"#c33\" stroke-dasharray=\"4 3\"/>\n";
  o << "<rect x=\"" << left << "\" y=\"" << top << "\" width=\"" << pw << "\" height=\"" << ph
    << "\" fill=\"none\" stroke=\"black\"/>\n";
  for (int i = 0; i <= 5; ++i) {
    const double nu = x0 + (x1 - x0) * i / 5.0;
    const double e = y1 * i / 5.0;
    o << "<text x=\"" << X(nu) << "\" y=\"" << top + ph + 18 << "\" font-size=\"12\" text-anchor=\"middle\">"
      << format_double(std::round(nu * 1000.0) / 1000.0) << "</text>\n";
    o << "<text x=\"" << left - 6 << "\" y=\"" << Y(e) + 4 << "\" font-size=\"12\" text-anchor=\"end\">"
      << format_double(std::round(e * 100.0) / 100.0) << "</text>\n";
  }
  o << "<text x=\"" << left + pw / 2 << "\" y=\"" << Hgt - 10
    << "\" font-size=\"13\" text-anchor=\"middle\">normalized frequency ka/2&#960;</text>\n";
  o << "<text x=\"15\" y=\"" << top + ph / 2 << "\" font-size=\"13\" text-anchor=\"middle\" transform=\"rotate(-90 15 "
    << top + ph / 2 << ")\">ETC</text>\n";
  o << "<polyline fill=\"none\" stroke=\"#124\" stroke-width=\"1.5\" points=\"";
  bool first = true;
  for (const Sample& s : result.samples) {
    if (!std::isfinite(s.etc)) continue;
    o << (first ? "" : " ") << X(s.nu) << "," << Y(s.etc);
    first = false;
  }
  o << "\"/>\n</svg>\n";
  return o.str();
}

std::vector<Check> verify_checks(const Problem& problem) {
  const RunConfig& cfg = problem.cfg;
  const FundamentalBlock& block = problem.block;
  const double nu = avoid_resonance(cfg.nu.value_or(0.5 * (cfg.sweep.nu_min + cfg.sweep.nu_max)), cfg.a, block.H,
                                    cfg.theta);
  const WaveContext ctx = make_wave(cfg, nu);
  std::vector<Check> out;
  auto add = [&out](std::string name, bool pass, const std::string& detail) {
    out.push_back({std::move(name), pass, detail});
  };

  // Lattice sums against the Cesaro-averaged direct sum and across q.
  {
    const Vec2 delta(0.37 * block.L, 0.29 * block.H);
    const LatticeSumConfig q0 = build_quadrature(block.H, ctx.k, cfg.epsilon, 5, block.L, ctx.beta);
    const LatticeSumConfig q5 = build_quadrature(block.H, ctx.k, cfg.epsilon, 5, block.L, ctx.beta, q0.q + 5);
    double worst_direct = 0.0, worst_q = 0.0;
    for (int n : {0, 1, 2, 5}) {
      const cdouble acc = accelerated_periodic_sum(n, 1, delta, ctx, block.H, q0);
      const cdouble dir = direct_periodic_sum(n, 1, delta, ctx, block.H, 100000, true);
      const cdouble alt = accelerated_periodic_sum(n, 1, delta, ctx, block.H, q5);
      worst_direct = std::max(worst_direct, std::abs(acc - dir) / std::abs(dir));
      worst_q = std::max(worst_q, std::abs(acc - alt) / std::abs(acc));
    }
    add("lattice_sum_vs_direct", worst_direct <= 1e-3, "max rel " + format_double(worst_direct));
    add("lattice_sum_q_consistency", worst_q <= 1e-10, "max rel " + format_double(worst_q));
  }

  if (block.M() > 0) {
    const TailChannel tail = build_tail_channel(block, ctx, 0, cfg.epsilon);
    const Eigen::MatrixXcd A = assemble_dense(block, ctx, tail);
    const Eigen::VectorXcd b = incident_trace(block, ctx);
    const Forest forest = build_forest(block, tree_kind(cfg.lattice), cfg.leaf_capacity);
    const FmmOperator op = prepare_fmm(forest, block, ctx, cfg.p, cfg.epsilon);

    std::mt19937 gen(12345);
    std::normal_distribution<double> dist;
    double worst = 0.0;
    for (int r = 0; r < 5; ++r) {
      Eigen::VectorXcd v(block.unknowns());
      for (int i = 0; i < v.size(); ++i) v(i) = cdouble(dist(gen), dist(gen));
      worst = std::max(worst, relative(fmm_matvec(op, v), matvec_dense(A, v)));
    }
    add("fmm_vs_dense_matvec", worst <= 5e-3, "max rel " + format_double(worst));

    const Eigen::VectorXcd direct = solve_dense(A, b);
    const LinearMap dense_map = [&A](const Eigen::VectorXcd& v) { return Eigen::VectorXcd(A * v); };
    const LinearMap fmm_map = [&op](const Eigen::VectorXcd& v) { return fmm_matvec(op, v); };
    const LinearMap precond = block_preconditioner(block, ctx, tail);
    SolveReport rep_pre, rep_plain;
    const Eigen::VectorXcd dense_gmres = gmres(dense_map, b, cfg.gmres, precond);
    const Eigen::VectorXcd fmm_gmres = gmres(fmm_map, b, cfg.gmres, precond, &rep_pre);
    gmres(fmm_map, b, cfg.gmres, identity_map(), &rep_plain);
    const double d1 = relative(dense_gmres, direct), d2 = relative(fmm_gmres, direct),
                 d3 = relative(fmm_gmres, dense_gmres);
    add("solver_paths_agree", std::max({d1, d2, d3}) <= 1e-3,
        "dense-gmres " + format_double(d1) + ", fmm-direct " + format_double(d2) + ", fmm-gmres " +
            format_double(d3));
    add("preconditioner_iterations", rep_pre.iterations <= rep_plain.iterations,
        std::to_string(rep_pre.iterations) + " vs " + std::to_string(rep_plain.iterations));

    const FieldEvaluator field(block, ctx, tail, direct);
    std::uniform_real_distribution<double> ux(block.L + 0.05 * cfg.a, block.L + 0.6 * cfg.a), uy(0.0, block.H);
    double worst_qp = 0.0;
    for (int i = 0; i < 20; ++i) {
      const Vec2 x(ux(gen), uy(gen));
      const cdouble u0 = field.scattered(x);
      const cdouble u1 = field.scattered(x + block.h());
      worst_qp = std::max(worst_qp, std::abs(u1 - ctx.alpha * u0) / std::max(std::abs(u0), 1e-300));
    }
    add("quasi_periodicity", worst_qp <= 1e-4, "max rel " + format_double(worst_qp));
  } else {
    const TailChannel tail = build_tail_channel(block, ctx, 0, cfg.epsilon);
    const double etc = compute_etc(Eigen::VectorXcd(0), block, ctx, tail, cfg.etc_points, cfg.etc_variant);
    const double want = cfg.etc_variant == EtcVariant::modulus ? std::cos(cfg.theta) : std::pow(std::cos(cfg.theta), 2);
    add("empty_block_etc", std::abs(etc - want) <= 1e-4, "etc " + format_double(etc));
  }
  return out;
}

int run(const RunConfig& cfg, const std::filesystem::path& out_dir, std::ostream& log) {
  if (cfg.threads > 0) set_thread_count(cfg.threads);
  std::filesystem::create_directories(out_dir);
  const Problem problem(cfg);
  log << "mode " << mode_name(cfg.mode) << ": " << problem.block.M() << " scatterers, N = " << cfg.N << ", "
      << thread_count() << " threads\n";

  switch (cfg.mode) {
    case Mode::sweep: {
      const SweepResult res = run_sweep(problem);
      write_file(out_dir / cfg.samples_csv, samples_to_csv(res.samples));
      write_file(out_dir / cfg.gaps_json, gaps_to_json(res));
      if (!cfg.plot_svg.empty()) write_file(out_dir / cfg.plot_svg, sweep_svg(res));
      int failed = 0;
      for (const Sample& s : res.samples) {
        if (s.error.empty()) continue;
        ++failed;
        log << "nu " << format_double(s.nu) << " failed: " << s.error << "\n";
      }
      log << res.samples.size() << " samples, " << res.gaps.size() << " gaps below "
          << format_double(res.threshold) << "\n";
      for (const Gap& g : res.gaps) log << "  [" << format_double(g.lo) << ", " << format_double(g.hi) << "]\n";
      return failed == 0 ? 0 : 1;
    }
    case Mode::single_frequency: {
      if (!cfg.nu) throw ParseError("nu", "required in single_frequency mode");
      const auto t0 = Clock::now();
      const Solution sol = solve_frequency(problem, *cfg.nu);
      Sample s;
      s.nu = sol.nu;
      s.solve = sol.report;
      s.etc = compute_etc(sol.psi, problem.block, sol.ctx, sol.tail, cfg.etc_points, cfg.etc_variant);
      s.wall_time = seconds_since(t0);
      const FieldEvaluator field(problem.block, sol.ctx, sol.tail, sol.psi);
      std::string probes = "x1,x2,re_u,im_u,re_du_dx1,im_du_dx1\n";
      for (int i = 0; i < cfg.probe_count; ++i) {
        const Vec2 x(problem.block.L, (i + 0.5) * problem.block.H / cfg.probe_count);
        const auto [us, dus] = field.scattered(x, Vec2(1.0, 0.0));
        const cdouble ui = field.incident(x);
        const cdouble u = us + ui;
        const cdouble du = dus + kI * sol.ctx.k * sol.ctx.d.x() * ui;
        probes += format_double(x.x()) + "," + format_double(x.y()) + "," + format_double(u.real()) + "," +
                  format_double(u.imag()) + "," + format_double(du.real()) + "," + format_double(du.imag()) + "\n";
      }
      write_file(out_dir / cfg.probes_csv, probes);
      write_file(out_dir / cfg.samples_csv, samples_to_csv({s}));
      log << "nu " << format_double(s.nu) << ": etc " << format_double(s.etc) << ", " << s.solve.iterations
          << " iterations, residual " << format_double(s.solve.final_relative_residual) << "\n";
      return 0;
    }
    case Mode::verify: {
      const std::vector<Check> checks = verify_checks(problem);
      std::string report;
      bool ok = true;
      for (const Check& c : checks) {
        report += std::string(c.pass ? "PASS " : "FAIL ") + c.name + ": " + c.detail + "\n";
        ok = ok && c.pass;
      }
      write_file(out_dir / cfg.verify_report, report);
      log << report;
      return ok ? 0 : 1;
    }
  }
  return 1;
}

}  // namespace pfmbem
