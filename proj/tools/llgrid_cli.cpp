// Command-line front end: solve, verify, competitor, sweep, plot.
//
// Exit codes: 0 pass, 1 verification failure, 2 usage/config/IO error,
// 3 solver non-convergence.

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "llgrid/competitor.hpp"
#include "llgrid/config.hpp"
#include "llgrid/density_io.hpp"
#include "llgrid/errors.hpp"
#include "llgrid/report.hpp"
#include "llgrid/verify.hpp"

namespace fs = std::filesystem;
using namespace llgrid;

namespace {

enum Exit { ok = 0, verify_failed = 1, usage = 2, no_convergence = 3 };

struct Common {
  std::string config_path;
  std::vector<std::string> sets;
};

void add_common(CLI::App* sub, Common& c) {
  sub->add_option("-c,--config", c.config_path, "key=value config file")->check(CLI::ExistingFile);
  sub->add_option("-s,--set", c.sets, "override one key (key=value); repeatable");
}

ExperimentConfig load_config(const Common& c) {
  std::string text;
  if (!c.config_path.empty()) {
    std::ifstream in(c.config_path);
    if (!in) throw ConstraintError("config: cannot open " + c.config_path);
    std::ostringstream os;
    os << in.rdbuf();
    text = os.str();
  }
  for (const auto& s : c.sets) text += "\n" + s;
  return ExperimentConfig::parse(text);
}

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open " + path);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

std::string eps_tag(double eps) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3e", eps);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

void write_manifest(const std::string& dir, RunManifest& m) {
  m.tool_version = LLGRID_VERSION;
  atomic_write((fs::path(dir) / "manifest.json").string(), m.to_json());
}

int cmd_solve(const Common& c, const std::string& resume) {
  ExperimentConfig cfg = load_config(c);
  const OneBodyDensity mu = cfg.marginal_density();
  const std::string hash = cfg.hash();
  RunManifest manifest;
  manifest.config_hash = hash;
  std::optional<std::vector<double>> warm = cfg.solver.initial_potential;
  if (!resume.empty()) {
    Checkpoint ck = read_checkpoint(resume);
    if (ck.config_hash != hash)
      throw ConstraintError("resume: checkpoint hash " + ck.config_hash + " differs from config " + hash);
    if (!ck.potential.empty()) warm = ck.potential;
  }
  std::vector<double> eps = cfg.eps_list;
  std::sort(eps.begin(), eps.end(), std::greater<>());
  nlohmann::ordered_json reports = nlohmann::ordered_json::array();
  bool converged = true;
  for (double e : eps) {
    const auto t0 = std::chrono::steady_clock::now();
    SolverConfig sc = cfg.solver_for(e);
    sc.initial_potential = warm;
    SolveResult res = minimize_levy_lieb(mu, cfg.cost, sc);
    if (!res.report.potential.empty()) warm = res.report.potential;
    const std::string prefix = (fs::path(cfg.out_dir) / ("solve_eps" + eps_tag(e))).string();
    write_checkpoint(prefix, {res.density.field(), e, res.report.iterations,
                              res.report.energy.total(), res.report.marginal_residual, hash,
                              res.report.potential});
    const SolveReport& r = res.report;
    nlohmann::ordered_json j;
    j["eps"] = e;
    j["energy"] = {{"kinetic", r.energy.kinetic},
                   {"interaction", r.energy.interaction},
                   {"total", r.energy.total()}};
    if (r.energy.cap) j["energy"]["cap"] = *r.energy.cap;
    j["marginal_residual"] = r.marginal_residual;
    j["iterations"] = r.iterations;
    j["dual_lower_bound"] = r.dual_lower_bound ? nlohmann::ordered_json(*r.dual_lower_bound) : nullptr;
    j["duality_gap"] = r.duality_gap ? nlohmann::ordered_json(*r.duality_gap) : nullptr;
    j["converged"] = r.converged;
    j["wall_time"] = r.wall_time;
    j["checkpoint"] = prefix;
    reports.push_back(j);
    manifest.artifacts.push_back({prefix + ".density", seconds_since(t0)});
    manifest.artifacts.push_back({prefix + ".json", 0.0});
    converged = converged && r.converged;
    std::printf("eps=%-10.4g energy=%.12g residual=%.2e iterations=%d gap=%.2e %s\n", e,
                r.energy.total(), r.marginal_residual, r.iterations,
                r.duality_gap.value_or(NAN), r.converged ? "converged" : "NOT CONVERGED");
  }
  nlohmann::ordered_json out = {{"config_hash", hash}, {"solves", reports}};
  const std::string report_path = (fs::path(cfg.out_dir) / "solve_report.json").string();
  atomic_write(report_path, out.dump(2) + "\n");
  manifest.artifacts.push_back({report_path, 0.0});
  manifest.pass = converged;
  manifest.summary = converged ? "all solves converged" : "some solves did not converge";
  write_manifest(cfg.out_dir, manifest);
  return converged ? ok : no_convergence;
}

int cmd_verify(const Common& c, const std::vector<std::string>& suites, int trials,
               const std::string& density, const std::string& mutant, const std::string& json_out) {
  ExperimentConfig cfg = load_config(c);
  VerifyOptions opt;
  opt.seed = cfg.seed;
  opt.trials = trials;
  if (!density.empty()) opt.density_path = density;
  if (mutant == "no-sqrt") opt.fisher = mutants::fisher_without_sqrt;
  else if (mutant == "sign-flip") opt.fisher = mutants::fisher_sign_flip;
  VerifyReport rep;
  if (suites.empty()) {
    rep = run_verify(cfg, opt);
  } else {
    for (const auto& s : suites) rep.suites.push_back(run_suite(s, cfg, opt));
  }
  for (const auto& s : rep.suites)
    std::printf("%-12s %s  checks=%d failures=%zu  %.2fs\n", s.name.c_str(),
                s.pass() ? "PASS" : "FAIL", s.checks, s.failures.size(), s.wall_time);
  if (const CheckFailure* f = rep.first_failure()) {
    std::printf("first failure: [%s] %s: %s\nreplay: %s\n", f->suite.c_str(), f->check.c_str(),
                f->detail.c_str(), f->replay.c_str());
  }
  if (!json_out.empty()) atomic_write(json_out, rep.to_json());
  return rep.pass() ? ok : verify_failed;
}

std::vector<int> parse_node(const std::string& s) {
  std::vector<int> out;
  for (double v : parse_double_list(s)) out.push_back(static_cast<int>(v));
  return out;
}

int cmd_competitor(const Common& c, const std::string& y_s, const std::string& z_s, double r1,
                   double r2, double delta, bool smooth, double cap, const std::string& density) {
  ExperimentConfig cfg = load_config(c);
  const double eps = cfg.eps_list.front();
  Field P = density.empty()
                ? minimize_levy_lieb(cfg.marginal_density(), cfg.cost, cfg.solver_for(eps)).density.field()
                : read_density(density).field();
  const std::vector<int> y = parse_node(y_s), z = parse_node(z_s);
  if (static_cast<int>(y.size()) != P.grid.axes() || static_cast<int>(z.size()) != P.grid.axes())
    throw ConstraintError("competitor: --y and --z need " + std::to_string(P.grid.axes()) + " node indices");
  SwapState st = make_bumps(P, y, z, r1, r2, smooth ? BumpProfile::smooth() : BumpProfile::prop_decay(delta), cap);
  const ContiReport cr = lemma_conti_check(P, st, eps, cfg.cost);
  nlohmann::ordered_json j;
  j["config_hash"] = cfg.hash();
  j["eps"] = eps;
  j["y"] = y;
  j["z"] = z;
  j["r1"] = r1;
  j["r2"] = r2;
  j["profile"] = smooth ? "smooth" : "prop-decay";
  j["delta"] = st.profile.delta;
  j["raw_mass1"] = st.raw_mass1;
  j["raw_mass2"] = st.raw_mass2;
  j["lambda1"] = st.lambda1;
  j["lambda2"] = st.lambda2;
  j["m"] = st.m;
  j["kinetic_lhs"] = cr.kinetic_lhs;
  j["kinetic_rhs"] = cr.kinetic_rhs;
  j["kinetic_slack"] = cr.kinetic_slack();
  j["vee_lhs"] = cr.vee_lhs;
  j["vee_rhs"] = cr.vee_rhs;
  j["vee_relative_error"] = cr.vee_relative_error;
  j["energy_change"] = cr.energy_change;
  std::cout << j.dump(2) << "\n";
  return ok;
}

int cmd_sweep(const Common& c, const std::optional<std::string>& eps_list, double alpha,
              double beta, const std::string& cost, int M, const std::string& out) {
  ExperimentConfig cfg = load_config(c);
  if (eps_list) cfg.set("eps.list", *eps_list);
  if (alpha > 0) cfg.alpha = alpha;
  if (beta > 0) cfg.beta = beta;
  if (!cost.empty()) cfg.set("cost.family", cost);
  if (M > 0) cfg.M = M;
  if (cfg.eps_list.empty()) throw ConstraintError("sweep: --eps-list is empty");
  cfg.system_grid();
  const auto t0 = std::chrono::steady_clock::now();
  SweepResult r = run_sweep(cfg);
  const double wall = seconds_since(t0);
  const fs::path json_path = out.empty() ? fs::path(cfg.out_dir) / "report.json" : fs::path(out);
  fs::path stem = json_path;
  stem.replace_extension();
  const std::string csv_path = stem.string() + ".csv", svg_path = stem.string() + ".svg";
  atomic_write(json_path.string(), sweep_json(r));
  atomic_write(csv_path, sweep_csv(r));
  atomic_write(svg_path, sweep_svg(r));
  std::fputs(sweep_csv(r).c_str(), stdout);
  std::printf("fit: slope=%.6g intercept=%.6g R^2=%.6f strictly_decreasing=%s\n", r.fit.slope,
              r.fit.intercept, r.fit.r_squared, r.strictly_decreasing ? "yes" : "no");
  bool any_fail = false;
  for (const auto& row : r.rows) any_fail = any_fail || row.verdict == "fail";
  RunManifest m;
  m.config_hash = r.config_hash;
  m.artifacts = {{json_path.string(), wall}, {csv_path, 0.0}, {svg_path, 0.0}};
  m.pass = !any_fail && !r.any_error && !r.any_nonconverged;
  m.summary = r.any_error ? "solver errors in some rows"
              : r.any_nonconverged ? "some solves did not converge"
              : any_fail ? "bound violated in regime" : "all rows pass or out of regime";
  write_manifest(json_path.has_parent_path() ? json_path.parent_path().string() : ".", m);
  if (r.any_error || r.any_nonconverged) return no_convergence;
  return any_fail ? verify_failed : ok;
}

int cmd_plot(const std::string& in, const std::string& out) {
  SweepResult r = read_sweep_csv(slurp(in));
  std::string target = out;
  if (target.empty()) target = fs::path(in).replace_extension(".svg").string();
  atomic_write(target, sweep_svg(r));
  std::printf("%s: slope=%.6g R^2=%.6f\n", target.c_str(), r.fit.slope, r.fit.r_squared);
  return ok;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Levy-Lieb grid experiments"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(LLGRID_VERSION));

  Common c_solve, c_verify, c_comp, c_sweep;
  std::string resume;
  auto* solve = app.add_subcommand("solve", "minimise at every eps of the config, write checkpoints");
  add_common(solve, c_solve);
  solve->add_option("--resume", resume, "checkpoint prefix to warm-start from");

  std::vector<std::string> suites;
  int trials = 200;
  std::string density, mutant = "none", verify_json;
  auto* verify = app.add_subcommand("verify", "run the property suites");
  add_common(verify, c_verify);
  verify->add_option("--suite", suites, "suite name; repeatable (default: all)");
  verify->add_option("--trials", trials, "random cases per property")->check(CLI::PositiveNumber);
  verify->add_option("--density", density, "also validate this density file")->check(CLI::ExistingFile);
  verify->add_option("--mutant", mutant, "swap in a broken Fisher kernel")
      ->check(CLI::IsMember({"none", "no-sqrt", "sign-flip"}));
  verify->add_option("--json", verify_json, "write the report here");

  std::string y_s, z_s, comp_density;
  double r1 = 0, r2 = 0, delta = 0.5, cap = 1.0;
  bool smooth = false;
  auto* comp = app.add_subcommand("competitor", "build a swap competitor and report the energy lemma");
  add_common(comp, c_comp);
  comp->add_option("--y", y_s, "first centre, comma-separated node indices")->required();
  comp->add_option("--z", z_s, "second centre")->required();
  comp->add_option("--r1", r1, "radius around y")->required()->check(CLI::PositiveNumber);
  comp->add_option("--r2", r2, "radius around z")->required()->check(CLI::PositiveNumber);
  comp->add_option("--delta", delta, "prop-decay profile parameter in (0, 1]");
  comp->add_flag("--smooth", smooth, "use the C^1 cubic profile");
  comp->add_option("--lambda-cap", cap, "upper limit for the bump scale factors");
  comp->add_option("--density", comp_density, "density file (default: solve first)")
      ->check(CLI::ExistingFile);

  std::optional<std::string> eps_list;
  std::string cost, sweep_out;
  double alpha = 0, beta = 0;
  int M = 0;
  auto* sweep = app.add_subcommand("sweep", "solve across eps and compare with the decay bound");
  add_common(sweep, c_sweep);
  sweep->add_option("--eps-list", eps_list, "comma-separated eps values");
  sweep->add_option("--alpha", alpha, "diagonal width")->check(CLI::PositiveNumber);
  sweep->add_option("--beta", beta, "concentration radius")->check(CLI::PositiveNumber);
  sweep->add_option("--cost", cost, "cost family")->check(CLI::IsMember({"coulomb", "power", "none"}));
  sweep->add_option("--grid", M, "points per axis")->check(CLI::PositiveNumber);
  sweep->add_option("--out", sweep_out, "JSON report path; CSV and SVG are written next to it");

  std::string plot_in, plot_out;
  auto* plot = app.add_subcommand("plot", "render a sweep CSV as SVG");
  plot->add_option("input", plot_in, "sweep CSV")->required()->check(CLI::ExistingFile);
  plot->add_option("-o,--out", plot_out, "SVG path (default: input with .svg)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? ok : usage;
  }
  try {
    if (*solve) return cmd_solve(c_solve, resume);
    if (*verify) return cmd_verify(c_verify, suites, trials, density, mutant, verify_json);
    if (*comp) return cmd_competitor(c_comp, y_s, z_s, r1, r2, delta, smooth, cap, comp_density);
    if (*sweep) return cmd_sweep(c_sweep, eps_list, alpha, beta, cost, M, sweep_out);
    if (*plot) return cmd_plot(plot_in, plot_out);
  } catch (const ConvergenceError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return no_convergence;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return usage;
  }
  return usage;
}
