#include "llgrid/verify.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <map>
#include <numbers>

#include "json.hpp"
#include "llgrid/competitor.hpp"
#include "llgrid/density_io.hpp"
#include "llgrid/diagonal.hpp"
#include "llgrid/errors.hpp"
#include "llgrid/random_fields.hpp"
#include "llgrid/solver.hpp"

namespace llgrid {
namespace {

using nlohmann::json;

json field_json(const Field& f) {
  json j = {{"d", f.grid.dim()},  {"N", f.grid.particles()}, {"M", f.grid.points()},
            {"a", f.grid.lo()},   {"b", f.grid.hi()}};
  if (f.values.size() <= 4096) j["values"] = f.values;
  return j;
}

class Suite {
 public:
  Suite(std::string name, const VerifyOptions& opt) : opt_(opt) { res_.name = std::move(name); }

  // Records one check; returns ok.
  bool check(bool ok, const std::string& what, const std::string& detail, json replay = {}) {
    ++res_.checks;
    if (!ok) {
      replay["suite"] = res_.name;
      replay["check"] = what;
      replay["seed"] = opt_.seed;
      res_.failures.push_back({res_.name, what, detail, replay.dump()});
    }
    return ok;
  }
  bool stop() const { return opt_.stop_early && !res_.failures.empty(); }
  SuiteResult finish(double seconds) {
    res_.wall_time = seconds;
    return std::move(res_);
  }

 private:
  const VerifyOptions& opt_;
  SuiteResult res_;
};

std::string fmt(const char* label, double v) { return std::string(label) + "=" + format_double(v); }

double rel(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

// Small system used by suites that solve or scan: d = 1, N = 2, M = 8 unless
// the config marginal needs its own grid.
OneBodyDensity small_marginal(const ExperimentConfig& cfg, int M, int N) {
  ExperimentConfig c = cfg;
  c.d = 1;
  c.N = N;
  c.M = M;
  if (c.marginal == "table") c.marginal = "uniform";
  return c.marginal_density();
}

void grid_suite(Suite& s, const VerifyOptions& opt) {
  gen::Rng rng(opt.seed);
  const int trials = std::max(1, opt.trials / 4);
  for (int t = 0; t < trials && !s.stop(); ++t) {
    GridSpec g(1, 3, 5, 0.0, 1.0);
    Field P = gen::random_density(g, rng, 0.2);
    json rep = {{"trial", t}, {"P", field_json(P)}};
    Field m01 = marginal(P, IndexSet({0, 1}, 3));
    Field m0a = marginal(m01, IndexSet::single(0, 2));
    Field m0b = marginal(P, IndexSet::single(0, 3));
    double err = 0.0;
    for (std::size_t k = 0; k < m0a.values.size(); ++k)
      err = std::max(err, std::abs(m0a.values[k] - m0b.values[k]));
    s.check(err <= 1e-14, "marginal consistency", fmt("max_abs_error", err), rep);
    for (int i = 0; i < 3; ++i) {
      const double mass = marginal(P, IndexSet::single(i, 3)).integral();
      s.check(std::abs(mass - 1.0) <= 1e-10, "marginal mass", fmt("mass", mass), rep);
    }
  }
  for (int t = 0; t < trials && !s.stop(); ++t) {
    GridSpec g(1, 2, 9, 0.0, 1.0);
    Field P = gen::random_density(g, rng, 0.1);
    json rep = {{"trial", t}, {"P", field_json(P)}};
    double prev = -1.0;
    for (int k = 0; k <= 10; ++k) {
      const double a = 0.1 * k + 0.01;
      const double m = diagonal_mass(P, a);
      s.check(m >= prev - 1e-15, "diagonal mass monotone in alpha", fmt("alpha", a), rep);
      prev = m;
    }
    const double full = diagonal_mass(P, g.with_particles(1).diameter() + g.spacing());
    s.check(std::abs(full - 1.0) <= 1e-12, "diagonal mass at diameter", fmt("mass", full), rep);

    Field mu1 = marginal(P, IndexSet::single(0, 2));
    OneBodyDensity mu(g, mu1.values);
    double kp = 0.0;
    for (int k = 1; k <= 10; ++k) {
      const double kv = kappa(mu, 0.1 * k);
      s.check(kv >= kp - 1e-15, "kappa monotone in r", fmt("r", 0.1 * k), rep);
      kp = kv;
    }
    const double kfull = kappa(mu, g.with_particles(1).diameter());
    s.check(std::abs(kfull - 1.0) <= 1e-12, "kappa at diameter", fmt("kappa", kfull), rep);

    Region omega(g);
    for (std::size_t x = 0; x < g.states(); ++x) omega.inside[x] = gen::uniform(rng, 0, 1) < 0.8;
    const double r1 = gen::uniform(rng, 0.0, 0.3), r2 = r1 + gen::uniform(rng, 0.0, 0.3);
    Region e1 = erode(omega, r1), e2 = erode(omega, r2);
    bool sub = true;
    for (std::size_t x = 0; x < g.states(); ++x)
      if (e2.inside[x] && !e1.inside[x]) sub = false;
    s.check(sub, "erosion antitone", fmt("r1", r1) + " " + fmt("r2", r2), rep);
    Region e0 = erode(omega, 0.0);
    s.check(e0.inside == omega.inside, "erosion identity at r=0", "", rep);
  }
}

void kinetic_suite(Suite& s, const VerifyOptions& opt) {
  gen::Rng rng(opt.seed + 1);
  const auto& F = opt.fisher;
  const int sizes[] = {4, 8, 12, 16};
  for (int t = 0; t < opt.trials && !s.stop(); ++t) {
    const int M = sizes[t % 4];
    GridSpec g(1, 2, M, 0.0, 1.0);
    Field P = gen::random_density(g, rng, t % 3 == 0 ? 0.3 : 0.0);
    Field Q = gen::random_density(g, rng, t % 5 == 0 ? 0.3 : 0.0);
    json rep = {{"trial", t}, {"P", field_json(P)}, {"Q", field_json(Q)}};
    const double fp = F(P);
    s.check(fp >= 0 && std::isfinite(fp), "nonnegative", fmt("E_kin", fp), rep);
    for (double lam : {0.5, 2.0, 10.0}) {
      Field L = P;
      for (double& v : L.values) v *= lam;
      const double e = rel(F(L), lam * fp);
      s.check(e <= 1e-15, "homogeneity", fmt("lambda", lam) + " " + fmt("relative_error", e), rep);
    }
    Field S = P;
    for (std::size_t k = 0; k < S.values.size(); ++k) S.values[k] += Q.values[k];
    const double fq = F(Q), fs = F(S);
    const double slack = fp + fq - fs;
    s.check(slack >= -1e-12 * std::max(1.0, fp + fq), "subadditivity", fmt("slack", slack), rep);

    Field m0 = marginal(P, IndexSet::single(0, 2)), m1 = marginal(P, IndexSet::single(1, 2));
    const double split = fp - F(m0) - F(m1);
    s.check(split >= -1e-12 * std::max(1.0, fp), "marginal split", fmt("slack", split), rep);

    GridSpec g1 = g.with_particles(1);
    Field a = gen::random_density(g1, rng), b = gen::random_density(g1, rng);
    Field prod = tensor_product({a, b});
    const double eq = rel(F(prod), F(a) + F(b));
    s.check(eq <= 1e-12, "product equality", fmt("relative_error", eq),
            {{"trial", t}, {"a", field_json(a)}, {"b", field_json(b)}});
  }
}

void ims_suite(Suite& s, const VerifyOptions&) {
  auto smooth_case = [](int M) {
    GridSpec g(1, 1, M, 0.0, 1.0);
    Field P = gen::gaussian_field(g, 0.1, 0.5);
    std::vector<Field> eta(3, Field(g));
    for (int x = 0; x < M; ++x) {
      const double t = g.coordinate(x);
      const double e1 = std::pow(std::cos(std::numbers::pi * t / 2), 2);
      const double e2 = (1 - e1) * std::pow(std::sin(std::numbers::pi * t), 2);
      eta[0].values[x] = e1;
      eta[1].values[x] = e2;
      eta[2].values[x] = std::max(0.0, 1 - e1 - e2);
    }
    return ims_split(P, eta);
  };
  const ImsSplit at64 = smooth_case(64);
  const double d64 = std::abs(at64.defect) / at64.left;
  s.check(d64 <= 0.05, "smooth defect at M=64", fmt("relative_defect", d64));
  double prev = d64;
  for (int M : {128, 256, 512}) {
    const ImsSplit r = smooth_case(M);
    const double d = std::abs(r.defect) / r.left;
    s.check(prev / d >= 1.8, "defect shrinks per doubling",
            "M=" + std::to_string(M) + " " + fmt("ratio", prev / d));
    prev = d;
  }
  GridSpec g(1, 2, 8, 0.0, 1.0);
  gen::Rng rng(3);
  Field P = gen::random_density(g, rng);
  std::vector<Field> third(3, Field(g, std::vector<double>(g.states(), 1.0 / 3.0)));
  const ImsSplit c = ims_split(P, third);
  s.check(std::abs(c.defect) <= 1e-12 * c.left, "constant partition", fmt("defect", c.defect));
  std::vector<Field> single{Field(g, std::vector<double>(g.states(), 1.0)), Field(g), Field(g)};
  const ImsSplit o = ims_split(P, single);
  s.check(std::abs(o.defect) <= 1e-12 * o.left, "single active cutoff", fmt("defect", o.defect));
}

void interaction_suite(Suite& s, const ExperimentConfig& cfg, const VerifyOptions& opt) {
  gen::Rng rng(opt.seed + 2);
  const CostSpec& cost = cfg.cost;
  int bad = 0;
  for (int k = 0; k < 10000; ++k) {
    const double x = gen::uniform(rng, 0, 1), y = gen::uniform(rng, 0, 1);
    if (x == y) continue;
    const double t = std::abs(x - y);
    const double c = cost(std::span<const double>(&x, 1), std::span<const double>(&y, 1));
    if (!(cost.lower_envelope(t) <= c * (1 + 1e-14) && c <= cost.upper_envelope(t) * (1 + 1e-14)))
      ++bad;
  }
  s.check(bad == 0, "envelopes bracket the cost", "violations=" + std::to_string(bad));
  bool mono = true;
  for (int k = -8; k < 4; ++k) {
    const double t0 = std::pow(10.0, k / 2.0), t1 = std::pow(10.0, (k + 1) / 2.0);
    if (cost.lower_envelope(t1) > cost.lower_envelope(t0) ||
        cost.upper_envelope(t1) > cost.upper_envelope(t0))
      mono = false;
  }
  s.check(mono, "envelopes nonincreasing", cost.describe());
  if (cost.family() == CostFamily::coulomb || cost.family() == CostFamily::power) {
    const double h = 0.01;
    s.check(cost.lower_envelope(h / 10) > 10 * cost.lower_envelope(h) * (1 - 1e-12) ||
                cost.family() == CostFamily::power,
            "lower envelope diverges", fmt("m(h/10)/m(h)", cost.lower_envelope(h / 10) /
                                                             cost.lower_envelope(h)));
  }
  for (int t = 0; t < std::max(1, opt.trials / 10) && !s.stop(); ++t) {
    GridSpec g(1, 3, 6, 0.0, 1.0);
    Field P = gen::random_density(g, rng, 0.2);
    double oracle = 0.0;
    const double h = g.spacing();
    const double capv = cost.cap(h).value_or(std::numeric_limits<double>::infinity());
    std::vector<int> c(3);
    for (std::size_t x = 0; x < g.states(); ++x) {
      g.unflatten(x, c);
      double v = 0.0;
      for (int i = 0; i < 3; ++i)
        for (int j = i + 1; j < 3; ++j)
          v += c[i] == c[j] ? capv : cost.radial(std::abs(c[i] - c[j]) * h);
      oracle += P.values[x] * v;
    }
    oracle *= g.cell_volume();
    const double e = rel(interaction_energy(P, cost), oracle);
    s.check(e <= 1e-12, "pair-sum oracle", fmt("relative_error", e),
            {{"trial", t}, {"P", field_json(P)}});
  }
}

void solver_suite(Suite& s, const ExperimentConfig& cfg, const VerifyOptions& opt) {
  gen::Rng rng(opt.seed + 3);
  const OneBodyDensity mu = small_marginal(cfg, 8, 2);
  const CostSpec& cost = cfg.cost;
  const double eps = cfg.eps_list.front();
  const int trials = std::max(1, opt.trials / 2);
  for (int t = 0; t < trials && !s.stop(); ++t) {
    Field P = gen::random_coupling(mu, rng), Q = gen::random_coupling(mu, rng);
    const double lam = gen::uniform(rng, 0.01, 0.99);
    Field R = P;
    for (std::size_t k = 0; k < R.values.size(); ++k)
      R.values[k] = lam * P.values[k] + (1 - lam) * Q.values[k];
    const double eP = levy_lieb_energy(P, eps, cost).total();
    const double eQ = levy_lieb_energy(Q, eps, cost).total();
    const double eR = levy_lieb_energy(R, eps, cost).total();
    const double slack = lam * eP + (1 - lam) * eQ - eR;
    json rep = {{"trial", t}, {"t", lam}, {"P", field_json(P)}, {"Q", field_json(Q)}};
    s.check(slack >= -1e-10, "segment convexity", fmt("slack", slack), rep);

    std::vector<double> u(mu.values().size());
    for (double& v : u) v = gen::uniform(rng, -5, 5);
    const double lb = dual_lower_bound(mu, OneBodyPotential(u), eps, cost);
    s.check(lb <= eP + 1e-9 * std::max(1.0, std::abs(eP)), "weak duality",
            fmt("bound", lb) + " " + fmt("primal", eP), {{"trial", t}, {"u", u}, {"P", field_json(P)}});
  }
  if (s.stop()) return;
  SolverConfig sc = cfg.solver_for(eps);
  SolveResult a = minimize_levy_lieb(mu, cost, sc);
  s.check(a.report.converged, "reference solve converges", fmt("gap", a.report.duality_gap.value_or(NAN)));
  s.check(a.report.marginal_residual <= sc.tol_marginal, "minimiser is a coupling",
          fmt("residual", a.report.marginal_residual));
  bool monotone = true;
  for (std::size_t k = 1; k < a.report.energy_trace.size(); ++k)
    if (a.report.energy_trace[k] > a.report.energy_trace[k - 1] + 1e-12) monotone = false;
  s.check(monotone, "energy trace nonincreasing", "");
  const double prod = levy_lieb_energy(NBodyDensity::product(mu), eps, cost).total();
  s.check(a.report.energy.total() <= prod + 1e-12, "no worse than the product coupling",
          fmt("energy", a.report.energy.total()) + " " + fmt("product", prod));
  if (a.report.dual_lower_bound)
    s.check(*a.report.dual_lower_bound <= a.report.energy.total() + 1e-9, "certificate below primal",
            fmt("bound", *a.report.dual_lower_bound));
  SolveResult b = minimize_projected_gradient(mu, cost, sc);
  const double agree = rel(b.report.energy.total(), a.report.energy.total());
  s.check(agree <= 1e-6, "cross-solver agreement", fmt("relative_difference", agree));
  const StationarityReport st = validate_minimizer(a.density, mu, eps, cost);
  s.check(st.stationary, "first-order stationarity", fmt("best_descent", st.best_descent));
}

void competitor_suite(Suite& s, const ExperimentConfig& cfg, const VerifyOptions& opt) {
  gen::Rng rng(opt.seed + 4);
  const CostSpec& cost = cfg.cost;
  const int trials = std::max(1, opt.trials / 2);
  for (int t = 0; t < trials && !s.stop(); ++t) {
    const int N = 2 + t % 2;
    GridSpec g(1, N, 8, 0.0, 1.0);
    const OneBodyDensity mu = OneBodyDensity::uniform(g);
    Field P = gen::random_coupling(mu, rng, 1e-15);
    const double h = g.spacing();
    std::vector<int> y, z;
    double dist = 0.0;
    do {
      y = gen::random_node(g, rng);
      z = gen::random_node(g, rng);
      double n2 = 0;
      for (int a = 0; a < g.axes(); ++a) n2 += double(y[a] - z[a]) * (y[a] - z[a]);
      dist = std::sqrt(n2) * h;
    } while (dist < 2.5 * h);
    const double r1 = gen::uniform(rng, h, dist - 1.2 * h);
    const double r2 = gen::uniform(rng, 0.6 * h, std::max(0.61 * h, dist - r1 - 0.1 * h));
    if (r1 + r2 >= dist) continue;
    const BumpProfile prof = t % 4 == 3 ? BumpProfile::smooth()
                                        : BumpProfile::prop_decay(gen::uniform(rng, 0.2, 1.0));
    json rep = {{"trial", t}, {"y", y}, {"z", z}, {"r1", r1}, {"r2", r2},
                {"smooth", prof.shape == BumpShape::smooth}, {"delta", prof.delta},
                {"P", field_json(P)}};
    try {
      SwapState st = make_bumps(P, y, z, r1, r2, prof, 0.9);
      Field Pbar = swap_competitor(st, P);
      const double res_before = check_in_Pi_N(P, mu.values(), 1.0).residual;
      const double res_after = check_in_Pi_N(Pbar, mu.values(), 1.0).residual;
      s.check(res_after <= res_before + 1e-12, "marginal preservation",
              fmt("before", res_before) + " " + fmt("after", res_after), rep);
      const double lo = *std::min_element(Pbar.values.begin(), Pbar.values.end());
      s.check(lo >= -1e-15, "nonnegativity", fmt("min", lo), rep);
      const ContiReport cr = lemma_conti_check(P, st, cfg.eps_list.front(), cost);
      s.check(cr.vee_relative_error <= 1e-10, "interaction swap identity",
              fmt("relative_error", cr.vee_relative_error), rep);
    } catch (const DegenerateError& e) {
      // Random instances may put a cutoff edge where 1 - eta1 - eta2 vanishes.
      s.check(true, "degenerate instance skipped", e.what());
    }
  }
}

void diagonal_suite(Suite& s, const ExperimentConfig& cfg, const VerifyOptions& opt) {
  gen::Rng rng(opt.seed + 5);
  s.check(std::abs(C_delta(1.0, 3, 1) - 60.0) <= 1e-12, "C(1) at dN=3", fmt("C", C_delta(1.0, 3, 1)));
  {
    const int N = 50;
    const double c = C_delta(2.0 / (3 * N), 3, N) / (N * N);
    s.check(std::abs(c / 31.0 - 1) <= 0.02, "C(2/(3N)) asymptotics", fmt("C/N^2", c));
  }
  {
    int turns = 0;
    double prev = C_delta(0.001, 1, 2), prevdiff = -1;
    for (int k = 2; k <= 1000; ++k) {
      const double c = C_delta(0.001 * k, 1, 2);
      const double diff = c - prev;
      if ((diff > 0) != (prevdiff > 0)) ++turns;
      prev = c;
      prevdiff = diff;
    }
    s.check(turns == 1, "C(delta) has one interior minimum", "sign changes=" + std::to_string(turns));
  }
  const CostSpec coul = CostSpec::coulomb();
  {
    const double a0 = alpha0_threshold(0.125, 1e-6, 2, 1, coul);
    s.check(std::abs(a0 - 1.0 / 256) <= 1e-12, "alpha0 worked value", fmt("alpha0", a0));
  }
  for (int t = 0; t < 100 && !s.stop(); ++t) {
    const double beta = gen::uniform(rng, 0.05, 1.0), eps = std::pow(10.0, gen::uniform(rng, -7, -1));
    const int N = 2 + t % 3;
    const double closed = 1.0 / (2.0 * alpha0_level(beta, eps, N, coul));
    const double bis = alpha0_threshold(beta, eps, N, 1, coul);
    s.check(std::abs(bis - closed) <= 1e-12 * std::max(1.0, closed), "alpha0 bisection vs closed form",
            fmt("closed", closed) + " " + fmt("bisection", bis), {{"beta", beta}, {"eps", eps}, {"N", N}});
    const double alpha = gen::uniform(rng, 1e-3, 0.5);
    const double lhs = std::sqrt(alpha * alpha * coul.lower_envelope(2 * alpha) / (8 * eps)) / 6;
    const double rhs = std::sqrt(alpha / eps) / 24;
    s.check(rel(lhs, rhs) <= 1e-14, "coulomb exponent identity", fmt("relative_error", rel(lhs, rhs)),
            {{"alpha", alpha}, {"eps", eps}});
    if (t < 10) {
      const bool general = coul.lower_envelope(2 * alpha) >= 8 * (N - 1) * coul.upper_envelope(beta / 2);
      const bool special = alpha <= beta / (32.0 * (N - 1)) * (1 + 1e-15);
      s.check(general == special, "coulomb specialisation of the alpha condition",
              fmt("alpha", alpha) + " " + fmt("beta", beta), {{"alpha", alpha}, {"beta", beta}, {"N", N}});
    }
  }
  (void)cfg;
  for (int M : {8, 12, 16}) {
    const int trials = M == 8 ? std::max(1, opt.trials / 4) : std::max(1, opt.trials / 20);
    for (int t = 0; t < trials && !s.stop(); ++t) {
      GridSpec g(1, 2, M, 0.0, 1.0);
      Field P = gen::random_density(g, rng, 0.3);
      Region full(g, true);
      const double r = 3 * g.spacing();
      try {
        const DoublingPoint dp = find_doubling_point(P, full, r, 0.2);
        s.check(dp.satisfied, "doubling point exists", fmt("ratio", dp.ratio));
      } catch (const std::exception& e) {
        s.check(false, "doubling point exists", e.what(), {{"M", M}, {"trial", t}, {"P", field_json(P)}});
      }
    }
  }
}

void density_file_suite(Suite& s, const ExperimentConfig& cfg, const std::string& path) {
  try {
    NBodyDensity P = read_density(path);
    s.check(true, "readable and normalised", path);
    const OneBodyDensity mu = cfg.marginal_density();
    if (P.grid().same_layout(mu.system_grid())) {
      const auto r = check_in_Pi_N(P, mu, cfg.solver.tol_marginal);
      s.check(r.pass, "marginals match the config", fmt("residual", r.residual), {{"path", path}});
    }
  } catch (const std::exception& e) {
    s.check(false, "readable and normalised", e.what(), {{"path", path}});
  }
}

}  // namespace

bool VerifyReport::pass() const {
  return std::all_of(suites.begin(), suites.end(), [](const SuiteResult& r) { return r.pass(); });
}

const CheckFailure* VerifyReport::first_failure() const {
  for (const auto& s : suites)
    if (!s.failures.empty()) return &s.failures.front();
  return nullptr;
}

std::string VerifyReport::to_json() const {
  nlohmann::ordered_json j;
  j["pass"] = pass();
  j["suites"] = nlohmann::ordered_json::array();
  for (const auto& s : suites) {
    nlohmann::ordered_json o;
    o["name"] = s.name;
    o["checks"] = s.checks;
    o["failures"] = s.failures.size();
    o["wall_time"] = s.wall_time;
    o["pass"] = s.pass();
    j["suites"].push_back(o);
  }
  if (const CheckFailure* f = first_failure()) {
    j["first_failure"] = {{"suite", f->suite},
                          {"check", f->check},
                          {"detail", f->detail},
                          {"replay", nlohmann::json::parse(f->replay)}};
  }
  return j.dump(2) + "\n";
}

std::vector<std::string> verify_suite_names() {
  return {"grid", "kinetic", "ims", "interaction", "solver", "competitor", "diagonal"};
}

SuiteResult run_suite(const std::string& name, const ExperimentConfig& cfg,
                      const VerifyOptions& opt) {
  Suite s(name, opt);
  const auto t0 = std::chrono::steady_clock::now();
  try {
    if (name == "grid") grid_suite(s, opt);
    else if (name == "kinetic") kinetic_suite(s, opt);
    else if (name == "ims") ims_suite(s, opt);
    else if (name == "interaction") interaction_suite(s, cfg, opt);
    else if (name == "solver") solver_suite(s, cfg, opt);
    else if (name == "competitor") competitor_suite(s, cfg, opt);
    else if (name == "diagonal") diagonal_suite(s, cfg, opt);
    else if (name == "density-file") {
      if (!opt.density_path) throw ConstraintError("density-file suite needs a path");
      density_file_suite(s, cfg, *opt.density_path);
    } else throw ConstraintError("unknown verify suite '" + name + "'");
  } catch (const ConstraintError&) {
    throw;
  } catch (const std::exception& e) {
    s.check(false, "suite raised", e.what());
  }
  return s.finish(std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
}

VerifyReport run_verify(const ExperimentConfig& cfg, const VerifyOptions& opt) {
  VerifyReport r;
  for (const auto& name : verify_suite_names()) r.suites.push_back(run_suite(name, cfg, opt));
  if (opt.density_path) r.suites.push_back(run_suite("density-file", cfg, opt));
  return r;
}

namespace mutants {

double fisher_without_sqrt(const Field& P) {
  const GridSpec& g = P.grid;
  const double h = g.spacing();
  double acc = 0.0;
  for (int a = 0; a < g.axes(); ++a) {
    const std::size_t st = g.stride(a);
    std::vector<int> c(g.axes());
    for (std::size_t x = 0; x < g.states(); ++x) {
      g.unflatten(x, c);
      if (c[a] + 1 >= g.points()) continue;
      const double dP = P.values[x + st] - P.values[x];
      acc += dP * dP;
    }
  }
  return 4.0 * acc * g.cell_volume() / (h * h);
}

double fisher_sign_flip(const Field& P) {
  const GridSpec& g = P.grid;
  const double h = g.spacing();
  double acc = 0.0;
  for (int a = 0; a < g.axes(); ++a) {
    const std::size_t st = g.stride(a);
    std::vector<int> c(g.axes());
    for (std::size_t x = 0; x < g.states(); ++x) {
      g.unflatten(x, c);
      if (c[a] + 1 >= g.points()) continue;
      const double s = std::sqrt(P.values[x + st]) + std::sqrt(P.values[x]);
      acc += s * s;
    }
  }
  return 4.0 * acc * g.cell_volume() / (h * h);
}

}  // namespace mutants

}  // namespace llgrid
