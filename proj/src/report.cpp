#include "llgrid/report.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "json.hpp"
#include "llgrid/errors.hpp"

namespace llgrid {
namespace {

std::string num(double v) { return format_double(v); }

SweepRow solve_point(const ExperimentConfig& cfg, const OneBodyDensity& mu, double eps,
                     std::optional<std::vector<double>>& warm, bool keep) {
  SweepRow row;
  row.eps = eps;
  row.alpha = cfg.alpha;
  row.beta = cfg.beta;
  const auto t0 = std::chrono::steady_clock::now();
  try {
    SolverConfig sc = cfg.solver_for(eps);
    sc.initial_potential = warm;
    SolveResult res = minimize_levy_lieb(mu, cfg.cost, sc);
    row.energy = res.report.energy.total();
    row.iterations = res.report.iterations;
    row.converged = res.report.converged;
    row.duality_gap = res.report.duality_gap;
    if (!res.report.potential.empty()) warm = res.report.potential;
    TheoremVerdict v = theorem_verdict(mu, eps, cfg.alpha, cfg.beta, cfg.cost,
                                       res.density.field(), cfg.smallness);
    row.diag_mass = v.diag_mass;
    row.bound = v.bound;
    row.A = v.A;
    row.verdict = v.verdict;
    row.theorem = v;
    if (keep) row.density = std::move(res.density);
  } catch (const std::exception& e) {
    row.verdict = std::string("error: ") + e.what();
    row.diag_mass = std::nan("");
  }
  row.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return row;
}

// Keeps CSV cells free of separators.
std::string csv_cell(std::string s) {
  std::replace(s.begin(), s.end(), ',', ';');
  std::replace(s.begin(), s.end(), '\n', ' ');
  return s;
}

}  // namespace

LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size()) throw ConstraintError("fit_line: size mismatch");
  const std::size_t n = x.size();
  if (n < 2) throw DegenerateError("fit_line: need at least two points");
  double mx = 0, my = 0;
  for (std::size_t k = 0; k < n; ++k) {
    mx += x[k];
    my += y[k];
  }
  mx /= n;
  my /= n;
  double sxx = 0, sxy = 0, syy = 0;
  for (std::size_t k = 0; k < n; ++k) {
    sxx += (x[k] - mx) * (x[k] - mx);
    sxy += (x[k] - mx) * (y[k] - my);
    syy += (y[k] - my) * (y[k] - my);
  }
  if (sxx == 0) throw DegenerateError("fit_line: all x values coincide");
  LineFit f;
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  f.r_squared = syy == 0 ? 1.0 : (sxy * sxy) / (sxx * syy);
  f.points = static_cast<int>(n);
  return f;
}

void summarize_sweep(SweepResult& r) {
  std::vector<double> x, y;
  r.strictly_decreasing = r.rows.size() >= 2;
  r.any_error = false;
  r.any_nonconverged = false;
  for (std::size_t k = 0; k < r.rows.size(); ++k) {
    const SweepRow& row = r.rows[k];
    if (row.verdict.rfind("error", 0) == 0) r.any_error = true;
    else if (!row.converged) r.any_nonconverged = true;
    if (k > 0 && !(row.diag_mass < r.rows[k - 1].diag_mass)) r.strictly_decreasing = false;
    if (row.diag_mass > 0 && std::isfinite(row.diag_mass)) {
      x.push_back(std::sqrt(row.alpha / row.eps));
      y.push_back(std::log(row.diag_mass));
    }
  }
  r.fit = LineFit{};
  if (x.size() >= 2) {
    try {
      r.fit = fit_line(x, y);
    } catch (const DegenerateError&) {
    }
  }
}

SweepResult run_sweep(const ExperimentConfig& cfg, bool keep_densities) {
  if (cfg.eps_list.empty()) throw ConstraintError("sweep: eps list is empty");
  std::vector<double> eps = cfg.eps_list;
  std::sort(eps.begin(), eps.end(), std::greater<>());
  eps.erase(std::unique(eps.begin(), eps.end()), eps.end());
  const OneBodyDensity mu = cfg.marginal_density();

  SweepResult result;
  result.config_hash = cfg.hash();
  result.rows.resize(eps.size());
  if (cfg.continuation) {
    std::optional<std::vector<double>> warm = cfg.solver.initial_potential;
    for (std::size_t k = 0; k < eps.size(); ++k)
      result.rows[k] = solve_point(cfg, mu, eps[k], warm, keep_densities);
  } else {
    // Kernels inside each solve then run on one thread.
#pragma omp parallel for schedule(dynamic, 1)
    for (std::ptrdiff_t k = 0; k < static_cast<std::ptrdiff_t>(eps.size()); ++k) {
      std::optional<std::vector<double>> warm = cfg.solver.initial_potential;
      result.rows[k] = solve_point(cfg, mu, eps[k], warm, keep_densities);
    }
  }
  summarize_sweep(result);
  return result;
}

std::string sweep_csv(const SweepResult& r) {
  std::string s = "# config_hash=" + r.config_hash + "\n";
  s += "eps,alpha,beta,diag_mass,bound,A,verdict\n";
  for (const SweepRow& row : r.rows) {
    s += num(row.eps) + "," + num(row.alpha) + "," + num(row.beta) + "," + num(row.diag_mass) +
         "," + num(row.bound) + "," + num(row.A) + "," + csv_cell(row.verdict) + "\n";
  }
  return s;
}

std::string sweep_json(const SweepResult& r) {
  using nlohmann::ordered_json;
  ordered_json j;
  j["config_hash"] = r.config_hash;
  j["rows"] = ordered_json::array();
  for (const SweepRow& row : r.rows) {
    ordered_json o;
    o["eps"] = row.eps;
    o["alpha"] = row.alpha;
    o["beta"] = row.beta;
    o["diag_mass"] = std::isfinite(row.diag_mass) ? ordered_json(row.diag_mass) : ordered_json();
    o["bound"] = row.bound;
    o["A"] = row.A;
    o["verdict"] = row.verdict;
    o["pass"] = row.verdict == "pass";
    o["energy"] = row.energy;
    o["iterations"] = row.iterations;
    o["converged"] = row.converged;
    o["duality_gap"] = row.duality_gap ? ordered_json(*row.duality_gap) : ordered_json();
    if (row.theorem) {
      const HypothesisCheck& h = row.theorem->hypotheses;
      o["hypotheses"] = {{"kappa", h.kappa_value},     {"kappa_ok", h.kappa_ok},
                         {"alpha_ok", h.alpha_ok},     {"eps_ok", h.eps_ok},
                         {"smallness", h.smallness_factor},
                         {"dn_generalized", row.theorem->dn_generalized}};
    }
    j["rows"].push_back(o);
  }
  j["fit"] = {{"slope", r.fit.slope},
              {"intercept", r.fit.intercept},
              {"r_squared", r.fit.r_squared},
              {"points", r.fit.points}};
  j["strictly_decreasing"] = r.strictly_decreasing;
  return j.dump(2) + "\n";
}

SweepResult read_sweep_csv(const std::string& text) {
  SweepResult r;
  std::istringstream in(text);
  std::string line;
  bool header = false;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (line.rfind("# config_hash=", 0) == 0) {
      r.config_hash = line.substr(14);
      continue;
    }
    if (line[0] == '#') continue;
    if (!header) {
      if (line != "eps,alpha,beta,diag_mass,bound,A,verdict")
        throw FormatError("sweep csv: unexpected header '" + line + "'");
      header = true;
      continue;
    }
    std::vector<std::string> cells;
    std::string cell;
    std::istringstream ls(line);
    while (std::getline(ls, cell, ',')) cells.push_back(cell);
    if (cells.size() != 7) throw FormatError("sweep csv: expected 7 columns in '" + line + "'");
    SweepRow row;
    try {
      row.eps = std::stod(cells[0]);
      row.alpha = std::stod(cells[1]);
      row.beta = std::stod(cells[2]);
      row.diag_mass = std::stod(cells[3]);
      row.bound = std::stod(cells[4]);
      row.A = std::stod(cells[5]);
    } catch (const std::exception&) {
      throw FormatError("sweep csv: bad number in '" + line + "'");
    }
    row.verdict = cells[6];
    row.converged = true;
    r.rows.push_back(row);
  }
  if (!header) throw FormatError("sweep csv: missing header");
  summarize_sweep(r);
  return r;
}

std::string sweep_svg(const SweepResult& r) {
  std::vector<double> x, y;
  for (const SweepRow& row : r.rows)
    if (row.diag_mass > 0 && std::isfinite(row.diag_mass)) {
      x.push_back(std::sqrt(row.alpha / row.eps));
      y.push_back(std::log(row.diag_mass));
    }
  const double W = 640, H = 420, left = 70, right = 20, top = 40, bottom = 50;
  double x0 = 0, x1 = 1, y0 = -1, y1 = 0;
  if (!x.empty()) {
    x0 = *std::min_element(x.begin(), x.end());
    x1 = *std::max_element(x.begin(), x.end());
    y0 = *std::min_element(y.begin(), y.end());
    y1 = *std::max_element(y.begin(), y.end());
  }
  if (x1 - x0 < 1e-12) {
    x0 -= 0.5;
    x1 += 0.5;
  }
  if (y1 - y0 < 1e-12) {
    y0 -= 0.5;
    y1 += 0.5;
  }
  const double padx = 0.05 * (x1 - x0), pady = 0.05 * (y1 - y0);
  x0 -= padx;
  x1 += padx;
  y0 -= pady;
  y1 += pady;
  auto px = [&](double v) { return left + (v - x0) / (x1 - x0) * (W - left - right); };
  auto py = [&](double v) { return top + (y1 - v) / (y1 - y0) * (H - top - bottom); };
  char buf[256];
  std::string s;
  std::snprintf(buf, sizeof buf,
                "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"%g\" height=\"%g\" "
                "viewBox=\"0 0 %g %g\" font-family=\"sans-serif\" font-size=\"12\">\n",
                W, H, W, H);
  s += buf;
  s += "<!-- config_hash=" + r.config_hash + " -->\n";
  s += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  std::snprintf(buf, sizeof buf,
                "<rect x=\"%g\" y=\"%g\" width=\"%g\" height=\"%g\" fill=\"none\" "
                "stroke=\"black\"/>\n",
                left, top, W - left - right, H - top - bottom);
  s += buf;
  for (int t = 0; t <= 4; ++t) {
    const double xv = x0 + (x1 - x0) * t / 4, yv = y0 + (y1 - y0) * t / 4;
    std::snprintf(buf, sizeof buf,
                  "<text x=\"%.2f\" y=\"%.2f\" text-anchor=\"middle\">%.3g</text>\n", px(xv),
                  H - bottom + 16, xv);
    s += buf;
    std::snprintf(buf, sizeof buf,
                  "<text x=\"%.2f\" y=\"%.2f\" text-anchor=\"end\">%.3g</text>\n", left - 6,
                  py(yv) + 4, yv);
    s += buf;
  }
  std::snprintf(buf, sizeof buf,
                "<text x=\"%.2f\" y=\"%.2f\" text-anchor=\"middle\">sqrt(alpha/eps)</text>\n",
                left + (W - left - right) / 2, H - 12);
  s += buf;
  std::snprintf(buf, sizeof buf,
                "<text x=\"16\" y=\"%.2f\" text-anchor=\"middle\" "
                "transform=\"rotate(-90 16 %.2f)\">ln(diagonal mass)</text>\n",
                top + (H - top - bottom) / 2, top + (H - top - bottom) / 2);
  s += buf;
  if (!x.empty()) {
    s += "<polyline fill=\"none\" stroke=\"steelblue\" stroke-width=\"2\" points=\"";
    for (std::size_t k = 0; k < x.size(); ++k) {
      std::snprintf(buf, sizeof buf, "%s%.2f,%.2f", k ? " " : "", px(x[k]), py(y[k]));
      s += buf;
    }
    s += "\"/>\n";
    for (std::size_t k = 0; k < x.size(); ++k) {
      std::snprintf(buf, sizeof buf,
                    "<circle cx=\"%.2f\" cy=\"%.2f\" r=\"3\" fill=\"steelblue\"/>\n", px(x[k]),
                    py(y[k]));
      s += buf;
    }
  }
  if (r.fit.points >= 2) {
    const double fa = x0 + padx, fb = x1 - padx;
    std::snprintf(buf, sizeof buf,
                  "<line x1=\"%.2f\" y1=\"%.2f\" x2=\"%.2f\" y2=\"%.2f\" stroke=\"darkorange\" "
                  "stroke-dasharray=\"6 4\"/>\n",
                  px(fa), py(r.fit.slope * fa + r.fit.intercept), px(fb),
                  py(r.fit.slope * fb + r.fit.intercept));
    s += buf;
    std::snprintf(buf, sizeof buf,
                  "<text x=\"%.2f\" y=\"24\">fitted slope %.4g (R^2 = %.4f); bound slope "
                  "-1/24 = %.4g</text>\n",
                  left, r.fit.slope, r.fit.r_squared, -1.0 / 24.0);
    s += buf;
  }
  s += "</svg>\n";
  return s;
}

}  // namespace llgrid
