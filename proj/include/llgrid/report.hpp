#pragma once

#include <optional>
#include <string>
#include <vector>

#include "llgrid/config.hpp"
#include "llgrid/diagonal.hpp"
#include "llgrid/solver.hpp"

namespace llgrid {

struct SweepRow {
  double eps = 0.0;
  double alpha = 0.0;
  double beta = 0.0;
  double diag_mass = 0.0;
  double bound = 0.0;
  double A = 0.0;
  std::string verdict;  // "pass", "fail", "out of regime" or "error: <reason>"
  double energy = 0.0;
  int iterations = 0;
  bool converged = false;
  std::optional<double> duality_gap;
  std::optional<TheoremVerdict> theorem;
  double wall_time = 0.0;
  // The minimiser itself; kept in memory only.
  std::optional<NBodyDensity> density;
};

struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
  int points = 0;
};

// Least squares y = slope x + intercept.  Needs two distinct x values.
LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y);

struct SweepResult {
  std::string config_hash;
  std::vector<SweepRow> rows;  // ordered by decreasing eps
  LineFit fit;                 // ln(diag_mass) against sqrt(alpha/eps), positive masses only
  bool strictly_decreasing = false;  // diag_mass drops at every step to smaller eps
  bool any_nonconverged = false;
  bool any_error = false;
};

// Solves at every eps of the config and evaluates the theorem verdicts.  With
// cfg.continuation the points run in order of decreasing eps, each starting from
// the previous multiplier; otherwise they are independent and run concurrently.
// A failing point is recorded in its row and the sweep carries on.
SweepResult run_sweep(const ExperimentConfig& cfg, bool keep_densities = false);

// Fit and monotonicity over the rows (already ordered by decreasing eps).
void summarize_sweep(SweepResult& result);

// "# config_hash=<hash>" then "eps,alpha,beta,diag_mass,bound,A,verdict".
std::string sweep_csv(const SweepResult& result);
std::string sweep_json(const SweepResult& result);
// Parses sweep_csv output back (verdict and numeric columns only).
SweepResult read_sweep_csv(const std::string& text);

// Standalone SVG line chart of ln(diag_mass) against sqrt(alpha/eps) with the
// fitted slope annotated.
std::string sweep_svg(const SweepResult& result);

}  // namespace llgrid
