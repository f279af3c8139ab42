#pragma once

#include <map>
#include <string>
#include <vector>

#include "llgrid/cost.hpp"
#include "llgrid/density.hpp"
#include "llgrid/solver.hpp"

namespace llgrid {

// Flat key=value experiment description.  Lines starting with '#' are comments.
//
//   grid.d grid.N grid.M grid.a grid.b grid.budget
//   marginal=uniform|gaussian|table  marginal.sigma  marginal.centre  marginal.path
//   cost.family cost.power.s cost.cap.scale cost.table.path
//   eps  eps.list=e1,e2,...  alpha  beta  hypothesis.smallness
//   solver.max_outer_iters solver.tol_marginal solver.tol_energy solver.symmetrize
//   solver.step.initial solver.step.shrink solver.step.sufficient_decrease
//   sweep.continuation  out.dir  seed
struct ExperimentConfig {
  int d = 1, N = 2, M = 64;
  double a = 0.0, b = 1.0;
  std::size_t budget = GridSpec::default_budget;
  std::string marginal = "uniform";
  double sigma = 0.1;
  double centre = 0.5;
  std::string marginal_path;
  CostSpec cost = CostSpec::coulomb();
  std::vector<double> eps_list{1e-2};
  double alpha = 0.05, beta = 0.125;
  double smallness = 0.01;
  SolverConfig solver;
  bool continuation = true;
  std::string out_dir = "out";
  unsigned seed = 1;
  // cost.family=table seen before cost.table.path.
  bool table_pending = false;

  static ExperimentConfig parse(const std::string& text);
  static ExperimentConfig load(const std::string& path);
  // Applies one key=value pair; throws ConstraintError on unknown keys or bad values.
  void set(const std::string& key, const std::string& value);

  // Every effective setting, one "key=value" per line, sorted by key.
  std::string canonical() const;
  // 16 hex digits of FNV-1a over canonical().
  std::string hash() const;

  GridSpec system_grid() const;
  OneBodyDensity marginal_density() const;
  SolverConfig solver_for(double eps) const;
};

std::string fnv1a_hex(const std::string& bytes);
std::vector<double> parse_double_list(const std::string& text);
// Round-trip decimal form of a double.
std::string format_double(double v);

struct ArtifactRecord {
  std::string path;
  double wall_time = 0.0;
};

struct RunManifest {
  std::string config_hash;
  std::string tool_version;
  std::vector<ArtifactRecord> artifacts;
  bool pass = true;
  std::string summary;

  std::string to_json() const;
};

}  // namespace llgrid
