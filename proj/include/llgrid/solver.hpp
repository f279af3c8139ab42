#pragma once

#include <optional>
#include <span>
#include <vector>

#include "llgrid/cost.hpp"
#include "llgrid/density.hpp"
#include "llgrid/functionals.hpp"

namespace llgrid {

// Lagrange multiplier of the marginal constraint, one value per one-body node.
struct OneBodyPotential {
  std::vector<double> values;

  explicit OneBodyPotential(std::vector<double> v);
  static OneBodyPotential zero(const GridSpec& system);
};

struct StepRule {
  double initial_step = 1.0;
  double shrink = 0.5;
  double sufficient_decrease = 1e-4;
};

struct SolverConfig {
  double eps = 1e-2;
  int max_outer_iters = 0;  // 0: 10^4 * ceil(1/sqrt(eps)) / 10^2
  StepRule step;
  double tol_marginal = 1e-8;
  double tol_energy = 1e-10;
  bool symmetrize_each_iter = true;
  unsigned seed = 1;
  // Starting multiplier (e.g. from a checkpoint); zero when absent.
  std::optional<std::vector<double>> initial_potential;

  int outer_iteration_budget() const;
  void validate() const;
};

struct SolveReport {
  EnergyBreakdown energy;
  double marginal_residual = 0.0;
  int iterations = 0;
  std::optional<double> dual_lower_bound;
  std::optional<double> duality_gap;
  double wall_time = 0.0;
  bool converged = false;
  std::vector<double> energy_trace;  // accepted objective values, nonincreasing
  std::vector<double> potential;     // final multiplier
};

struct SolveResult {
  NBodyDensity density;
  SolveReport report;
};

// Minimises eps * E_kin(P) + v_ee(P) over couplings of mu (N = mu's particle count).
// Dual Newton ascent on the one-body multiplier; each dual iterate's ground state
// is repaired onto the marginal polytope (IPFP), symmetrised, and kept only if it
// lowers the objective.  Requires mu > 0 at every node.
SolveResult minimize_levy_lieb(const OneBodyDensity& mu, const CostSpec& cost,
                               const SolverConfig& cfg);

// Plain projected gradient on P (Armijo backtracking, BB step, fraction-to-boundary);
// slow but independent of the dual machinery.  Intended for small grids.
SolveResult minimize_projected_gradient(const OneBodyDensity& mu, const CostSpec& cost,
                                        const SolverConfig& cfg, int max_iterations = 200000);

// lambda_min(u) + N sum_a u(a) mu(a) h^d; never above the optimal objective.
double dual_lower_bound(const OneBodyDensity& mu, const OneBodyPotential& u, double eps,
                        const CostSpec& cost);

struct DualAscentResult {
  OneBodyPotential potential;
  double bound = 0.0;
  std::vector<double> trace;
};

// Gradient ascent with Barzilai-Borwein steps and Armijo safeguard on the dual bound.
DualAscentResult dual_gradient_ascent(const OneBodyDensity& mu, double eps, const CostSpec& cost,
                                      int steps);

// Cyclic proportional fitting of every one-body marginal to mu.  Returns the
// final marginal residual.
double ipfp_repair(Field& P, std::span<const double> mu, double tol, int max_sweeps);

// d/dP(x) of the objective (per unit of P(x), quadrature weight included).
std::vector<double> objective_gradient(const Field& P, double eps,
                                       std::span<const double> pair_potential);

struct StationarityReport {
  double marginal_residual = 0.0;
  double best_descent = 0.0;  // most negative directional derivative found
  double threshold = 0.0;     // -1e-6 * energy
  double energy = 0.0;
  double product_energy = 0.0;
  bool stationary = false;
};

StationarityReport validate_minimizer(const NBodyDensity& P, const OneBodyDensity& mu, double eps,
                                      const CostSpec& cost, int directions = 200,
                                      unsigned seed = 7);

}  // namespace llgrid
