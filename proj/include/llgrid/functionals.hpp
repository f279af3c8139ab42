#pragma once

#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "llgrid/cost.hpp"
#include "llgrid/density.hpp"

namespace llgrid {

struct EnergyBreakdown {
  double kinetic = 0.0;      // discrete Fisher information
  double interaction = 0.0;  // pair interaction energy
  double eps = 0.0;
  std::optional<double> cap;  // value charged at coincident nodes, if any

  double total_at_eps(double e) const { return e * kinetic + interaction; }
  double total() const { return total_at_eps(eps); }
};

// 4 * sum_a sum_x |D_a sqrt(P)|^2 * h^{axes} with forward differences D_a and a
// replicate boundary.  Accepts unnormalised fields; exactly 1-homogeneous.
double fisher_information(const Field& P);
double fisher_information(const NBodyDensity& P);

using FisherFunction = std::function<double(const Field&)>;

// sum_{i<j} c(x_i, x_j) at every node; coincident pairs take the cap, or +inf
// when the cost has no cap.
std::vector<double> pair_potential(const GridSpec& g, const CostSpec& cost);
// C_1(x) = sum_{i>=1} c(x_0, x_i): the part of the pair potential involving particle 0.
std::vector<double> first_particle_potential(const GridSpec& g, const CostSpec& cost);

// sum_x P(x) v(x) h^{axes}.  Throws ConstraintError when a coincident node
// carries mass and the cost has no cap.
double interaction_energy(const Field& P, const CostSpec& cost);
double interaction_energy(const NBodyDensity& P, const CostSpec& cost);
double weighted_mass(const Field& P, std::span<const double> potential);

EnergyBreakdown levy_lieb_energy(const Field& P, double eps, const CostSpec& cost);
EnergyBreakdown levy_lieb_energy(const NBodyDensity& P, double eps, const CostSpec& cost);

// int P |grad eta|^2 / eta, discretised as 4 sum_x P(x) sum_a |D_a sqrt(eta)|^2 h^{axes}
// (the same stencil as fisher_information; finite where eta vanishes).
double cutoff_gradient_term(const Field& P, const Field& eta);

struct ImsSplit {
  double left = 0.0;    // sum_i E_kin(P eta_i)
  double right = 0.0;   // E_kin(P) + sum_i int P |grad eta_i|^2 / eta_i
  double defect = 0.0;  // left - right; O(h) on smooth data
};

// Partition of unity eta_1 + ... + eta_k = 1 (within 1e-12 nodewise), each in [0, 1].
ImsSplit ims_split(const Field& P, std::span<const Field> partition);

}  // namespace llgrid
