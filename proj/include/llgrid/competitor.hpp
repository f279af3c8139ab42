#pragma once

#include <array>
#include <optional>
#include <vector>

#include "llgrid/cost.hpp"
#include "llgrid/density.hpp"

namespace llgrid {

enum class BumpShape { prop_decay, smooth };

// Radial cutoff eta(|x|) supported in the closed unit ball.
//   prop_decay: min{(1 + delta)(1 - s)_+ / delta, 1}^2, so |grad sqrt(eta)| = (1 + delta)/delta
//               on the annulus 1/(1 + delta) <= s <= 1 and eta = 1 inside it;
//   smooth:     (1 - s)^2 (1 + 2s), a C^1 cubic hat.
struct BumpProfile {
  BumpShape shape = BumpShape::prop_decay;
  double delta = 0.5;

  static BumpProfile prop_decay(double delta);
  static BumpProfile smooth();

  double operator()(double s) const;
  // |d sqrt(eta) / ds| at radius s (analytic, for checks).
  double root_slope(double s) const;
};

// Everything built while swapping the first particle between neighbourhoods of y and z.
struct SwapState {
  std::vector<int> y, z;  // lattice nodes of grid^{dN}
  double r1 = 0.0, r2 = 0.0;
  BumpProfile profile;
  double raw_mass1 = 0.0, raw_mass2 = 0.0;  // int eta(.-y / r1) P, int eta(.-z / r2) P
  double lambda1 = 0.0, lambda2 = 0.0;
  double m = 0.0;  // int eta_1 P = int eta_2 P
  Field eta1, eta2;

  // Filled by swap_competitor.
  std::array<std::optional<Field>, 2> rho1;     // marginal of eta_i P on particle 0
  std::array<std::optional<Field>, 2> rhohat1;  // marginal of eta_i P on particles 1..N-1
  std::optional<Field> P1, P2, Pbar;

  SwapState(GridSpec g) : eta1(g), eta2(g) {}
};

// Bumps eta_i = lambda_i eta((x - c_i)/r_i) with equal masses.  lambda1 =
// lambda_cap * min(1, raw_mass2/raw_mass1) and lambda2 = lambda1 * raw_mass1/raw_mass2,
// so both are at most lambda_cap.  Requires r1 + r2 < |y - z|.
SwapState make_bumps(const Field& P, std::span<const int> y, std::span<const int> z, double r1,
                     double r2, const BumpProfile& profile, double lambda_cap = 1.0);
SwapState make_bumps(const NBodyDensity& P, std::span<const int> y, std::span<const int> z,
                     double r1, double r2, const BumpProfile& profile, double lambda_cap = 1.0);

// Pbar = P - eta_1 P - eta_2 P + P_1 + P_2 with P_1 = rho1^2 rhohat1^1 / m and
// P_2 = rho1^1 rhohat1^2 / m.  Stores the intermediate fields in the state.
Field swap_competitor(SwapState& state, const Field& P);
NBodyDensity swap_competitor(SwapState& state, const NBodyDensity& P);

// Invariants of a built state: disjoint supports, equal masses, eta_1 + eta_2 <= 1,
// and (after swap_competitor) Pbar >= -1e-15.  Throws ConstraintError naming the violation.
void check_swap_state(const SwapState& state, const Field& P);

struct ContiReport {
  double kinetic_lhs = 0.0;  // E_kin(Pbar)
  double kinetic_rhs = 0.0;  // E_kin(P) + cutoff terms of eta_1, eta_2, 1 - eta_1 - eta_2
  double vee_lhs = 0.0;      // v_ee(Pbar)
  double vee_rhs = 0.0;      // v_ee(P) - int P (eta_1 + eta_2) C_1 + int (P_1 + P_2) C_1
  double vee_relative_error = 0.0;
  double energy_change = 0.0;  // objective(Pbar) - objective(P) at the given eps

  double kinetic_slack() const { return kinetic_rhs - kinetic_lhs; }
};

// Builds the swap if needed and evaluates both sides of the energy lemma.
// Throws DegenerateError when 1 - eta_1 - eta_2 vanishes at a node of positive
// P-mass where its square root still varies (the cutoff term is then singular).
ContiReport lemma_conti_check(const Field& P, SwapState& state, double eps, const CostSpec& cost);
ContiReport lemma_conti_check(const NBodyDensity& P, SwapState& state, double eps,
                              const CostSpec& cost);

}  // namespace llgrid
