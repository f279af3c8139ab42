#pragma once

#include <optional>
#include <string>
#include <vector>

#include "llgrid/competitor.hpp"
#include "llgrid/cost.hpp"
#include "llgrid/density.hpp"

namespace llgrid {

// (1 + delta)^2 (2 (1 + delta)^{dN} - 1) / delta^2.
double C_delta(double delta, int d, int N);

// 8 max{(N - 1) M(beta/2), 850 eps N^2 / beta^2}: the level m(2 alpha_0) must reach.
double alpha0_level(double beta, double eps, int N, const CostSpec& cost);
// Largest alpha with m(2 alpha) >= alpha0_level, by bisection on the decreasing m.
double alpha0_threshold(double beta, double eps, int N, int d, const CostSpec& cost);

struct DoublingPoint {
  std::vector<int> y;
  double inner_mass = 0.0;  // P(B(y, r))
  double outer_mass = 0.0;  // P(B(y, (1 + delta) r))
  double ratio = 0.0;       // outer / inner, minimised over the scan
  double constant = 0.0;    // (1 + delta)^{dN} / C
  double eroded_mass = 0.0; // C = P(Omega eroded by delta r)
  bool satisfied = false;
};

// Exhaustive scan over nodes of Omega for the smallest doubling ratio at scale r.
// Throws ConstraintError when the eroded mass vanishes and HypothesisError when
// no node meets the constant.
DoublingPoint find_doubling_point(const Field& P, const Region& omega, double r, double delta);

struct ExDoublingReport {
  DoublingPoint doubling;       // at scale r2 / (1 + delta), constant 2 (1 + delta)^{dN}
  double kappa = 0.0;           // kappa(mu, beta)
  double mass_lower_bound = 0.0;  // 1 - 2 (N - 1) kappa
  double eroded_mass = 0.0;     // P on the eroded admissible set
  double m = 0.0;               // common bump mass of the swap built at (y, z)
  double C1_integral = 0.0;     // int C_1 (P_1 + P_2)
  double C1_bound = 0.0;        // 2 (N - 1) M(beta - r1 - 2 r2) m
  bool doubling_ok = false;
  bool C1_ok = false;
};

// Admissible set {y' : |y'_1 - y_i|, |y_1 - y'_i| >= beta - delta r2/(1 + delta), i >= 2},
// its erosion, a doubling point z in it, and the swap bump pair at (y, z).
ExDoublingReport exdoubling_near_swap(const Field& P, const OneBodyDensity& mu, double beta,
                                      std::span<const int> y, double r1, double r2, double delta,
                                      const CostSpec& cost, double lambda_cap = 1.0);

struct DecayCheck {
  double lhs = 0.0;     // P(B(y, r1/(1 + delta)))
  double rhs = 0.0;     // factor * P(B(y, r1))
  double factor = 0.0;  // 1 / (delta^2 r1^2 m(2 alpha) / (2 (1 + delta)^2 eps) + 1)
  double tol = 0.05;
  bool pass = false;
  // Preconditions, reported individually.
  bool in_diagonal = false;
  bool radius_ok = false;     // r1 <= alpha/2
  bool m_condition = false;   // m(2 alpha) > 256 eps C(delta) / beta^2
  bool alpha_condition = false;  // alpha <= alpha_0
  bool preconditions() const { return in_diagonal && radius_ok && m_condition && alpha_condition; }
};

struct DecayOptions {
  double tol = 0.05;
  // Throw HypothesisError on any failed precondition instead of reporting it.
  bool strict = false;
};

DecayCheck one_step_decay_check(const Field& P, double eps, double alpha, double beta,
                                double delta, double r1, const CostSpec& cost,
                                std::span<const int> y, const DecayOptions& opt = {});

struct DecayLevel {
  int k = 0;
  double radius = 0.0;    // alpha_k = (alpha/2)(1 + delta)^{-k}
  double measured = 0.0;  // int_{D_alpha} P(B(y, alpha_{k+1})) / int_{D_alpha} P(B(y, alpha_k))
  double worst_point = 0.0;  // largest per-node ratio over D_alpha
  double proof_factor = 0.0;  // 1 / (delta^2 alpha^2 m(2 alpha) / (8 (1 + delta)^{2k+2} eps) + 1)
  double allowed = 0.0;   // (1 + delta)^{2k+2} / e^2
  bool pass = false;
};

struct DecayReport {
  double A = 0.0;  // alpha^2 m(2 alpha) / (8 eps)
  double delta_used = 0.0;
  int k0 = -1;
  std::vector<DecayLevel> levels;
  double mass_half = 0.0;    // diagonal mass at alpha/2
  double mass_double = 0.0;  // diagonal mass at 2 alpha
  double measured_ratio = 0.0;
  double theorem_bound = 0.0;  // exp(-sqrt(A)/6)
  std::optional<double> coulomb_bound;  // exp(-sqrt(alpha/eps)/24)
  bool A_condition = false;  // A >= a_multiple * N^2
  bool levels_pass = false;
  bool ratio_pass = false;
};

struct IterateOptions {
  // "A >> N^2" read as A >= a_multiple * N^2.
  double a_multiple = 100.0;
  // Report instead of throwing when A is too small.
  bool diagnostic = false;
};

DecayReport iterate_decay(const Field& P, double eps, double alpha, const CostSpec& cost,
                          const IterateOptions& opt = {});

struct HypothesisCheck {
  double beta = 0.0;
  double kappa_value = 0.0;
  double alpha = 0.0;
  double eps = 0.0;
  int N = 0;
  int d = 0;
  bool coulomb = false;
  double smallness_factor = 0.01;
  bool kappa_ok = false;  // kappa <= 1/(4(N-1))
  bool alpha_ok = false;  // alpha <= beta/(32N) (coulomb) or m(2 alpha) >= 8 (N-1) M(beta/2)
  bool eps_ok = false;    // eps N^2 <= s alpha/16 (coulomb) or <= s alpha^2 m(2 alpha)
  bool holds() const { return kappa_ok && alpha_ok && eps_ok; }
};

HypothesisCheck check_hypotheses(const OneBodyDensity& mu, double eps, double alpha, double beta,
                                 const CostSpec& cost, double smallness_factor = 0.01);

struct TheoremVerdict {
  HypothesisCheck hypotheses;
  double diag_mass = 0.0;  // P(D_alpha)
  double bound = 0.0;      // exp(-sqrt(alpha/eps)/24) (coulomb) or exp(-sqrt(A)/6)
  double A = 0.0;
  bool bound_holds = false;
  bool dn_generalized = false;  // d != 3
  std::string verdict;          // "pass", "fail" or "out of regime"
};

TheoremVerdict theorem_verdict(const OneBodyDensity& mu, double eps, double alpha, double beta,
                               const CostSpec& cost, const Field& P,
                               double smallness_factor = 0.01);

}  // namespace llgrid
