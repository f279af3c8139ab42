#include "llgrid/diagonal.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>

#include "llgrid/errors.hpp"
#include "llgrid/functionals.hpp"

namespace llgrid {
namespace {

constexpr double guard = 1e-12;

DoublingPoint doubling_scan(const Field& P, const Region& omega, double r, double delta,
                            double eroded_mass) {
  const GridSpec& g = P.grid;
  DoublingPoint out;
  out.eroded_mass = eroded_mass;
  out.constant = std::pow(1.0 + delta, g.axes()) / eroded_mass;
  auto inner = ball_mass_field(P, r);
  auto outer = ball_mass_field(P, (1.0 + delta) * r);
  double best = std::numeric_limits<double>::infinity();
  std::size_t arg = 0;
  for (std::size_t x = 0; x < inner.size(); ++x) {
    if (!omega.inside[x] || !(inner[x] > 0)) continue;
    const double ratio = outer[x] / inner[x];
    if (ratio < best) {
      best = ratio;
      arg = x;
    }
  }
  if (!std::isfinite(best))
    throw DegenerateError("doubling scan: no node of Omega carries mass at scale r");
  out.y = g.unflatten(arg);
  out.inner_mass = inner[arg];
  out.outer_mass = outer[arg];
  out.ratio = best;
  out.satisfied = best <= out.constant * (1.0 + guard);
  return out;
}

bool pair_within(const GridSpec& g, std::span<const int> y, double alpha) {
  const int d = g.dim(), N = g.particles();
  for (int i = 0; i < N; ++i)
    for (int j = i + 1; j < N; ++j) {
      double n2 = 0.0;
      for (int k = 0; k < d; ++k) {
        const double t = y[i * d + k] - y[j * d + k];
        n2 += t * t;
      }
      if (within_radius(n2, alpha, g.spacing())) return true;
    }
  return false;
}

}  // namespace

double C_delta(double delta, int d, int N) {
  if (!(delta > 0)) throw DomainError("C_delta: delta must be positive");
  const double q = 1.0 + delta;
  return q * q * (2.0 * std::pow(q, d * N) - 1.0) / (delta * delta);
}

double alpha0_level(double beta, double eps, int N, const CostSpec& cost) {
  if (!(beta > 0)) throw DomainError("alpha0: beta must be positive");
  if (!(eps > 0)) throw DomainError("alpha0: eps must be positive");
  return 8.0 * std::max((N - 1) * cost.upper_envelope(beta / 2.0), 850.0 * eps * N * N / (beta * beta));
}

double alpha0_threshold(double beta, double eps, int N, int d, const CostSpec& cost) {
  (void)d;
  if (!cost.divergent())
    throw HypothesisError("alpha0: the lower envelope m must diverge at 0");
  const double level = alpha0_level(beta, eps, N, cost);
  auto m = [&](double t) { return cost.lower_envelope(t); };
  double lo = 1.0;
  for (int k = 0; m(lo) < level; ++k) {
    if (k > 2000 || lo < 1e-300) throw HypothesisError("alpha0: m never reaches the level");
    lo *= 0.5;
  }
  double hi = 2.0 * lo;
  for (int k = 0; m(hi) >= level; ++k) {
    if (k > 2000) return std::numeric_limits<double>::infinity();
    hi *= 2.0;
  }
  for (int k = 0; k < 400 && hi - lo > 1e-17 * lo; ++k) {
    const double mid = 0.5 * (lo + hi);
    (m(mid) >= level ? lo : hi) = mid;
  }
  return lo / 2.0;
}

DoublingPoint find_doubling_point(const Field& P, const Region& omega, double r, double delta) {
  if (!(r > 0) || !(delta > 0)) throw DomainError("find_doubling_point: r and delta must be positive");
  if (!omega.grid.same_layout(P.grid)) throw ConstraintError("find_doubling_point: grid mismatch");
  const double C = mass_on(P, erode(omega, delta * r));
  if (!(C > 0))
    throw ConstraintError("find_doubling_point: P has no mass on Omega eroded by delta r");
  auto out = doubling_scan(P, omega, r, delta, C);
  if (!out.satisfied)
    throw HypothesisError("find_doubling_point: no node meets the doubling constant");
  return out;
}

ExDoublingReport exdoubling_near_swap(const Field& P, const OneBodyDensity& mu, double beta,
                                      std::span<const int> y, double r1, double r2, double delta,
                                      const CostSpec& cost, double lambda_cap) {
  const GridSpec& g = P.grid;
  const int N = g.particles(), d = g.dim();
  if (N < 2) throw ConstraintError("exdoubling: needs N >= 2");
  if (static_cast<int>(y.size()) != g.axes()) throw ConstraintError("exdoubling: y has the wrong dimension");
  if (!(delta > 0) || !(r1 > 0) || !(r2 > 0)) throw DomainError("exdoubling: delta, r1, r2 must be positive");
  ExDoublingReport rep;
  rep.kappa = kappa(mu, beta);
  if (rep.kappa > (1.0 + guard) / (4.0 * (N - 1)))
    throw HypothesisError("exdoubling: kappa(mu, beta) <= 1/(4(N-1)) fails (kappa = " +
                          std::to_string(rep.kappa) + ")");
  if (!(r1 + 2.0 * r2 < beta)) throw HypothesisError("exdoubling: r1 + 2 r2 < beta fails");

  const double h = g.spacing();
  const double shrink = delta * r2 / (1.0 + delta);
  const double reach = beta - shrink;
  const double reach2 = reach > 0 ? (reach / h) * (reach / h) * (1.0 - guard) : 0.0;
  // Omega membership for lattice points, on or off the grid.
  auto admissible = [&](std::span<const int> x) {
    for (int i = 1; i < N; ++i) {
      double a = 0.0, b = 0.0;
      for (int k = 0; k < d; ++k) {
        const double s = x[k] - y[i * d + k];
        const double t = y[k] - x[i * d + k];
        a += s * s;
        b += t * t;
      }
      if (a < reach2 || b < reach2) return false;
    }
    return true;
  };
  Region omega(g), eroded(g);
  BallStencil stencil = make_ball_stencil(g.axes(), shrink, h);
  std::vector<int> c(g.axes()), q(g.axes());
  for (std::size_t x = 0; x < g.states(); ++x) {
    g.unflatten(x, c);
    omega.inside[x] = admissible(c);
    if (!omega.inside[x]) continue;
    bool ok = true;
    for (std::size_t s = 0; s < stencil.size() && ok; ++s) {
      auto o = stencil.offset(s);
      for (int a = 0; a < g.axes(); ++a) q[a] = c[a] + o[a];
      ok = admissible(q);
    }
    eroded.inside[x] = ok;
  }
  rep.eroded_mass = mass_on(P, eroded);
  rep.mass_lower_bound = 1.0 - 2.0 * (N - 1) * rep.kappa;
  if (!(rep.eroded_mass > 0))
    throw ConstraintError("exdoubling: P has no mass on the eroded admissible set");

  rep.doubling = doubling_scan(P, omega, r2 / (1.0 + delta), delta, rep.eroded_mass);
  rep.doubling_ok = rep.doubling.ratio <= 2.0 * std::pow(1.0 + delta, g.axes()) * (1.0 + guard);

  SwapState s = make_bumps(P, y, rep.doubling.y, r1, r2,
                           BumpProfile::prop_decay(std::min(delta, 1.0)), lambda_cap);
  swap_competitor(s, P);
  rep.m = s.m;
  auto C1 = first_particle_potential(g, cost);
  Field added(g);
  for (std::size_t x = 0; x < added.values.size(); ++x)
    added.values[x] = s.P1->values[x] + s.P2->values[x];
  rep.C1_integral = weighted_mass(added, C1);
  rep.C1_bound = 2.0 * (N - 1) * cost.upper_envelope(beta - r1 - 2.0 * r2) * s.m;
  rep.C1_ok = rep.C1_integral <= rep.C1_bound * (1.0 + guard);
  return rep;
}

DecayCheck one_step_decay_check(const Field& P, double eps, double alpha, double beta,
                                double delta, double r1, const CostSpec& cost,
                                std::span<const int> y, const DecayOptions& opt) {
  const GridSpec& g = P.grid;
  const int N = g.particles(), d = g.dim();
  if (!(eps > 0) || !(alpha > 0) || !(beta > 0) || !(delta > 0) || !(r1 > 0))
    throw DomainError("one_step_decay: eps, alpha, beta, delta, r1 must be positive");
  DecayCheck r;
  r.tol = opt.tol;
  r.in_diagonal = pair_within(g, y, alpha);
  r.radius_ok = r1 <= 0.5 * alpha * (1.0 + guard);
  const double m2a = cost.lower_envelope(2.0 * alpha);
  r.m_condition = m2a > 256.0 * eps * C_delta(delta, d, N) / (beta * beta);
  r.alpha_condition = cost.divergent() && alpha <= alpha0_threshold(beta, eps, N, d, cost);
  if (opt.strict) {
    if (!r.in_diagonal) throw ConstraintError("one_step_decay: y is not in D_alpha");
    if (!r.radius_ok) throw ConstraintError("one_step_decay: r1 <= alpha/2 fails");
    if (!r.m_condition) throw HypothesisError("one_step_decay: m(2 alpha) > 256 eps C(delta)/beta^2 fails");
    if (!r.alpha_condition) throw HypothesisError("one_step_decay: alpha <= alpha_0 fails");
  }
  const double q = 1.0 + delta;
  r.factor = 1.0 / (delta * delta * r1 * r1 * m2a / (2.0 * q * q * eps) + 1.0);
  r.lhs = ball_mass(P, y, r1 / q);
  r.rhs = r.factor * ball_mass(P, y, r1);
  r.pass = r.lhs <= r.rhs * (1.0 + opt.tol);
  return r;
}

DecayReport iterate_decay(const Field& P, double eps, double alpha, const CostSpec& cost,
                          const IterateOptions& opt) {
  const GridSpec& g = P.grid;
  const int N = g.particles();
  if (!(eps > 0) || !(alpha > 0)) throw DomainError("iterate_decay: eps and alpha must be positive");
  DecayReport rep;
  const double m2a = cost.lower_envelope(2.0 * alpha);
  rep.A = alpha * alpha * m2a / (8.0 * eps);
  rep.A_condition = rep.A >= opt.a_multiple * N * N;
  if (!rep.A_condition && !opt.diagnostic)
    throw HypothesisError("iterate_decay: A = alpha^2 m(2 alpha)/(8 eps) = " + std::to_string(rep.A) +
                          " is not >= " + std::to_string(opt.a_multiple) + " N^2");
  const double e = std::numbers::e;
  rep.delta_used = e / std::sqrt(rep.A);
  const double q = 1.0 + rep.delta_used;
  rep.k0 = static_cast<int>(std::floor(1.0 / std::log(q) - 1.0));

  Region diag = enlarged_diagonal(g, alpha);
  std::vector<double> prev = ball_mass_field(P, alpha / 2.0);
  rep.levels_pass = true;
  for (int k = 0; k <= rep.k0; ++k) {
    DecayLevel lv;
    lv.k = k;
    lv.radius = 0.5 * alpha * std::pow(q, -k);
    auto next = ball_mass_field(P, lv.radius / q);
    double num = 0.0, den = 0.0;
    for (std::size_t x = 0; x < next.size(); ++x) {
      if (!diag.inside[x]) continue;
      num += next[x];
      den += prev[x];
      if (prev[x] > 0) lv.worst_point = std::max(lv.worst_point, next[x] / prev[x]);
    }
    lv.measured = den > 0 ? num / den : 0.0;
    const double q2k = std::pow(q, 2 * k + 2);
    lv.proof_factor = 1.0 / (rep.delta_used * rep.delta_used * alpha * alpha * m2a / (8.0 * q2k * eps) + 1.0);
    lv.allowed = q2k / (e * e);
    lv.pass = lv.measured <= lv.allowed;
    rep.levels_pass = rep.levels_pass && lv.pass;
    rep.levels.push_back(lv);
    prev = std::move(next);
  }
  rep.mass_half = diagonal_mass(P, alpha / 2.0);
  rep.mass_double = diagonal_mass(P, 2.0 * alpha);
  rep.measured_ratio = rep.mass_double > 0 ? rep.mass_half / rep.mass_double : 0.0;
  rep.theorem_bound = std::exp(-std::sqrt(rep.A) / 6.0);
  if (cost.family() == CostFamily::coulomb) {
    const double a = std::sqrt(rep.A) / 6.0, b = std::sqrt(alpha / eps) / 24.0;
    if (std::abs(a - b) > 1e-14 * std::max(a, b))
      throw std::logic_error("iterate_decay: coulomb exponent identity violated");
    rep.coulomb_bound = std::exp(-b);
  }
  rep.ratio_pass = rep.measured_ratio <= rep.theorem_bound;
  return rep;
}

HypothesisCheck check_hypotheses(const OneBodyDensity& mu, double eps, double alpha, double beta,
                                 const CostSpec& cost, double smallness_factor) {
  if (!(eps > 0) || !(alpha > 0) || !(beta > 0) || !(smallness_factor > 0))
    throw DomainError("hypotheses: eps, alpha, beta, smallness must be positive");
  HypothesisCheck h;
  const GridSpec& g = mu.system_grid();
  h.beta = beta;
  h.alpha = alpha;
  h.eps = eps;
  h.N = g.particles();
  h.d = g.dim();
  h.smallness_factor = smallness_factor;
  h.coulomb = cost.family() == CostFamily::coulomb;
  h.kappa_value = kappa(mu, beta);
  const int N = h.N;
  h.kappa_ok = N < 2 || h.kappa_value <= (1.0 + guard) / (4.0 * (N - 1));
  const double m2a = cost.lower_envelope(2.0 * alpha);
  if (h.coulomb) {
    h.alpha_ok = alpha <= beta / (32.0 * N) * (1.0 + guard);
    h.eps_ok = eps * N * N <= smallness_factor * alpha / 16.0;
  } else {
    h.alpha_ok = m2a >= 8.0 * (N - 1) * cost.upper_envelope(beta / 2.0);
    h.eps_ok = eps * N * N <= smallness_factor * alpha * alpha * m2a;
  }
  return h;
}

TheoremVerdict theorem_verdict(const OneBodyDensity& mu, double eps, double alpha, double beta,
                               const CostSpec& cost, const Field& P, double smallness_factor) {
  TheoremVerdict v;
  v.hypotheses = check_hypotheses(mu, eps, alpha, beta, cost, smallness_factor);
  v.diag_mass = diagonal_mass(P, alpha);
  v.A = alpha * alpha * cost.lower_envelope(2.0 * alpha) / (8.0 * eps);
  v.bound = v.hypotheses.coulomb ? std::exp(-std::sqrt(alpha / eps) / 24.0)
                                 : std::exp(-std::sqrt(v.A) / 6.0);
  v.bound_holds = v.diag_mass <= v.bound;
  v.dn_generalized = mu.system_grid().dim() != 3;
  if (!v.hypotheses.holds())
    v.verdict = "out of regime";
  else
    v.verdict = v.bound_holds ? "pass" : "fail";
  return v;
}

}  // namespace llgrid
