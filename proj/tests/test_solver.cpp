#include "doctest.h"
#include "llgrid/errors.hpp"
#include "llgrid/solver.hpp"
#include "support.hpp"

using namespace llgrid;
using support::rel_err;

namespace {

// Two sites at distance 1 per particle, both particles on them with mass 1/2.
OneBodyDensity two_site() { return OneBodyDensity::uniform(GridSpec(1, 2, 2, 0, 1)); }

double objective(const Field& P, double eps, const CostSpec& cost) {
  return levy_lieb_energy(P, eps, cost).total();
}

}  // namespace

TEST_CASE("solver config validation") {
  SolverConfig c;
  c.eps = 0.0;
  CHECK_THROWS_AS(c.validate(), DomainError);
  c.eps = 1e-2;
  CHECK(c.outer_iteration_budget() > 0);
  c.tol_marginal = -1;
  CHECK_THROWS(c.validate());
}

TEST_CASE("one particle: the minimiser is mu itself") {
  GridSpec g(1, 1, 16, 0, 1);
  auto mu = OneBodyDensity::gaussian(g, 0.2);
  SolverConfig c;
  c.eps = 0.05;
  auto r = minimize_levy_lieb(mu, CostSpec::coulomb(), c);
  CHECK(support::max_abs_diff({r.density.values().begin(), r.density.values().end()},
                              {mu.values().begin(), mu.values().end()}) <= 1e-12);
  CHECK(r.report.energy.interaction == 0.0);
  CHECK(rel_err(r.report.energy.kinetic, 22.520656418323547) <= 1e-12);
}

TEST_CASE("without interaction the product coupling is optimal") {
  GridSpec g(1, 2, 16, 0, 1);
  auto mu = OneBodyDensity::gaussian(g, 0.2);
  SolverConfig c;
  c.eps = 0.1;
  auto r = minimize_levy_lieb(mu, CostSpec::none(), c);
  REQUIRE(r.report.converged);
  // Fisher information of mu (x) mu is twice that of mu.
  const double want = c.eps * 2 * 22.520656418323547;
  CHECK(rel_err(r.report.energy.total(), want) <= 1e-8);
  auto prod = NBodyDensity::product(mu);
  CHECK(support::max_abs_diff({r.density.values().begin(), r.density.values().end()},
                              {prod.values().begin(), prod.values().end()}) <= 1e-6);
  REQUIRE(r.report.duality_gap.has_value());
  CHECK(*r.report.duality_gap <= 1e-8 * want);
}

TEST_CASE("two-site problem matches the scalar minimisation") {
  const double eps[] = {0.01, 0.1, 1.0};
  const double t_star[] = {0.0031398420208236595, 0.117500264999205, 0.23440542846120488};
  const double e_star[] = {1.0736404439531135, 1.3566018867943397, 1.4843902290593014};
  for (int k = 0; k < 3; ++k) {
    CAPTURE(eps[k]);
    SolverConfig c;
    c.eps = eps[k];
    auto r = minimize_levy_lieb(two_site(), CostSpec::coulomb(), c);
    CHECK(r.report.converged);
    CHECK(rel_err(r.report.energy.total(), e_star[k]) <= 1e-9);
    // Coincident configuration carries density t / h^2 with h = 1.
    CHECK(std::abs(r.density.values()[0] - t_star[k]) <= 1e-6);
    CHECK(std::abs(r.density.values()[3] - t_star[k]) <= 1e-6);
  }
}

TEST_CASE("weak duality on random potentials") {
  GridSpec g(1, 2, 6, 0, 1);
  auto mu = OneBodyDensity::gaussian(g, 0.3);
  gen::Rng rng(31);
  const CostSpec cost = CostSpec::coulomb();
  for (int t = 0; t < 40; ++t) {
    std::vector<double> u(6);
    for (double& v : u) v = gen::uniform(rng, -10, 10);
    const double lb = dual_lower_bound(mu, OneBodyPotential(u), 0.05, cost);
    Field P = gen::random_coupling(mu, rng);
    CHECK(lb <= objective(P, 0.05, cost) + 1e-10);
  }
}

TEST_CASE("dual gradient ascent closes the gap") {
  GridSpec g(1, 2, 6, 0, 1);
  auto mu = OneBodyDensity::gaussian(g, 0.3);
  const CostSpec cost = CostSpec::coulomb();
  SolverConfig c;
  c.eps = 0.05;
  auto ref = minimize_levy_lieb(mu, cost, c);
  REQUIRE(ref.report.converged);
  auto asc = dual_gradient_ascent(mu, c.eps, cost, 50);
  CHECK(asc.bound <= ref.report.energy.total() + 1e-9);
  CHECK(ref.report.energy.total() - asc.bound <= 1e-6);
  for (std::size_t k = 1; k < asc.trace.size(); ++k) CHECK(asc.trace[k] >= asc.trace[k - 1] - 1e-12);
}

TEST_CASE("property: objective is convex along segments of couplings") {
  GridSpec g(1, 2, 7, 0, 1);
  auto mu = OneBodyDensity::gaussian(g, 0.25);
  gen::Rng rng(32);
  const CostSpec cost = CostSpec::coulomb();
  for (int t = 0; t < 100; ++t) {
    Field P = gen::random_coupling(mu, rng), Q = gen::random_coupling(mu, rng);
    const double lam = gen::uniform(rng, 0, 1);
    Field R = P;
    for (std::size_t k = 0; k < R.values.size(); ++k)
      R.values[k] = lam * P.values[k] + (1 - lam) * Q.values[k];
    const double slack =
        lam * objective(P, 0.02, cost) + (1 - lam) * objective(Q, 0.02, cost) - objective(R, 0.02, cost);
    CHECK(slack >= -1e-10);
  }
}

TEST_CASE("reference solve on an 8x8 grid") {
  GridSpec g(1, 2, 8, 0, 1);
  auto mu = OneBodyDensity::gaussian(g, 0.25);
  const CostSpec cost = CostSpec::coulomb();
  SolverConfig c;
  c.eps = 0.02;
  auto a = minimize_levy_lieb(mu, cost, c);
  REQUIRE(a.report.converged);
  CHECK(a.report.marginal_residual <= c.tol_marginal);
  CHECK(a.density.symmetric());
  for (std::size_t k = 1; k < a.report.energy_trace.size(); ++k)
    CHECK(a.report.energy_trace[k] <= a.report.energy_trace[k - 1] + 1e-12);
  CHECK(a.report.energy.total() <= objective(NBodyDensity::product(mu).field(), c.eps, cost));
  REQUIRE(a.report.dual_lower_bound.has_value());
  CHECK(*a.report.dual_lower_bound <= a.report.energy.total() + 1e-9);

  auto b = minimize_projected_gradient(mu, cost, c);
  CHECK(rel_err(b.report.energy.total(), a.report.energy.total()) <= 1e-6);
  CHECK(b.report.energy.total() >= a.report.energy.total() - 1e-9);

  auto st = validate_minimizer(a.density, mu, c.eps, cost);
  CHECK(st.stationary);
  auto prod = validate_minimizer(NBodyDensity::product(mu), mu, c.eps, cost);
  CHECK_FALSE(prod.stationary);
  CHECK(prod.best_descent < prod.threshold);
}

TEST_CASE("warm start from a converged potential") {
  GridSpec g(1, 2, 8, 0, 1);
  auto mu = OneBodyDensity::gaussian(g, 0.25);
  SolverConfig c;
  c.eps = 0.03;
  auto a = minimize_levy_lieb(mu, CostSpec::coulomb(), c);
  c.initial_potential = a.report.potential;
  auto b = minimize_levy_lieb(mu, CostSpec::coulomb(), c);
  CHECK(b.report.iterations <= a.report.iterations);
  CHECK(rel_err(b.report.energy.total(), a.report.energy.total()) <= 1e-9);
  c.initial_potential = std::vector<double>(3, 0.0);
  CHECK_THROWS_AS(minimize_levy_lieb(mu, CostSpec::coulomb(), c), ConstraintError);
}

TEST_CASE("solver rejects marginals with empty nodes") {
  GridSpec g(1, 2, 4, 0, 1);
  auto mu = OneBodyDensity::normalized(g, {1, 0, 1, 1});
  CHECK_THROWS(minimize_levy_lieb(mu, CostSpec::coulomb(), SolverConfig{}));
}

TEST_CASE("IPFP repair restores the marginals") {
  GridSpec g(1, 3, 5, 0, 1);
  auto mu = OneBodyDensity::gaussian(GridSpec(1, 3, 5, 0, 1), 0.3);
  gen::Rng rng(33);
  Field P = gen::random_field(g, rng);
  const double res = ipfp_repair(P, mu.values(), 1e-13, 10000);
  CHECK(res <= 1e-13);
  CHECK(check_in_Pi_N(P, mu.values(), 1e-12).pass);
}
