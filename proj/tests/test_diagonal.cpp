#include <numbers>

#include "doctest.h"
#include "llgrid/diagonal.hpp"
#include "llgrid/errors.hpp"
#include "support.hpp"

using namespace llgrid;
using support::rel_err;

namespace {

// P(x, y) = mu(x) [y = x + M/2 mod M]: no mass near the diagonal.
NBodyDensity shifted_coupling(const OneBodyDensity& mu) {
  const GridSpec& g = mu.system_grid();
  const int M = g.points();
  std::vector<double> v(g.states(), 0.0);
  for (int x = 0; x < M; ++x) v[x * M + (x + M / 2) % M] = mu.values()[x] / g.spacing();
  return NBodyDensity(g, v);
}

}  // namespace

TEST_CASE("doubling-lemma constant") {
  CHECK(C_delta(1.0, 3, 1) == doctest::Approx(60.0).epsilon(1e-14));
  CHECK_THROWS_AS(C_delta(0.0, 3, 1), DomainError);
  const int N = 50;
  CHECK(std::abs(C_delta(2.0 / (3 * N), 3, N) / (N * N) / 31.0 - 1) <= 0.02);

  // Exactly one interior minimum in delta.
  int turns = 0;
  double prev = C_delta(0.001, 1, 2), prevdiff = -1;
  for (int k = 2; k <= 2000; ++k) {
    const double c = C_delta(0.001 * k, 1, 2), diff = c - prev;
    if ((diff > 0) != (prevdiff > 0)) ++turns;
    prev = c;
    prevdiff = diff;
  }
  CHECK(turns == 1);
}

TEST_CASE("alpha_0 threshold") {
  const CostSpec coul = CostSpec::coulomb();
  CHECK(alpha0_threshold(0.125, 1e-6, 2, 1, coul) == doctest::Approx(1.0 / 256).epsilon(1e-12));
  // Interaction-limited regime: alpha_0 is linear in beta.
  CHECK(alpha0_threshold(0.25, 1e-7, 3, 1, coul) ==
        doctest::Approx(2 * alpha0_threshold(0.125, 1e-7, 3, 1, coul)).epsilon(1e-12));
  // Kinetic-limited regime: the second term of the level dominates.
  const double big = alpha0_level(0.1, 1e-2, 2, coul);
  CHECK(big == doctest::Approx(8 * 850 * 1e-2 * 4 / 0.01));
  CHECK_THROWS_AS(alpha0_threshold(0.1, 1e-3, 2, 1, CostSpec::none()), HypothesisError);
  CHECK_THROWS_AS(alpha0_level(0.0, 1e-3, 2, coul), DomainError);

  gen::Rng rng(51);
  const CostSpec sq = CostSpec::inverse_power(2.0);
  for (int t = 0; t < 200; ++t) {
    const double beta = gen::uniform(rng, 0.05, 1.0), eps = std::pow(10.0, gen::uniform(rng, -7, -1));
    const int N = 2 + t % 4;
    const double closed = 1.0 / (2.0 * alpha0_level(beta, eps, N, coul));
    CHECK(rel_err(alpha0_threshold(beta, eps, N, 1, coul), closed) <= 1e-12);
    const double closed_sq = 0.5 / std::sqrt(alpha0_level(beta, eps, N, sq));
    CHECK(rel_err(alpha0_threshold(beta, eps, N, 1, sq), closed_sq) <= 1e-12);
  }
}

TEST_CASE("property: coulomb exponents agree") {
  gen::Rng rng(52);
  const CostSpec coul = CostSpec::coulomb();
  for (int t = 0; t < 1000; ++t) {
    const double alpha = gen::uniform(rng, 1e-4, 0.5), eps = std::pow(10.0, gen::uniform(rng, -9, -1));
    const double a = std::sqrt(alpha * alpha * coul.lower_envelope(2 * alpha) / (8 * eps)) / 6;
    CHECK(rel_err(a, std::sqrt(alpha / eps) / 24) <= 1e-14);
  }
}

TEST_CASE("property: doubling points exist on random densities") {
  gen::Rng rng(53);
  for (int M : {8, 12, 16}) {
    for (int t = 0; t < 20; ++t) {
      GridSpec g(1, 2, M, 0, 1);
      Field P = gen::random_density(g, rng, 0.3);
      const double delta = gen::uniform(rng, 0.1, 1.0);
      auto dp = find_doubling_point(P, Region(g, true), 2.5 * g.spacing(), delta);
      CHECK(dp.satisfied);
      CHECK(dp.ratio <= dp.constant * (1 + 1e-12));
      CHECK(dp.inner_mass > 0);
      CHECK(dp.ratio == doctest::Approx(dp.outer_mass / dp.inner_mass));
    }
  }
}

TEST_CASE("doubling point of a Gaussian sits near its mode") {
  GridSpec g(1, 2, 41, 0, 1);
  Field P = gen::gaussian_field(g, 0.15, 0.5);
  auto dp = find_doubling_point(P, Region(g, true), 0.1, 0.5);
  CHECK(std::abs(dp.y[0] - 20) <= 2);
  CHECK(std::abs(dp.y[1] - 20) <= 2);
}

TEST_CASE("doubling point errors") {
  GridSpec g(1, 2, 8, 0, 1);
  gen::Rng rng(54);
  Field P = gen::random_density(g, rng);
  Region lone(g);
  lone.inside[g.flatten(std::vector<int>{3, 3})] = 1;
  CHECK_THROWS_AS(find_doubling_point(P, lone, 0.5, 0.5), ConstraintError);
  CHECK_THROWS_AS(find_doubling_point(P, Region(g, true), 0.0, 0.5), DomainError);
}

TEST_CASE("doubling and interaction bounds near a swap") {
  GridSpec g(1, 2, 33, 0, 1);
  auto mu = OneBodyDensity::uniform(g);
  gen::Rng rng(55);
  for (int t = 0; t < 5; ++t) {
    Field P = gen::random_coupling(mu, rng);
    std::vector<int> y{16, 17};
    auto rep = exdoubling_near_swap(P, mu, 0.12, y, 0.02, 0.04, 0.5, CostSpec::coulomb(), 0.9);
    CHECK(rep.kappa <= 0.25);
    CHECK(rep.eroded_mass >= rep.mass_lower_bound - 1e-12);
    CHECK(rep.doubling_ok);
    CHECK(rep.C1_ok);
    CHECK(rep.m > 0);
  }
  Field P = NBodyDensity::product(mu).field();
  std::vector<int> y{16, 17};
  CHECK_THROWS_AS(exdoubling_near_swap(P, mu, 0.5, y, 0.02, 0.04, 0.5, CostSpec::coulomb()),
                  HypothesisError);
  CHECK_THROWS_AS(exdoubling_near_swap(P, mu, 0.12, y, 0.05, 0.04, 0.5, CostSpec::coulomb()),
                  HypothesisError);
}

TEST_CASE("one-step decay on an empty ball holds trivially") {
  GridSpec g(1, 2, 41, 0, 1);
  auto mu = OneBodyDensity::uniform(g);
  auto P = shifted_coupling(mu).field();
  std::vector<int> y{10, 10};
  auto r = one_step_decay_check(P, 1e-6, 0.05, 0.2, 0.5, 0.025, CostSpec::coulomb(), y);
  CHECK(r.lhs == 0.0);
  CHECK(r.pass);
  CHECK(r.in_diagonal);
  CHECK(r.radius_ok);
}

TEST_CASE("one-step decay fails for a product with mass on the diagonal") {
  GridSpec g(1, 2, 41, 0, 1);
  auto P = NBodyDensity::product(OneBodyDensity::uniform(g)).field();
  std::vector<int> y{20, 20};
  auto r = one_step_decay_check(P, 1e-6, 0.05, 0.2, 0.5, 0.025, CostSpec::coulomb(), y);
  CHECK_FALSE(r.pass);
  CHECK(r.lhs > r.rhs);
  DecayOptions strict;
  strict.strict = true;
  CHECK_THROWS_AS(one_step_decay_check(P, 1e-6, 0.05, 0.2, 0.5, 0.05, CostSpec::coulomb(), y, strict),
                  ConstraintError);
  std::vector<int> far{5, 35};
  CHECK_FALSE(one_step_decay_check(P, 1e-6, 0.05, 0.2, 0.5, 0.025, CostSpec::coulomb(), far).in_diagonal);
}

TEST_CASE("iterated decay") {
  GridSpec g(1, 2, 41, 0, 1);
  auto mu = OneBodyDensity::uniform(g);
  auto P = shifted_coupling(mu).field();
  const double e = std::numbers::e;
  // A = alpha / (16 eps) = 100 e^2 gives delta = 0.1 and k0 = 9.
  const double alpha = 0.1, eps = alpha / (16 * 100 * e * e);
  auto rep = iterate_decay(P, eps, alpha, CostSpec::coulomb());
  CHECK(rep.A == doctest::Approx(100 * e * e));
  CHECK(rep.delta_used == doctest::Approx(0.1));
  CHECK(rep.k0 == 9);
  CHECK(rep.levels.size() == 10u);
  REQUIRE(rep.coulomb_bound.has_value());
  CHECK(*rep.coulomb_bound == doctest::Approx(rep.theorem_bound).epsilon(1e-14));
  CHECK(rep.levels_pass);
  CHECK(rep.ratio_pass);

  CHECK_THROWS_AS(iterate_decay(P, 1.0, alpha, CostSpec::coulomb()), HypothesisError);
  IterateOptions diag;
  diag.diagnostic = true;
  auto d = iterate_decay(P, 1.0, alpha, CostSpec::coulomb(), diag);
  CHECK_FALSE(d.A_condition);
}

TEST_CASE("theorem verdicts") {
  GridSpec g(1, 2, 65, 0, 1);
  auto mu = OneBodyDensity::uniform(g);
  const CostSpec coul = CostSpec::coulomb();
  auto good = theorem_verdict(mu, 1e-8, 0.0015, 0.1, coul, shifted_coupling(mu).field());
  CHECK(good.hypotheses.holds());
  CHECK(good.verdict == "pass");
  CHECK(good.dn_generalized);
  auto bad = theorem_verdict(mu, 1e-8, 0.0015, 0.1, coul, NBodyDensity::product(mu).field());
  CHECK(bad.verdict == "fail");
  CHECK(bad.diag_mass > bad.bound);
  // Uniform marginals force beta <= 1/8, so alpha = 0.05 is out of reach.
  auto out = theorem_verdict(mu, 1e-3, 0.05, 0.125, coul, NBodyDensity::product(mu).field());
  CHECK(out.verdict == "out of regime");
  CHECK_FALSE(out.hypotheses.alpha_ok);
  auto h = check_hypotheses(mu, 1e-3, 0.05, 0.4, coul);
  CHECK_FALSE(h.kappa_ok);
  CHECK_THROWS_AS(check_hypotheses(mu, 0.0, 0.05, 0.1, coul), DomainError);

  auto gen_cost = check_hypotheses(mu, 1e-8, 0.0015, 0.1, CostSpec::inverse_power(2.0));
  CHECK(gen_cost.alpha_ok);
  CHECK_FALSE(gen_cost.coulomb);
}
