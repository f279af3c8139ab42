#include "doctest.h"
#include "llgrid/competitor.hpp"
#include "llgrid/errors.hpp"
#include "llgrid/functionals.hpp"
#include "support.hpp"

using namespace llgrid;
using support::max_abs_diff;

namespace {

const std::vector<int> corner_y{0, 0}, corner_z{1, 1};

Field two_by_two() { return Field(GridSpec(1, 2, 2, 0, 1), {0.4, 0.1, 0.2, 0.3}); }

double sum_over(const Field& f) {
  double s = 0.0;
  for (double v : f.values) s += v;
  return s * f.grid.cell_volume();
}

}  // namespace

TEST_CASE("bump profiles") {
  auto p = BumpProfile::prop_decay(0.5);
  CHECK(p(0.0) == 1.0);
  CHECK(p(1.0 / 1.5) == doctest::Approx(1.0));
  CHECK(p(1.0) == 0.0);
  CHECK(p(0.9) == doctest::Approx(std::pow(1.5 * 0.1 / 0.5, 2)));
  CHECK(p.root_slope(0.9) == doctest::Approx(3.0));
  CHECK(p.root_slope(0.5) == 0.0);
  CHECK_THROWS_AS(BumpProfile::prop_decay(0.0), DomainError);
  CHECK_THROWS_AS(BumpProfile::prop_decay(1.5), DomainError);

  auto s = BumpProfile::smooth();
  CHECK(s(0.0) == 1.0);
  CHECK(s(1.0) == 0.0);
  gen::Rng rng(41);
  for (int k = 0; k < 1000; ++k) {
    const double a = gen::uniform(rng, 0, 1), b = gen::uniform(rng, 0, 1);
    for (const BumpProfile& f : {p, s}) {
      CHECK(f(a) >= 0.0);
      CHECK(f(a) <= 1.0);
      if (a < b) CHECK(f(a) >= f(b));
    }
  }
}

TEST_CASE("swap on a 2x2 grid matches the direct construction") {
  Field P = two_by_two();
  auto s = make_bumps(P, corner_y, corner_z, 0.5, 0.5, BumpProfile::prop_decay(0.5));
  CHECK(s.lambda1 == doctest::Approx(0.75));
  CHECK(s.lambda2 == doctest::Approx(1.0));
  Field Pbar = swap_competitor(s, P);
  CHECK(max_abs_diff(Pbar.values, {0.1, 0.4, 0.5, 0.0}) <= 1e-15);
  CHECK_NOTHROW(check_swap_state(s, P));
}

TEST_CASE("bump masses are equal and the multipliers respect the cap") {
  GridSpec g(1, 2, 12, 0, 1);
  gen::Rng rng(42);
  for (int t = 0; t < 50; ++t) {
    Field P = gen::random_density(g, rng);
    std::vector<int> y{2, 3}, z{9, 8};
    const double cap = gen::uniform(rng, 0.1, 1.0);
    auto s = make_bumps(P, y, z, 0.2, 0.25, BumpProfile::prop_decay(0.5), cap);
    CHECK(s.lambda1 <= cap * (1 + 1e-15));
    CHECK(s.lambda2 <= cap * (1 + 1e-15));
    CHECK(std::max(s.lambda1, s.lambda2) == doctest::Approx(cap));
    CHECK(s.lambda1 * s.raw_mass1 == doctest::Approx(s.lambda2 * s.raw_mass2).epsilon(1e-13));
    swap_competitor(s, P);
    CHECK_NOTHROW(check_swap_state(s, P));
  }
}

TEST_CASE("exchanging the roles of y and z swaps the multipliers") {
  GridSpec g(1, 2, 10, 0, 1);
  gen::Rng rng(43);
  Field P = gen::random_density(g, rng);
  std::vector<int> y{1, 2}, z{7, 8};
  auto a = make_bumps(P, y, z, 0.2, 0.2, BumpProfile::smooth());
  auto b = make_bumps(P, z, y, 0.2, 0.2, BumpProfile::smooth());
  CHECK(a.lambda1 == doctest::Approx(b.lambda2));
  CHECK(a.lambda2 == doctest::Approx(b.lambda1));
  CHECK(a.m == doctest::Approx(b.m));
}

TEST_CASE("doubling the mass near y halves the first multiplier") {
  GridSpec g(1, 2, 2, 0, 1);
  Field P(g, {0.4, 0.1, 0.1, 0.4});
  auto a = make_bumps(P, corner_y, corner_z, 0.5, 0.5, BumpProfile::prop_decay(0.5));
  CHECK(a.lambda1 == doctest::Approx(1.0));
  Field Q(g, {0.8, 0.1, 0.1, 0.4});
  auto b = make_bumps(Q, corner_y, corner_z, 0.5, 0.5, BumpProfile::prop_decay(0.5));
  CHECK(b.lambda1 == doctest::Approx(0.5));
  CHECK(b.lambda2 == doctest::Approx(1.0));
}

TEST_CASE("zero multipliers leave P unchanged") {
  Field P = two_by_two();
  auto s = make_bumps(P, corner_y, corner_z, 0.5, 0.5, BumpProfile::prop_decay(0.5));
  s.lambda1 = s.lambda2 = s.m = 0.0;
  for (double& v : s.eta1.values) v = 0.0;
  for (double& v : s.eta2.values) v = 0.0;
  CHECK(swap_competitor(s, P).values == P.values);
}

TEST_CASE("property: the swap keeps mass, sign and the marginals of P") {
  gen::Rng rng(44);
  for (int t = 0; t < 60; ++t) {
    const int N = t % 2 ? 3 : 2, M = N == 3 ? 7 : 11;
    GridSpec g(1, N, M, 0, 1);
    Field P = gen::random_density(g, rng, 0.2);
    std::vector<int> y = gen::random_node(g, rng), z = gen::random_node(g, rng);
    const double dist = g.spacing() * std::sqrt(double((y[0] - z[0]) * (y[0] - z[0]) +
                                                       (y[1] - z[1]) * (y[1] - z[1]) +
                                                       (N == 3 ? (y[2] - z[2]) * (y[2] - z[2]) : 0)));
    if (dist < 3 * g.spacing()) continue;
    const double r1 = gen::uniform(rng, 0.2, 0.45) * dist, r2 = gen::uniform(rng, 0.2, 0.45) * dist;
    SwapState s(g);
    try {
      s = make_bumps(P, y, z, r1, r2, BumpProfile::prop_decay(gen::uniform(rng, 0.1, 1.0)));
    } catch (const DegenerateError&) {
      continue;
    }
    Field Pbar = swap_competitor(s, P);
    CHECK_NOTHROW(check_swap_state(s, P));
    CHECK(std::abs(sum_over(Pbar) - sum_over(P)) <= 1e-13);
    for (int i = 0; i < N; ++i) {
      auto a = marginal(P, IndexSet::single(i, N)), b = marginal(Pbar, IndexSet::single(i, N));
      CHECK(max_abs_diff(a.values, b.values) <= 1e-12);
    }
  }
}

TEST_CASE("interaction identity for the swap on three particles") {
  GridSpec g(1, 3, 8, 0, 1);
  gen::Rng rng(45);
  const CostSpec cost = CostSpec::coulomb();
  for (int t = 0; t < 10; ++t) {
    Field P = gen::random_density(g, rng);
    std::vector<int> y{1, 4, 6}, z{6, 2, 0};
    auto s = make_bumps(P, y, z, 0.25, 0.3, BumpProfile::prop_decay(0.5), 0.9);
    auto rep = lemma_conti_check(P, s, 0.01, cost);
    CHECK(rep.vee_relative_error <= 1e-12);
    CHECK(rep.kinetic_lhs <= rep.kinetic_rhs * (1 + 1e-12));
  }
}

TEST_CASE("kinetic bound with a saturated bump is rejected") {
  GridSpec g(1, 2, 10, 0, 1);
  gen::Rng rng(46);
  Field P = gen::random_density(g, rng);
  std::vector<int> y{2, 2}, z{7, 7};
  auto s = make_bumps(P, y, z, 0.3, 0.3, BumpProfile::prop_decay(0.5), 1.0);
  CHECK_THROWS_AS(lemma_conti_check(P, s, 0.01, CostSpec::coulomb()), DegenerateError);
}

TEST_CASE("bump construction errors") {
  Field P = two_by_two();
  auto p = BumpProfile::prop_decay(0.5);
  CHECK_THROWS_AS(make_bumps(P, corner_y, corner_z, 1.0, 1.0, p), ConstraintError);
  CHECK_THROWS_AS(make_bumps(P, corner_y, std::vector<int>{2, 0}, 0.5, 0.5, p), ConstraintError);
  CHECK_THROWS_AS(make_bumps(P, corner_y, std::vector<int>{1}, 0.5, 0.5, p), ConstraintError);
  CHECK_THROWS_AS(make_bumps(P, corner_y, corner_z, -0.5, 0.5, p), DomainError);
  CHECK_THROWS_AS(make_bumps(P, corner_y, corner_z, 0.5, 0.5, p, 0.0), DomainError);
  Field Z(P.grid, {0.0, 1.0, 1.0, 1.0});
  CHECK_THROWS_AS(make_bumps(Z, corner_y, corner_z, 0.5, 0.5, p), DegenerateError);
  GridSpec one(1, 1, 4, 0, 1);
  CHECK_THROWS_AS(make_bumps(Field(one, {1, 1, 1, 1}), std::vector<int>{0}, std::vector<int>{3},
                             0.1, 0.1, p),
                  ConstraintError);
}
