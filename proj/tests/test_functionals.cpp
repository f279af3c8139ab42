#include <filesystem>
#include <fstream>

#include "doctest.h"
#include "llgrid/errors.hpp"
#include "llgrid/functionals.hpp"
#include "support.hpp"

using namespace llgrid;
using support::formula_field;
using support::rel_err;

namespace {

Field point_mass(const GridSpec& g, std::vector<int> node) {
  Field f(g);
  f.values[g.flatten(node)] = 1.0 / g.cell_volume();
  return f;
}

Field gaussian_1d(int M, double sigma) {
  GridSpec g(1, 1, M, 0, 1);
  return OneBodyDensity::gaussian(g, sigma).field();
}

}  // namespace

TEST_CASE("fisher information of a Gaussian") {
  Field g = gaussian_1d(256, 0.1);
  const double F = fisher_information(g);
  CHECK(F == doctest::Approx(99.988897710837023).epsilon(1e-12));
  CHECK(F * 0.01 >= 0.99);
  CHECK(F * 0.01 <= 1.01);
}

TEST_CASE("fisher information is 1-homogeneous on an unnormalised input") {
  Field g = gaussian_1d(64, 0.12);
  Field twice = g;
  for (double& v : twice.values) v *= 2;
  CHECK(rel_err(fisher_information(twice), 2 * fisher_information(g)) <= 1e-15);
}

TEST_CASE("fisher information of a product of Gaussians") {
  GridSpec g(1, 2, 128, 0, 1);
  Field a = gaussian_1d(128, 0.1), b = gaussian_1d(128, 0.15);
  Field P = tensor_product({a, b});
  const double F = fisher_information(P);
  CHECK(F == doctest::Approx(143.93599974207902).epsilon(1e-12));
  CHECK(fisher_information(a) == doctest::Approx(99.959766870576374).epsilon(1e-12));
  CHECK(fisher_information(b) == doctest::Approx(43.976232871502638).epsilon(1e-12));
  CHECK(std::abs(F / (1 / 0.01 + 1 / 0.0225) - 1) <= 0.02);
}

TEST_CASE("fisher information treats zeros without division") {
  GridSpec g(1, 2, 6, 0, 1);
  Field P = point_mass(g, {2, 3});
  const double F = fisher_information(P);
  CHECK(std::isfinite(F));
  CHECK(F > 0);
}

TEST_CASE("interaction of point masses") {
  GridSpec g2(1, 2, 2, 0, 1);
  CHECK(interaction_energy(point_mass(g2, {0, 1}), CostSpec::coulomb()) == doctest::Approx(1.0));
  GridSpec g3(1, 3, 4, 0, 3);
  CHECK(interaction_energy(point_mass(g3, {0, 1, 3}), CostSpec::coulomb()) ==
        doctest::Approx(11.0 / 6.0).epsilon(1e-15));
}

TEST_CASE("interaction matches the pair-sum oracle") {
  GridSpec g(1, 3, 6, 0, 1);
  Field P = formula_field(g, 11, 5, 17);
  CHECK(interaction_energy(P, CostSpec::coulomb()) ==
        doctest::Approx(12.423277038553394).epsilon(1e-12));
}

TEST_CASE("coincident mass without a cap is rejected") {
  GridSpec g(1, 2, 4, 0, 1);
  CostSpec c = CostSpec::coulomb();
  c.without_cap();
  CHECK_THROWS_AS(interaction_energy(point_mass(g, {1, 1}), c), ConstraintError);
  CHECK(interaction_energy(point_mass(g, {0, 3}), c) == doctest::Approx(1.0));
  CostSpec capped = CostSpec::coulomb();
  CHECK(interaction_energy(point_mass(g, {1, 1}), capped) ==
        doctest::Approx(1.0 / (0.5 * g.spacing())));
}

TEST_CASE("levy-lieb energy composition") {
  GridSpec g(1, 2, 32, 0, 1);
  gen::Rng rng(3);
  Field P = gen::random_density(g, rng);
  const CostSpec c = CostSpec::coulomb();
  auto e1 = levy_lieb_energy(P, 0.01, c), e2 = levy_lieb_energy(P, 0.02, c);
  CHECK(e1.kinetic == fisher_information(P));
  CHECK(e1.interaction == interaction_energy(P, c));
  CHECK(e1.total_at_eps(0.0) == e1.interaction);
  CHECK(rel_err(e2.total() - e2.interaction, 2 * (e1.total() - e1.interaction)) <= 1e-15);
  CHECK(e1.cap.has_value());
  CHECK_THROWS_AS(levy_lieb_energy(P, -1.0, c), DomainError);

  Field a = gaussian_1d(32, 0.1), b = gaussian_1d(32, 0.15);
  Field prod = tensor_product({a, b});
  auto e = levy_lieb_energy(prod, 0.01, c);
  CHECK(std::abs(e.total() - (0.01 * (fisher_information(a) + fisher_information(b)) +
                              interaction_energy(prod, c))) <=
        1e-12 * e.total());
}

TEST_CASE("cost families and envelopes") {
  const CostSpec coul = CostSpec::coulomb();
  CHECK(coul.divergent());
  CHECK(coul.lower_envelope(0.01 / 10) > 10 * coul.lower_envelope(0.01) * (1 - 1e-15));
  const CostSpec p = CostSpec::inverse_power(2.0);
  CHECK(p.radial(0.5) == doctest::Approx(4.0));
  CHECK(p.lower_envelope(0.001) > 10 * p.lower_envelope(0.01));
  CHECK_FALSE(CostSpec::none().divergent());
  CHECK_THROWS_AS(CostSpec::inverse_power(0), DomainError);

  CostSpec t = CostSpec::table({0.1, 1.0, 10.0}, {10.0, 1.0, 0.1});
  CHECK(t.radial(0.5) == doctest::Approx(2.0).epsilon(1e-12));  // log-linear 1/t
  CHECK(t.radial(100.0) == doctest::Approx(0.01).epsilon(1e-12));
  CHECK_THROWS_AS(CostSpec::table({1.0, 0.5}, {1, 1}), ConstraintError);
  CHECK_THROWS_AS(CostSpec::table({0.5, 1.0}, {1, 2}), ConstraintError);

  const auto path = std::filesystem::temp_directory_path() / "llgrid_cost_table.txt";
  {
    std::ofstream out(path);
    out << "# t c\n0.1 10\n1 1\n10 0.1\n";
  }
  CostSpec loaded = CostSpec::load_table(path.string());
  CHECK(loaded.radial(0.5) == doctest::Approx(2.0).epsilon(1e-12));
  auto kv = loaded.to_config();
  CHECK(kv["cost.family"] == "table");
  CHECK(CostSpec::from_config(kv).radial(3.0) == doctest::Approx(loaded.radial(3.0)));
  std::filesystem::remove(path);
}

TEST_CASE("property: envelopes bracket the cost and are nonincreasing") {
  gen::Rng rng(21);
  for (const CostSpec& c : {CostSpec::coulomb(), CostSpec::inverse_power(0.5),
                            CostSpec::table({0.01, 0.1, 1}, {50, 9, 1})}) {
    for (int k = 0; k < 10000; ++k) {
      double x[2] = {gen::uniform(rng, 0, 1), gen::uniform(rng, 0, 1)};
      double y[2] = {gen::uniform(rng, 0, 1), gen::uniform(rng, 0, 1)};
      const double t = std::hypot(x[0] - y[0], x[1] - y[1]);
      const double v = c(x, y);
      if (!(c.lower_envelope(t) <= v * (1 + 1e-14) && v <= c.upper_envelope(t) * (1 + 1e-14))) {
        FAIL_CHECK("envelope violated at t=" << t);
        break;
      }
    }
    double prev = c.lower_envelope(1e-4);
    for (int k = 1; k <= 40; ++k) {
      const double t = 1e-4 * std::pow(10.0, k * 0.1);
      CHECK(c.lower_envelope(t) <= prev);
      prev = c.lower_envelope(t);
    }
  }
}

TEST_CASE("IMS split") {
  GridSpec g(1, 2, 10, 0, 1);
  gen::Rng rng(4);
  Field P = gen::random_density(g, rng);
  std::vector<Field> third(3, Field(g, std::vector<double>(g.states(), 1.0 / 3)));
  ImsSplit c = ims_split(P, third);
  CHECK(std::abs(c.defect) <= 1e-13 * c.left);

  // eta_1 = 1 on supp P and on its forward neighbours.
  Field Q(g);
  std::vector<Field> part{Field(g), Field(g), Field(g)};
  std::vector<int> node(2);
  for (std::size_t x = 0; x < g.states(); ++x) {
    g.unflatten(x, node);
    const bool supp = node[0] < 4 && node[1] < 4, one = node[0] <= 4 && node[1] <= 4;
    Q.values[x] = supp ? P.values[x] : 0.0;
    part[0].values[x] = one ? 1.0 : 0.0;
    part[1].values[x] = one ? 0.0 : 0.5;
    part[2].values[x] = one ? 0.0 : 0.5;
  }
  ImsSplit o = ims_split(Q, part);
  CHECK(std::abs(o.defect) <= 1e-12 * o.left);

  std::vector<Field> broken(3, Field(g, std::vector<double>(g.states(), 0.3)));
  CHECK_THROWS_AS(ims_split(P, broken), ConstraintError);
}

TEST_CASE("IMS defect on smooth data matches the refinement oracle") {
  const double want[] = {0.0043823586014753299, 0.0019802749151536106, 0.00093923127853867726,
                         0.00045710977110914272};
  double prev = 0.0;
  int i = 0;
  for (int M : {64, 128, 256, 512}) {
    GridSpec g(1, 1, M, 0, 1);
    Field P = gaussian_1d(M, 0.1);
    std::vector<Field> eta(3, Field(g));
    for (int x = 0; x < M; ++x) {
      const double t = g.coordinate(x);
      const double e1 = std::pow(std::cos(M_PI * t / 2), 2);
      const double e2 = (1 - e1) * std::pow(std::sin(M_PI * t), 2);
      eta[0].values[x] = e1;
      eta[1].values[x] = e2;
      eta[2].values[x] = std::max(0.0, 1 - e1 - e2);
    }
    ImsSplit s = ims_split(P, eta);
    const double d = std::abs(s.defect) / s.left;
    CHECK(d == doctest::Approx(want[i]).epsilon(1e-6));
    if (M == 64) CHECK(d <= 0.05);
    if (i > 0) CHECK(prev / d >= 1.8);
    prev = d;
    ++i;
  }
}

TEST_CASE("property: homogeneity, subadditivity and the marginal split") {
  gen::Rng rng(22);
  const int sizes[] = {3, 5, 8, 12, 16};
  for (int t = 0; t < 200; ++t) {
    GridSpec g(1, 2, sizes[t % 5], 0, 1);
    Field P = gen::random_density(g, rng, t % 4 == 0 ? 0.4 : 0.0);
    Field Q = gen::random_density(g, rng, t % 3 == 0 ? 0.4 : 0.0);
    const double fp = fisher_information(P), fq = fisher_information(Q);
    for (double lam : {0.5, 2.0, 10.0}) {
      Field L = P;
      for (double& v : L.values) v *= lam;
      CHECK(rel_err(fisher_information(L), lam * fp) <= 1e-15);
    }
    Field S = P;
    for (std::size_t k = 0; k < S.values.size(); ++k) S.values[k] += Q.values[k];
    CHECK(fisher_information(S) <= fp + fq + 1e-12 * (fp + fq));
    const double split = fp - fisher_information(marginal(P, IndexSet::single(0, 2))) -
                         fisher_information(marginal(P, IndexSet::single(1, 2)));
    CHECK(split >= -1e-12 * fp);
    GridSpec g1 = g.with_particles(1);
    Field a = gen::random_density(g1, rng), b = gen::random_density(g1, rng);
    CHECK(rel_err(fisher_information(tensor_product({a, b})),
                  fisher_information(a) + fisher_information(b)) <= 1e-12);
  }
}

TEST_CASE("property: split over larger index sets at N = 3") {
  gen::Rng rng(23);
  for (int t = 0; t < 40; ++t) {
    GridSpec g(1, 3, 5, 0, 1);
    Field P = gen::random_density(g, rng, 0.2);
    const double fp = fisher_information(P);
    const double split = fp - fisher_information(marginal(P, IndexSet({0, 2}, 3))) -
                         fisher_information(marginal(P, IndexSet::single(1, 3)));
    CHECK(split >= -1e-12 * fp);
  }
}

TEST_CASE("cutoff gradient term uses the fisher stencil") {
  GridSpec g(1, 1, 5, 0, 1);
  Field P(g, std::vector<double>(5, 1.0));
  Field eta(g, {0.0, 0.25, 1.0, 0.25, 0.0});
  // 4 sum_x P(x) (sqrt eta(x+1) - sqrt eta(x))^2 h / h^2 = 4 * 4 * 0.25 * 4.
  CHECK(cutoff_gradient_term(P, eta) == doctest::Approx(16.0));
}
