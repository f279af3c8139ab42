#include "doctest.h"
#include "llgrid/kernels.hpp"
#include "support.hpp"

using namespace llgrid;
namespace ser = llgrid::kernels::serial;
namespace par = llgrid::kernels::parallel;

namespace {

// Grids crossing the block boundary so the parallel split is exercised.
std::vector<GridSpec> shapes() {
  return {GridSpec(1, 2, 7, 0, 1), GridSpec(1, 2, 130, 0, 1), GridSpec(2, 2, 12, 0, 1),
          GridSpec(1, 3, 23, 0, 1)};
}

}  // namespace

TEST_CASE("serial and parallel reductions agree") {
  gen::Rng rng(7);
  for (const GridSpec& g : shapes()) {
    Field f = gen::random_field(g, rng, 0.1);
    Field w = gen::random_field(g, rng);
    CHECK(support::rel_err(par::difference_energy(g, f.values), ser::difference_energy(g, f.values)) <= 1e-14);
    CHECK(support::rel_err(par::weighted_difference_energy(g, w.values, f.values),
                           ser::weighted_difference_energy(g, w.values, f.values)) <= 1e-14);
    CHECK(support::rel_err(par::dot(f.values, w.values), ser::dot(f.values, w.values)) <= 1e-14);
    CHECK(support::rel_err(par::sum(f.values), ser::sum(f.values)) <= 1e-14);
  }
}

TEST_CASE("parallel reductions are reproducible") {
  gen::Rng rng(8);
  GridSpec g(1, 2, 200, 0, 1);
  Field f = gen::random_field(g, rng);
  const double a = par::difference_energy(g, f.values);
  for (int k = 0; k < 5; ++k) CHECK(par::difference_energy(g, f.values) == a);
}

TEST_CASE("serial and parallel ball sums agree") {
  gen::Rng rng(9);
  for (const GridSpec& g : shapes()) {
    if (g.states() > 20000) continue;
    Field f = gen::random_field(g, rng);
    BallStencil st = make_ball_stencil(g.axes(), 2.5 * g.spacing(), g.spacing());
    std::vector<double> a(g.states()), b(g.states());
    ser::ball_sums(g, f.values, st, a);
    par::ball_sums(g, f.values, st, b);
    CHECK(support::max_abs_diff(a, b) == 0.0);
  }
}

TEST_CASE("serial and parallel axis sums agree") {
  gen::Rng rng(10);
  for (const GridSpec& g : shapes()) {
    Field f = gen::random_field(g, rng);
    for (int a = 0; a < g.axes(); ++a) {
      kernels::AxisMask mask{std::vector<char>(g.axes(), 0)};
      mask.keep[a] = 1;
      std::vector<double> x(g.points()), y(g.points());
      ser::axis_sums(g, f.values, mask, x);
      par::axis_sums(g, f.values, mask, y);
      for (std::size_t k = 0; k < x.size(); ++k) CHECK(support::rel_err(y[k], x[k]) <= 1e-13);
    }
  }
}

TEST_CASE("serial and parallel block scaling agree") {
  gen::Rng rng(11);
  GridSpec g(1, 3, 9, 0, 1);
  Field f = gen::random_field(g, rng);
  Field h = f;
  std::vector<double> factor(9);
  for (double& v : factor) v = gen::uniform(rng, 0.5, 2);
  ser::scale_by_block(g, f.values, 1, 1, factor);
  par::scale_by_block(g, h.values, 1, 1, factor);
  CHECK(f.values == h.values);
}

TEST_CASE("difference energy on a linear ramp") {
  GridSpec g(1, 1, 5, 0, 1);
  std::vector<double> f{0, 1, 2, 3, 4};
  CHECK(ser::difference_energy(g, f) == 4.0);
  CHECK(par::difference_energy(g, f) == 4.0);
}

TEST_CASE("ball stencil counts lattice points by centre") {
  BallStencil st = make_ball_stencil(2, 1.0, 1.0);
  CHECK(st.size() == 5u);
  BallStencil st2 = make_ball_stencil(2, std::sqrt(2.0), 1.0);
  CHECK(st2.size() == 9u);
  CHECK(within_radius(2.0, std::sqrt(2.0), 1.0));
  CHECK_FALSE(within_radius(2.0 + 1e-9, std::sqrt(2.0), 1.0));
}
