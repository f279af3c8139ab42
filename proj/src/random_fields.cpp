#include "llgrid/random_fields.hpp"

#include <cmath>

#include "llgrid/errors.hpp"
#include "llgrid/solver.hpp"

namespace llgrid::gen {

double uniform(Rng& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

Field random_field(const GridSpec& g, Rng& rng, double zero_fraction) {
  Field f(g);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (double& v : f.values) {
    const double keep = u(rng);
    v = u(rng);
    if (keep < zero_fraction) v = 0.0;
  }
  return f;
}

Field random_density(const GridSpec& g, Rng& rng, double zero_fraction) {
  Field f = random_field(g, rng, zero_fraction);
  double total = f.integral();
  if (total == 0.0) {
    f.values[0] = 1.0;
    total = f.integral();
  }
  for (double& v : f.values) v /= total;
  return f;
}

Field random_coupling(const OneBodyDensity& mu, Rng& rng, double tol) {
  Field f = random_density(mu.system_grid(), rng);
  for (double& v : f.values) v += 0.05;
  ipfp_repair(f, mu.values(), tol, 100000);
  return f;
}

Field gaussian_field(const GridSpec& g, double sigma, double centre) {
  Field f(g);
  std::vector<int> c(g.axes());
  for (std::size_t x = 0; x < g.states(); ++x) {
    g.unflatten(x, c);
    double r2 = 0.0;
    for (int a : c) r2 += std::pow(g.coordinate(a) - centre, 2);
    f.values[x] = std::exp(-r2 / (2 * sigma * sigma));
  }
  const double total = f.integral();
  for (double& v : f.values) v /= total;
  return f;
}

std::vector<int> random_node(const GridSpec& g, Rng& rng) {
  std::uniform_int_distribution<std::size_t> u(0, g.states() - 1);
  return g.unflatten(u(rng));
}

std::vector<int> random_node_in(const Region& region, Rng& rng) {
  const std::size_t n = region.count();
  if (n == 0) throw DegenerateError("random_node_in: empty region");
  std::size_t pick = std::uniform_int_distribution<std::size_t>(0, n - 1)(rng);
  for (std::size_t x = 0; x < region.inside.size(); ++x)
    if (region.inside[x] && pick-- == 0) return region.grid.unflatten(x);
  return {};
}

}  // namespace llgrid::gen
