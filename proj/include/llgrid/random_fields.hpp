#pragma once

#include <random>
#include <vector>

#include "llgrid/density.hpp"

// Generators for property checks: random test densities, couplings and nodes.
namespace llgrid::gen {

using Rng = std::mt19937_64;

// Independent U(0, 1) values; each node is zeroed with probability zero_fraction.
Field random_field(const GridSpec& g, Rng& rng, double zero_fraction = 0.0);
// random_field scaled to unit discrete integral.
Field random_density(const GridSpec& g, Rng& rng, double zero_fraction = 0.0);
// Random positive field fitted onto the couplings of mu by proportional fitting.
Field random_coupling(const OneBodyDensity& mu, Rng& rng, double tol = 1e-14);
// Gaussian bump exp(-|x - c|^2 / (2 sigma^2)) on grid^{axes}, all axes centred at
// `centre`, normalised.
Field gaussian_field(const GridSpec& g, double sigma, double centre);
std::vector<int> random_node(const GridSpec& g, Rng& rng);
// Node uniformly drawn among the nodes of the region; throws if it is empty.
std::vector<int> random_node_in(const Region& region, Rng& rng);
double uniform(Rng& rng, double lo, double hi);

}  // namespace llgrid::gen
