#pragma once

#include <span>
#include <vector>

#include "llgrid/grid.hpp"

namespace llgrid {

// mu = rho / N on the one-particle grid (M^d nodes).  Discrete integral is 1.
class OneBodyDensity {
 public:
  OneBodyDensity(GridSpec system, std::vector<double> values);

  static OneBodyDensity normalized(GridSpec system, std::vector<double> raw);
  static OneBodyDensity uniform(GridSpec system);
  // Isotropic Gaussian centred at the box midpoint, truncated to the box.
  static OneBodyDensity gaussian(GridSpec system, double sigma);
  static OneBodyDensity gaussian(GridSpec system, double sigma, double centre);

  const GridSpec& system_grid() const { return system_; }
  GridSpec grid() const { return system_.with_particles(1); }
  std::span<const double> values() const { return values_; }
  Field field() const { return Field(grid(), values_); }

 private:
  GridSpec system_;
  std::vector<double> values_;
};

// Joint probability density P on grid^{dN}.
class NBodyDensity {
 public:
  NBodyDensity(GridSpec grid, std::vector<double> values, bool symmetric = false);

  static NBodyDensity normalized(const Field& f, bool symmetric = false);
  // mu tensored N times (N taken from mu's system grid).
  static NBodyDensity product(const OneBodyDensity& mu);

  const GridSpec& grid() const { return grid_; }
  std::span<const double> values() const { return values_; }
  bool symmetric() const { return symmetric_; }
  Field field() const { return Field(grid_, values_); }

 private:
  GridSpec grid_;
  std::vector<double> values_;
  bool symmetric_;
};

// Indicator of a node set on some grid.
struct Region {
  GridSpec grid;
  std::vector<char> inside;

  explicit Region(GridSpec g, bool fill = false) : grid(g), inside(g.states(), fill) {}
  std::size_t count() const;
};

// Push-forward of P onto the particles in I: sum over the complementary axes
// times h^{d |I^c|}.
Field marginal(const Field& P, const IndexSet& I);
Field marginal(const NBodyDensity& P, const IndexSet& I);

struct MarginalResidual {
  std::vector<double> per_particle;  // total-variation distance of each marginal to mu
  double residual = 0.0;             // max over particles
  bool pass = false;
};

MarginalResidual check_in_Pi_N(const NBodyDensity& P, const OneBodyDensity& mu, double tol);
MarginalResidual check_in_Pi_N(const Field& P, std::span<const double> mu, double tol);

// Total-variation distance 1/2 sum |a - b| h^{axes} of two fields on the same grid.
double total_variation(const GridSpec& g, std::span<const double> a, std::span<const double> b);

// kappa(mu, r) = max over grid centres x of mu(B(x, r)) (probability normalised).
double kappa(const OneBodyDensity& mu, double r);

// Mass of P on the closed Euclidean ball B(y, r) of grid^{dN}.
double ball_mass(const Field& P, std::span<const int> y, double r);
double ball_mass(const NBodyDensity& P, std::span<const int> y, double r);
// ball_mass at every node centre at once.
std::vector<double> ball_mass_field(const Field& P, double r);

// Nodes where some pair i != j has |x_i - x_j| <= alpha.
Region enlarged_diagonal(const GridSpec& g, double alpha);
double diagonal_mass(const Field& P, double alpha);
double diagonal_mass(const NBodyDensity& P, double alpha);

// Omega_{-r}: nodes x whose every lattice neighbour within distance r lies on the
// grid and in Omega.  Points off the grid count as outside Omega.
Region erode(const Region& omega, double r);

double mass_on(const Field& P, const Region& region);

// Coordinates of node x with the particle blocks permuted: block i of the
// result is block perm[i] of x.
std::size_t permute_particles(const GridSpec& g, std::size_t x, std::span<const int> perm);

// Average of P over all N! particle permutations.
Field symmetrize(const Field& P);

// Largest |P(x) - P(sigma x)| / max P over `samples` random (x, sigma).
double symmetry_defect(const Field& P, int samples, unsigned seed);

// f_1 (x) ... (x) f_N on the grid with N = factors.size().
Field tensor_product(const std::vector<Field>& factors);

}  // namespace llgrid
