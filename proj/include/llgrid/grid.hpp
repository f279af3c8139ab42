#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace llgrid {

// Isotropic tensor grid for N particles in d dimensions: every one of the d*N
// axes carries the same M nodes a, a+h, ..., b.  Flat node indices are row-major
// with the last axis fastest; particle i owns axes [i*d, (i+1)*d).
class GridSpec {
 public:
  static constexpr std::size_t default_budget = 10'000'000;

  GridSpec(int dim, int particles, int points, double lo, double hi,
           std::size_t budget = default_budget);

  int dim() const { return dim_; }
  int particles() const { return particles_; }
  int points() const { return points_; }
  double lo() const { return lo_; }
  double hi() const { return hi_; }
  double spacing() const { return (hi_ - lo_) / (points_ - 1); }
  int axes() const { return dim_ * particles_; }

  std::size_t states() const { return states_; }
  std::size_t one_body_states() const;
  // h^{axes}: quadrature weight of a single node.
  double cell_volume() const;
  // Euclidean diameter of the box in R^{axes}.
  double diameter() const;

  double coordinate(int node) const { return lo_ + node * spacing(); }
  std::size_t stride(int axis) const { return strides_[axis]; }

  std::vector<int> unflatten(std::size_t flat) const;
  void unflatten(std::size_t flat, std::span<int> out) const;
  std::size_t flatten(std::span<const int> coords) const;

  // Same box and resolution, k particles.
  GridSpec with_particles(int k) const;

  bool same_layout(const GridSpec& other) const;

 private:
  int dim_;
  int particles_;
  int points_;
  double lo_;
  double hi_;
  std::size_t states_;
  std::vector<std::size_t> strides_;
};

// Raw nonnegative grid function over grid^{d * grid.particles()}; no normalization
// is implied.  Marginals, bumps and unnormalized test fields live here.
struct Field {
  GridSpec grid;
  std::vector<double> values;

  explicit Field(GridSpec g) : grid(g), values(g.states(), 0.0) {}
  Field(GridSpec g, std::vector<double> v);

  double sum() const;
  double integral() const { return sum() * grid.cell_volume(); }
};

// Sorted, duplicate-free subset of particle indices {0, ..., N-1}.
class IndexSet {
 public:
  IndexSet(std::vector<int> members, int particles);
  static IndexSet single(int i, int particles) { return IndexSet({i}, particles); }
  IndexSet complement() const;

  const std::vector<int>& members() const { return members_; }
  int size() const { return static_cast<int>(members_.size()); }
  int particles() const { return particles_; }
  bool contains(int i) const;

 private:
  std::vector<int> members_;
  int particles_;
};

// Integer lattice offsets o with h*|o| <= r, i.e. the nodes of a closed ball
// centred on a node, membership decided by node centres.
struct BallStencil {
  int axes = 0;
  double radius = 0.0;
  std::vector<int> offsets;  // size() * axes entries
  std::vector<int> norm2;    // |o|^2 per offset

  std::size_t size() const { return norm2.size(); }
  std::span<const int> offset(std::size_t k) const {
    return {offsets.data() + k * axes, static_cast<std::size_t>(axes)};
  }
};

BallStencil make_ball_stencil(int axes, double radius, double spacing);

// True when h^2 * n2 <= r^2 up to a relative 1e-12 guard against round-off
// in radii that are exact multiples of h.
bool within_radius(double n2, double radius, double spacing);

}  // namespace llgrid
