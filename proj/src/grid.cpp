#include "llgrid/grid.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "llgrid/errors.hpp"

namespace llgrid {

GridSpec::GridSpec(int dim, int particles, int points, double lo, double hi,
                   std::size_t budget)
    : dim_(dim), particles_(particles), points_(points), lo_(lo), hi_(hi), states_(1) {
  if (dim < 1) throw ConstraintError("grid: spatial dimension must be >= 1");
  if (particles < 1) throw ConstraintError("grid: particle count must be >= 1");
  if (points < 2) throw ConstraintError("grid: need at least 2 points per axis");
  if (!(hi > lo) || !std::isfinite(lo) || !std::isfinite(hi))
    throw ConstraintError("grid: box must satisfy a < b");

  const int n_axes = dim * particles;
  // Reject before any allocation proportional to the state count.
  double log_states = n_axes * std::log(static_cast<double>(points));
  if (log_states > std::log(static_cast<double>(budget)) + 1e-9)
    throw BudgetError("grid: " + std::to_string(points) + "^" + std::to_string(n_axes) +
                      " states exceed the memory budget of " + std::to_string(budget));
  for (int k = 0; k < n_axes; ++k) states_ *= static_cast<std::size_t>(points);
  if (states_ > budget)
    throw BudgetError("grid: state count exceeds the memory budget of " +
                      std::to_string(budget));

  strides_.assign(n_axes, 1);
  for (int k = n_axes - 2; k >= 0; --k) strides_[k] = strides_[k + 1] * points;
}

std::size_t GridSpec::one_body_states() const {
  std::size_t n = 1;
  for (int k = 0; k < dim_; ++k) n *= static_cast<std::size_t>(points_);
  return n;
}

double GridSpec::cell_volume() const { return std::pow(spacing(), axes()); }

double GridSpec::diameter() const { return (hi_ - lo_) * std::sqrt(static_cast<double>(axes())); }

std::vector<int> GridSpec::unflatten(std::size_t flat) const {
  std::vector<int> out(axes());
  unflatten(flat, out);
  return out;
}

void GridSpec::unflatten(std::size_t flat, std::span<int> out) const {
  for (int k = axes() - 1; k >= 0; --k) {
    out[k] = static_cast<int>(flat % points_);
    flat /= points_;
  }
}

std::size_t GridSpec::flatten(std::span<const int> coords) const {
  if (static_cast<int>(coords.size()) != axes())
    throw ConstraintError("grid: coordinate tuple has wrong length");
  std::size_t flat = 0;
  for (int k = 0; k < axes(); ++k) {
    if (coords[k] < 0 || coords[k] >= points_)
      throw ConstraintError("grid: node coordinate out of range");
    flat = flat * points_ + coords[k];
  }
  return flat;
}

GridSpec GridSpec::with_particles(int k) const {
  return GridSpec(dim_, k, points_, lo_, hi_, std::max(states_, one_body_states()));
}

bool GridSpec::same_layout(const GridSpec& o) const {
  return dim_ == o.dim_ && particles_ == o.particles_ && points_ == o.points_ &&
         lo_ == o.lo_ && hi_ == o.hi_;
}

Field::Field(GridSpec g, std::vector<double> v) : grid(g), values(std::move(v)) {
  if (values.size() != grid.states())
    throw ConstraintError("field: value count " + std::to_string(values.size()) +
                          " does not match grid state count " + std::to_string(grid.states()));
}

double Field::sum() const { return std::accumulate(values.begin(), values.end(), 0.0); }

IndexSet::IndexSet(std::vector<int> members, int particles)
    : members_(std::move(members)), particles_(particles) {
  if (members_.empty()) throw ConstraintError("index set: must be nonempty");
  for (std::size_t k = 0; k < members_.size(); ++k) {
    if (members_[k] < 0 || members_[k] >= particles)
      throw ConstraintError("index set: member " + std::to_string(members_[k]) +
                            " outside {0, ..., " + std::to_string(particles - 1) + "}");
    if (k > 0 && members_[k] <= members_[k - 1])
      throw ConstraintError("index set: members must be strictly increasing");
  }
}

IndexSet IndexSet::complement() const {
  std::vector<int> rest;
  for (int i = 0; i < particles_; ++i)
    if (!contains(i)) rest.push_back(i);
  return IndexSet(std::move(rest), particles_);
}

bool IndexSet::contains(int i) const {
  return std::binary_search(members_.begin(), members_.end(), i);
}

bool within_radius(double n2, double radius, double spacing) {
  double r = radius / spacing;
  return n2 <= r * r * (1.0 + 1e-12);
}

BallStencil make_ball_stencil(int axes, double radius, double spacing) {
  if (radius < 0) throw DomainError("ball stencil: radius must be >= 0");
  BallStencil st;
  st.axes = axes;
  st.radius = radius;
  const int reach = static_cast<int>(std::floor(radius / spacing * (1.0 + 1e-12)));
  std::vector<int> o(axes, -reach);
  while (true) {
    int n2 = 0;
    for (int v : o) n2 += v * v;
    if (within_radius(n2, radius, spacing)) {
      st.offsets.insert(st.offsets.end(), o.begin(), o.end());
      st.norm2.push_back(n2);
    }
    int k = axes - 1;
    while (k >= 0 && o[k] == reach) o[k--] = -reach;
    if (k < 0) break;
    ++o[k];
  }
  return st;
}

}  // namespace llgrid
