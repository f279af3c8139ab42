#include "llgrid/functionals.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "llgrid/errors.hpp"
#include "llgrid/kernels.hpp"

namespace llgrid {
namespace {

std::vector<double> sqrt_of(std::span<const double> v) {
  std::vector<double> out(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) out[i] = std::sqrt(v[i]);
  return out;
}

template <class PairFilter>
std::vector<double> potential_field(const GridSpec& g, const CostSpec& cost, PairFilter use) {
  const int d = g.dim(), N = g.particles();
  const double h = g.spacing();
  const auto cap = cost.cap(h);
  const double coincident = cap ? *cap : std::numeric_limits<double>::infinity();
  std::vector<double> v(g.states(), 0.0);
#pragma omp parallel
  {
    std::vector<int> c(g.axes());
#pragma omp for schedule(static)
    for (std::int64_t x = 0; x < static_cast<std::int64_t>(v.size()); ++x) {
      g.unflatten(static_cast<std::size_t>(x), c);
      double acc = 0.0;
      for (int i = 0; i < N; ++i) {
        for (int j = i + 1; j < N; ++j) {
          if (!use(i, j)) continue;
          double n2 = 0.0;
          for (int k = 0; k < d; ++k) {
            double t = c[i * d + k] - c[j * d + k];
            n2 += t * t;
          }
          acc += n2 == 0.0 ? coincident : cost.radial(h * std::sqrt(n2));
        }
      }
      v[x] = acc;
    }
  }
  return v;
}

}  // namespace

double fisher_information(const Field& P) {
  const GridSpec& g = P.grid;
  auto root = sqrt_of(P.values);
  const double h = g.spacing();
  return 4.0 * kernels::active::difference_energy(g, root) * g.cell_volume() / (h * h);
}

double fisher_information(const NBodyDensity& P) { return fisher_information(P.field()); }

std::vector<double> pair_potential(const GridSpec& g, const CostSpec& cost) {
  return potential_field(g, cost, [](int, int) { return true; });
}

std::vector<double> first_particle_potential(const GridSpec& g, const CostSpec& cost) {
  return potential_field(g, cost, [](int i, int) { return i == 0; });
}

double weighted_mass(const Field& P, std::span<const double> potential) {
  const GridSpec& g = P.grid;
  double acc = 0.0;
  for (std::size_t x = 0; x < P.values.size(); ++x) {
    if (P.values[x] == 0.0) continue;
    if (std::isinf(potential[x]))
      throw ConstraintError(
          "interaction: a grid-coincident node carries mass but the cost has no coincidence "
          "cap; set cost.cap.scale (e.g. 0.5 for cap = m(h/2))");
    acc += P.values[x] * potential[x];
  }
  return acc * g.cell_volume();
}

double interaction_energy(const Field& P, const CostSpec& cost) {
  auto v = pair_potential(P.grid, cost);
  return weighted_mass(P, v);
}

double interaction_energy(const NBodyDensity& P, const CostSpec& cost) {
  return interaction_energy(P.field(), cost);
}

EnergyBreakdown levy_lieb_energy(const Field& P, double eps, const CostSpec& cost) {
  if (!(eps > 0)) throw DomainError("levy_lieb_energy: eps must be positive");
  EnergyBreakdown e;
  e.kinetic = fisher_information(P);
  e.interaction = interaction_energy(P, cost);
  e.eps = eps;
  e.cap = cost.cap(P.grid.spacing());
  return e;
}

EnergyBreakdown levy_lieb_energy(const NBodyDensity& P, double eps, const CostSpec& cost) {
  return levy_lieb_energy(P.field(), eps, cost);
}

double cutoff_gradient_term(const Field& P, const Field& eta) {
  const GridSpec& g = P.grid;
  auto root = sqrt_of(eta.values);
  const double h = g.spacing();
  return 4.0 * kernels::active::weighted_difference_energy(g, P.values, root) * g.cell_volume() /
         (h * h);
}

ImsSplit ims_split(const Field& P, std::span<const Field> partition) {
  if (partition.empty()) throw ConstraintError("ims_split: empty partition");
  const std::size_t n = P.values.size();
  for (const auto& eta : partition) {
    if (!eta.grid.same_layout(P.grid))
      throw ConstraintError("ims_split: cutoff grid differs from density grid");
    for (double v : eta.values)
      if (!(v >= 0.0 && v <= 1.0))
        throw ConstraintError("ims_split: cutoff values must lie in [0, 1]");
  }
  for (std::size_t x = 0; x < n; ++x) {
    double s = 0.0;
    for (const auto& eta : partition) s += eta.values[x];
    if (std::abs(s - 1.0) > 1e-12)
      throw ConstraintError("ims_split: cutoffs do not sum to 1 at node " + std::to_string(x));
  }
  ImsSplit r;
  r.right = fisher_information(P);
  for (const auto& eta : partition) {
    Field piece(P.grid);
    for (std::size_t x = 0; x < n; ++x) piece.values[x] = P.values[x] * eta.values[x];
    r.left += fisher_information(piece);
    r.right += cutoff_gradient_term(P, eta);
  }
  r.defect = r.left - r.right;
  return r;
}

}  // namespace llgrid
