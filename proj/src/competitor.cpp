#include "llgrid/competitor.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "llgrid/errors.hpp"
#include "llgrid/functionals.hpp"

namespace llgrid {
namespace {

double lattice_distance(std::span<const int> a, std::span<const int> b, double h) {
  double n2 = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) n2 += double(a[k] - b[k]) * double(a[k] - b[k]);
  return h * std::sqrt(n2);
}

// eta((x - c)/r) at every node, zero outside the ball.
Field bump_field(const GridSpec& g, std::span<const int> c, double r, const BumpProfile& profile) {
  Field f(g);
  std::vector<int> x(g.axes());
  const double h = g.spacing();
  for (std::size_t k = 0; k < f.values.size(); ++k) {
    g.unflatten(k, x);
    const double s = lattice_distance(x, c, h) / r;
    f.values[k] = s < 1.0 ? profile(s) : 0.0;
  }
  return f;
}

double weighted_sum(const Field& a, const Field& b) {
  double acc = 0.0;
  for (std::size_t k = 0; k < a.values.size(); ++k) acc += a.values[k] * b.values[k];
  return acc * a.grid.cell_volume();
}

void check_point(const GridSpec& g, std::span<const int> p, const char* name) {
  if (static_cast<int>(p.size()) != g.axes())
    throw ConstraintError(std::string("make_bumps: ") + name + " has the wrong dimension");
  for (int v : p)
    if (v < 0 || v >= g.points())
      throw ConstraintError(std::string("make_bumps: ") + name + " lies off the grid");
}

}  // namespace

BumpProfile BumpProfile::prop_decay(double delta) {
  if (!(delta > 0 && delta <= 1)) throw DomainError("bump: delta must lie in (0, 1]");
  return BumpProfile{BumpShape::prop_decay, delta};
}

BumpProfile BumpProfile::smooth() { return BumpProfile{BumpShape::smooth, 0.0}; }

double BumpProfile::operator()(double s) const {
  s = std::abs(s);
  if (s >= 1.0) return 0.0;
  if (shape == BumpShape::smooth) return (1.0 - s) * (1.0 - s) * (1.0 + 2.0 * s);
  const double t = std::min((1.0 + delta) * (1.0 - s) / delta, 1.0);
  return t * t;
}

double BumpProfile::root_slope(double s) const {
  s = std::abs(s);
  if (s >= 1.0) return 0.0;
  if (shape == BumpShape::smooth) {
    // d/ds [(1 - s) sqrt(1 + 2s)]
    const double q = std::sqrt(1.0 + 2.0 * s);
    return std::abs(-q + (1.0 - s) / q);
  }
  return s >= 1.0 / (1.0 + delta) ? (1.0 + delta) / delta : 0.0;
}

SwapState make_bumps(const Field& P, std::span<const int> y, std::span<const int> z, double r1,
                     double r2, const BumpProfile& profile, double lambda_cap) {
  const GridSpec& g = P.grid;
  if (g.particles() < 2) throw ConstraintError("make_bumps: the swap needs N >= 2");
  check_point(g, y, "y");
  check_point(g, z, "z");
  if (!(r1 > 0) || !(r2 > 0)) throw DomainError("make_bumps: radii must be positive");
  if (!(lambda_cap > 0 && lambda_cap <= 1)) throw DomainError("make_bumps: lambda cap must lie in (0, 1]");
  const double dist = lattice_distance(y, z, g.spacing());
  if (!(r1 + r2 < dist))
    throw ConstraintError("make_bumps: supports overlap (need r1 + r2 < |y - z|)");

  SwapState s(g);
  s.y.assign(y.begin(), y.end());
  s.z.assign(z.begin(), z.end());
  s.r1 = r1;
  s.r2 = r2;
  s.profile = profile;
  Field b1 = bump_field(g, y, r1, profile);
  Field b2 = bump_field(g, z, r2, profile);
  s.raw_mass1 = weighted_sum(b1, P);
  s.raw_mass2 = weighted_sum(b2, P);
  if (!(s.raw_mass1 > 0)) throw DegenerateError("make_bumps: the ball B(y, r1) carries no mass");
  if (!(s.raw_mass2 > 0)) throw DegenerateError("make_bumps: the ball B(z, r2) carries no mass");
  // The larger multiplier is set to the cap exactly so a saturated bump reaches 1.
  if (s.raw_mass2 < s.raw_mass1) {
    s.lambda1 = lambda_cap * s.raw_mass2 / s.raw_mass1;
    s.lambda2 = lambda_cap;
  } else {
    s.lambda1 = lambda_cap;
    s.lambda2 = lambda_cap * s.raw_mass1 / s.raw_mass2;
  }
  s.m = s.lambda1 * s.raw_mass1;
  for (std::size_t k = 0; k < b1.values.size(); ++k) {
    s.eta1.values[k] = s.lambda1 * b1.values[k];
    s.eta2.values[k] = s.lambda2 * b2.values[k];
  }
  return s;
}

SwapState make_bumps(const NBodyDensity& P, std::span<const int> y, std::span<const int> z,
                     double r1, double r2, const BumpProfile& profile, double lambda_cap) {
  return make_bumps(P.field(), y, z, r1, r2, profile, lambda_cap);
}

Field swap_competitor(SwapState& s, const Field& P) {
  const GridSpec& g = P.grid;
  if (!g.same_layout(s.eta1.grid)) throw ConstraintError("swap_competitor: grid mismatch");
  const int N = g.particles();
  Field pbar(g, P.values);
  if (s.m == 0.0) {
    if (s.lambda1 == 0.0 && s.lambda2 == 0.0) {
      s.Pbar = pbar;
      return pbar;
    }
    throw DegenerateError("swap_competitor: common bump mass m is zero");
  }
  std::vector<int> rest(N - 1);
  std::iota(rest.begin(), rest.end(), 1);
  const IndexSet first = IndexSet::single(0, N);
  const IndexSet others(rest, N);
  std::array<Field, 2> piece{Field(g), Field(g)};
  for (std::size_t k = 0; k < P.values.size(); ++k) {
    piece[0].values[k] = s.eta1.values[k] * P.values[k];
    piece[1].values[k] = s.eta2.values[k] * P.values[k];
  }
  for (int i = 0; i < 2; ++i) {
    s.rho1[i] = marginal(piece[i], first);
    s.rhohat1[i] = marginal(piece[i], others);
  }
  Field P1 = tensor_product({*s.rho1[1], *s.rhohat1[0]});
  Field P2 = tensor_product({*s.rho1[0], *s.rhohat1[1]});
  const double inv = 1.0 / s.m;
  for (std::size_t k = 0; k < P.values.size(); ++k) {
    P1.values[k] *= inv;
    P2.values[k] *= inv;
    pbar.values[k] = P.values[k] - piece[0].values[k] - piece[1].values[k] + P1.values[k] +
                     P2.values[k];
  }
  s.P1 = std::move(P1);
  s.P2 = std::move(P2);
  s.Pbar = pbar;
  return pbar;
}

NBodyDensity swap_competitor(SwapState& s, const NBodyDensity& P) {
  Field f = swap_competitor(s, P.field());
  for (double& v : f.values) v = std::max(v, 0.0);  // clears -1e-17 round-off only
  return NBodyDensity(f.grid, std::move(f.values), false);
}

void check_swap_state(const SwapState& s, const Field& P) {
  for (std::size_t k = 0; k < s.eta1.values.size(); ++k) {
    if (s.eta1.values[k] > 0 && s.eta2.values[k] > 0)
      throw ConstraintError("swap state: bump supports intersect");
    if (s.eta1.values[k] + s.eta2.values[k] > 1.0)
      throw ConstraintError("swap state: eta_1 + eta_2 exceeds 1");
  }
  const double m1 = weighted_sum(s.eta1, P), m2 = weighted_sum(s.eta2, P);
  if (std::abs(m1 - m2) > 1e-12) throw ConstraintError("swap state: bump masses differ");
  if (s.Pbar)
    for (double v : s.Pbar->values)
      if (v < -1e-15) throw ConstraintError("swap state: competitor is negative somewhere");
}

ContiReport lemma_conti_check(const Field& P, SwapState& s, double eps, const CostSpec& cost) {
  const GridSpec& g = P.grid;
  if (!s.Pbar) swap_competitor(s, P);
  const Field& pbar = *s.Pbar;

  Field eta3(g);
  for (std::size_t k = 0; k < eta3.values.size(); ++k)
    eta3.values[k] = std::max(0.0, 1.0 - s.eta1.values[k] - s.eta2.values[k]);
  std::vector<int> c(g.axes());
  for (std::size_t k = 0; k < eta3.values.size(); ++k) {
    if (eta3.values[k] != 0.0 || P.values[k] == 0.0) continue;
    g.unflatten(k, c);
    for (int a = 0; a < g.axes(); ++a)
      if (c[a] + 1 < g.points() && eta3.values[k + g.stride(a)] != 0.0)
        throw DegenerateError(
            "lemma check: 1 - eta_1 - eta_2 vanishes next to a nonzero gradient; "
            "use lambda_cap < 1");
  }

  ContiReport r;
  r.kinetic_lhs = fisher_information(pbar);
  r.kinetic_rhs = fisher_information(P) + cutoff_gradient_term(P, s.eta1) +
                  cutoff_gradient_term(P, s.eta2) + cutoff_gradient_term(P, eta3);

  auto v = pair_potential(g, cost);
  auto C1 = first_particle_potential(g, cost);
  r.vee_lhs = weighted_mass(pbar, v);
  Field removed(g), added(g);
  for (std::size_t k = 0; k < P.values.size(); ++k) {
    removed.values[k] = P.values[k] * (s.eta1.values[k] + s.eta2.values[k]);
    added.values[k] = s.P1 ? s.P1->values[k] + s.P2->values[k] : 0.0;
  }
  r.vee_rhs = weighted_mass(P, v) - weighted_mass(removed, C1) + weighted_mass(added, C1);
  r.vee_relative_error =
      std::abs(r.vee_lhs - r.vee_rhs) / std::max(std::abs(r.vee_rhs), 1e-300);
  r.energy_change = eps * (r.kinetic_lhs - fisher_information(P)) + r.vee_lhs - weighted_mass(P, v);
  return r;
}

ContiReport lemma_conti_check(const NBodyDensity& P, SwapState& s, double eps,
                              const CostSpec& cost) {
  return lemma_conti_check(P.field(), s, eps, cost);
}

}  // namespace llgrid
