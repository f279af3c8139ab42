#include "llgrid/density.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <string>

#include "llgrid/errors.hpp"
#include "llgrid/kernels.hpp"

namespace llgrid {
namespace {

void require_nonnegative(std::span<const double> v, const char* what) {
  for (double x : v) {
    if (!(x >= 0.0) || !std::isfinite(x))
      throw ConstraintError(std::string(what) + ": values must be finite and nonnegative");
  }
}

std::vector<std::vector<int>> all_permutations(int n) {
  std::vector<int> p(n);
  std::iota(p.begin(), p.end(), 0);
  std::vector<std::vector<int>> out;
  do out.push_back(p);
  while (std::next_permutation(p.begin(), p.end()));
  return out;
}

}  // namespace

OneBodyDensity::OneBodyDensity(GridSpec system, std::vector<double> values)
    : system_(system), values_(std::move(values)) {
  if (values_.size() != system_.one_body_states())
    throw ConstraintError("one-body density: expected " +
                          std::to_string(system_.one_body_states()) + " values");
  require_nonnegative(values_, "one-body density");
  double mass = kernels::serial::sum(values_) * std::pow(system_.spacing(), system_.dim());
  if (std::abs(mass - 1.0) > 1e-12)
    throw ConstraintError("one-body density: integral " + std::to_string(mass) + " != 1");
}

OneBodyDensity OneBodyDensity::normalized(GridSpec system, std::vector<double> raw) {
  require_nonnegative(raw, "one-body density");
  double mass = kernels::serial::sum(raw) * std::pow(system.spacing(), system.dim());
  if (!(mass > 0.0)) throw DegenerateError("one-body density: zero total mass");
  for (double& v : raw) v /= mass;
  return OneBodyDensity(system, std::move(raw));
}

OneBodyDensity OneBodyDensity::uniform(GridSpec system) {
  return normalized(system, std::vector<double>(system.one_body_states(), 1.0));
}

OneBodyDensity OneBodyDensity::gaussian(GridSpec system, double sigma) {
  return gaussian(system, sigma, 0.5 * (system.lo() + system.hi()));
}

OneBodyDensity OneBodyDensity::gaussian(GridSpec system, double sigma, double centre) {
  if (!(sigma > 0)) throw DomainError("gaussian: sigma must be positive");
  GridSpec g = system.with_particles(1);
  std::vector<double> v(g.states());
  std::vector<int> c(g.axes());
  for (std::size_t x = 0; x < v.size(); ++x) {
    g.unflatten(x, c);
    double r2 = 0.0;
    for (int a = 0; a < g.axes(); ++a) {
      double t = g.coordinate(c[a]) - centre;
      r2 += t * t;
    }
    v[x] = std::exp(-r2 / (2 * sigma * sigma));
  }
  return normalized(system, std::move(v));
}

NBodyDensity::NBodyDensity(GridSpec grid, std::vector<double> values, bool symmetric)
    : grid_(grid), values_(std::move(values)), symmetric_(symmetric) {
  if (values_.size() != grid_.states())
    throw ConstraintError("N-body density: expected " + std::to_string(grid_.states()) +
                          " values, got " + std::to_string(values_.size()));
  require_nonnegative(values_, "N-body density");
  double mass = kernels::active::sum(values_) * grid_.cell_volume();
  if (std::abs(mass - 1.0) > 1e-10)
    throw ConstraintError("N-body density: integral " + std::to_string(mass) + " != 1");
  if (symmetric_ && grid_.particles() > 1) {
    double defect = symmetry_defect(Field(grid_, values_), 128, 20240611u);
    if (defect > 1e-12)
      throw ConstraintError("N-body density: flagged symmetric but permutation defect is " +
                            std::to_string(defect));
  }
}

NBodyDensity NBodyDensity::normalized(const Field& f, bool symmetric) {
  require_nonnegative(f.values, "N-body density");
  double mass = f.integral();
  if (!(mass > 0.0)) throw DegenerateError("N-body density: zero total mass");
  std::vector<double> v(f.values);
  for (double& x : v) x /= mass;
  return NBodyDensity(f.grid, std::move(v), symmetric);
}

NBodyDensity NBodyDensity::product(const OneBodyDensity& mu) {
  std::vector<Field> factors(mu.system_grid().particles(), mu.field());
  Field p = tensor_product(factors);
  return NBodyDensity(p.grid, std::move(p.values), true);
}

std::size_t Region::count() const {
  return static_cast<std::size_t>(std::count(inside.begin(), inside.end(), char{1}));
}

Field marginal(const Field& P, const IndexSet& I) {
  const GridSpec& g = P.grid;
  if (I.particles() != g.particles())
    throw ConstraintError("marginal: index set built for " + std::to_string(I.particles()) +
                          " particles, density has " + std::to_string(g.particles()));
  kernels::AxisMask mask{std::vector<char>(g.axes(), 0)};
  for (int i : I.members())
    for (int k = 0; k < g.dim(); ++k) mask.keep[i * g.dim() + k] = 1;
  Field out(g.with_particles(I.size()));
  kernels::active::axis_sums(g, P.values, mask, out.values);
  const double w = std::pow(g.spacing(), g.dim() * (g.particles() - I.size()));
  for (double& v : out.values) v *= w;
  return out;
}

Field marginal(const NBodyDensity& P, const IndexSet& I) { return marginal(P.field(), I); }

double total_variation(const GridSpec& g, std::span<const double> a, std::span<const double> b) {
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) acc += std::abs(a[i] - b[i]);
  return 0.5 * acc * g.cell_volume();
}

MarginalResidual check_in_Pi_N(const Field& P, std::span<const double> mu, double tol) {
  const GridSpec& g = P.grid;
  if (mu.size() != g.one_body_states())
    throw ConstraintError("check_in_Pi_N: one-body grid does not match the N-body grid");
  MarginalResidual r;
  GridSpec one = g.with_particles(1);
  for (int i = 0; i < g.particles(); ++i) {
    Field m = marginal(P, IndexSet::single(i, g.particles()));
    r.per_particle.push_back(total_variation(one, m.values, mu));
  }
  r.residual = *std::max_element(r.per_particle.begin(), r.per_particle.end());
  r.pass = r.residual <= tol;
  return r;
}

MarginalResidual check_in_Pi_N(const NBodyDensity& P, const OneBodyDensity& mu, double tol) {
  if (!P.grid().same_layout(mu.system_grid()))
    throw ConstraintError("check_in_Pi_N: grid mismatch between P and mu");
  return check_in_Pi_N(P.field(), mu.values(), tol);
}

double kappa(const OneBodyDensity& mu, double r) {
  if (!(r > 0)) throw DomainError("kappa: radius must be positive");
  Field f = mu.field();
  auto masses = ball_mass_field(f, r);
  return *std::max_element(masses.begin(), masses.end());
}

double ball_mass(const Field& P, std::span<const int> y, double r) {
  if (!(r > 0)) throw DomainError("ball_mass: radius must be positive");
  const GridSpec& g = P.grid;
  if (static_cast<int>(y.size()) != g.axes())
    throw ConstraintError("ball_mass: centre has wrong dimension");
  const double h = g.spacing();
  std::vector<int> c(g.axes());
  double acc = 0.0;
  for (std::size_t x = 0; x < P.values.size(); ++x) {
    g.unflatten(x, c);
    double n2 = 0.0;
    for (int a = 0; a < g.axes(); ++a) {
      double d = c[a] - y[a];
      n2 += d * d;
    }
    if (within_radius(n2, r, h)) acc += P.values[x];
  }
  return acc * g.cell_volume();
}

double ball_mass(const NBodyDensity& P, std::span<const int> y, double r) {
  return ball_mass(P.field(), y, r);
}

std::vector<double> ball_mass_field(const Field& P, double r) {
  if (!(r > 0)) throw DomainError("ball_mass: radius must be positive");
  const GridSpec& g = P.grid;
  // A stencil wider than the grid only adds clipped offsets.
  double capped = std::min(r, g.diameter() * (1.0 + 1e-9));
  BallStencil st = make_ball_stencil(g.axes(), capped, g.spacing());
  std::vector<double> out(P.values.size());
  kernels::active::ball_sums(g, P.values, st, out);
  const double w = g.cell_volume();
  for (double& v : out) v *= w;
  return out;
}

Region enlarged_diagonal(const GridSpec& g, double alpha) {
  if (!(alpha > 0)) throw DomainError("diagonal: alpha must be positive");
  Region R(g);
  const int d = g.dim(), N = g.particles();
  const double h = g.spacing();
  std::vector<int> c(g.axes());
  for (std::size_t x = 0; x < R.inside.size(); ++x) {
    g.unflatten(x, c);
    bool near = false;
    for (int i = 0; i < N && !near; ++i) {
      for (int j = i + 1; j < N && !near; ++j) {
        double n2 = 0.0;
        for (int k = 0; k < d; ++k) {
          double t = c[i * d + k] - c[j * d + k];
          n2 += t * t;
        }
        near = within_radius(n2, alpha, h);
      }
    }
    R.inside[x] = near;
  }
  return R;
}

double mass_on(const Field& P, const Region& region) {
  double acc = 0.0;
  for (std::size_t x = 0; x < P.values.size(); ++x)
    if (region.inside[x]) acc += P.values[x];
  return acc * P.grid.cell_volume();
}

double diagonal_mass(const Field& P, double alpha) {
  return mass_on(P, enlarged_diagonal(P.grid, alpha));
}

double diagonal_mass(const NBodyDensity& P, double alpha) {
  return diagonal_mass(P.field(), alpha);
}

Region erode(const Region& omega, double r) {
  if (!(r >= 0)) throw DomainError("erode: radius must be >= 0");
  const GridSpec& g = omega.grid;
  BallStencil st = make_ball_stencil(g.axes(), std::min(r, g.diameter() * 1.01), g.spacing());
  const int M = g.points();
  Region out(g);
  std::vector<int> c(g.axes());
  std::vector<int> nb(g.axes());
  for (std::size_t x = 0; x < omega.inside.size(); ++x) {
    if (!omega.inside[x]) continue;
    g.unflatten(x, c);
    bool ok = true;
    for (std::size_t k = 0; k < st.size() && ok; ++k) {
      auto o = st.offset(k);
      for (int a = 0; a < g.axes(); ++a) {
        nb[a] = c[a] + o[a];
        if (nb[a] < 0 || nb[a] >= M) {
          ok = false;
          break;
        }
      }
      if (ok) ok = omega.inside[g.flatten(nb)];
    }
    out.inside[x] = ok;
  }
  return out;
}

std::size_t permute_particles(const GridSpec& g, std::size_t x, std::span<const int> perm) {
  const int d = g.dim();
  std::vector<int> c = g.unflatten(x);
  std::vector<int> p(c.size());
  for (int i = 0; i < g.particles(); ++i)
    for (int k = 0; k < d; ++k) p[i * d + k] = c[perm[i] * d + k];
  return g.flatten(p);
}

Field symmetrize(const Field& P) {
  const GridSpec& g = P.grid;
  auto perms = all_permutations(g.particles());
  Field out(g);
  for (const auto& perm : perms) {
    for (std::size_t x = 0; x < P.values.size(); ++x)
      out.values[x] += P.values[permute_particles(g, x, perm)];
  }
  const double inv = 1.0 / static_cast<double>(perms.size());
  for (double& v : out.values) v *= inv;
  return out;
}

double symmetry_defect(const Field& P, int samples, unsigned seed) {
  const GridSpec& g = P.grid;
  if (g.particles() < 2) return 0.0;
  double top = *std::max_element(P.values.begin(), P.values.end());
  if (!(top > 0)) return 0.0;
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::size_t> pick(0, P.values.size() - 1);
  std::vector<int> perm(g.particles());
  std::iota(perm.begin(), perm.end(), 0);
  double worst = 0.0;
  for (int s = 0; s < samples; ++s) {
    std::shuffle(perm.begin(), perm.end(), rng);
    std::size_t x = pick(rng);
    worst = std::max(worst, std::abs(P.values[x] - P.values[permute_particles(g, x, perm)]));
  }
  return worst / top;
}

Field tensor_product(const std::vector<Field>& factors) {
  if (factors.empty()) throw ConstraintError("tensor_product: no factors");
  int particles = 0;
  for (const auto& f : factors) particles += f.grid.particles();
  GridSpec g = factors.front().grid.with_particles(1);
  GridSpec out_grid(g.dim(), particles, g.points(), g.lo(), g.hi());
  Field out(out_grid, std::vector<double>(out_grid.states(), 1.0));
  // Each factor varies along its own consecutive block of axes; its flat index
  // is (x / stride_of_last_axis) mod its state count.
  int axis = 0;
  for (const auto& f : factors) {
    const int span_axes = f.grid.axes();
    kernels::active::scale_by_block(out_grid, out.values, axis, span_axes, f.values);
    axis += span_axes;
  }
  return out;
}

}  // namespace llgrid
