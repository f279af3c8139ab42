#include "llgrid/hamiltonian.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "llgrid/density.hpp"
#include "llgrid/errors.hpp"
#include "llgrid/functionals.hpp"
#include "llgrid/kernels.hpp"

namespace llgrid {
namespace {

double norm(std::span<const double> v) { return std::sqrt(kernels::active::dot(v, v)); }

void normalize(std::vector<double>& v) {
  // Fix the sign so the (Perron) vector is nonnegative.
  const double s = kernels::active::sum(v) < 0 ? -1.0 : 1.0;
  const double n = norm(v);
  if (!(n > 0)) throw ConvergenceError("ground state: iterate collapsed to zero");
  for (double& x : v) x *= s / n;
}

void project_out(std::vector<double>& v, std::span<const double> unit) {
  const double c = kernels::active::dot(v, unit);
  for (std::size_t k = 0; k < v.size(); ++k) v[k] -= c * unit[k];
}

}  // namespace

Hamiltonian::Hamiltonian(const GridSpec& g, double eps, const CostSpec& cost)
    : grid_(g), eps_(eps), pair_(llgrid::pair_potential(g, cost)) {
  if (!(eps > 0)) throw DomainError("hamiltonian: eps must be positive");
  for (double v : pair_)
    if (!std::isfinite(v))
      throw ConstraintError(
          "hamiltonian: infinite pair potential at a coincident node; configure cost.cap.scale");
  const std::size_t n = g.states();
  const double h = g.spacing();
  const double k = 4.0 * eps / (h * h);
  const int axes = g.axes();
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(n * (2 * axes + 1));
  std::vector<double> diag(n, 0.0);
  std::vector<int> c(axes);
  for (std::size_t x = 0; x < n; ++x) {
    g.unflatten(x, c);
    for (int a = 0; a < axes; ++a) {
      if (c[a] + 1 >= g.points()) continue;
      const std::size_t y = x + g.stride(a);
      diag[x] += k;
      diag[y] += k;
      trip.emplace_back(static_cast<int>(x), static_cast<int>(y), -k);
      trip.emplace_back(static_cast<int>(y), static_cast<int>(x), -k);
    }
  }
  double vmax = 0.0;
  for (std::size_t x = 0; x < n; ++x) {
    trip.emplace_back(static_cast<int>(x), static_cast<int>(x), diag[x] + pair_[x]);
    vmax = std::max(vmax, std::abs(pair_[x]));
  }
  base_.resize(static_cast<int>(n), static_cast<int>(n));
  base_.setFromTriplets(trip.begin(), trip.end());
  base_.makeCompressed();
  diag_slot_.assign(n, -1);
  for (int col = 0; col < base_.outerSize(); ++col)
    for (Eigen::SparseMatrix<double>::InnerIterator it(base_, col); it; ++it)
      if (it.row() == col) diag_slot_[col] = &it.valueRef() - base_.valuePtr();
  scale_ = 4.0 * k * axes + vmax + 1.0;
  work_ = base_;

  // Particle-block permutations (identity excluded) for the symmetric-sector projection.
  const int N = g.particles();
  std::vector<int> perm(N);
  std::iota(perm.begin(), perm.end(), 0);
  while (std::next_permutation(perm.begin(), perm.end())) {
    std::vector<std::uint32_t> map(n);
    for (std::size_t x = 0; x < n; ++x)
      map[x] = static_cast<std::uint32_t>(permute_particles(g, x, perm));
    perms_.push_back(std::move(map));
  }
}

std::vector<double> Hamiltonian::lift(std::span<const double> u) const {
  if (u.size() != potential_size())
    throw ConstraintError("hamiltonian: potential has the wrong number of nodes");
  const int d = grid_.dim(), N = grid_.particles();
  const std::size_t n = size();
  std::vector<double> out(n);
  // One-body index of particle i is the flat index of its d-block.
  const std::size_t block = grid_.one_body_states();
#pragma omp parallel for schedule(static)
  for (std::int64_t x = 0; x < static_cast<std::int64_t>(n); ++x) {
    std::size_t rest = static_cast<std::size_t>(x);
    double acc = 0.0;
    for (int i = N - 1; i >= 0; --i) {
      acc += u[rest % block];
      rest /= block;
    }
    out[x] = acc;
  }
  (void)d;
  return out;
}

std::vector<double> Hamiltonian::occupation(std::span<const double> phi) const {
  const int N = grid_.particles();
  const std::size_t block = grid_.one_body_states();
  std::vector<double> occ(block, 0.0);
  for (std::size_t x = 0; x < phi.size(); ++x) {
    const double w = phi[x] * phi[x];
    std::size_t rest = x;
    for (int i = 0; i < N; ++i) {
      occ[rest % block] += w;
      rest /= block;
    }
  }
  return occ;
}

std::vector<double> Hamiltonian::apply(std::span<const double> lifted,
                                       std::span<const double> phi) const {
  Eigen::Map<const Eigen::VectorXd> p(phi.data(), static_cast<int>(phi.size()));
  Eigen::VectorXd r = base_ * p;
  std::vector<double> out(phi.size());
  for (std::size_t x = 0; x < phi.size(); ++x) out[x] = r[x] - lifted[x] * phi[x];
  return out;
}

double Hamiltonian::quadratic_form(std::span<const double> phi, std::span<const double> u) const {
  auto lifted = lift(u);
  auto a = apply(lifted, phi);
  return kernels::active::dot(phi, a);
}

void Hamiltonian::symmetrize(std::span<double> v) const {
  if (perms_.empty()) return;
  std::vector<double> acc(v.begin(), v.end());
  for (const auto& map : perms_)
    for (std::size_t x = 0; x < v.size(); ++x) acc[x] += v[map[x]];
  const double w = 1.0 / static_cast<double>(perms_.size() + 1);
  for (std::size_t x = 0; x < v.size(); ++x) v[x] = acc[x] * w;
}

int Hamiltonian::factorize(std::span<const double> lifted, double sigma) {
  double* val = work_.valuePtr();
  const double* b = base_.valuePtr();
  std::copy(b, b + base_.nonZeros(), val);
  for (std::size_t x = 0; x < lifted.size(); ++x) val[diag_slot_[x]] -= lifted[x] + sigma;
  if (!analysed_) {
    ldlt_.analyzePattern(work_);
    analysed_ = true;
  }
  ldlt_.factorize(work_);
  if (ldlt_.info() != Eigen::Success) return static_cast<int>(size());
  const auto& D = ldlt_.vectorD();
  int neg = 0;
  for (int k = 0; k < D.size(); ++k)
    if (!(D[k] > 0)) ++neg;
  return neg;
}

std::vector<double> Hamiltonian::solve(std::span<const double> b) const {
  Eigen::Map<const Eigen::VectorXd> rhs(b.data(), static_cast<int>(b.size()));
  Eigen::VectorXd z = ldlt_.solve(rhs);
  return std::vector<double>(z.data(), z.data() + z.size());
}

Hamiltonian::GroundState Hamiltonian::ground_state(std::span<const double> u,
                                                   std::span<const double> warm, double rel_tol,
                                                   int max_iterations) {
  const std::size_t n = size();
  auto lifted = lift(u);
  std::vector<double> phi;
  if (warm.size() == n)
    phi.assign(warm.begin(), warm.end());
  else
    phi.assign(n, 1.0);
  symmetrize(phi);
  normalize(phi);

  auto rayleigh = [&](const std::vector<double>& p, double& lambda, double& residual) {
    auto a = apply(lifted, p);
    lambda = kernels::active::dot(p, a);
    double r2 = 0.0;
    for (std::size_t x = 0; x < n; ++x) {
      const double t = a[x] - lambda * p[x];
      r2 += t * t;
    }
    residual = std::sqrt(r2);
  };

  GroundState gs;
  double lambda, res;
  rayleigh(phi, lambda, res);
  const double target = rel_tol * scale_;
  // Bracket: a shift with no negative pivots lies below the whole spectrum.
  double tau = std::max(4.0 * res, 1e-9 * scale_);
  double sigma = lambda - tau;
  for (int tries = 0; factorize(lifted, sigma) != 0; ++tries) {
    if (tries > 80) throw ConvergenceError("ground state: could not place a shift below the spectrum");
    tau *= 8.0;
    sigma = lambda - tau;
  }
  double last_res = res;
  for (int it = 1; it <= max_iterations; ++it) {
    phi = solve(phi);
    symmetrize(phi);
    normalize(phi);
    rayleigh(phi, lambda, res);
    gs.iterations = it;
    if (res <= target) break;
    // Move the shift up to just below the spectrum once the eigenvalue estimate settles.
    const double candidate = lambda - std::max(2.0 * res, 1e-12 * scale_);
    if (candidate > sigma + 0.5 * (lambda - sigma) && (res < 0.5 * last_res || it % 4 == 0)) {
      if (factorize(lifted, candidate) == 0)
        sigma = candidate;
      else
        factorize(lifted, sigma);
    }
    last_res = res;
  }
  if (res > target)
    throw ConvergenceError("ground state: inverse iteration stagnated at residual " +
                           std::to_string(res / scale_) + " (relative)");
  double pmax = *std::max_element(phi.begin(), phi.end());
  double pmin = *std::min_element(phi.begin(), phi.end());
  if (pmin < -1e-8 * pmax)
    throw ConvergenceError("ground state: iterate is not sign-definite; an excited state was found");
  for (double& p : phi) p = std::max(p, 0.0);
  normalize(phi);
  gs.eigenvalue = lambda;
  gs.residual = res;
  gs.vector = std::move(phi);
  return gs;
}

Eigen::MatrixXd Hamiltonian::eigenvalue_hessian(std::span<const double> u, const GroundState& gs) {
  const std::size_t n = size();
  const std::size_t m = potential_size();
  const int N = grid_.particles();
  auto lifted = lift(u);
  const auto& phi = gs.vector;
  // Reduced resolvent (A - lambda)^+ on phi^perp via a shift just below lambda,
  // corrected by the fixed point z = F^{-1}(w + (lambda - sigma) z).
  double eta = std::max(1e-7 * scale_, 100.0 * gs.residual);
  double sigma = gs.eigenvalue - eta;
  for (int tries = 0; factorize(lifted, sigma) != 0; ++tries) {
    if (tries > 40) throw ConvergenceError("hessian: could not place a shift below the spectrum");
    eta *= 4.0;
    sigma = gs.eigenvalue - eta;
  }
  std::vector<std::vector<double>> W(m, std::vector<double>(n, 0.0));
  for (std::size_t x = 0; x < n; ++x) {
    std::size_t rest = x;
    for (int i = 0; i < N; ++i) {
      W[rest % m][x] += phi[x];
      rest /= m;
    }
  }
  for (auto& w : W) project_out(w, phi);
  Eigen::MatrixXd Hs(m, m);
  std::vector<std::vector<double>> Z(m);
#pragma omp parallel for schedule(dynamic)
  for (std::int64_t a = 0; a < static_cast<std::int64_t>(m); ++a) {
    const auto& w = W[a];
    std::vector<double> z(n, 0.0), rhs(n);
    for (int it = 0; it < 60; ++it) {
      for (std::size_t x = 0; x < n; ++x) rhs[x] = w[x] + eta * z[x];
      auto next = solve(rhs);
      symmetrize(next);
      project_out(next, phi);
      double diff = 0.0, mag = 0.0;
      for (std::size_t x = 0; x < n; ++x) {
        diff += (next[x] - z[x]) * (next[x] - z[x]);
        mag += next[x] * next[x];
      }
      z = std::move(next);
      if (diff <= 1e-26 * mag) break;
    }
    Z[a] = std::move(z);
  }
  for (std::size_t a = 0; a < m; ++a)
    for (std::size_t b = a; b < m; ++b) {
      const double v = -2.0 * kernels::active::dot(W[b], Z[a]);
      Hs(a, b) = v;
      Hs(b, a) = v;
    }
  return Hs;
}

}  // namespace llgrid
