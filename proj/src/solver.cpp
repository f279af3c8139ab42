#include "llgrid/solver.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <random>

#include "llgrid/errors.hpp"
#include "llgrid/hamiltonian.hpp"
#include "llgrid/kernels.hpp"

namespace llgrid {
namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

double objective(const Field& P, double eps, std::span<const double> v) {
  return eps * fisher_information(P) + weighted_mass(P, v);
}

EnergyBreakdown breakdown(const Field& P, double eps, std::span<const double> v,
                          const CostSpec& cost) {
  EnergyBreakdown e;
  e.kinetic = fisher_information(P);
  e.interaction = weighted_mass(P, v);
  e.eps = eps;
  e.cap = cost.cap(P.grid.spacing());
  return e;
}

// Orthogonal complement of functions of the form sum_i f_i(x_i) (uniform node weights).
void project_tangent(const GridSpec& g, std::vector<double>& D) {
  const int N = g.particles(), d = g.dim();
  const std::size_t m = g.one_body_states();
  const double mean = kernels::active::sum(D) / static_cast<double>(D.size());
  const double per = static_cast<double>(D.size() / m);
  std::vector<std::vector<double>> avg(N, std::vector<double>(m));
  for (int i = 0; i < N; ++i) {
    kernels::AxisMask mask{std::vector<char>(g.axes(), 0)};
    for (int k = 0; k < d; ++k) mask.keep[i * d + k] = 1;
    kernels::active::axis_sums(g, D, mask, avg[i]);
    for (double& a : avg[i]) a = a / per - mean;
  }
  for (std::size_t x = 0; x < D.size(); ++x) {
    std::size_t rest = x;
    double s = mean;
    for (int i = N - 1; i >= 0; --i) {
      s += avg[i][rest % m];
      rest /= m;
    }
    D[x] -= s;
  }
}

void require_positive(std::span<const double> mu) {
  for (double v : mu)
    if (!(v > 0))
      throw ConstraintError("solver: mu must be strictly positive at every node");
}

struct DualPoint {
  Hamiltonian::GroundState gs;
  double value = 0.0;
  std::vector<double> gradient;
};

DualPoint evaluate_dual(Hamiltonian& H, std::span<const double> mu, std::span<const double> u,
                        std::span<const double> warm) {
  DualPoint p;
  p.gs = H.ground_state(u, warm);
  const GridSpec& g = H.grid();
  const double w1 = g.with_particles(1).cell_volume();
  const int N = g.particles();
  auto occ = H.occupation(p.gs.vector);
  p.value = p.gs.eigenvalue;
  p.gradient.resize(mu.size());
  for (std::size_t a = 0; a < mu.size(); ++a) {
    p.value += N * u[a] * mu[a] * w1;
    p.gradient[a] = N * mu[a] * w1 - occ[a];
  }
  return p;
}

Field density_from_vector(const GridSpec& g, std::span<const double> phi) {
  Field P(g);
  const double w = 1.0 / g.cell_volume();
  for (std::size_t x = 0; x < phi.size(); ++x) P.values[x] = phi[x] * phi[x] * w;
  return P;
}

}  // namespace

OneBodyPotential::OneBodyPotential(std::vector<double> v) : values(std::move(v)) {
  for (double x : values)
    if (!std::isfinite(x)) throw DomainError("potential: entries must be finite");
}

OneBodyPotential OneBodyPotential::zero(const GridSpec& system) {
  return OneBodyPotential(std::vector<double>(system.one_body_states(), 0.0));
}

int SolverConfig::outer_iteration_budget() const {
  if (max_outer_iters > 0) return max_outer_iters;
  return static_cast<int>(1e4 * std::ceil(1.0 / std::sqrt(eps)) / 1e2);
}

void SolverConfig::validate() const {
  if (!(eps > 0)) throw DomainError("solver: eps must be positive");
  if (!(tol_marginal > 0) || !(tol_energy > 0))
    throw DomainError("solver: tolerances must be positive");
  if (!(step.shrink > 0 && step.shrink < 1) || !(step.initial_step > 0) ||
      !(step.sufficient_decrease > 0 && step.sufficient_decrease < 0.5))
    throw DomainError("solver: invalid step rule");
}

double ipfp_repair(Field& P, std::span<const double> mu, double tol, int max_sweeps) {
  const GridSpec& g = P.grid;
  const int N = g.particles(), d = g.dim();
  if (mu.size() != g.one_body_states()) throw ConstraintError("ipfp: mu grid mismatch");
  if (N == 1) {
    P.values.assign(mu.begin(), mu.end());
    return 0.0;
  }
  std::vector<double> factor(mu.size());
  double res = check_in_Pi_N(P, mu, tol).residual;
  for (int sweep = 0; sweep < max_sweeps && res > tol; ++sweep) {
    for (int i = 0; i < N; ++i) {
      Field mi = marginal(P, IndexSet::single(i, N));
      for (std::size_t a = 0; a < mu.size(); ++a) {
        if (mi.values[a] > 0)
          factor[a] = mu[a] / mi.values[a];
        else if (mu[a] > 0)
          throw DegenerateError("ipfp: marginal vanishes where mu is positive");
        else
          factor[a] = 0.0;
      }
      kernels::active::scale_by_block(g, P.values, i * d, d, factor);
    }
    res = check_in_Pi_N(P, mu, tol).residual;
  }
  return res;
}

std::vector<double> objective_gradient(const Field& P, double eps,
                                       std::span<const double> pair_potential) {
  const GridSpec& g = P.grid;
  const std::size_t n = g.states();
  const double w = g.cell_volume(), h = g.spacing();
  const double kin = 4.0 * w / (h * h);
  std::vector<double> s(n), G(n);
  for (std::size_t x = 0; x < n; ++x) s[x] = std::sqrt(P.values[x]);
#pragma omp parallel
  {
    std::vector<int> c(g.axes());
#pragma omp for schedule(static)
    for (std::int64_t xi = 0; xi < static_cast<std::int64_t>(n); ++xi) {
      const std::size_t x = static_cast<std::size_t>(xi);
      g.unflatten(x, c);
      double acc = 0.0;
      for (int a = 0; a < g.axes(); ++a) {
        if (c[a] + 1 < g.points()) acc += s[x] - s[x + g.stride(a)];
        if (c[a] > 0) acc += s[x] - s[x - g.stride(a)];
      }
      double dF;
      if (s[x] > 0)
        dF = kin * acc / s[x];
      else
        dF = acc < 0 ? -std::numeric_limits<double>::infinity() : 0.0;
      G[x] = eps * dF + pair_potential[x] * w;
    }
  }
  return G;
}

SolveResult minimize_levy_lieb(const OneBodyDensity& mu, const CostSpec& cost,
                               const SolverConfig& cfg) {
  cfg.validate();
  const auto t0 = Clock::now();
  const GridSpec& g = mu.system_grid();
  const int N = g.particles();
  const double eps = cfg.eps;
  auto muv = mu.values();

  if (N == 1) {
    Field P = mu.field();
    std::vector<double> v(g.states(), 0.0);
    SolveReport r;
    r.energy = breakdown(P, eps, v, cost);
    r.marginal_residual = 0.0;
    r.converged = true;
    r.energy_trace = {r.energy.total()};
    r.wall_time = seconds_since(t0);
    return {NBodyDensity(g, P.values, true), r};
  }
  require_positive(muv);

  Hamiltonian H(g, eps, cost);
  const auto& v = H.pair_potential();
  const std::size_t m = H.potential_size();

  Field best = NBodyDensity::product(mu).field();
  double best_energy = objective(best, eps, v);
  SolveReport rep;
  rep.energy_trace.push_back(best_energy);

  std::vector<double> u = cfg.initial_potential.value_or(std::vector<double>(m, 0.0));
  if (u.size() != m) throw ConstraintError("solver: initial potential has the wrong size");
  DualPoint cur = evaluate_dual(H, muv, u, {});
  double best_dual = cur.value;
  std::vector<double> best_u = u;

  const double polish_tol = 0.5 * cfg.tol_marginal;
  double damping = 1e-10;
  const int budget = cfg.outer_iteration_budget();
  int it = 0;
  for (; it < budget; ++it) {
    Field cand = density_from_vector(g, cur.gs.vector);
    // Polish well past tol_marginal: weak duality only holds for exactly feasible P.
    double res = ipfp_repair(cand, muv, 1e-13, 20000);
    if (cfg.symmetrize_each_iter) cand = symmetrize(cand);
    if (res <= polish_tol) {
      const double e = objective(cand, eps, v);
      if (e < best_energy) {
        best_energy = e;
        best = std::move(cand);
        rep.energy_trace.push_back(e);
      }
    }
    const double gap = best_energy - best_dual;
    if (gap <= cfg.tol_energy * std::max(1.0, std::abs(best_energy))) {
      rep.converged = true;
      break;
    }

    Eigen::MatrixXd G = -H.eigenvalue_hessian(u, cur.gs);
    const double diag_scale = std::max(G.diagonal().maxCoeff(), 1e-300);
    Eigen::Map<const Eigen::VectorXd> grad(cur.gradient.data(), static_cast<int>(m));
    bool accepted = false;
    for (int attempt = 0; attempt < 12 && !accepted; ++attempt) {
      Eigen::MatrixXd S = G;
      S.diagonal().array() += damping * diag_scale;
      S.array() += diag_scale / static_cast<double>(m);  // constant shifts of u are free
      Eigen::VectorXd step = S.ldlt().solve(grad);
      const double slope = grad.dot(step);
      if (!(slope > 0) || !step.allFinite()) {
        damping *= 100.0;
        continue;
      }
      double t = cfg.step.initial_step;
      for (int ls = 0; ls < 30; ++ls, t *= cfg.step.shrink) {
        std::vector<double> trial(m);
        for (std::size_t a = 0; a < m; ++a) trial[a] = u[a] + t * step[a];
        DualPoint next;
        try {
          next = evaluate_dual(H, muv, trial, cur.gs.vector);
        } catch (const ConvergenceError&) {
          continue;
        }
        if (next.value >= cur.value + cfg.step.sufficient_decrease * t * slope) {
          u = std::move(trial);
          cur = std::move(next);
          accepted = true;
          break;
        }
      }
      if (accepted)
        damping = std::max(damping * 0.1, 1e-12);
      else
        damping *= 100.0;
    }
    if (!accepted) break;  // dual ascent has stalled at working precision
    if (cur.value > best_dual) {
      best_dual = cur.value;
      best_u = u;
    }
  }

  rep.iterations = it;
  rep.energy = breakdown(best, eps, v, cost);
  rep.marginal_residual = check_in_Pi_N(best, muv, cfg.tol_marginal).residual;
  rep.dual_lower_bound = best_dual;
  rep.duality_gap = rep.energy.total() - best_dual;
  if (!rep.converged)
    rep.converged = rep.marginal_residual <= cfg.tol_marginal &&
                    *rep.duality_gap <= 1e-7 * std::max(1.0, std::abs(rep.energy.total()));
  rep.potential = best_u;
  rep.wall_time = seconds_since(t0);
  bool sym = cfg.symmetrize_each_iter;
  return {NBodyDensity(g, best.values, sym), rep};
}

SolveResult minimize_projected_gradient(const OneBodyDensity& mu, const CostSpec& cost,
                                        const SolverConfig& cfg, int max_iterations) {
  cfg.validate();
  const auto t0 = Clock::now();
  const GridSpec& g = mu.system_grid();
  const double eps = cfg.eps;
  auto v = pair_potential(g, cost);
  Field P = NBodyDensity::product(mu).field();
  SolveReport rep;
  double E = objective(P, eps, v);
  rep.energy_trace.push_back(E);
  if (g.particles() == 1) {
    rep.converged = true;
  } else {
    const std::size_t n = g.states();
    auto grad = objective_gradient(P, eps, v);
    std::vector<double> D(grad);
    project_tangent(g, D);
    for (double& x : D) x = -x;
    double t = cfg.step.initial_step;
    int quiet = 0;
    int it = 0;
    for (; it < max_iterations; ++it) {
      const double dd = kernels::active::dot(D, D);
      if (!(dd > 0)) {
        rep.converged = true;
        break;
      }
      double tmax = std::numeric_limits<double>::infinity();
      for (std::size_t x = 0; x < n; ++x)
        if (D[x] < 0) tmax = std::min(tmax, 0.9 * P.values[x] / -D[x]);
      double step = std::min(t, tmax);
      Field trial(g);
      double Et = E;
      bool ok = false;
      for (int ls = 0; ls < 60; ++ls, step *= cfg.step.shrink) {
        for (std::size_t x = 0; x < n; ++x) trial.values[x] = P.values[x] + step * D[x];
        Et = objective(trial, eps, v);
        if (Et <= E - cfg.step.sufficient_decrease * step * dd) {
          ok = true;
          break;
        }
      }
      if (!ok) {
        rep.converged = true;  // no representable decrease left
        break;
      }
      auto grad_new = objective_gradient(trial, eps, v);
      std::vector<double> D_new(grad_new);
      project_tangent(g, D_new);
      for (double& x : D_new) x = -x;
      double sy = 0.0, ss = 0.0;
      for (std::size_t x = 0; x < n; ++x) {
        const double s = trial.values[x] - P.values[x];
        ss += s * s;
        sy += s * (D[x] - D_new[x]);
      }
      t = sy > 0 ? ss / sy : 2.0 * step;
      const double rel = (E - Et) / std::max(1.0, std::abs(E));
      P = std::move(trial);
      E = Et;
      D = std::move(D_new);
      rep.energy_trace.push_back(E);
      quiet = rel < 1e-3 * cfg.tol_energy ? quiet + 1 : 0;
      if (quiet >= 50) {
        rep.converged = true;
        break;
      }
    }
    rep.iterations = it;
  }
  rep.energy = breakdown(P, eps, v, cost);
  rep.marginal_residual = check_in_Pi_N(P, mu.values(), cfg.tol_marginal).residual;
  rep.wall_time = seconds_since(t0);
  for (double& x : P.values) x = std::max(x, 0.0);
  return {NBodyDensity::normalized(P), rep};
}

double dual_lower_bound(const OneBodyDensity& mu, const OneBodyPotential& u, double eps,
                        const CostSpec& cost) {
  Hamiltonian H(mu.system_grid(), eps, cost);
  return evaluate_dual(H, mu.values(), u.values, {}).value;
}

DualAscentResult dual_gradient_ascent(const OneBodyDensity& mu, double eps, const CostSpec& cost,
                                      int steps) {
  const GridSpec& g = mu.system_grid();
  Hamiltonian H(g, eps, cost);
  auto muv = mu.values();
  const std::size_t m = H.potential_size();
  std::vector<double> u(m, 0.0);
  DualPoint cur = evaluate_dual(H, muv, u, {});
  DualAscentResult out{OneBodyPotential(u), cur.value, {cur.value}};
  double t = 1.0;
  for (int k = 0; k < steps; ++k) {
    const double gg = kernels::active::dot(cur.gradient, cur.gradient);
    if (!(gg > 0)) break;
    bool ok = false;
    DualPoint next;
    std::vector<double> trial(m);
    for (int ls = 0; ls < 60; ++ls, t *= 0.5) {
      for (std::size_t a = 0; a < m; ++a) trial[a] = u[a] + t * cur.gradient[a];
      next = evaluate_dual(H, muv, trial, cur.gs.vector);
      if (next.value >= cur.value + 1e-4 * t * gg) {
        ok = true;
        break;
      }
    }
    if (!ok) break;
    double ss = 0.0, sy = 0.0;
    for (std::size_t a = 0; a < m; ++a) {
      const double s = trial[a] - u[a];
      ss += s * s;
      sy += s * (cur.gradient[a] - next.gradient[a]);
    }
    t = sy > 0 ? ss / sy : 2.0 * t;
    u = std::move(trial);
    cur = std::move(next);
    out.trace.push_back(cur.value);
  }
  out.potential = OneBodyPotential(u);
  out.bound = cur.value;
  return out;
}

StationarityReport validate_minimizer(const NBodyDensity& P, const OneBodyDensity& mu, double eps,
                                      const CostSpec& cost, int directions, unsigned seed) {
  const GridSpec& g = P.grid();
  StationarityReport r;
  Field f = P.field();
  auto v = pair_potential(g, cost);
  r.marginal_residual = check_in_Pi_N(P, mu, 1e-6).residual;
  r.energy = objective(f, eps, v);
  r.product_energy = objective(NBodyDensity::product(mu).field(), eps, v);
  r.threshold = -1e-6 * std::abs(r.energy);
  if (g.particles() == 1) {
    r.stationary = true;
    return r;
  }
  auto G = objective_gradient(f, eps, v);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> U(0.05, 1.0);
  double best = std::numeric_limits<double>::infinity();
  for (int k = 0; k < directions; ++k) {
    Field Q(g);
    for (double& q : Q.values) q = U(rng);
    ipfp_repair(Q, mu.values(), 1e-14, 100000);
    double dE = 0.0;
    for (std::size_t x = 0; x < Q.values.size(); ++x) {
      const double dx = Q.values[x] - f.values[x];
      if (dx != 0.0) dE += G[x] * dx;
    }
    best = std::min(best, dE);
  }
  r.best_descent = best;
  r.stationary = best >= r.threshold;
  return r;
}

}  // namespace llgrid
