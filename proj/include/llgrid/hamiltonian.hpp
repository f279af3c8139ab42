#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>
#include <cstdint>
#include <span>
#include <vector>

#include "llgrid/cost.hpp"
#include "llgrid/grid.hpp"

namespace llgrid {

// The Levy-Lieb objective written in phi = sqrt(P h^{dN}) (unit Euclidean norm):
//
//   eps * E_kin(P) + v_ee(P) - sum_i <u(x_i), P>  =  phi^T (K + diag(v - U)) phi
//
// with K = (4 eps / h^2) times the Neumann graph Laplacian of the grid and
// U(x) = sum_i u(x_i).  The operator is a Z-matrix on a connected graph, so the
// lowest eigenvector is strictly positive and permutation symmetric; all
// iterations are carried out in the symmetric sector.
class Hamiltonian {
 public:
  Hamiltonian(const GridSpec& g, double eps, const CostSpec& cost);

  struct GroundState {
    double eigenvalue = 0.0;
    std::vector<double> vector;  // unit norm, nonnegative
    double residual = 0.0;       // ||A phi - lambda phi||
    int iterations = 0;
  };

  const GridSpec& grid() const { return grid_; }
  double eps() const { return eps_; }
  std::size_t size() const { return grid_.states(); }
  std::size_t potential_size() const { return grid_.one_body_states(); }
  const std::vector<double>& pair_potential() const { return pair_; }
  // Rough spectral scale used to make tolerances relative.
  double scale() const { return scale_; }

  // U(x) = sum_i u(x_i).
  std::vector<double> lift(std::span<const double> u) const;
  // sum_i [x_i = a] phi(x)^2 summed over x, for every one-body node a.
  std::vector<double> occupation(std::span<const double> phi) const;
  double quadratic_form(std::span<const double> phi, std::span<const double> u) const;

  // Lowest eigenpair by shift-and-invert iteration; shifts are certified below
  // the spectrum through the inertia of the LDL^T factorisation.
  GroundState ground_state(std::span<const double> u, std::span<const double> warm = {},
                           double rel_tol = 1e-11, int max_iterations = 300);

  // d^2 lambda_min / du_a du_b at the given ground state (negative semidefinite).
  Eigen::MatrixXd eigenvalue_hessian(std::span<const double> u, const GroundState& gs);

  void symmetrize(std::span<double> v) const;

 private:
  // Factorises K + diag(v - U) - sigma; returns the number of negative pivots.
  int factorize(std::span<const double> lifted, double sigma);
  std::vector<double> solve(std::span<const double> b) const;
  std::vector<double> apply(std::span<const double> lifted, std::span<const double> phi) const;

  GridSpec grid_;
  double eps_;
  double scale_;
  std::vector<double> pair_;
  Eigen::SparseMatrix<double> base_;
  std::vector<std::int64_t> diag_slot_;
  Eigen::SparseMatrix<double> work_;
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt_;
  bool analysed_ = false;
  std::vector<std::vector<std::uint32_t>> perms_;
};

}  // namespace llgrid
