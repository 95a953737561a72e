/**
 * @file linear_solver.hpp
 * @brief Sparse direct factorization wrappers used by the Newton machinery.
 *
 * Two flavors cover everything the solvers need: an LDLT for the symmetric
 * Gauss-Newton normal systems and an LU for the square power-flow Jacobian.
 * Both reuse their symbolic analysis across refactorizations with an
 * unchanged sparsity pattern, which is the common case inside Newton loops.
 */
#pragma once

#include <Eigen/SparseCholesky>
#include <Eigen/SparseLU>

#include "blens/circuit.hpp"

namespace blens {

/// Symmetric positive (semi)definite systems via sparse LDLT, AMD ordering.
class LdltSolver {
 public:
  /// Factorizes @p m (lower triangle is read). Returns false on numerical
  /// failure; the symbolic analysis is kept for the next attempt.
  bool factorize(const SparseMatrix& m);

  [[nodiscard]] Eigen::VectorXd solve(const Eigen::VectorXd& rhs) const;

 private:
  Eigen::SimplicialLDLT<SparseMatrix, Eigen::Lower, Eigen::AMDOrdering<int>> ldlt_;
  bool analyzed_ = false;
};

/// Square unsymmetric systems via sparse LU, COLAMD ordering.
class LuSolver {
 public:
  bool factorize(const SparseMatrix& m);

  [[nodiscard]] Eigen::VectorXd solve(const Eigen::VectorXd& rhs) const;

 private:
  Eigen::SparseLU<SparseMatrix, Eigen::COLAMDOrdering<int>> lu_;
  bool analyzed_ = false;
};

}  // namespace blens
