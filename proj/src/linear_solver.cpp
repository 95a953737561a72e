#include "blens/linear_solver.hpp"

namespace blens {

bool LdltSolver::factorize(const SparseMatrix& m) {
  if (!analyzed_) {
    ldlt_.analyzePattern(m);
    analyzed_ = true;
  }
  ldlt_.factorize(m);
  return ldlt_.info() == Eigen::Success;
}

Eigen::VectorXd LdltSolver::solve(const Eigen::VectorXd& rhs) const {
  return ldlt_.solve(rhs);
}

bool LuSolver::factorize(const SparseMatrix& m) {
  if (!analyzed_) {
    lu_.analyzePattern(m);
    analyzed_ = true;
  }
  lu_.factorize(m);
  return lu_.info() == Eigen::Success;
}

Eigen::VectorXd LuSolver::solve(const Eigen::VectorXd& rhs) const {
  return lu_.solve(rhs);
}

}  // namespace blens
