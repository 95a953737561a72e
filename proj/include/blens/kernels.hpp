/**
 * @file kernels.hpp
 * @brief Hot evaluation kernels plus the serial reference implementation.
 *
 * The production kernels fill the residual vector and the compressed
 * Jacobian values with an OpenMP loop over buses. Every bus owns a disjoint
 * set of output slots, so results are bitwise identical at any thread count.
 *
 * The reference implementation recomputes the same quantities through an
 * independent route (dense std::complex phasor arithmetic straight from the
 * NetworkCase) and exists purely to cross-check the kernels in tests and
 * benchmarks.
 */
#pragma once

#include <Eigen/Core>

#include "blens/circuit.hpp"

namespace blens {
namespace kernels {

/**
 * Fills the full residual (KCL pairs, PV magnitude rows, slack rows) into
 * @p out, which must have topology.residual_size() entries. @p n may be
 * nullptr for zero compensation.
 */
void fill_residual(const CircuitTopology& topo, const StateVector& x,
                   const SlackVector* n, double* out, bool parallel);

/// Builds the fixed Jacobian sparsity pattern for @p topo.
JacobianPattern build_jacobian_pattern(const CircuitTopology& topo);

/**
 * Recomputes the Jacobian values into @p csc_values (the valuePtr() array of
 * a matrix sharing the pattern's skeleton). Throws VoltageCollapsePoint when
 * any bus magnitude is below 1e-6.
 */
void fill_jacobian_values(const CircuitTopology& topo, const JacobianPattern& pattern,
                          const StateVector& x, double* csc_values, bool parallel);

/**
 * Weighted curvature of the KCL rows: sum over rows r of beta[r] times the
 * Hessian of g_r with respect to the state, as a sparse matrix on the full
 * state. Only the bus injection terms are nonlinear, so the result carries
 * one small (e, f) block per compensable bus plus the (e, q) and (f, q)
 * couplings on PV buses. @p beta must hold one weight per KCL row.
 */
[[nodiscard]] SparseMatrix residual_curvature(const CircuitTopology& topo,
                                              const StateVector& x,
                                              const Eigen::VectorXd& beta, bool parallel);

/**
 * Serial reference residual computed with dense complex arithmetic directly
 * from the network description. Row order matches fill_residual.
 */
Eigen::VectorXd reference_residual(const NetworkCase& network, const StateVector& x,
                                   const SlackVector* n = nullptr);

}  // namespace kernels
}  // namespace blens
