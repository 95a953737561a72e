/**
 * @file sparse_optimizer.hpp
 * @brief Single-scenario sparse diagnosis: least-norm compensation with
 *        per-location L1 weights and adaptive coefficient toggling.
 *
 * The weighted problem minimizes ½‖n‖² + Σ_i c_i·|n_i| subject to the
 * network balance g(v) + n = 0, where |n_i| couples the real and imaginary
 * parts of one location's compensation. In eliminated form the objective is
 * F(v) = ½‖g(v)‖² + Σ_i c_i·m_i(v) with the smoothed magnitude
 * m_i = sqrt(g_re,i² + g_im,i² + δ²). High coefficients (c_high) suppress
 * compensation, low ones (c_low) permit it; toggling them by observed
 * magnitude drives the support toward the few genuinely vulnerable buses.
 */
#pragma once

#include <map>
#include <vector>

#include "blens/circuit.hpp"
#include "blens/solver.hpp"

namespace blens {

/// Per-location L1 weights plus the pin mask carried between scenarios.
struct SparsityCoefficients {
  Eigen::VectorXd c;
  std::vector<char> pinned;  ///< held at 0.5*c_low, never raised
  double c_high = 10.0;
  double c_low = 0.1;

  /// All-suppressing start per the toggling loop's initialization.
  static SparsityCoefficients uniform_high(int locations, const SolverConfig& config);

  [[nodiscard]] int size() const { return static_cast<int>(c.size()); }
  [[nodiscard]] double pin_value() const { return 0.5 * c_low; }
};

/// Buses whose compensation magnitude exceeds the support threshold.
struct VulnerabilitySet {
  std::vector<int> bus_ids;          ///< sorted ascending
  std::map<int, double> magnitudes;  ///< bus id -> |n_i| in per unit

  [[nodiscard]] int size() const { return static_cast<int>(bus_ids.size()); }
  [[nodiscard]] bool contains(int bus_id) const { return magnitudes.count(bus_id) > 0; }
  [[nodiscard]] bool operator==(const VulnerabilitySet& other) const {
    return bus_ids == other.bus_ids;
  }
};

struct SparseSolution {
  SolveResult result;
  VulnerabilitySet support;
  SparsityCoefficients coefficients;  ///< final values after toggling
  int toggle_rounds = 0;              ///< converged inner solves after the dense init
  std::vector<int> support_sizes;     ///< per round, starting with the dense init
};

/// Weighted inner solve (Problem-2 objective) for fixed coefficients.
SolveResult solve_sparse_inner(const CircuitAssembly& assembly,
                               const SparsityCoefficients& coefficients,
                               const SolverConfig& config,
                               const StateVector* warm_start = nullptr);

/**
 * Toggling rule: c_i <- c_low when |n_i| >= gamma·max_j|n_j| and
 * |n_i| > epsilon_support, else c_high; pinned locations stay at 0.5*c_low.
 * Throws AllZeroSlack when max_j|n_j| <= epsilon_support (the system is
 * already feasible and toggling is pointless).
 */
SparsityCoefficients update_coefficients(const SlackVector& n,
                                         const SparsityCoefficients& current, double gamma,
                                         double epsilon_support);

/// Locations with |n_i| strictly above @p epsilon, with magnitudes.
VulnerabilitySet extract_support(const SlackVector& n, double epsilon,
                                 const CircuitAssembly& assembly);

/**
 * Full single-scenario diagnosis: dense initialization, then coefficient
 * toggling until the support stops shrinking, repeats, or an inner solve
 * fails (rollback). Returns the converged solution with the smallest
 * support, ties broken by total compensation magnitude. @p prior pins the
 * locations whose previous-scenario coefficient was <= c_low. Throws
 * NoConvergence only when the dense initialization itself fails.
 */
SparseSolution solve_sparse(const CircuitAssembly& assembly, const SolverConfig& config,
                            const SparsityCoefficients* prior = nullptr,
                            const StateVector* warm_start = nullptr);

}  // namespace blens
