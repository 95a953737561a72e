/**
 * @file circuit.hpp
 * @brief Rectangular-coordinate circuit model: state layout, admittance
 *        structure and KCL residual/Jacobian evaluation.
 *
 * The state vector stacks bus voltages in rectangular coordinates plus one
 * reactive injection per PV bus: x = [e_0..e_{n-1}, f_0..f_{n-1}, q_0..q_{npv-1}].
 *
 * The residual stacks, in this fixed order:
 *   - one (real, imag) KCL current mismatch pair per non-slack bus,
 *     ascending by bus position;
 *   - one magnitude row e^2 + f^2 - v_set^2 per PV bus, ascending;
 *   - two slack rows pinning the slack voltage to its setpoint.
 * The system is square: 2*n_bus + n_pv rows and unknowns.
 *
 * Compensation currents live on the KCL rows only: row pair k may receive an
 * additive injection (n_re, n_im), one pair per non-slack ("compensable")
 * bus. Feasible cases need none; collapsed cases are diagnosed by where
 * nonzero compensation concentrates.
 */
#pragma once

#include <Eigen/Core>
#include <Eigen/SparseCore>
#include <string>
#include <vector>

#include "blens/case_model.hpp"
#include "blens/errors.hpp"

namespace blens {

using SparseMatrix = Eigen::SparseMatrix<double>;

/// Full solver state: rectangular voltages plus PV reactive injections.
struct StateVector {
  Eigen::VectorXd data;
  int n_bus = 0;
  int n_pv = 0;

  [[nodiscard]] double e(int bus) const { return data[bus]; }
  [[nodiscard]] double f(int bus) const { return data[n_bus + bus]; }
  [[nodiscard]] double q(int pv_slot) const { return data[2 * n_bus + pv_slot]; }
  double& e(int bus) { return data[bus]; }
  double& f(int bus) { return data[n_bus + bus]; }
  double& q(int pv_slot) { return data[2 * n_bus + pv_slot]; }

  [[nodiscard]] double v_mag(int bus) const { return std::hypot(e(bus), f(bus)); }
  [[nodiscard]] int size() const { return static_cast<int>(data.size()); }
};

/// Compensation currents, one (real, imag) pair per compensable bus.
struct SlackVector {
  Eigen::VectorXd data;

  static SlackVector zero(int n_compensable) {
    SlackVector n;
    n.data = Eigen::VectorXd::Zero(2 * n_compensable);
    return n;
  }

  [[nodiscard]] int locations() const { return static_cast<int>(data.size()) / 2; }
  [[nodiscard]] double n_re(int k) const { return data[2 * k]; }
  [[nodiscard]] double n_im(int k) const { return data[2 * k + 1]; }
  double& n_re(int k) { return data[2 * k]; }
  double& n_im(int k) { return data[2 * k + 1]; }
  [[nodiscard]] double magnitude(int k) const { return std::hypot(n_re(k), n_im(k)); }
  [[nodiscard]] double max_magnitude() const {
    double m = 0.0;
    for (int k = 0; k < locations(); ++k) m = std::max(m, magnitude(k));
    return m;
  }
  [[nodiscard]] double total_magnitude() const {
    double s = 0.0;
    for (int k = 0; k < locations(); ++k) s += magnitude(k);
    return s;
  }
};

/**
 * Precomputed network arrays shared by the evaluation kernels. Bus indices
 * are internal (positions in NetworkCase::buses). The admittance matrix is
 * stored row-compressed with sorted columns and the diagonal always present.
 */
struct CircuitTopology {
  int n_bus = 0;
  int n_pv = 0;
  int slack = 0;

  std::vector<int> comp_bus;      ///< compensable slot -> bus index (ascending)
  std::vector<int> comp_of_bus;   ///< bus index -> compensable slot, -1 for slack
  std::vector<int> pv_buses;      ///< PV slot -> bus index (ascending)
  std::vector<int> pv_slot_of_bus;  ///< bus index -> PV slot, -1 otherwise

  std::vector<int> row_ptr;   ///< CSR offsets, size n_bus + 1
  std::vector<int> col_idx;   ///< CSR columns
  std::vector<double> g_val;  ///< real part of Y entries
  std::vector<double> b_val;  ///< imaginary part of Y entries

  std::vector<double> p_load;  ///< net active load per bus (PQ-bus gens folded in)
  std::vector<double> q_load;  ///< net reactive load per bus
  std::vector<double> p_gen;   ///< PV-bus active generation setpoint per bus
  std::vector<double> v_set;   ///< magnitude setpoint per bus (PV and slack)
  double slack_e = 1.0;        ///< slack voltage setpoint, real part
  double slack_f = 0.0;        ///< slack voltage setpoint, imaginary part

  [[nodiscard]] int n_compensable() const { return n_bus - 1; }
  [[nodiscard]] int state_size() const { return 2 * n_bus + n_pv; }
  [[nodiscard]] int residual_size() const { return 2 * n_bus + n_pv; }
  [[nodiscard]] int kcl_rows() const { return 2 * n_compensable(); }
};

/// Fixed Jacobian sparsity pattern plus the slot permutation that lets the
/// kernels refill compressed values in parallel without synchronization.
struct JacobianPattern {
  SparseMatrix skeleton;            ///< compressed pattern with zero values
  std::vector<int> slot_to_csc;     ///< evaluation slot -> index in valuePtr()
  std::vector<int> bus_slot_begin;  ///< compensable slot -> first evaluation slot
  int kcl_slots = 0;                ///< slots owned by KCL rows
  int total_slots = 0;
};

/**
 * One network bound to its evaluation machinery. Assembly validates the
 * electrical data (throws SingularAssembly on zero-impedance branches) and
 * precomputes the admittance structure and Jacobian pattern once; residual
 * and Jacobian evaluations afterwards are allocation-light and, by default,
 * OpenMP-parallel across buses.
 */
class CircuitAssembly {
 public:
  static CircuitAssembly assemble(const NetworkCase& network, double load_factor = 1.0);
  static CircuitAssembly assemble(const Scenario& scenario);

  [[nodiscard]] const NetworkCase& network() const { return network_; }
  [[nodiscard]] const CircuitTopology& topology() const { return topo_; }
  [[nodiscard]] double load_factor() const { return load_factor_; }

  [[nodiscard]] int n_bus() const { return topo_.n_bus; }
  [[nodiscard]] int n_pv() const { return topo_.n_pv; }
  [[nodiscard]] int n_compensable() const { return topo_.n_compensable(); }
  [[nodiscard]] int state_size() const { return topo_.state_size(); }
  [[nodiscard]] int residual_size() const { return topo_.residual_size(); }

  /// External id of the bus behind compensable slot @p k.
  [[nodiscard]] int compensable_bus_id(int k) const {
    return network_.buses[topo_.comp_bus[k]].id;
  }
  /// Compensable slot of the bus with external id @p id; -1 for the slack.
  [[nodiscard]] int compensable_slot_of(int bus_id) const {
    return topo_.comp_of_bus[network_.bus_index(bus_id)];
  }

  /// Flat start: unit voltage at setpoint magnitudes, zero angle, q = 0.
  [[nodiscard]] StateVector flat_state() const;

  /// KCL + setpoint residual at @p x with compensation @p n (nullptr = none).
  [[nodiscard]] Eigen::VectorXd residual(const StateVector& x,
                                         const SlackVector* n = nullptr) const;

  /// Analytic Jacobian at @p x. Throws VoltageCollapsePoint when any bus
  /// magnitude falls below 1e-6.
  [[nodiscard]] SparseMatrix jacobian(const StateVector& x) const;

  /// Weighted curvature of the KCL rows at @p x: sum over rows r of
  /// beta[r] times the Hessian of residual row r with respect to the state.
  /// @p beta holds one weight per KCL row.
  [[nodiscard]] SparseMatrix kcl_curvature(const StateVector& x,
                                           const Eigen::VectorXd& beta) const;

  /// Toggles OpenMP-parallel evaluation (on by default).
  void set_parallel(bool on) { parallel_ = on; }
  [[nodiscard]] bool parallel() const { return parallel_; }

 private:
  NetworkCase network_;
  CircuitTopology topo_;
  JacobianPattern pattern_;
  double load_factor_ = 1.0;
  bool parallel_ = true;
};

}  // namespace blens
