/**
 * @file solver.hpp
 * @brief Newton-based solvers: plain power flow, the dense least-norm
 *        compensation problem, and the homotopy continuation fallback.
 *
 * All solvers share one piece of machinery: a damped Newton step with
 * component-wise voltage clamping and Armijo backtracking. The compensation
 * problems are solved in eliminated form. Substituting n = -g(v) into
 *
 *     min ½‖n‖² s.t. g(v) + n = 0
 *
 * leaves the unconstrained objective F(v) = ½‖g(v)‖² over the voltage
 * manifold where slack variables are fixed at their setpoints and every PV
 * bus is parametrized by (theta, q) on its magnitude circle, so the setpoint
 * rows hold exactly and only the KCL rows remain in F.
 *
 * The reduced system is square, so every stationary point with g != 0 has a
 * singular reduced Jacobian; the damping ramp must work well exactly there.
 * The minimizer uses the exact Hessian, the Gauss-Newton product plus the
 * residual curvature terms: with the curvature dropped, deeply collapsed
 * systems (large ‖g‖ at the optimum) converge linearly with rate approaching
 * one and stall far from optimality. Damping scales the Hessian diagonal
 * (lambda * |diag(H)|, floored, since the exact Hessian can be indefinite
 * away from a minimum) rather than the identity, and lambda follows a
 * gain-ratio schedule: large model agreement relaxes it, poor agreement or
 * any backtracking tightens it. With smoothed magnitude terms the minimizer
 * runs a smoothing continuation, re-solving from delta = 1e-2 down to the
 * configured delta with warm starts, because the terms are effectively
 * nonsmooth at the final delta.
 *
 * residual_norm semantics in SolveResult: power-flow solves report the
 * infinity norm of the full residual; optimization solves report
 * min(‖g‖∞, ‖∇F‖∞ / (1 + c_max/delta)), the smaller of the feasibility
 * measure and a stiffness-scaled optimality measure. The denominator removes
 * the factor by which the smoothed terms amplify rounding noise in g (it is
 * exactly 1 for the dense objective), and the gradient tolerance is floored
 * at that same noise level, so Converged always implies
 * residual_norm <= tol_residual.
 */
#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "blens/circuit.hpp"
#include "blens/errors.hpp"

namespace blens {

struct SolverConfig {
  double tol_residual = 1e-8;   ///< convergence tolerance, per unit (>= 1e-11)
  int max_iters = 200;          ///< Newton iteration cap per solve
  double step_limit_v = 0.2;    ///< per-component clamp on voltage-like steps
  int homotopy_steps = 8;       ///< geometric increments anchor -> target
  double smoothing_delta = 1e-8;  ///< delta in the smoothed magnitude m_i
  double epsilon_support = 1e-6;  ///< support threshold on |n_i|

  double gamma = 0.1;    ///< relative toggling threshold
  double c_high = 10.0;  ///< suppressing sparsity coefficient
  double c_low = 0.1;    ///< permitting sparsity coefficient
  int max_toggle_rounds = 20;

  double armijo_c = 1e-4;   ///< sufficient-decrease constant
  int max_backtracks = 40;  ///< halvings per line search
  bool levenberg_damping = true;
  double lambda_init = 1e-4;
  double lambda_min = 1e-14;
  double lambda_max = 1e6;

  double homotopy_anchor = 1.0;  ///< preferred anchor load multiplier
  int homotopy_bisections = 5;   ///< recursive step bisections before giving up

  /// Reserved: generator reactive limits are parsed but not enforced.
  bool enforce_q_limits = false;
};

/// Throws Error when a config field is out of its documented domain.
void validate_config(const SolverConfig& config);

enum class SolveStatus { Converged, Diverged, MaxIters };

struct SolveResult {
  SolveStatus status = SolveStatus::Diverged;
  StateVector state;
  SlackVector compensation;  ///< n at the final state (zero for power flow)
  double objective = 0.0;
  double residual_norm = 0.0;  ///< see file comment for semantics
  int iterations = 0;
  std::vector<double> objective_trace;  ///< objective per accepted iteration

  [[nodiscard]] bool converged() const { return status == SolveStatus::Converged; }
};

/// Outcome of one damped Newton step attempt.
struct StepOutcome {
  Eigen::VectorXd u;       ///< accepted iterate (input u when not accepted)
  double objective = 0.0;  ///< objective at the returned iterate
  bool accepted = false;
  int backtracks = 0;
  double predicted_decrease = 0.0;  ///< quadratic-model decrease at the raw step
  double lambda_used = 0.0;
};

/**
 * One damped, clamped, line-searched Newton step on a generic objective.
 * Solves (H + lambda D) d = -grad with D = |diag(H)| floored, escalating
 * lambda tenfold until the system factorizes and the clamped direction
 * yields Armijo descent (the absolute value keeps the shift positive when H
 * is indefinite, so enough damping always restores descent). After an
 * accepted step lambda adapts by the gain ratio rho = actual / predicted
 * decrease: rho > 0.75 with a full step relaxes it, rho < 0.25 or any
 * backtracking tightens it; @p lambda carries the schedule across calls.
 * Components flagged in @p voltage_like are clamped to ±step_limit_v. Throws
 * SingularSystem when the system stays unfactorizable at maximum damping
 * (immediately when damping is disabled). Returns accepted = false when no
 * descent was found at maximum damping.
 */
StepOutcome newton_step(const SparseMatrix& hessian, const Eigen::VectorXd& gradient,
                        const std::function<double(const Eigen::VectorXd&)>& objective,
                        const Eigen::VectorXd& u, double objective_at_u,
                        const std::vector<char>& voltage_like, const SolverConfig& config,
                        double& lambda);

/**
 * Plain Newton power flow on the full square system (compensation forced to
 * zero). Diverged/MaxIters flags a candidate collapsed system; divergence is
 * declared when the residual norm exceeds 10x its running minimum for five
 * consecutive iterations or no descent direction remains.
 *
 * @p fixed_compensation replays a previously computed n as constant
 * injections (nullptr keeps the classic n = 0 problem).
 */
SolveResult solve_power_flow(const CircuitAssembly& assembly, const SolverConfig& config,
                             const StateVector* warm_start = nullptr,
                             const SlackVector* fixed_compensation = nullptr);

/**
 * Shared eliminated-form minimizer. With @p coefficients == nullptr it
 * minimizes the dense objective ½‖g‖²; otherwise it adds the smoothed
 * magnitude terms Σ c_i·m_i (see sparse_optimizer) and runs the smoothing
 * continuation described in the file comment, warm-starting each stage.
 * iterations counts accepted steps across all stages and max_iters caps each
 * stage. Returns a stationary point or a non-converged status; never throws
 * for numerical failure.
 */
SolveResult minimize_compensation(const CircuitAssembly& assembly,
                                  const Eigen::VectorXd* coefficients,
                                  const SolverConfig& config,
                                  const StateVector* warm_start = nullptr);

/**
 * Dense infeasibility quantification: direct eliminated solve, then a
 * homotopy fallback anchored at (or below) nominal loading when the direct
 * attempt fails. Throws NoConvergence when both paths are exhausted.
 */
SolveResult solve_dense(const CircuitAssembly& assembly, const SolverConfig& config,
                        const StateVector* warm_start = nullptr);

using HomotopyFamily = std::function<CircuitAssembly(double)>;
using HomotopyInner =
    std::function<SolveResult(const CircuitAssembly&, const SolverConfig&, const StateVector*)>;

/**
 * Continuation: walks the assembly family from a converging anchor factor to
 * @p target_factor in geometric increments, warm-starting each solve from
 * the previous one and bisecting failed increments up to
 * config.homotopy_bisections levels. The anchor starts at
 * min(homotopy_anchor, target) and is halved until the anchor solve
 * converges. @p inner defaults to the dense minimizer. Throws NoConvergence
 * when the anchor search or a bisected increment fails.
 */
SolveResult homotopy_solve(const HomotopyFamily& family, double target_factor,
                           const SolverConfig& config, const HomotopyInner& inner = {});

}  // namespace blens
