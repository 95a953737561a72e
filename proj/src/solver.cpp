#include "blens/solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "blens/linear_solver.hpp"
#include "blens/log.hpp"

namespace blens {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

/// First stage of the smoothing continuation for coefficient solves.
constexpr double kSmoothingStart = 1e-2;

/// Gradient target (infinity norm) for interior continuation stages.
constexpr double kStageGradTol = 1e-4;

/// Noise level of the reduced gradient per unit of term stiffness
/// 1 + c_max/delta: rounding noise in g is amplified by the stiffness, and
/// factorization error near the smoothing kink adds to it. The effective
/// gradient tolerance is floored at kGradNoise times the stiffness.
constexpr double kGradNoise = 1e-11;

/// Floor applied to |diagonal| entries of the Hessian before damping scales
/// them.
constexpr double kDiagFloor = 1e-12;

/**
 * Mapping between the full state and the reduced optimization variables.
 * Slack voltages are fixed at their setpoints and each PV bus contributes
 * (theta, q) with e = v_set cos(theta), f = v_set sin(theta), which keeps
 * the PV magnitude rows and slack rows exactly satisfied. PQ buses
 * contribute (e, f) directly. Two variables per compensable bus.
 */
class ReducedMap {
 public:
  explicit ReducedMap(const CircuitTopology& topo) : topo_(&topo) {
    n_red_ = 2 * topo.n_compensable();
    voltage_like_.assign(n_red_, 1);
    for (int k = 0; k < topo.n_compensable(); ++k) {
      const int i = topo.comp_bus[k];
      if (topo.pv_slot_of_bus[i] >= 0) voltage_like_[2 * k + 1] = 0;  // q
    }
  }

  [[nodiscard]] int size() const { return n_red_; }
  [[nodiscard]] const std::vector<char>& voltage_like() const { return voltage_like_; }

  [[nodiscard]] StateVector to_full(const Eigen::VectorXd& u) const {
    const CircuitTopology& t = *topo_;
    StateVector x;
    x.n_bus = t.n_bus;
    x.n_pv = t.n_pv;
    x.data = Eigen::VectorXd::Zero(t.state_size());
    x.e(t.slack) = t.slack_e;
    x.f(t.slack) = t.slack_f;
    for (int k = 0; k < t.n_compensable(); ++k) {
      const int i = t.comp_bus[k];
      const int pv = t.pv_slot_of_bus[i];
      if (pv < 0) {
        x.e(i) = u[2 * k];
        x.f(i) = u[2 * k + 1];
      } else {
        x.e(i) = t.v_set[i] * std::cos(u[2 * k]);
        x.f(i) = t.v_set[i] * std::sin(u[2 * k]);
        x.q(pv) = u[2 * k + 1];
      }
    }
    return x;
  }

  [[nodiscard]] Eigen::VectorXd from_full(const StateVector& x) const {
    const CircuitTopology& t = *topo_;
    Eigen::VectorXd u(n_red_);
    for (int k = 0; k < t.n_compensable(); ++k) {
      const int i = t.comp_bus[k];
      const int pv = t.pv_slot_of_bus[i];
      if (pv < 0) {
        u[2 * k] = x.e(i);
        u[2 * k + 1] = x.f(i);
      } else {
        u[2 * k] = std::atan2(x.f(i), x.e(i));
        u[2 * k + 1] = x.q(pv);
      }
    }
    return u;
  }

  [[nodiscard]] Eigen::VectorXd flat_u() const {
    const CircuitTopology& t = *topo_;
    Eigen::VectorXd u = Eigen::VectorXd::Zero(n_red_);
    for (int k = 0; k < t.n_compensable(); ++k) {
      const int i = t.comp_bus[k];
      if (t.pv_slot_of_bus[i] < 0) u[2 * k] = 1.0;
    }
    return u;
  }

  /// T = dx/du evaluated at the (on-manifold) full state @p x.
  [[nodiscard]] SparseMatrix transform(const StateVector& x) const {
    const CircuitTopology& t = *topo_;
    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(2 * n_red_);
    for (int k = 0; k < t.n_compensable(); ++k) {
      const int i = t.comp_bus[k];
      const int pv = t.pv_slot_of_bus[i];
      if (pv < 0) {
        trip.emplace_back(i, 2 * k, 1.0);
        trip.emplace_back(t.n_bus + i, 2 * k + 1, 1.0);
      } else {
        trip.emplace_back(i, 2 * k, -x.f(i));
        trip.emplace_back(t.n_bus + i, 2 * k, x.e(i));
        trip.emplace_back(2 * t.n_bus + pv, 2 * k + 1, 1.0);
      }
    }
    SparseMatrix m(t.state_size(), n_red_);
    m.setFromTriplets(trip.begin(), trip.end());
    return m;
  }

 private:
  const CircuitTopology* topo_;
  int n_red_ = 0;
  std::vector<char> voltage_like_;
};

double inf_norm(const Eigen::VectorXd& v) {
  return v.size() == 0 ? 0.0 : v.cwiseAbs().maxCoeff();
}

}  // namespace

void validate_config(const SolverConfig& c) {
  const bool ok = c.tol_residual >= kGradNoise && c.max_iters > 0 && c.step_limit_v > 0 &&
                  c.homotopy_steps > 0 && c.smoothing_delta > 0 && c.epsilon_support > 0 &&
                  c.gamma > 0 && c.gamma < 1 && c.c_high > 0 && c.c_low > 0 &&
                  c.max_toggle_rounds > 0 && c.armijo_c > 0 && c.max_backtracks > 0 &&
                  c.lambda_init > 0 && c.lambda_min > 0 && c.lambda_max >= c.lambda_init &&
                  c.homotopy_anchor > 0 && c.homotopy_bisections >= 0;
  if (!ok) throw Error("solver config has a field outside its domain");
}

StepOutcome newton_step(const SparseMatrix& hessian, const Eigen::VectorXd& gradient,
                        const std::function<double(const Eigen::VectorXd&)>& objective,
                        const Eigen::VectorXd& u, double objective_at_u,
                        const std::vector<char>& voltage_like, const SolverConfig& config,
                        double& lambda) {
  const int n = static_cast<int>(u.size());
  Eigen::VectorXd dscale = hessian.diagonal();
  for (int i = 0; i < n; ++i) dscale[i] = std::max(std::abs(dscale[i]), kDiagFloor);
  LdltSolver ldlt;

  StepOutcome out;
  out.u = u;
  out.objective = objective_at_u;
  lambda = std::clamp(lambda, config.lambda_min, config.lambda_max);

  while (true) {
    const bool at_cap = !config.levenberg_damping || lambda >= config.lambda_max * (1.0 - 1e-12);
    SparseMatrix damped = hessian;
    if (config.levenberg_damping) {
      std::vector<Eigen::Triplet<double>> trip;
      trip.reserve(n);
      for (int i = 0; i < n; ++i) trip.emplace_back(i, i, lambda * dscale[i]);
      SparseMatrix shift(n, n);
      shift.setFromTriplets(trip.begin(), trip.end());
      damped = SparseMatrix(hessian + shift);
    }

    Eigen::VectorXd d;
    bool factorized = ldlt.factorize(damped);
    if (factorized) {
      d = -ldlt.solve(gradient);
      factorized = d.allFinite();
    }
    if (!factorized) {
      if (at_cap) {
        throw SingularSystem("step system is singular at maximum damping (lambda=" +
                             std::to_string(lambda) + ")");
      }
      lambda = std::min(lambda * 10.0, config.lambda_max);
      continue;
    }

    for (int j = 0; j < n; ++j) {
      if (voltage_like[j]) d[j] = std::clamp(d[j], -config.step_limit_v, config.step_limit_v);
    }

    const double slope = gradient.dot(d);
    const double predicted = -slope - 0.5 * d.dot(Eigen::VectorXd(hessian * d));
    out.predicted_decrease = std::max(0.0, predicted);
    out.lambda_used = lambda;

    if (slope < 0.0) {
      double alpha = 1.0;
      for (int bt = 0; bt <= config.max_backtracks; ++bt) {
        const double f_new = objective(u + alpha * d);
        if (std::isfinite(f_new) &&
            f_new <= objective_at_u + config.armijo_c * alpha * slope) {
          const double rho =
              predicted > 0.0 ? (objective_at_u - f_new) / (alpha * predicted) : 1.0;
          out.u = u + alpha * d;
          out.objective = f_new;
          out.accepted = true;
          out.backtracks = bt;
          if (rho > 0.75 && bt == 0) {
            lambda = std::max(lambda / 9.0, config.lambda_min);
          } else if (rho < 0.25 || bt > 0) {
            lambda = std::min(lambda * 4.0, config.lambda_max);
          }
          return out;
        }
        alpha *= 0.5;
      }
    }

    if (at_cap) return out;  // accepted = false: no descent even at max damping
    lambda = std::min(lambda * 10.0, config.lambda_max);
  }
}

namespace {

/// Everything the minimizer needs at one iterate.
struct ObjectivePoint {
  double objective = kInf;
  StateVector x;          // full state behind the iterate
  Eigen::VectorXd g;      // KCL residual block
  Eigen::VectorXd wg;     // residual weighted by the magnitude-term scales
  Eigen::VectorXd grad_x; // objective gradient with respect to the full state
  Eigen::VectorXd grad;   // reduced gradient
  SparseMatrix j_red;     // reduced KCL Jacobian
  double g_norm = kInf;   // ||g||_inf
};

double smoothed_objective(const Eigen::VectorXd& g, const Eigen::VectorXd* coeffs,
                          double delta) {
  double f = 0.5 * g.squaredNorm();
  if (coeffs != nullptr) {
    for (int k = 0; k < coeffs->size(); ++k) {
      f += (*coeffs)[k] *
           std::sqrt(g[2 * k] * g[2 * k] + g[2 * k + 1] * g[2 * k + 1] + delta * delta);
    }
  }
  return std::isfinite(f) ? f : kInf;
}

ObjectivePoint evaluate_point(const CircuitAssembly& assembly, const ReducedMap& rm,
                              const Eigen::VectorXd& u, const Eigen::VectorXd* coeffs,
                              const SolverConfig& config) {
  const int kcl = assembly.topology().kcl_rows();
  ObjectivePoint p;
  p.x = rm.to_full(u);
  p.g = assembly.residual(p.x).head(kcl);
  p.objective = smoothed_objective(p.g, coeffs, config.smoothing_delta);
  p.g_norm = inf_norm(p.g);

  const SparseMatrix j_kcl = SparseMatrix(assembly.jacobian(p.x).topRows(kcl));
  const SparseMatrix t = rm.transform(p.x);
  p.j_red = j_kcl * t;

  p.wg = p.g;
  if (coeffs != nullptr) {
    const double d2 = config.smoothing_delta * config.smoothing_delta;
    for (int k = 0; k < coeffs->size(); ++k) {
      const double m =
          std::sqrt(p.g[2 * k] * p.g[2 * k] + p.g[2 * k + 1] * p.g[2 * k + 1] + d2);
      const double s = 1.0 + (*coeffs)[k] / m;
      p.wg[2 * k] *= s;
      p.wg[2 * k + 1] *= s;
    }
  }
  p.grad_x = j_kcl.transpose() * p.wg;
  p.grad = t.transpose() * p.grad_x;
  return p;
}

/**
 * Exact Hessian of the smoothed objective in the reduced variables: the
 * Gauss-Newton product JᵀWJ, the pulled-back residual curvature Σ wg_r ∇²g_r,
 * and on PV buses the curvature of the angle parametrization itself
 * (d²e/dθ² = -e, d²f/dθ² = -f).
 */
SparseMatrix objective_hessian(const CircuitAssembly& assembly, const ReducedMap& rm,
                               const ObjectivePoint& p, const Eigen::VectorXd* coeffs,
                               const SolverConfig& config) {
  SparseMatrix h;
  if (coeffs == nullptr) {
    h = SparseMatrix(p.j_red.transpose() * p.j_red);
  } else {
    const int kcl = static_cast<int>(p.g.size());
    const double d2 = config.smoothing_delta * config.smoothing_delta;
    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(2 * kcl);
    for (int k = 0; k < coeffs->size(); ++k) {
      const double re = p.g[2 * k];
      const double im = p.g[2 * k + 1];
      const double m = std::sqrt(re * re + im * im + d2);
      const double c = (*coeffs)[k];
      const double s = 1.0 + c / m;
      const double m3 = m * m * m;
      trip.emplace_back(2 * k, 2 * k, s - c * re * re / m3);
      trip.emplace_back(2 * k + 1, 2 * k + 1, s - c * im * im / m3);
      const double off = -c * re * im / m3;
      trip.emplace_back(2 * k, 2 * k + 1, off);
      trip.emplace_back(2 * k + 1, 2 * k, off);
    }
    SparseMatrix w(kcl, kcl);
    w.setFromTriplets(trip.begin(), trip.end());
    h = SparseMatrix(p.j_red.transpose() * SparseMatrix(w * p.j_red));
  }

  const SparseMatrix t = rm.transform(p.x);
  const SparseMatrix c = assembly.kcl_curvature(p.x, p.wg);
  h = SparseMatrix(h + t.transpose() * SparseMatrix(c * t));

  const CircuitTopology& topo = assembly.topology();
  std::vector<Eigen::Triplet<double>> trip;
  for (int k = 0; k < topo.n_compensable(); ++k) {
    const int i = topo.comp_bus[k];
    if (topo.pv_slot_of_bus[i] < 0) continue;
    const double add =
        -(p.x.e(i) * p.grad_x[i] + p.x.f(i) * p.grad_x[topo.n_bus + i]);
    trip.emplace_back(2 * k, 2 * k, add);
  }
  if (!trip.empty()) {
    SparseMatrix diag(h.rows(), h.cols());
    diag.setFromTriplets(trip.begin(), trip.end());
    h = SparseMatrix(h + diag);
  }
  return h;
}

}  // namespace

SolveResult minimize_compensation(const CircuitAssembly& assembly,
                                  const Eigen::VectorXd* coefficients,
                                  const SolverConfig& config,
                                  const StateVector* warm_start) {
  validate_config(config);
  const CircuitTopology& topo = assembly.topology();
  if (coefficients != nullptr && coefficients->size() != topo.n_compensable()) {
    throw Error("coefficient vector does not match the compensable locations");
  }
  if (warm_start != nullptr && warm_start->size() != topo.state_size()) {
    throw Error("warm start does not match the assembly's state size");
  }

  const ReducedMap rm(topo);
  Eigen::VectorXd u = warm_start != nullptr ? rm.from_full(*warm_start) : rm.flat_u();

  const double c_max = (coefficients != nullptr && coefficients->size() > 0)
                           ? std::max(0.0, coefficients->maxCoeff())
                           : 0.0;
  const double stiffness = 1.0 + c_max / config.smoothing_delta;
  const double grad_tol = std::max(config.tol_residual, kGradNoise * stiffness);

  // Smoothing continuation: at the configured delta the magnitude terms are
  // effectively nonsmooth, so solve a relaxed problem first and tighten delta
  // tenfold per stage, warm-starting each one.
  std::vector<double> deltas;
  if (c_max > 0.0 && config.smoothing_delta < kSmoothingStart) {
    for (double d = kSmoothingStart; d > 1.5 * config.smoothing_delta; d *= 0.1) {
      deltas.push_back(d);
    }
  }
  deltas.push_back(config.smoothing_delta);

  SolveResult result;
  double lambda = config.lambda_init;
  ObjectivePoint p;
  bool done = false;

  for (std::size_t si = 0; si < deltas.size() && !done; ++si) {
    const bool final_stage = si + 1 == deltas.size();
    SolverConfig stage = config;
    stage.smoothing_delta = deltas[si];
    const double stage_gtol =
        final_stage ? grad_tol
                    : std::max(kStageGradTol, kGradNoise * (1.0 + c_max / deltas[si]));

    const auto objective_of = [&](const Eigen::VectorXd& v) {
      const StateVector x = rm.to_full(v);
      const Eigen::VectorXd g = assembly.residual(x).head(topo.kcl_rows());
      return smoothed_objective(g, coefficients, stage.smoothing_delta);
    };

    try {
      p = evaluate_point(assembly, rm, u, coefficients, stage);
    } catch (const VoltageCollapsePoint& e) {
      BLENS_LOG_DEBUG("minimize: collapse point at the start state: ", e.what());
      result.status = SolveStatus::Diverged;
      result.state = rm.to_full(u);
      result.compensation = SlackVector::zero(topo.n_compensable());
      return result;
    }
    result.objective_trace.push_back(p.objective);

    for (int iter = 0; !done; ++iter) {
      if (p.g_norm <= config.tol_residual) {  // feasible: nothing to compensate
        result.status = SolveStatus::Converged;
        done = true;
        break;
      }
      if (inf_norm(p.grad) <= stage_gtol) {
        if (final_stage) {
          result.status = SolveStatus::Converged;
          done = true;
        }
        break;  // interior stage solved; tighten the smoothing
      }
      if (iter >= stage.max_iters) {
        if (final_stage) {
          result.status = SolveStatus::MaxIters;
          done = true;
        }
        break;  // a tighter stage may still make progress
      }

      StepOutcome step;
      try {
        const SparseMatrix h = objective_hessian(assembly, rm, p, coefficients, stage);
        step = newton_step(h, p.grad, objective_of, u, p.objective, rm.voltage_like(), stage,
                           lambda);
      } catch (const SingularSystem& e) {
        BLENS_LOG_DEBUG("minimize: ", e.what());
        result.status = SolveStatus::Diverged;
        done = true;
        break;
      }

      if (!step.accepted) {
        // No descent at maximum damping. The gradient test above already
        // failed, so on the final stage this is an honest failure.
        if (final_stage) {
          BLENS_LOG_DEBUG("minimize: no descent at maximum damping, grad=",
                          inf_norm(p.grad), " (tol ", stage_gtol, ")");
          result.status = SolveStatus::Diverged;
          done = true;
        } else {
          BLENS_LOG_DEBUG("minimize: stage delta=", deltas[si], " stalled; tightening");
        }
        break;
      }

      const Eigen::VectorXd u_prev = u;
      u = step.u;
      result.iterations += 1;
      try {
        p = evaluate_point(assembly, rm, u, coefficients, stage);
      } catch (const VoltageCollapsePoint& e) {
        BLENS_LOG_DEBUG("minimize: stepped into a collapse point: ", e.what());
        u = u_prev;  // p still describes this iterate
        result.status = SolveStatus::Diverged;
        done = true;
        break;
      }
      result.objective_trace.push_back(p.objective);
    }
  }

  result.state = rm.to_full(u);
  result.compensation.data = -p.g;
  result.objective = p.objective;
  result.residual_norm = std::min(p.g_norm, inf_norm(p.grad) / stiffness);
  return result;
}

SolveResult solve_power_flow(const CircuitAssembly& assembly, const SolverConfig& config,
                             const StateVector* warm_start,
                             const SlackVector* fixed_compensation) {
  validate_config(config);
  const CircuitTopology& topo = assembly.topology();
  if (warm_start != nullptr && warm_start->size() != topo.state_size()) {
    throw Error("warm start does not match the assembly's state size");
  }
  if (fixed_compensation != nullptr &&
      fixed_compensation->locations() != topo.n_compensable()) {
    throw Error("fixed compensation does not match the compensable locations");
  }

  StateVector x = warm_start != nullptr ? *warm_start : assembly.flat_state();
  std::vector<char> voltage_like(topo.state_size(), 0);
  for (int j = 0; j < 2 * topo.n_bus; ++j) voltage_like[j] = 1;

  const auto objective_of = [&](const Eigen::VectorXd& v) {
    StateVector xs = x;
    xs.data = v;
    const Eigen::VectorXd r = assembly.residual(xs, fixed_compensation);
    const double f = 0.5 * r.squaredNorm();
    return std::isfinite(f) ? f : kInf;
  };

  SolveResult result;
  result.compensation = fixed_compensation != nullptr
                            ? *fixed_compensation
                            : SlackVector::zero(topo.n_compensable());

  LuSolver lu;
  double lambda = config.lambda_init;
  Eigen::VectorXd r = assembly.residual(x, fixed_compensation);
  double f = 0.5 * r.squaredNorm();
  result.objective_trace.push_back(f);

  double min_norm = inf_norm(r);
  int growth_streak = 0;

  for (int iter = 0; iter < config.max_iters; ++iter) {
    const double r_norm = inf_norm(r);
    if (r_norm <= config.tol_residual) {
      result.status = SolveStatus::Converged;
      break;
    }

    SparseMatrix j;
    try {
      j = assembly.jacobian(x);
    } catch (const VoltageCollapsePoint& e) {
      BLENS_LOG_DEBUG("power flow: ", e.what());
      result.status = SolveStatus::Diverged;
      break;
    }
    const Eigen::VectorXd grad = j.transpose() * r;

    // Primary route: the plain Newton direction from the square system.
    bool accepted = false;
    if (lu.factorize(j)) {
      Eigen::VectorXd d = -lu.solve(r);
      if (d.allFinite()) {
        for (int c = 0; c < d.size(); ++c) {
          if (voltage_like[c]) d[c] = std::clamp(d[c], -config.step_limit_v, config.step_limit_v);
        }
        const double slope = grad.dot(d);
        if (slope < 0.0) {
          double alpha = 1.0;
          for (int bt = 0; bt <= config.max_backtracks; ++bt) {
            const double f_new = objective_of(x.data + alpha * d);
            if (std::isfinite(f_new) && f_new <= f + config.armijo_c * alpha * slope) {
              x.data += alpha * d;
              f = f_new;
              accepted = true;
              break;
            }
            alpha *= 0.5;
          }
        }
      }
    }

    // Fallback: damped Gauss-Newton step when the square solve is singular
    // or yields no descent (near-collapse states).
    if (!accepted) {
      StepOutcome step;
      try {
        const SparseMatrix h = SparseMatrix(j.transpose() * j);
        step = newton_step(h, grad, objective_of, x.data, f, voltage_like, config, lambda);
      } catch (const SingularSystem& e) {
        BLENS_LOG_DEBUG("power flow: ", e.what());
        result.status = SolveStatus::Diverged;
        break;
      }
      if (!step.accepted) {
        result.status = SolveStatus::Diverged;
        break;
      }
      x.data = step.u;
      f = step.objective;
    }

    r = assembly.residual(x, fixed_compensation);
    result.objective_trace.push_back(f);
    result.iterations = iter + 1;

    const double new_norm = inf_norm(r);
    if (new_norm < min_norm) {
      min_norm = new_norm;
      growth_streak = 0;
    } else if (new_norm > 10.0 * min_norm) {
      if (++growth_streak >= 5) {
        result.status = SolveStatus::Diverged;
        break;
      }
    } else {
      growth_streak = 0;
    }
    if (iter + 1 == config.max_iters) result.status = SolveStatus::MaxIters;
  }

  if (inf_norm(r) <= config.tol_residual) result.status = SolveStatus::Converged;
  result.state = x;
  result.objective = f;
  result.residual_norm = inf_norm(r);
  return result;
}

SolveResult homotopy_solve(const HomotopyFamily& family, double target_factor,
                           const SolverConfig& config, const HomotopyInner& inner_in) {
  validate_config(config);
  if (!(target_factor > 0.0)) throw Error("homotopy target factor must be positive");
  const HomotopyInner inner =
      inner_in ? inner_in
               : [](const CircuitAssembly& a, const SolverConfig& c, const StateVector* w) {
                   return minimize_compensation(a, nullptr, c, w);
                 };

  // Anchor search: start at the preferred anchor (never above the target)
  // and halve until the cold solve converges.
  double anchor = std::min(config.homotopy_anchor, target_factor);
  SolveResult result;
  bool anchored = false;
  for (int attempt = 0; attempt <= 10; ++attempt) {
    result = inner(family(anchor), config, nullptr);
    if (result.converged()) {
      anchored = true;
      break;
    }
    anchor *= 0.5;
  }
  if (!anchored) {
    throw NoConvergence("homotopy could not find a converging anchor below factor " +
                        std::to_string(target_factor));
  }
  if (std::abs(anchor - target_factor) <= 1e-12 * target_factor) return result;

  StateVector warm = result.state;
  double reached = anchor;

  std::function<SolveResult(double, int)> advance = [&](double to, int depth) -> SolveResult {
    SolveResult r = inner(family(to), config, &warm);
    if (r.converged()) {
      warm = r.state;
      reached = to;
      return r;
    }
    if (depth >= config.homotopy_bisections) {
      throw NoConvergence("homotopy stalled between factors " + std::to_string(reached) +
                          " and " + std::to_string(to));
    }
    advance(std::sqrt(reached * to), depth + 1);
    return advance(to, depth + 1);
  };

  BLENS_LOG_INFO("homotopy: anchored at factor ", anchor, ", tracing to ", target_factor);
  for (int step = 1; step <= config.homotopy_steps; ++step) {
    const double t =
        step == config.homotopy_steps
            ? target_factor
            : anchor * std::pow(target_factor / anchor,
                                static_cast<double>(step) / config.homotopy_steps);
    result = advance(t, 0);
  }
  return result;
}

SolveResult solve_dense(const CircuitAssembly& assembly, const SolverConfig& config,
                        const StateVector* warm_start) {
  SolveResult direct = minimize_compensation(assembly, nullptr, config, warm_start);
  if (direct.converged()) return direct;

  BLENS_LOG_INFO("dense solve did not converge directly (case '", assembly.network().name,
                 "'); falling back to homotopy");
  // assemble() applies the relative factor to the stored (already stressed)
  // network, so t = 1 reproduces this assembly exactly.
  const HomotopyFamily family = [&assembly](double t) {
    return CircuitAssembly::assemble(assembly.network(), t);
  };
  return homotopy_solve(family, 1.0, config);
}

}  // namespace blens
