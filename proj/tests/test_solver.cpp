#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "blens/solver.hpp"

using namespace blens;

namespace {

std::string data_path(const char* name) {
  return std::string(BLENS_DATA_DIR) + "/" + name;
}

NetworkCase load_fixture(const char* name) { return load_matpower_case(data_path(name)); }

/// Sparse 1x1 matrix holding a single value.
SparseMatrix scalar_matrix(double v) {
  SparseMatrix h(1, 1);
  h.insert(0, 0) = v;
  h.makeCompressed();
  return h;
}

}  // namespace

TEST_CASE("config validation guards every documented domain") {
  SolverConfig base;
  CHECK_NOTHROW(validate_config(base));

  const auto rejects = [&](auto&& mutate) {
    SolverConfig c = base;
    mutate(c);
    CHECK_THROWS_AS(validate_config(c), Error);
  };
  rejects([](SolverConfig& c) { c.tol_residual = 1e-12; });
  rejects([](SolverConfig& c) { c.max_iters = 0; });
  rejects([](SolverConfig& c) { c.step_limit_v = 0.0; });
  rejects([](SolverConfig& c) { c.homotopy_steps = 0; });
  rejects([](SolverConfig& c) { c.smoothing_delta = 0.0; });
  rejects([](SolverConfig& c) { c.epsilon_support = 0.0; });
  rejects([](SolverConfig& c) { c.gamma = 0.0; });
  rejects([](SolverConfig& c) { c.gamma = 1.0; });
  rejects([](SolverConfig& c) { c.c_high = 0.0; });
  rejects([](SolverConfig& c) { c.c_low = 0.0; });
  rejects([](SolverConfig& c) { c.max_toggle_rounds = 0; });
  rejects([](SolverConfig& c) { c.armijo_c = 0.0; });
  rejects([](SolverConfig& c) { c.max_backtracks = 0; });
  rejects([](SolverConfig& c) { c.lambda_init = 0.0; });
  rejects([](SolverConfig& c) { c.lambda_max = c.lambda_init / 10.0; });
  rejects([](SolverConfig& c) { c.homotopy_anchor = 0.0; });
  rejects([](SolverConfig& c) { c.homotopy_bisections = -1; });
}

TEST_CASE("newton step on a scalar quadratic") {
  SolverConfig config;
  const auto objective = [](const Eigen::VectorXd& u) { return 0.5 * (u[0] - 5.0) * (u[0] - 5.0); };
  const Eigen::VectorXd u0 = Eigen::VectorXd::Zero(1);
  const Eigen::VectorXd grad = Eigen::VectorXd::Constant(1, -5.0);
  const SparseMatrix h = scalar_matrix(1.0);

  SUBCASE("free component takes the full step") {
    double lambda = config.lambda_init;
    const StepOutcome out =
        newton_step(h, grad, objective, u0, objective(u0), {0}, config, lambda);
    CHECK(out.accepted);
    CHECK(out.backtracks == 0);
    CHECK(out.u[0] == doctest::Approx(5.0).epsilon(1e-3));
    CHECK(out.objective < 1e-5);
  }
  SUBCASE("voltage-like component is clamped") {
    double lambda = config.lambda_init;
    const StepOutcome out =
        newton_step(h, grad, objective, u0, objective(u0), {1}, config, lambda);
    CHECK(out.accepted);
    CHECK(out.u[0] == doctest::Approx(config.step_limit_v));
  }
  SUBCASE("zero curvature without damping is singular") {
    SolverConfig undamped = config;
    undamped.levenberg_damping = false;
    double lambda = undamped.lambda_init;
    CHECK_THROWS_AS(newton_step(scalar_matrix(0.0), grad, objective, u0, objective(u0), {0},
                                undamped, lambda),
                    SingularSystem);
  }
}

TEST_CASE("power flow solves the feasible benchmark case") {
  const CircuitAssembly a = CircuitAssembly::assemble(load_fixture("case30.m"));
  SolverConfig config;
  const SolveResult r = solve_power_flow(a, config);
  CHECK(r.converged());
  CHECK(r.residual_norm <= config.tol_residual);
  CHECK(r.iterations < 20);
  CHECK(r.compensation.max_magnitude() == 0.0);
  for (int i = 0; i < a.n_bus(); ++i) {
    CHECK(r.state.v_mag(i) > 0.9);
    CHECK(r.state.v_mag(i) < 1.1);
  }
}

TEST_CASE("power flow flags the collapsed fixtures") {
  SolverConfig config;
  const SolveResult toy4 = solve_power_flow(CircuitAssembly::assemble(load_fixture("toy4.m")), config);
  CHECK(!toy4.converged());
  const SolveResult toy2 = solve_power_flow(CircuitAssembly::assemble(load_fixture("toy2.m")), config);
  CHECK(!toy2.converged());
}

TEST_CASE("replaying a dense compensation restores feasibility") {
  const CircuitAssembly a = CircuitAssembly::assemble(load_fixture("toy4.m"));
  SolverConfig config;
  const SolveResult dense = solve_dense(a, config);
  REQUIRE(dense.converged());

  const SolveResult replay = solve_power_flow(a, config, nullptr, &dense.compensation);
  CHECK(replay.converged());
  for (int i = 0; i < a.n_bus(); ++i) {
    CHECK(replay.state.e(i) == doctest::Approx(dense.state.e(i)).epsilon(1e-5));
    CHECK(replay.state.f(i) == doctest::Approx(dense.state.f(i)).epsilon(1e-5));
  }
}

TEST_CASE("dense compensation magnitudes are pinned on the stressed benchmark") {
  const CircuitAssembly a = CircuitAssembly::assemble(load_fixture("case30.m"), 3.8);
  SolverConfig config;
  const SolveResult r = solve_dense(a, config);
  CHECK(r.converged());
  CHECK(r.objective == doctest::Approx(7.23992023e-04).epsilon(1e-5));
  CHECK(r.objective == doctest::Approx(0.5 * r.compensation.data.squaredNorm()).epsilon(1e-9));
  CHECK(r.residual_norm <= config.tol_residual);

  // The dense objective runs a single stage, so the trace holds the start
  // point plus one strictly descending entry per accepted step.
  REQUIRE(static_cast<int>(r.objective_trace.size()) == r.iterations + 1);
  for (size_t i = 1; i < r.objective_trace.size(); ++i) {
    CHECK(r.objective_trace[i] < r.objective_trace[i - 1]);
  }
}

TEST_CASE("deeply collapsed two-bus case converges fast to the known optimum") {
  // The load here sits far past the line's transfer limit, so the optimal
  // residual is large and any solver relying on the Gauss-Newton model alone
  // crawls. This pins both the optimum and the fast convergence.
  const CircuitAssembly a = CircuitAssembly::assemble(load_fixture("toy2.m"));
  SolverConfig config;
  const SolveResult r = solve_dense(a, config);
  CHECK(r.converged());
  CHECK(r.objective == doctest::Approx(9.77215086e-01).epsilon(1e-6));
  CHECK(r.iterations <= 50);
}

TEST_CASE("homotopy continuation reaches the direct optimum") {
  const NetworkCase nc = load_fixture("case30.m");
  SolverConfig config;
  const HomotopyFamily family = [&](double f) { return CircuitAssembly::assemble(nc, f); };
  const SolveResult viaHomotopy = homotopy_solve(family, 3.8, config);
  CHECK(viaHomotopy.converged());
  CHECK(viaHomotopy.objective == doctest::Approx(7.23992023e-04).epsilon(1e-5));
}

TEST_CASE("homotopy failure modes") {
  const NetworkCase nc = load_fixture("toy4.m");
  SolverConfig config;
  config.homotopy_bisections = 1;
  const HomotopyFamily family = [&](double f) { return CircuitAssembly::assemble(nc, f); };

  CHECK_THROWS_AS(homotopy_solve(family, 0.0, config), Error);
  CHECK_THROWS_AS(homotopy_solve(family, -2.0, config), Error);

  const HomotopyInner failing = [](const CircuitAssembly&, const SolverConfig&,
                                   const StateVector*) {
    SolveResult r;
    r.status = SolveStatus::Diverged;
    return r;
  };
  CHECK_THROWS_AS(homotopy_solve(family, 1.0, config, failing), NoConvergence);
}

TEST_CASE("input size mismatches are rejected") {
  const CircuitAssembly a = CircuitAssembly::assemble(load_fixture("toy4.m"));
  SolverConfig config;

  StateVector bad;
  bad.n_bus = 2;
  bad.n_pv = 0;
  bad.data = Eigen::VectorXd::Zero(4);
  CHECK_THROWS_AS(solve_power_flow(a, config, &bad), Error);
  CHECK_THROWS_AS(minimize_compensation(a, nullptr, config, &bad), Error);

  SlackVector n = SlackVector::zero(1);
  CHECK_THROWS_AS(solve_power_flow(a, config, nullptr, &n), Error);

  const Eigen::VectorXd coeffs = Eigen::VectorXd::Ones(2);
  CHECK_THROWS_AS(minimize_compensation(a, &coeffs, config), Error);
}

TEST_CASE("invalid config is rejected before solving") {
  const CircuitAssembly a = CircuitAssembly::assemble(load_fixture("toy4.m"));
  SolverConfig config;
  config.tol_residual = 0.0;
  CHECK_THROWS_AS(solve_power_flow(a, config), Error);
  CHECK_THROWS_AS(solve_dense(a, config), Error);
}
