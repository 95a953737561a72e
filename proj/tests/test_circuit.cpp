#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <random>

#include "blens/circuit.hpp"

using namespace blens;

namespace {

std::string data_path(const char* name) {
  return std::string(BLENS_DATA_DIR) + "/" + name;
}

NetworkCase load_fixture(const char* name) { return load_matpower_case(data_path(name)); }

StateVector random_state(const CircuitAssembly& a, unsigned seed) {
  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> volt(0.6, 1.2);
  std::uniform_real_distribution<double> angle(-0.5, 0.5);
  std::uniform_real_distribution<double> react(-1.0, 1.0);
  StateVector x = a.flat_state();
  for (int i = 0; i < a.n_bus(); ++i) {
    const double v = volt(rng);
    const double th = angle(rng);
    x.e(i) = v * std::cos(th);
    x.f(i) = v * std::sin(th);
  }
  for (int k = 0; k < a.n_pv(); ++k) x.q(k) = react(rng);
  return x;
}

}  // namespace

TEST_CASE("topology dimensions and compensable numbering") {
  const CircuitAssembly toy4 = CircuitAssembly::assemble(load_fixture("toy4.m"));
  CHECK(toy4.n_bus() == 4);
  CHECK(toy4.n_pv() == 0);
  CHECK(toy4.n_compensable() == 3);
  CHECK(toy4.state_size() == 8);
  CHECK(toy4.residual_size() == 8);
  CHECK(toy4.topology().kcl_rows() == 6);
  CHECK(toy4.compensable_bus_id(0) == 2);
  CHECK(toy4.compensable_bus_id(1) == 3);
  CHECK(toy4.compensable_bus_id(2) == 4);
  CHECK(toy4.compensable_slot_of(1) == -1);
  CHECK(toy4.compensable_slot_of(3) == 1);

  const CircuitAssembly case30 = CircuitAssembly::assemble(load_fixture("case30.m"));
  CHECK(case30.n_bus() == 30);
  CHECK(case30.n_pv() == 5);
  CHECK(case30.n_compensable() == 29);
  CHECK(case30.state_size() == 65);
  CHECK(case30.residual_size() == 65);
}

TEST_CASE("flat state hits the voltage setpoints") {
  const NetworkCase nc = load_fixture("case30.m");
  const CircuitAssembly a = CircuitAssembly::assemble(nc);
  const StateVector x = a.flat_state();
  for (int i = 0; i < a.n_bus(); ++i) {
    const Bus& b = nc.buses[i];
    if (b.kind == BusKind::PQ) {
      CHECK(x.e(i) == 1.0);
    } else {
      CHECK(x.e(i) == doctest::Approx(b.v_set));
    }
    CHECK(x.f(i) == 0.0);
  }
  for (int k = 0; k < a.n_pv(); ++k) CHECK(x.q(k) == 0.0);
}

TEST_CASE("compensation enters the KCL rows additively") {
  const CircuitAssembly a = CircuitAssembly::assemble(load_fixture("case30.m"), 2.5);
  const StateVector x = random_state(a, 17);

  SlackVector n = SlackVector::zero(a.n_compensable());
  std::mt19937 rng(99);
  std::uniform_real_distribution<double> dist(-2.0, 2.0);
  for (int k = 0; k < n.locations(); ++k) {
    n.n_re(k) = dist(rng);
    n.n_im(k) = dist(rng);
  }

  const Eigen::VectorXd base = a.residual(x);
  const Eigen::VectorXd with = a.residual(x, &n);
  for (int k = 0; k < a.n_compensable(); ++k) {
    CHECK(with[2 * k] - base[2 * k] == doctest::Approx(n.n_re(k)).epsilon(1e-12));
    CHECK(with[2 * k + 1] - base[2 * k + 1] == doctest::Approx(n.n_im(k)).epsilon(1e-12));
  }
  for (int r = a.topology().kcl_rows(); r < a.residual_size(); ++r) {
    CHECK(with[r] == base[r]);
  }
}

TEST_CASE("assembling at a factor matches scaling the case first") {
  const NetworkCase nc = load_fixture("toy4.m");
  const CircuitAssembly direct = CircuitAssembly::assemble(nc, 2.0);
  const CircuitAssembly prescaled = CircuitAssembly::assemble(scale_loads(nc, 2.0), 1.0);
  const StateVector x = random_state(direct, 5);
  const Eigen::VectorXd r1 = direct.residual(x);
  const Eigen::VectorXd r2 = prescaled.residual(x);
  REQUIRE(r1.size() == r2.size());
  for (int i = 0; i < r1.size(); ++i) CHECK(r1[i] == r2[i]);
  CHECK(direct.load_factor() == 2.0);
}

TEST_CASE("scenario assembly keeps the stress factor as metadata") {
  const NetworkCase nc = load_fixture("toy4.m");
  const ScenarioSequence seq = build_scenario_sequence(nc, {1.3});
  const CircuitAssembly a = CircuitAssembly::assemble(seq.scenarios[0]);
  CHECK(a.load_factor() == 1.3);
  const CircuitAssembly direct = CircuitAssembly::assemble(nc, 1.3);
  const StateVector x = random_state(a, 11);
  CHECK((a.residual(x) - direct.residual(x)).norm() == 0.0);
}

TEST_CASE("PV magnitude rows read e^2 + f^2 - v_set^2") {
  const NetworkCase nc = load_fixture("case30.m");
  const CircuitAssembly a = CircuitAssembly::assemble(nc);
  StateVector x = random_state(a, 23);
  const Eigen::VectorXd r = a.residual(x);

  const CircuitTopology& topo = a.topology();
  for (int s = 0; s < topo.n_pv; ++s) {
    const int bus = topo.pv_buses[s];
    const double expected =
        x.e(bus) * x.e(bus) + x.f(bus) * x.f(bus) - topo.v_set[bus] * topo.v_set[bus];
    CHECK(r[topo.kcl_rows() + s] == doctest::Approx(expected).epsilon(1e-12));
  }

  const int slack = topo.slack;
  CHECK(r[topo.kcl_rows() + topo.n_pv] == doctest::Approx(x.e(slack) - topo.slack_e));
  CHECK(r[topo.kcl_rows() + topo.n_pv + 1] == doctest::Approx(x.f(slack) - topo.slack_f));
}

TEST_CASE("zero impedance branch is rejected at assembly") {
  NetworkCase nc = load_fixture("toy4.m");
  nc.branches[1].r = 0.0;
  nc.branches[1].x = 0.0;
  CHECK_THROWS_AS(CircuitAssembly::assemble(nc), SingularAssembly);
}

TEST_CASE("collapsed voltages poison the Jacobian but not the residual") {
  const CircuitAssembly a = CircuitAssembly::assemble(load_fixture("toy4.m"));
  StateVector x = a.flat_state();
  x.e(2) = 1e-9;
  x.f(2) = 0.0;
  const Eigen::VectorXd r = a.residual(x);
  CHECK(r.allFinite());
  CHECK_THROWS_AS((void)a.jacobian(x), VoltageCollapsePoint);
}
