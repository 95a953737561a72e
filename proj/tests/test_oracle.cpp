#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "blens/oracle.hpp"

using namespace blens;

namespace {

std::string data_path(const char* name) {
  return std::string(BLENS_DATA_DIR) + "/" + name;
}

NetworkCase load_fixture(const char* name) { return load_matpower_case(data_path(name)); }

/// Two independently overloaded pockets hanging off the slack: no single
/// location can patch both, so the minimum support has cardinality two.
const char* kTwoPockets = R"(function mpc = pockets
mpc.version = '2';
mpc.baseMVA = 100;
mpc.bus = [
	1	3	0	0	0	0	1	1	0	135	1	1.05	0.95;
	2	1	200	60	0	0	1	1	0	135	1	1.05	0.95;
	3	1	200	60	0	0	1	1	0	135	1	1.05	0.95;
];
mpc.gen = [
	1	0	0	300	-300	1	100	1	400	0	0	0	0	0	0	0	0	0	0	0	0;
];
mpc.branch = [
	1	2	0.05	0.5	0	250	250	250	0	0	1	-360	360;
	1	3	0.05	0.5	0	250	250	250	0	0	1	-360	360;
];
)";

}  // namespace

TEST_CASE("restricted checks on the stressed benchmark") {
  const NetworkCase nc = load_fixture("case30.m");
  SolverConfig config;

  SUBCASE("factor 3.8") {
    const CircuitAssembly a = CircuitAssembly::assemble(nc, 3.8);

    const RestrictedCheck empty = restricted_feasibility_check(a, {}, config);
    CHECK(!empty.feasible);

    const RestrictedCheck at22 = restricted_feasibility_check(a, {22}, config);
    CHECK(at22.feasible);
    CHECK(at22.masked_residual < 1e-6);
    CHECK(at22.support_norm == doctest::Approx(0.16196).epsilon(1e-3));

    const RestrictedCheck at19 = restricted_feasibility_check(a, {19}, config);
    CHECK(at19.feasible);
    CHECK(at19.support_norm == doctest::Approx(0.17063).epsilon(1e-3));
  }
  SUBCASE("factor 4.7") {
    const CircuitAssembly a = CircuitAssembly::assemble(nc, 4.7);

    const RestrictedCheck at19 = restricted_feasibility_check(a, {19}, config);
    CHECK(at19.feasible);
    CHECK(at19.support_norm == doctest::Approx(2.05810).epsilon(1e-3));

    const RestrictedCheck at22 = restricted_feasibility_check(a, {22}, config);
    CHECK(at22.feasible);
    CHECK(at22.support_norm == doctest::Approx(2.28142).epsilon(1e-3));

    for (int bus : {13, 27, 29, 30}) {
      const RestrictedCheck rc = restricted_feasibility_check(a, {bus}, config);
      CHECK(!rc.feasible);
    }
  }
}

TEST_CASE("restricted check rejects non-compensable locations") {
  const CircuitAssembly a = CircuitAssembly::assemble(load_fixture("toy4.m"));
  SolverConfig config;
  CHECK_THROWS_AS(restricted_feasibility_check(a, {1}, config), Error);   // slack
  CHECK_THROWS_AS(restricted_feasibility_check(a, {99}, config), Error);  // unknown
}

TEST_CASE("witness compensation replays into a converged power flow") {
  const CircuitAssembly a = CircuitAssembly::assemble(load_fixture("toy4.m"));
  SolverConfig config;
  const RestrictedCheck rc = restricted_feasibility_check(a, {4}, config);
  REQUIRE(rc.feasible);
  const SolveResult replay = solve_power_flow(a, config, nullptr, &rc.compensation);
  CHECK(replay.converged());
}

TEST_CASE("exhaustive search on the radial fixture") {
  const CircuitAssembly a = CircuitAssembly::assemble(load_fixture("toy4.m"));
  SolverConfig config;
  const OracleResult oracle = min_support_bruteforce(a, config, 3);

  CHECK(oracle.min_cardinality == 1);
  REQUIRE(oracle.witnesses.size() == 3);
  CHECK(oracle.witnesses[0].bus_ids == std::vector<int>{2});
  CHECK(oracle.witnesses[1].bus_ids == std::vector<int>{3});
  CHECK(oracle.witnesses[2].bus_ids == std::vector<int>{4});
  CHECK(oracle.witness_norms[0] == doctest::Approx(3.4999).epsilon(1e-3));
  CHECK(oracle.witness_norms[1] == doctest::Approx(1.5690).epsilon(1e-3));
  CHECK(oracle.witness_norms[2] == doctest::Approx(0.4988).epsilon(1e-3));
}

TEST_CASE("exhaustive search on the two-bus fixture") {
  const CircuitAssembly a = CircuitAssembly::assemble(load_fixture("toy2.m"));
  SolverConfig config;
  const OracleResult oracle = min_support_bruteforce(a, config, 2);
  CHECK(oracle.min_cardinality == 1);
  REQUIRE(oracle.witnesses.size() == 1);
  CHECK(oracle.witnesses[0].bus_ids == std::vector<int>{2});
  CHECK(oracle.witness_norms[0] == doctest::Approx(1.398009360358738).epsilon(1e-6));
}

TEST_CASE("two pockets force a two-bus support") {
  const CircuitAssembly a = CircuitAssembly::assemble(parse_matpower_case(kTwoPockets, "pockets"));
  SolverConfig config;

  CHECK_THROWS_AS(min_support_bruteforce(a, config, 1), CardinalityExceeded);

  const OracleResult oracle = min_support_bruteforce(a, config, 2);
  CHECK(oracle.min_cardinality == 2);
  REQUIRE(oracle.witnesses.size() == 1);
  CHECK(oracle.witnesses[0].bus_ids == std::vector<int>{2, 3});
}

TEST_CASE("enumeration guards stay closed") {
  SolverConfig config;
  const CircuitAssembly big = CircuitAssembly::assemble(load_fixture("case30.m"), 3.8);
  CHECK_THROWS_AS(min_support_bruteforce(big, config, 2), Error);

  const CircuitAssembly small = CircuitAssembly::assemble(load_fixture("toy4.m"));
  CHECK_THROWS_AS(min_support_bruteforce(small, config, 5), Error);
  CHECK_THROWS_AS(min_support_bruteforce(small, config, -1), Error);
  CHECK_THROWS_AS(min_support_bruteforce(small, config, 0), CardinalityExceeded);
}
