#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "blens/sparse_optimizer.hpp"

using namespace blens;

namespace {

std::string data_path(const char* name) {
  return std::string(BLENS_DATA_DIR) + "/" + name;
}

NetworkCase load_fixture(const char* name) { return load_matpower_case(data_path(name)); }

SlackVector slack_from_magnitudes(const std::vector<double>& mags) {
  SlackVector n = SlackVector::zero(static_cast<int>(mags.size()));
  for (size_t k = 0; k < mags.size(); ++k) n.n_re(static_cast<int>(k)) = mags[k];
  return n;
}

}  // namespace

TEST_CASE("uniform_high starts fully suppressing") {
  SolverConfig config;
  config.c_high = 8.0;
  config.c_low = 0.2;
  const SparsityCoefficients sc = SparsityCoefficients::uniform_high(5, config);
  CHECK(sc.size() == 5);
  CHECK(sc.c_high == 8.0);
  CHECK(sc.c_low == 0.2);
  CHECK(sc.pin_value() == doctest::Approx(0.1));
  for (int k = 0; k < 5; ++k) {
    CHECK(sc.c[k] == 8.0);
    CHECK(sc.pinned[k] == 0);
  }
}

TEST_CASE("coefficient toggling follows the relative threshold rule") {
  SolverConfig config;
  SparsityCoefficients sc = SparsityCoefficients::uniform_high(3, config);

  SUBCASE("only the dominant location is permitted") {
    const SparsityCoefficients out =
        update_coefficients(slack_from_magnitudes({1.0, 0.05, 0.0}), sc, 0.1, 1e-6);
    CHECK(out.c[0] == sc.c_low);
    CHECK(out.c[1] == sc.c_high);
    CHECK(out.c[2] == sc.c_high);
  }
  SUBCASE("every location above the threshold is permitted") {
    const SparsityCoefficients out =
        update_coefficients(slack_from_magnitudes({1.0, 0.2, 0.0}), sc, 0.1, 1e-6);
    CHECK(out.c[0] == sc.c_low);
    CHECK(out.c[1] == sc.c_low);
    CHECK(out.c[2] == sc.c_high);
  }
  SUBCASE("the threshold comparison is inclusive") {
    const SparsityCoefficients out =
        update_coefficients(slack_from_magnitudes({1.0, 0.1, 0.0}), sc, 0.1, 1e-6);
    CHECK(out.c[1] == sc.c_low);
  }
  SUBCASE("near-zero magnitudes stay suppressed even above the relative bar") {
    const SparsityCoefficients out =
        update_coefficients(slack_from_magnitudes({5e-6, 8e-7, 0.0}), sc, 0.1, 1e-6);
    CHECK(out.c[0] == sc.c_low);
    CHECK(out.c[1] == sc.c_high);  // above 0.1 * max but not above epsilon
  }
  SUBCASE("vanished compensation raises AllZeroSlack") {
    CHECK_THROWS_AS(update_coefficients(slack_from_magnitudes({0.0, 0.0, 0.0}), sc, 0.1, 1e-6),
                    AllZeroSlack);
    CHECK_THROWS_AS(update_coefficients(slack_from_magnitudes({1e-9, 0.0, 0.0}), sc, 0.1, 1e-6),
                    AllZeroSlack);
  }
  SUBCASE("pinned locations never leave the permitted level") {
    sc.pinned[1] = 1;
    const SparsityCoefficients out =
        update_coefficients(slack_from_magnitudes({1.0, 0.0, 0.0}), sc, 0.1, 1e-6);
    CHECK(out.c[1] == doctest::Approx(sc.pin_value()));
    CHECK(out.pinned == sc.pinned);
  }
  SUBCASE("magnitudes couple the real and imaginary parts") {
    SlackVector n = SlackVector::zero(3);
    n.n_re(0) = 0.6;
    n.n_im(0) = 0.8;
    n.n_re(1) = 0.09;
    const SparsityCoefficients out = update_coefficients(n, sc, 0.1, 1e-6);
    CHECK(out.c[0] == sc.c_low);   // |n_0| = 1.0
    CHECK(out.c[1] == sc.c_high);  // 0.09 < 0.1 * 1.0
  }
  SUBCASE("dimension mismatch is rejected") {
    CHECK_THROWS_AS(update_coefficients(slack_from_magnitudes({1.0}), sc, 0.1, 1e-6), Error);
  }
}

TEST_CASE("support extraction is strict and reports external bus ids") {
  const CircuitAssembly a = CircuitAssembly::assemble(load_fixture("toy4.m"));
  SlackVector n = SlackVector::zero(a.n_compensable());
  n.n_re(0) = 2e-6;   // bus 2
  n.n_im(1) = 1e-6;   // bus 3, exactly at the threshold
  n.n_re(2) = -0.25;  // bus 4

  const VulnerabilitySet s = extract_support(n, 1e-6, a);
  CHECK(s.size() == 2);
  CHECK(s.bus_ids == std::vector<int>{2, 4});
  CHECK(s.contains(2));
  CHECK(!s.contains(3));
  CHECK(s.magnitudes.at(4) == doctest::Approx(0.25));

  CHECK_THROWS_AS(extract_support(n, 0.0, a), Error);
}

TEST_CASE("feasible scenario diagnoses an empty support") {
  const CircuitAssembly a = CircuitAssembly::assemble(load_fixture("case30.m"), 1.0);
  SolverConfig config;
  const SparseSolution sol = solve_sparse(a, config);
  CHECK(sol.result.converged());
  CHECK(sol.support.size() == 0);
  CHECK(sol.toggle_rounds == 0);
  CHECK(sol.support_sizes == std::vector<int>{0});
}

TEST_CASE("weighted inner solve pays for its compensation") {
  const CircuitAssembly a = CircuitAssembly::assemble(load_fixture("case30.m"), 3.8);
  SolverConfig config;
  const SolveResult dense = solve_dense(a, config);
  REQUIRE(dense.converged());

  const SparsityCoefficients uniform =
      SparsityCoefficients::uniform_high(a.n_compensable(), config);
  const SolveResult seeded = solve_sparse_inner(a, uniform, config, &dense.state);
  CHECK(seeded.converged());
  CHECK(seeded.objective == doctest::Approx(1.630363).epsilon(1e-4));
  CHECK(seeded.objective > dense.objective);
}

TEST_CASE("collapsed benchmark concentrates onto the known vulnerable buses") {
  const CircuitAssembly a = CircuitAssembly::assemble(load_fixture("case30.m"), 3.8);

  SUBCASE("default threshold keeps two locations") {
    SolverConfig config;
    const SparseSolution sol = solve_sparse(a, config);
    CHECK(sol.result.converged());
    CHECK(sol.support.bus_ids == std::vector<int>{22, 23});
    CHECK(sol.support.magnitudes.at(22) == doctest::Approx(0.13521).epsilon(2e-3));
    CHECK(sol.support.magnitudes.at(23) == doctest::Approx(0.02687).epsilon(2e-2));
    CHECK(sol.result.compensation.total_magnitude() == doctest::Approx(0.16209).epsilon(1e-3));
    CHECK(static_cast<int>(sol.support_sizes.size()) == sol.toggle_rounds + 1);
    CHECK(sol.toggle_rounds >= 1);
  }
  SUBCASE("an aggressive threshold narrows the support to one bus") {
    SolverConfig config;
    config.gamma = 0.9;
    const SparseSolution sol = solve_sparse(a, config);
    CHECK(sol.result.converged());
    CHECK(sol.support.bus_ids == std::vector<int>{22});
    CHECK(sol.support.magnitudes.at(22) == doctest::Approx(0.16196).epsilon(1e-3));
  }
}

TEST_CASE("prior pins steer the support to a dominated location") {
  const CircuitAssembly a = CircuitAssembly::assemble(load_fixture("case30.m"), 3.8);
  SolverConfig config;
  config.gamma = 0.9;

  SparsityCoefficients prior = SparsityCoefficients::uniform_high(a.n_compensable(), config);
  const int slot19 = a.compensable_slot_of(19);
  REQUIRE(slot19 >= 0);
  prior.c[slot19] = config.c_low;

  const SparseSolution sol = solve_sparse(a, config, &prior);
  CHECK(sol.result.converged());
  CHECK(sol.support.bus_ids == std::vector<int>{19});
  CHECK(sol.support.magnitudes.at(19) == doctest::Approx(0.17063).epsilon(1e-3));
  CHECK(sol.coefficients.pinned[slot19] == 1);
  CHECK(sol.coefficients.c[slot19] == doctest::Approx(prior.pin_value()));
}

TEST_CASE("prior dimension mismatch is rejected") {
  const CircuitAssembly a = CircuitAssembly::assemble(load_fixture("toy4.m"));
  SolverConfig config;
  SparsityCoefficients prior = SparsityCoefficients::uniform_high(2, config);
  CHECK_THROWS_AS(solve_sparse(a, config, &prior), Error);
}
