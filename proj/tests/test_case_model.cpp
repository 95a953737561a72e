#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "blens/case_model.hpp"

using namespace blens;

namespace {

std::string data_path(const char* name) {
  return std::string(BLENS_DATA_DIR) + "/" + name;
}

/// Minimal two bus case text used as a template for malformed variants.
const char* kTinyCase = R"(function mpc = tiny
mpc.version = '2';
mpc.baseMVA = 100;
mpc.bus = [
	1	3	0	0	0	0	1	1	0	135	1	1.05	0.95;
	2	1	50	10	0	0	1	1	0	135	1	1.05	0.95;
];
mpc.gen = [
	1	0	0	300	-300	1	100	1	400	0	0	0	0	0	0	0	0	0	0	0	0;
];
mpc.branch = [
	1	2	0.02	0.1	0	250	250	250	0	0	1	-360	360;
];
)";

}  // namespace

TEST_CASE("parser reads the bundled fixtures") {
  const NetworkCase toy4 = load_matpower_case(data_path("toy4.m"));
  CHECK(toy4.name == "toy4");
  CHECK(toy4.base_mva == 100.0);
  REQUIRE(toy4.buses.size() == 4);
  REQUIRE(toy4.branches.size() == 3);
  REQUIRE(toy4.generators.size() == 1);
  CHECK(toy4.buses[0].kind == BusKind::Slack);
  CHECK(toy4.buses[3].kind == BusKind::PQ);
  CHECK(toy4.buses[3].p_load == doctest::Approx(0.9));   // 90 MW on a 100 MVA base
  CHECK(toy4.buses[3].q_load == doctest::Approx(0.3));
  CHECK(toy4.slack_index() == 0);
  CHECK(toy4.bus_index(4) == 3);
  CHECK(toy4.has_bus(4));
  CHECK(!toy4.has_bus(5));
  CHECK_THROWS_AS((void)toy4.bus_index(5), MalformedCase);

  const NetworkCase case30 = load_matpower_case(data_path("case30.m"));
  CHECK(case30.buses.size() == 30);
  int slacks = 0;
  int pvs = 0;
  for (const Bus& b : case30.buses) {
    if (b.kind == BusKind::Slack) ++slacks;
    if (b.kind == BusKind::PV) ++pvs;
  }
  CHECK(slacks == 1);
  CHECK(pvs == 5);
}

TEST_CASE("parser rejects malformed and unusable input") {
  CHECK_THROWS_AS(parse_matpower_case("not a case at all"), MalformedCase);

  std::string text = kTinyCase;
  SUBCASE("missing baseMVA") {
    text.replace(text.find("mpc.baseMVA = 100;"), 18, "");
    CHECK_THROWS_AS(parse_matpower_case(text), MalformedCase);
  }
  SUBCASE("short bus row") {
    text.replace(text.find("	2	1	50	10	0	0	1	1	0	135	1	1.05	0.95;"),
                 std::string("	2	1	50	10	0	0	1	1	0	135	1	1.05	0.95;").size(),
                 "	2	1	50;");
    CHECK_THROWS_AS(parse_matpower_case(text), MalformedCase);
  }
  SUBCASE("duplicate bus id") {
    text.replace(text.find("	2	1	50"), 5, "	1	1	50");
    CHECK_THROWS_AS(parse_matpower_case(text), MalformedCase);
  }
  SUBCASE("branch references unknown bus") {
    text.replace(text.find("	1	2	0.02"), 5, "	1	7	0.02");
    CHECK_THROWS_AS(parse_matpower_case(text), MalformedCase);
  }
  SUBCASE("self loop branch") {
    text.replace(text.find("	1	2	0.02"), 5, "	2	2	0.02");
    CHECK_THROWS_AS(parse_matpower_case(text), MalformedCase);
  }
  SUBCASE("no slack bus") {
    text.replace(text.find("	1	3	0"), 4, "	1	1	0");
    CHECK_THROWS_AS(parse_matpower_case(text), InvalidTopology);
  }
  SUBCASE("two slack buses") {
    text.replace(text.find("	2	1	50"), 4, "	2	3	50");
    CHECK_THROWS_AS(parse_matpower_case(text), InvalidTopology);
  }
  SUBCASE("generator on unknown bus") {
    text.replace(text.find("	1	0	0	300"), 2, "	9");
    CHECK_THROWS_AS(parse_matpower_case(text), MalformedCase);
  }
  SUBCASE("disconnected bus") {
    const std::string row = "	1	2	0.02	0.1	0	250	250	250	0	0	1	-360	360;\n";
    text.erase(text.find(row), row.size());
    CHECK_THROWS_AS(parse_matpower_case(text), InvalidTopology);
  }
}

TEST_CASE("writer output round trips through the parser") {
  const NetworkCase toy4 = load_matpower_case(data_path("toy4.m"));
  const NetworkCase again = parse_matpower_case(write_matpower_case(toy4), toy4.name);
  CHECK(again == toy4);

  const NetworkCase case30 = load_matpower_case(data_path("case30.m"));
  const NetworkCase case30_again = parse_matpower_case(write_matpower_case(case30), case30.name);
  CHECK(case30_again == case30);
}

TEST_CASE("load scaling semantics") {
  const NetworkCase case30 = load_matpower_case(data_path("case30.m"));

  CHECK(scale_loads(case30, 1.0) == case30);

  const NetworkCase doubled = scale_loads(case30, 2.0);
  const NetworkCase back = scale_loads(doubled, 0.5);
  CHECK(back == case30);

  for (size_t i = 0; i < case30.buses.size(); ++i) {
    CHECK(doubled.buses[i].p_load == doctest::Approx(2.0 * case30.buses[i].p_load));
    CHECK(doubled.buses[i].q_load == doctest::Approx(2.0 * case30.buses[i].q_load));
    CHECK(doubled.buses[i].shunt_g == case30.buses[i].shunt_g);  // shunts never scale
    CHECK(doubled.buses[i].shunt_b == case30.buses[i].shunt_b);
  }
  for (size_t g = 0; g < case30.generators.size(); ++g) {
    CHECK(doubled.generators[g].p_set == case30.generators[g].p_set);
  }

  ScalingOptions with_gen;
  with_gen.scale_generation = true;
  const NetworkCase gen_doubled = scale_loads(case30, 2.0, with_gen);
  for (size_t g = 0; g < case30.generators.size(); ++g) {
    CHECK(gen_doubled.generators[g].p_set == doctest::Approx(2.0 * case30.generators[g].p_set));
    CHECK(gen_doubled.generators[g].q_set == doctest::Approx(2.0 * case30.generators[g].q_set));
  }

  CHECK_THROWS_AS(scale_loads(case30, 0.0), MalformedCase);
  CHECK_THROWS_AS(scale_loads(case30, -1.0), MalformedCase);
}

TEST_CASE("per bus scaling weights") {
  const NetworkCase toy4 = load_matpower_case(data_path("toy4.m"));

  ScalingOptions opt;
  opt.bus_weights = {{4, 2.0}};
  const NetworkCase scaled = scale_loads(toy4, 1.5, opt);
  CHECK(scaled.buses[toy4.bus_index(4)].p_load == doctest::Approx(0.9 * 1.5 * 2.0));
  CHECK(scaled.buses[toy4.bus_index(2)].p_load == doctest::Approx(0.1 * 1.5));

  ScalingOptions unknown;
  unknown.bus_weights = {{9, 1.0}};
  CHECK_THROWS_AS(scale_loads(toy4, 1.0, unknown), MalformedCase);

  ScalingOptions negative;
  negative.bus_weights = {{4, -0.5}};
  CHECK_THROWS_AS(scale_loads(toy4, 1.0, negative), MalformedCase);
}

TEST_CASE("scenario sequence construction") {
  const NetworkCase toy4 = load_matpower_case(data_path("toy4.m"));

  const ScenarioSequence seq = build_scenario_sequence(toy4, {1.0, 1.5, 2.0});
  REQUIRE(seq.size() == 3);
  CHECK(seq.scenarios[0].index == 1);
  CHECK(seq.scenarios[2].index == 3);
  CHECK(seq.scenarios[1].load_factor == doctest::Approx(1.5));
  CHECK(seq.scenarios[1].network == scale_loads(toy4, 1.5));

  CHECK_THROWS_AS(build_scenario_sequence(toy4, {}), MalformedCase);
  CHECK_THROWS_AS(build_scenario_sequence(toy4, {1.0, 1.0}), UnsortedFactors);
  CHECK_THROWS_AS(build_scenario_sequence(toy4, {2.0, 1.0}), UnsortedFactors);
  CHECK_THROWS_AS(build_scenario_sequence(toy4, {-1.0, 1.0}), MalformedCase);
}

TEST_CASE("factor specification parsing") {
  CHECK(parse_factor_spec("1.0") == std::vector<double>{1.0});
  CHECK(parse_factor_spec("3.8,3.9") == std::vector<double>{3.8, 3.9});

  const std::vector<double> sweep = parse_factor_spec("3.8:4.7:0.1");
  REQUIRE(sweep.size() == 10);
  CHECK(sweep.front() == doctest::Approx(3.8));
  CHECK(sweep.back() == doctest::Approx(4.7));

  CHECK_THROWS_AS(parse_factor_spec(""), MalformedCase);
  CHECK_THROWS_AS(parse_factor_spec("a,b"), MalformedCase);
  CHECK_THROWS_AS(parse_factor_spec("2.0:1.0:0.5"), MalformedCase);
  CHECK_THROWS_AS(parse_factor_spec("1.0:2.0:-0.5"), MalformedCase);
  CHECK_THROWS_AS(parse_factor_spec("1.0:2.0"), MalformedCase);
}

TEST_CASE("bus scaling csv parsing") {
  const std::map<int, double> weights = parse_bus_scaling_csv("bus_id,factor\n4,2.0\n2,0.5\n");
  REQUIRE(weights.size() == 2);
  CHECK(weights.at(4) == doctest::Approx(2.0));
  CHECK(weights.at(2) == doctest::Approx(0.5));

  CHECK_THROWS_AS(parse_bus_scaling_csv(""), MalformedCase);
  CHECK_THROWS_AS(parse_bus_scaling_csv("id,weight\n4,2.0\n"), MalformedCase);
  CHECK_THROWS_AS(parse_bus_scaling_csv("bus_id,factor\n4\n"), MalformedCase);
}
