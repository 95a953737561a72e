/**
 * @file case_model.hpp
 * @brief Network case data model, MATPOWER import/export and scenario building.
 *
 * A NetworkCase is a validated snapshot of one grid: buses, branches and
 * generators on a common MVA base, with loads and shunts already in per
 * unit. Scenario sequences scale that snapshot along a strictly increasing
 * stress schedule so downstream solvers can walk it period by period.
 */
#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "blens/errors.hpp"

namespace blens {

enum class BusKind { Slack, PV, PQ };

struct Bus {
  int id = 0;  ///< External bus number as written in the case file.
  BusKind kind = BusKind::PQ;
  double p_load = 0.0;  ///< Active load demand [pu].
  double q_load = 0.0;  ///< Reactive load demand [pu].
  double shunt_g = 0.0;  ///< Shunt conductance at V = 1 pu [pu].
  double shunt_b = 0.0;  ///< Shunt susceptance at V = 1 pu [pu].
  double v_set = 1.0;    ///< Magnitude setpoint for slack and PV buses [pu].
  double angle_set = 0.0;  ///< Angle setpoint for the slack bus [rad].

  bool operator==(const Bus&) const = default;
};

struct Branch {
  int from = 0;  ///< External id of the from bus.
  int to = 0;    ///< External id of the to bus.
  double r = 0.0;          ///< Series resistance [pu].
  double x = 0.0;          ///< Series reactance [pu].
  double b_charging = 0.0;  ///< Total line charging susceptance [pu].
  double tap = 1.0;         ///< Off-nominal tap ratio on the from side.
  double shift = 0.0;       ///< Phase shift on the from side [rad].

  bool operator==(const Branch&) const = default;
};

struct Generator {
  int bus = 0;         ///< External id of the connected bus.
  double p_set = 0.0;  ///< Active power output [pu].
  double q_set = 0.0;  ///< Reactive output, honored only at PQ buses [pu].
  double v_set = 1.0;  ///< Voltage magnitude target at PV buses [pu].

  bool operator==(const Generator&) const = default;
};

/**
 * Validated network snapshot. Out-of-service elements are dropped during
 * parsing, co-located generators are merged, and the topology is checked
 * (exactly one slack, no islands, consistent references) before an instance
 * is handed out.
 */
struct NetworkCase {
  std::string name;
  double base_mva = 100.0;
  std::vector<Bus> buses;
  std::vector<Branch> branches;
  std::vector<Generator> generators;

  bool operator==(const NetworkCase&) const = default;

  /// Internal index of the bus with external id @p id; throws MalformedCase.
  [[nodiscard]] int bus_index(int id) const;

  /// True if a bus with external id @p id exists.
  [[nodiscard]] bool has_bus(int id) const;

  /// Internal index of the single slack bus.
  [[nodiscard]] int slack_index() const;
};

/// One entry of a stress schedule: the scaled case plus its factor.
struct Scenario {
  int index = 0;          ///< 1-based position in the sequence.
  double load_factor = 1.0;
  NetworkCase network;
};

struct ScenarioSequence {
  std::vector<Scenario> scenarios;

  [[nodiscard]] int size() const { return static_cast<int>(scenarios.size()); }
};

/// Knobs for scenario scaling; loads always scale, generation optionally.
struct ScalingOptions {
  bool scale_generation = false;
  /// Per-bus multipliers applied on top of the scalar factor. Buses absent
  /// from the map keep weight 1. Ids that do not exist in the case are
  /// rejected with MalformedCase.
  std::map<int, double> bus_weights;
};

/**
 * Parses MATPOWER case format version 2 text. Supports the bus, gen and
 * branch matrices plus baseMVA; comments and unknown mpc fields are
 * ignored. Throws MalformedCase on schema violations and InvalidTopology
 * on electrically unusable input.
 */
NetworkCase parse_matpower_case(const std::string& text, const std::string& name = "");

/// Reads and parses a case file from disk.
NetworkCase load_matpower_case(const std::string& path);

/// Serializes back to MATPOWER v2 text; round-trips through the parser.
std::string write_matpower_case(const NetworkCase& network);

/**
 * Returns a copy with every bus load multiplied by @p factor (and by its
 * per-bus weight, when given). Shunts are part of the network and never
 * scale. Generation scales only when options.scale_generation is set.
 */
NetworkCase scale_loads(const NetworkCase& network, double factor,
                        const ScalingOptions& options = {});

/**
 * Builds the scenario sequence for a strictly increasing factor schedule.
 * Throws UnsortedFactors when the schedule is not strictly increasing and
 * MalformedCase when a factor is not positive.
 */
ScenarioSequence build_scenario_sequence(const NetworkCase& network,
                                         const std::vector<double>& factors,
                                         const ScalingOptions& options = {});

/**
 * Parses a factor specification: either an explicit comma list ("3.8,3.9")
 * or an inclusive range "start:stop:step" with positive step.
 */
std::vector<double> parse_factor_spec(const std::string& spec);

/// Parses "bus_id,factor" CSV text (header required) into a weight map.
std::map<int, double> parse_bus_scaling_csv(const std::string& text);

/// Reads and parses a per-bus scaling CSV from disk.
std::map<int, double> load_bus_scaling_csv(const std::string& path);

}  // namespace blens
