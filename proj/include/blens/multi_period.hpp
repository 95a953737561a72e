/**
 * @file multi_period.hpp
 * @brief Stress-ordered scenario sweeps with the persistency prior, plus the
 *        persistency metrics evaluated on the resulting support trajectory.
 *
 * Multi-period mode walks the scenarios in order, carrying two things from
 * scenario t-1 into t: the solved state (warm start) and the coefficient
 * pins — every location whose coefficient ended at or below c_low is held at
 * 0.5*c_low for the whole of scenario t's toggling, keeping previously
 * vulnerable buses cheap to compensate. The first scenario has no
 * predecessor, so its prior is estimated with a boot solve: the terminal
 * scenario, where the vulnerability structure of the stress range is most
 * developed, is solved once without a prior and its coefficient pattern
 * seeds the chain. Baseline mode solves every scenario independently and
 * may fan out across a worker pool.
 */
#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "blens/case_model.hpp"
#include "blens/sparse_optimizer.hpp"

namespace blens {

enum class SweepMode { MultiPeriod, BaselineSingleScenario };

/// Stable lowercase token used in reports and CSVs.
std::string sweep_mode_name(SweepMode mode);

struct ScenarioOutcome {
  int index = 0;  ///< 1-based scenario position
  double load_factor = 1.0;
  bool solved = false;
  std::string error;  ///< message when !solved
  SparseSolution solution;
  double wall_seconds = 0.0;
};

struct MultiPeriodResult {
  SweepMode mode = SweepMode::MultiPeriod;
  std::vector<ScenarioOutcome> outcomes;
  /// Per-location magnitude trajectory: bus id -> (t, |n_i|) pairs.
  std::map<int, std::vector<std::pair<int, double>>> trajectory;
  /// First scenario whose solve failed (multi-period stops there).
  std::optional<int> failed_index;
  /// Terminal-scenario boot solve that seeded scenario 1's prior
  /// (multi-period mode with T >= 2 only; not a scenario row).
  std::optional<ScenarioOutcome> prior_boot;

  [[nodiscard]] bool all_solved() const { return !failed_index.has_value(); }

  /// Support sets of the solved prefix (stops at the first failure).
  [[nodiscard]] std::vector<VulnerabilitySet> supports() const;
};

/**
 * Sequential sweep with pins and warm starts. With T >= 2 the terminal
 * scenario is first solved without a prior and its coefficients become
 * scenario 1's prior (recorded in prior_boot); a failed boot degrades to a
 * flat prior with a warning. With T = 1 the single scenario is solved with
 * no prior. On a scenario failure the earlier outcomes are still returned
 * and failed_index names the scenario; later scenarios are not attempted
 * (their prior would be meaningless).
 */
MultiPeriodResult run_multi_period(const ScenarioSequence& sequence,
                                   const SolverConfig& config);

/**
 * Independent single-scenario solves, optionally across @p jobs workers.
 * Failures are per-scenario and do not stop the sweep; failed_index reports
 * the first failing scenario when any failed.
 */
MultiPeriodResult run_baseline(const ScenarioSequence& sequence, const SolverConfig& config,
                               int jobs = 1);

/**
 * Location persistency (percent). With T sets, k = min{t <= T-1 : i in S_t};
 * returns 0 when no such k exists or when the location never appears in two
 * consecutive scenarios; otherwise 100·|{t in [k, T] : i in S_t}| / (T-k+1).
 */
double location_persistency(const std::vector<VulnerabilitySet>& sets, int bus_id);

/// Set persistency (percent) at 1-based t: 100·|S_t| / |∪_{j<=t} S_j|;
/// an empty union scores 100 by convention.
double set_persistency(const std::vector<VulnerabilitySet>& sets, int t);

struct PersistencyReport {
  std::map<int, double> location_persistency;  ///< bus id -> percent
  std::map<int, int> first_seen;               ///< bus id -> first t (1-based)
  std::map<int, int> steps_present;            ///< bus id -> #scenarios present
  std::vector<double> set_persistency;         ///< per t, percent
  std::vector<int> set_sizes;                  ///< |S_t| per t
  std::vector<int> union_sizes;                ///< |∪_{j<=t} S_j| per t
  std::vector<double> total_compensation;      ///< Σ_i |n_i| per t
};

/// Metrics over the solved prefix of @p result.
PersistencyReport build_persistency_report(const MultiPeriodResult& result);

}  // namespace blens
