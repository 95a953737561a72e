#include "blens/multi_period.hpp"

#include <algorithm>
#include <chrono>
#include <set>

#include "blens/log.hpp"

namespace blens {

namespace {

double seconds_since(const std::chrono::steady_clock::time_point& start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

void fill_trajectory(MultiPeriodResult& result) {
  for (const ScenarioOutcome& o : result.outcomes) {
    if (!o.solved) continue;
    for (const auto& [bus, mag] : o.solution.support.magnitudes) {
      result.trajectory[bus].emplace_back(o.index, mag);
    }
  }
}

}  // namespace

std::string sweep_mode_name(SweepMode mode) {
  return mode == SweepMode::MultiPeriod ? "multi-period" : "baseline";
}

std::vector<VulnerabilitySet> MultiPeriodResult::supports() const {
  std::vector<VulnerabilitySet> sets;
  for (const ScenarioOutcome& o : outcomes) {
    if (!o.solved) break;
    sets.push_back(o.solution.support);
  }
  return sets;
}

MultiPeriodResult run_multi_period(const ScenarioSequence& sequence,
                                   const SolverConfig& config) {
  validate_config(config);
  MultiPeriodResult result;
  result.mode = SweepMode::MultiPeriod;

  const SparsityCoefficients* prior = nullptr;
  const StateVector* warm = nullptr;
  SparsityCoefficients prior_storage;
  StateVector warm_storage;

  // Scenario 1 prior boot: solve the terminal scenario without a prior and
  // seed the chain with its coefficient pattern. The sequence is stress
  // ordered, so the last scenario expresses the persistent vulnerability
  // structure most strongly.
  if (sequence.size() >= 2) {
    ScenarioOutcome boot;
    const Scenario& terminal = sequence.scenarios.back();
    boot.index = terminal.index;
    boot.load_factor = terminal.load_factor;
    const auto start = std::chrono::steady_clock::now();
    try {
      const CircuitAssembly assembly = CircuitAssembly::assemble(terminal);
      boot.solution = solve_sparse(assembly, config);
      boot.solved = boot.solution.result.converged();
      if (!boot.solved) boot.error = "solver finished without convergence";
    } catch (const Error& e) {
      boot.error = e.what();
    }
    boot.wall_seconds = seconds_since(start);
    if (boot.solved) {
      prior_storage = boot.solution.coefficients;
      prior = &prior_storage;
    } else {
      BLENS_LOG_WARN("prior boot at the terminal scenario failed (", boot.error,
                     "); scenario 1 runs without a prior");
    }
    result.prior_boot = std::move(boot);
  }

  for (const Scenario& scenario : sequence.scenarios) {
    ScenarioOutcome outcome;
    outcome.index = scenario.index;
    outcome.load_factor = scenario.load_factor;

    const auto start = std::chrono::steady_clock::now();
    try {
      const CircuitAssembly assembly = CircuitAssembly::assemble(scenario);
      outcome.solution = solve_sparse(assembly, config, prior, warm);
      outcome.solved = outcome.solution.result.converged();
      if (!outcome.solved) outcome.error = "solver finished without convergence";
    } catch (const Error& e) {
      outcome.error = e.what();
    }
    outcome.wall_seconds = seconds_since(start);

    if (!outcome.solved) {
      BLENS_LOG_WARN("multi-period scenario ", outcome.index, " failed: ", outcome.error);
      result.failed_index = outcome.index;
      result.outcomes.push_back(std::move(outcome));
      break;  // the chain through priors is broken; stop here
    }

    prior_storage = outcome.solution.coefficients;
    warm_storage = outcome.solution.result.state;
    prior = &prior_storage;
    warm = &warm_storage;
    result.outcomes.push_back(std::move(outcome));
  }

  fill_trajectory(result);
  return result;
}

MultiPeriodResult run_baseline(const ScenarioSequence& sequence, const SolverConfig& config,
                               int jobs) {
  validate_config(config);
  MultiPeriodResult result;
  result.mode = SweepMode::BaselineSingleScenario;
  const int count = sequence.size();
  result.outcomes.resize(count);

  const int workers = std::max(1, jobs);
#pragma omp parallel for schedule(dynamic) num_threads(workers) if (workers > 1)
  for (int idx = 0; idx < count; ++idx) {
    const Scenario& scenario = sequence.scenarios[idx];
    ScenarioOutcome outcome;
    outcome.index = scenario.index;
    outcome.load_factor = scenario.load_factor;

    const auto start = std::chrono::steady_clock::now();
    try {
      const CircuitAssembly assembly = CircuitAssembly::assemble(scenario);
      outcome.solution = solve_sparse(assembly, config);
      outcome.solved = outcome.solution.result.converged();
      if (!outcome.solved) outcome.error = "solver finished without convergence";
    } catch (const Error& e) {
      outcome.error = e.what();
    }
    outcome.wall_seconds = seconds_since(start);
    result.outcomes[idx] = std::move(outcome);
  }

  for (const ScenarioOutcome& o : result.outcomes) {
    if (!o.solved) {
      BLENS_LOG_WARN("baseline scenario ", o.index, " failed: ", o.error);
      if (!result.failed_index.has_value()) result.failed_index = o.index;
    }
  }
  fill_trajectory(result);
  return result;
}

double location_persistency(const std::vector<VulnerabilitySet>& sets, int bus_id) {
  const int t_count = static_cast<int>(sets.size());
  if (t_count == 0) return 0.0;

  int first = 0;  // Definition restricts the entry scenario to t <= T-1.
  for (int t = 1; t <= t_count - 1; ++t) {
    if (sets[t - 1].contains(bus_id)) {
      first = t;
      break;
    }
  }
  if (first == 0) return 0.0;

  bool has_consecutive = false;
  for (int t = 1; t <= t_count - 1; ++t) {
    if (sets[t - 1].contains(bus_id) && sets[t].contains(bus_id)) {
      has_consecutive = true;
      break;
    }
  }
  if (!has_consecutive) return 0.0;

  int present = 0;
  for (int t = first; t <= t_count; ++t) {
    if (sets[t - 1].contains(bus_id)) ++present;
  }
  return 100.0 * present / (t_count - first + 1);
}

double set_persistency(const std::vector<VulnerabilitySet>& sets, int t) {
  const int t_count = static_cast<int>(sets.size());
  if (t < 1 || t > t_count) throw Error("set persistency index out of range");
  std::set<int> cumulative;
  for (int j = 1; j <= t; ++j) {
    cumulative.insert(sets[j - 1].bus_ids.begin(), sets[j - 1].bus_ids.end());
  }
  if (cumulative.empty()) return 100.0;
  return 100.0 * sets[t - 1].size() / static_cast<double>(cumulative.size());
}

PersistencyReport build_persistency_report(const MultiPeriodResult& result) {
  PersistencyReport report;
  const std::vector<VulnerabilitySet> sets = result.supports();
  const int t_count = static_cast<int>(sets.size());

  std::set<int> all_buses;
  for (const VulnerabilitySet& s : sets) all_buses.insert(s.bus_ids.begin(), s.bus_ids.end());

  for (int bus : all_buses) {
    report.location_persistency[bus] = location_persistency(sets, bus);
    int present = 0;
    int first = 0;
    for (int t = 1; t <= t_count; ++t) {
      if (sets[t - 1].contains(bus)) {
        ++present;
        if (first == 0) first = t;
      }
    }
    report.first_seen[bus] = first;
    report.steps_present[bus] = present;
  }

  std::set<int> running;
  for (int t = 1; t <= t_count; ++t) {
    running.insert(sets[t - 1].bus_ids.begin(), sets[t - 1].bus_ids.end());
    report.set_persistency.push_back(set_persistency(sets, t));
    report.set_sizes.push_back(sets[t - 1].size());
    report.union_sizes.push_back(static_cast<int>(running.size()));
    report.total_compensation.push_back(
        result.outcomes[t - 1].solution.result.compensation.total_magnitude());
  }
  return report;
}

}  // namespace blens
