#include "blens/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "blens/log.hpp"

namespace blens {

namespace {

constexpr int kMaxCompensable = 12;
constexpr int kMaxCardinality = 4;

std::vector<char> support_mask(const CircuitAssembly& assembly,
                               const std::vector<int>& support_bus_ids) {
  std::vector<char> mask(assembly.topology().n_compensable(), 0);
  for (int bus : support_bus_ids) {
    const int slot = assembly.compensable_slot_of(bus);
    if (slot < 0) {
      throw Error("support bus " + std::to_string(bus) + " is the slack bus");
    }
    mask[static_cast<size_t>(slot)] = 1;
  }
  return mask;
}

SparsityCoefficients masked_coefficients(const std::vector<char>& mask, double c_mask,
                                         const SolverConfig& config) {
  SparsityCoefficients coeffs;
  coeffs.c_high = config.c_high;
  coeffs.c_low = config.c_low;
  coeffs.c = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(mask.size()));
  coeffs.pinned.assign(mask.size(), 0);
  for (size_t k = 0; k < mask.size(); ++k) {
    if (!mask[k]) coeffs.c[static_cast<Eigen::Index>(k)] = c_mask;
  }
  return coeffs;
}

/// Largest off-support magnitude and the on-support two-norm of n.
void split_norms(const SlackVector& n, const std::vector<char>& mask, double& off_max,
                 double& on_norm2) {
  off_max = 0.0;
  on_norm2 = 0.0;
  for (int k = 0; k < n.locations(); ++k) {
    const double mag = n.magnitude(k);
    if (mask[static_cast<size_t>(k)]) {
      on_norm2 += mag * mag;
    } else {
      off_max = std::max(off_max, mag);
    }
  }
  on_norm2 = std::sqrt(on_norm2);
}

std::vector<std::vector<int>> combinations(const std::vector<int>& pool, int k) {
  std::vector<std::vector<int>> out;
  const int n = static_cast<int>(pool.size());
  if (k > n) return out;
  std::vector<int> idx(static_cast<size_t>(k));
  for (int i = 0; i < k; ++i) idx[static_cast<size_t>(i)] = i;
  while (true) {
    std::vector<int> combo(static_cast<size_t>(k));
    for (int i = 0; i < k; ++i) combo[static_cast<size_t>(i)] = pool[static_cast<size_t>(idx[static_cast<size_t>(i)])];
    out.push_back(std::move(combo));
    int i = k - 1;
    while (i >= 0 && idx[static_cast<size_t>(i)] == n - k + i) --i;
    if (i < 0) break;
    ++idx[static_cast<size_t>(i)];
    for (int j = i + 1; j < k; ++j) idx[static_cast<size_t>(j)] = idx[static_cast<size_t>(j - 1)] + 1;
  }
  return out;
}

}  // namespace

RestrictedCheck restricted_feasibility_check(const CircuitAssembly& assembly,
                                             const std::vector<int>& support_bus_ids,
                                             const SolverConfig& config,
                                             const StateVector* warm_start) {
  validate_config(config);
  const std::vector<char> mask = support_mask(assembly, support_bus_ids);

  StateVector warm_storage;
  const StateVector* warm = warm_start;
  if (warm == nullptr) {
    try {
      warm_storage = solve_dense(assembly, config).state;
      warm = &warm_storage;
    } catch (const NoConvergence&) {
      // fall through to a cold start
    }
  }

  RestrictedCheck check;
  check.masked_residual = std::numeric_limits<double>::infinity();
  const double ladder[] = {config.c_high, 100.0, 1000.0};

  for (double c_mask : ladder) {
    const SparsityCoefficients coeffs = masked_coefficients(mask, c_mask, config);
    SolveResult rung = solve_sparse_inner(assembly, coeffs, config, warm);
    ++check.rungs_used;
    if (!rung.converged() && warm != nullptr) {
      StateVector nudged = *warm;
      nudged.data.array() += 1e-3;
      rung = solve_sparse_inner(assembly, coeffs, config, &nudged);
    }
    if (!rung.converged()) continue;  // conservatively counts against feasibility

    double off_max = 0.0;
    double on_norm = 0.0;
    split_norms(rung.compensation, mask, off_max, on_norm);
    check.compensation = rung.compensation;
    check.masked_residual = off_max;
    check.support_norm = on_norm;
    warm_storage = rung.state;
    warm = &warm_storage;

    if (off_max < config.tol_residual) {
      check.feasible = true;
      return check;
    }
  }
  check.feasible = false;
  return check;
}

OracleResult min_support_bruteforce(const CircuitAssembly& assembly, const SolverConfig& config,
                                    int max_cardinality) {
  validate_config(config);
  const int locations = assembly.topology().n_compensable();
  if (locations > kMaxCompensable) {
    throw Error("oracle enumeration is limited to 12 compensable buses");
  }
  if (max_cardinality < 0 || max_cardinality > kMaxCardinality) {
    throw Error("oracle cardinality budget must lie in [0, 4]");
  }

  std::vector<int> pool;
  pool.reserve(static_cast<size_t>(locations));
  for (int k = 0; k < locations; ++k) pool.push_back(assembly.compensable_bus_id(k));
  std::sort(pool.begin(), pool.end());

  StateVector shared_warm;
  const StateVector* warm = nullptr;
  try {
    shared_warm = solve_dense(assembly, config).state;
    warm = &shared_warm;
  } catch (const NoConvergence&) {
    BLENS_LOG_WARN("oracle: dense warm start unavailable, probing cold");
  }

  for (int card = 0; card <= max_cardinality; ++card) {
    const std::vector<std::vector<int>> combos = combinations(pool, card);
    const int combo_count = static_cast<int>(combos.size());
    std::vector<RestrictedCheck> checks(combos.size());

#pragma omp parallel for schedule(dynamic) if (combo_count > 1)
    for (int i = 0; i < combo_count; ++i) {
      checks[static_cast<size_t>(i)] =
          restricted_feasibility_check(assembly, combos[static_cast<size_t>(i)], config, warm);
    }

    OracleResult result;
    result.min_cardinality = card;
    for (int i = 0; i < combo_count; ++i) {
      const RestrictedCheck& check = checks[static_cast<size_t>(i)];
      if (!check.feasible) continue;
      VulnerabilitySet witness;
      witness.bus_ids = combos[static_cast<size_t>(i)];
      for (int bus : witness.bus_ids) {
        const int slot = assembly.compensable_slot_of(bus);
        witness.magnitudes[bus] = check.compensation.magnitude(slot);
      }
      result.witnesses.push_back(std::move(witness));
      result.witness_norms.push_back(check.support_norm);
    }
    if (!result.witnesses.empty()) {
      BLENS_LOG_INFO("oracle: minimum cardinality ", card, " with ", result.witnesses.size(),
                     " witness(es)");
      return result;
    }
  }
  throw CardinalityExceeded("no support within the cardinality budget restores feasibility");
}

}  // namespace blens
