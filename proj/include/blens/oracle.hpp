/**
 * @file oracle.hpp
 * @brief Independent ground truth for small cases: restricted feasibility
 *        checks and exhaustive minimum-support enumeration.
 *
 * The restricted check asks whether a candidate support suffices, i.e.
 * whether voltages exist that satisfy every balance equation outside the
 * candidate set while compensation is allowed only inside it. It is
 * implemented by weight masking: zero cost on the candidate locations and an
 * escalating cost ladder everywhere else, so any leakage outside the
 * candidate set is squeezed out when (and only when) the restriction is
 * feasible. The brute-force search runs that check over every support of
 * cardinality 0, 1, 2, ... and is intentionally guarded to toy sizes.
 */
#pragma once

#include <vector>

#include "blens/sparse_optimizer.hpp"

namespace blens {

/// Outcome of one restricted feasibility probe.
struct RestrictedCheck {
  bool feasible = false;
  SlackVector compensation;     ///< injections at the masked optimum
  double masked_residual = 0.0;  ///< max |n_i| outside the candidate support
  double support_norm = 0.0;     ///< ‖n‖₂ over the candidate support
  int rungs_used = 0;            ///< ladder rungs consumed
};

/**
 * Tests whether compensation confined to @p support_bus_ids can restore
 * feasibility. Every bus id must name a compensable (non-slack) bus. A
 * ladder rung that fails to converge is retried once from a perturbed start
 * and then treated as infeasible, which keeps the check conservative.
 * @p warm_start seeds the first rung; by default the dense solution is used.
 */
RestrictedCheck restricted_feasibility_check(const CircuitAssembly& assembly,
                                             const std::vector<int>& support_bus_ids,
                                             const SolverConfig& config,
                                             const StateVector* warm_start = nullptr);

struct OracleResult {
  int min_cardinality = 0;
  std::vector<VulnerabilitySet> witnesses;  ///< all minimal supports, lexicographic
  std::vector<double> witness_norms;        ///< ‖n‖₂ per witness
};

/**
 * Exhaustive minimum-cardinality support search. Enumerates candidate
 * supports in lexicographic bus-id order, cardinality by cardinality, and
 * returns every feasible support of the smallest feasible size. Guarded to
 * at most 12 compensable buses and @p max_cardinality at most 4 (throws
 * Error beyond that); throws CardinalityExceeded when no support within the
 * cardinality budget restores feasibility.
 */
OracleResult min_support_bruteforce(const CircuitAssembly& assembly, const SolverConfig& config,
                                    int max_cardinality);

}  // namespace blens
