#include "blens/sparse_optimizer.hpp"

#include <algorithm>
#include <set>

#include "blens/log.hpp"

namespace blens {

SparsityCoefficients SparsityCoefficients::uniform_high(int locations,
                                                        const SolverConfig& config) {
  SparsityCoefficients sc;
  sc.c_high = config.c_high;
  sc.c_low = config.c_low;
  sc.c = Eigen::VectorXd::Constant(locations, config.c_high);
  sc.pinned.assign(locations, 0);
  return sc;
}

SolveResult solve_sparse_inner(const CircuitAssembly& assembly,
                               const SparsityCoefficients& coefficients,
                               const SolverConfig& config, const StateVector* warm_start) {
  return minimize_compensation(assembly, &coefficients.c, config, warm_start);
}

SparsityCoefficients update_coefficients(const SlackVector& n,
                                         const SparsityCoefficients& current, double gamma,
                                         double epsilon_support) {
  if (n.locations() != current.size()) {
    throw Error("slack vector does not match the coefficient dimension");
  }
  const double max_mag = n.max_magnitude();
  if (max_mag <= epsilon_support) {
    throw AllZeroSlack("all compensation magnitudes are below the support threshold");
  }
  SparsityCoefficients out = current;
  for (int k = 0; k < current.size(); ++k) {
    if (current.pinned[k]) {
      out.c[k] = current.pin_value();
      continue;
    }
    const double mag = n.magnitude(k);
    out.c[k] = (mag >= gamma * max_mag && mag > epsilon_support) ? current.c_low
                                                                 : current.c_high;
  }
  return out;
}

VulnerabilitySet extract_support(const SlackVector& n, double epsilon,
                                 const CircuitAssembly& assembly) {
  if (!(epsilon > 0.0)) throw Error("support threshold must be positive");
  VulnerabilitySet s;
  for (int k = 0; k < n.locations(); ++k) {
    const double mag = n.magnitude(k);
    if (mag > epsilon) {
      const int id = assembly.compensable_bus_id(k);
      s.bus_ids.push_back(id);
      s.magnitudes[id] = mag;
    }
  }
  std::sort(s.bus_ids.begin(), s.bus_ids.end());
  return s;
}

SparseSolution solve_sparse(const CircuitAssembly& assembly, const SolverConfig& config,
                            const SparsityCoefficients* prior,
                            const StateVector* warm_start) {
  validate_config(config);
  const int locations = assembly.n_compensable();
  if (prior != nullptr && prior->size() != locations) {
    throw Error("prior coefficients do not match the compensable locations");
  }

  SparsityCoefficients coeffs = SparsityCoefficients::uniform_high(locations, config);
  if (prior != nullptr) {
    for (int k = 0; k < locations; ++k) {
      if (prior->pinned[k] || prior->c[k] <= config.c_low) {
        coeffs.pinned[k] = 1;
        coeffs.c[k] = coeffs.pin_value();
      }
    }
  }

  // Algorithm start: dense initialization of the compensation pattern.
  const SolveResult dense = solve_dense(assembly, config, warm_start);

  SparseSolution best;
  best.result = dense;
  best.support = extract_support(dense.compensation, config.epsilon_support, assembly);
  best.coefficients = coeffs;
  best.toggle_rounds = 0;

  if (dense.compensation.max_magnitude() <= config.epsilon_support) {
    best.support_sizes.push_back(best.support.size());
    return best;  // feasible scenario: nothing to suppress
  }

  // Seed solve: uniform suppression from the dense state. This, not the
  // dense pattern itself, is the first sparse candidate; toggling refines it.
  const SolveResult seeded = solve_sparse_inner(assembly, coeffs, config, &dense.state);
  best.result = seeded;
  best.support = extract_support(seeded.compensation, config.epsilon_support, assembly);
  best.support_sizes.push_back(best.support.size());
  if (!seeded.converged()) {
    return best;  // honest failure: the caller sees the non-converged status
  }

  std::vector<int> support_sizes = best.support_sizes;
  std::set<std::vector<int>> visited;
  std::vector<int> prev_ids = best.support.bus_ids;
  SlackVector n = seeded.compensation;
  StateVector x = seeded.state;
  int rounds = 0;

  for (int round = 1; round <= config.max_toggle_rounds; ++round) {
    try {
      coeffs = update_coefficients(n, coeffs, config.gamma, config.epsilon_support);
    } catch (const AllZeroSlack&) {
      break;  // compensation vanished entirely; the current best stands
    }

    const SolveResult res = solve_sparse_inner(assembly, coeffs, config, &x);
    if (!res.converged()) {
      BLENS_LOG_INFO("toggling round ", round,
                     " failed to converge; rolling back to the previous solution");
      break;
    }

    const VulnerabilitySet support =
        extract_support(res.compensation, config.epsilon_support, assembly);
    support_sizes.push_back(support.size());
    rounds = round;

    const bool better =
        support.size() < best.support.size() ||
        (support.size() == best.support.size() &&
         res.compensation.total_magnitude() < best.result.compensation.total_magnitude());
    if (better) {
      best.result = res;
      best.support = support;
      best.coefficients = coeffs;
    }

    if (support.bus_ids == prev_ids) break;                  // fixed point
    if (support.size() > static_cast<int>(prev_ids.size())) break;  // stopped shrinking
    if (visited.count(support.bus_ids) > 0) {
      BLENS_LOG_DEBUG("toggling round ", round, " revisited a support; stopping");
      break;
    }

    visited.insert(prev_ids);
    prev_ids = support.bus_ids;
    n = res.compensation;
    x = res.state;
  }

  best.toggle_rounds = rounds;
  best.support_sizes = support_sizes;
  return best;
}

}  // namespace blens
