#pragma once

#include <optional>
#include <span>
#include <vector>

#include "rsdrl/dist.hpp"
#include "rsdrl/mdp.hpp"

namespace rsdrl {

/// Default cap on the number of atoms of any return distribution.
inline constexpr std::size_t kDefaultSupportCap = 200000;

/// |beta| * H above which scalar recursions switch to the log domain.
inline constexpr double kLogDomainThreshold = 500.0;

/// Per-step state table t[h][s] with H + 1 rows; row H is the terminal row.
using ValueTable = std::vector<std::vector<double>>;
/// Per-step state-action table t[h][s][a] with H rows.
using ActionTable = std::vector<std::vector<std::vector<double>>>;

struct DistTables {
  std::vector<std::vector<std::vector<DiscreteDistribution>>> eta;  ///< [h][s][a], H rows
  std::vector<std::vector<DiscreteDistribution>> nu;                ///< [h][s], H + 1 rows
};

struct PlanResult {
  Policy policy;
  ValueTable v_star;  ///< EntRM values (expected values when beta == 0)
  ValueTable w_star;  ///< exp(beta V); empty when beta == 0
  ActionTable q_star;
  std::optional<DistTables> dists;
};

/// Lowest index whose value is within kTieTol of the maximum.
int greedy_index(std::span<const double> values);

/// Backward recursion over full return distributions via mix and shift.
/// Throws CapacityError naming (h, s, a) when a distribution exceeds support_cap atoms.
PlanResult rs_ddp_distributional(const TabularMDP& mdp, RiskParam rp,
                                 std::size_t support_cap = kDefaultSupportCap);

/// Exponential-utility recursion W_h = exp(beta r) P W_{h+1}. beta == 0 runs
/// expected-value dynamic programming instead.
PlanResult rs_ddp_scalar(const TabularMDP& mdp, RiskParam rp);

/// EntRM value table V^pi[h][s] of a fixed policy (H + 1 rows).
ValueTable policy_eval(const TabularMDP& mdp, const Policy& policy, RiskParam rp);

/// Largest number of policies brute_force_optimal will enumerate.
inline constexpr double kBruteForceLimit = 1e7;

/**
 * Enumerates every deterministic Markov policy in lexicographic order of the
 * [h][s] action array and keeps the first one maximizing sum_s V^pi_0(s),
 * which is a policy optimal from every start state.
 */
PlanResult brute_force_optimal(const TabularMDP& mdp, RiskParam rp);

}  // namespace rsdrl
