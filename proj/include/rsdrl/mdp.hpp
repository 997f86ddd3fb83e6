#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "rsdrl/rng.hpp"

namespace rsdrl {

/// Tolerance on transition rows summing to one.
inline constexpr double kSimplexTol = 1e-9;

/**
 * Finite-horizon tabular MDP with deterministic rewards.
 *
 * Steps are 0-based: step h in [0, H) has transition rows P[h][s][a][.] and
 * rewards r[h][s][a]. The remaining horizon at step h is H - h.
 */
class TabularMDP {
 public:
  TabularMDP(int num_states, int num_actions, int horizon, int initial_state = 0);

  int S() const { return S_; }
  int A() const { return A_; }
  int H() const { return H_; }
  int initial_state() const { return initial_state_; }
  void set_initial_state(int s);

  double& p(int h, int s, int a, int next) { return P_[row_offset(h, s, a) + next]; }
  double p(int h, int s, int a, int next) const { return P_[row_offset(h, s, a) + next]; }
  std::span<double> row(int h, int s, int a) { return {P_.data() + row_offset(h, s, a), std::size_t(S_)}; }
  std::span<const double> row(int h, int s, int a) const {
    return {P_.data() + row_offset(h, s, a), std::size_t(S_)};
  }

  double& r(int h, int s, int a) { return r_[(std::size_t(h) * S_ + s) * A_ + a]; }
  double r(int h, int s, int a) const { return r_[(std::size_t(h) * S_ + s) * A_ + a]; }

  const std::vector<double>& transitions() const { return P_; }
  const std::vector<double>& rewards() const { return r_; }

  /// Throws InputError when a row leaves the simplex or a reward leaves [0, 1].
  void validate() const;

  bool operator==(const TabularMDP&) const = default;

 private:
  std::size_t row_offset(int h, int s, int a) const {
    return ((std::size_t(h) * S_ + s) * A_ + a) * S_;
  }

  int S_, A_, H_, initial_state_;
  std::vector<double> P_;
  std::vector<double> r_;
};

/// Deterministic Markov policy pi[h][s].
class Policy {
 public:
  Policy() = default;
  Policy(int horizon, int num_states, int fill = 0)
      : H_(horizon), S_(num_states), actions_(std::size_t(horizon) * num_states, fill) {}

  int H() const { return H_; }
  int S() const { return S_; }
  int& operator()(int h, int s) { return actions_[std::size_t(h) * S_ + s]; }
  int operator()(int h, int s) const { return actions_[std::size_t(h) * S_ + s]; }
  const std::vector<int>& actions() const { return actions_; }

  bool operator==(const Policy&) const = default;

 private:
  int H_ = 0, S_ = 0;
  std::vector<int> actions_;
};

struct Step {
  int h;
  int state;
  int action;
  double reward;
  int next_state;
};

struct Trajectory {
  std::vector<Step> steps;
};

/// Sample one episode from the initial state. Policy shape must match the MDP.
Trajectory simulate_episode(const TabularMDP& mdp, const Policy& policy, StreamRng& rng);

/// Index of the next state drawn from a probability row using one uniform.
int sample_index(std::span<const double> probs, double u);

/**
 * Risk-exposure experiment MDP: state 0 is the start, states 1..5 are the
 * outcome states, A = 5, H = 5. Actions 0..3 are risky (half the mass on
 * state 1 with reward 1), action 4 is safe (almost surely state 5 with reward
 * 0.4). The same rows are used out of state 0 at the first step.
 */
TabularMDP make_risky_mdp();

/**
 * Parameters of the lower-bound instance: a waiting state, a full A-ary tree
 * of depth d, and absorbing good/bad states.
 *
 * Steps are 0-based; h_star must lie in [d, wait_horizon + d - 1], which are
 * the steps at which some policy can stand on a leaf and still collect the
 * good-state reward from the first rewarding step on.
 */
struct HardInstanceSpec {
  int branching = 2;     ///< A
  int depth = 1;         ///< d
  int wait_horizon = 1;  ///< H-bar
  int horizon = 3;       ///< H
  int h_star = 1;
  int leaf_star = 0;  ///< index among the leaves, in [0, A^(d-1))
  int a_star = 0;
  double p = 0.5;
  double eps = 0.0;
  double beta = 1.0;

  int tree_size() const;   ///< (A^d - 1) / (A - 1)
  int num_leaves() const;  ///< A^(d-1)
  int num_states() const { return tree_size() + 3; }
  /// First 0-based step that pays reward in the good state, H-tilde - 1.
  int reward_start() const { return wait_horizon + depth; }

  static constexpr int kWaitState = 0;
  int root_state() const { return 1; }
  int first_leaf_state() const { return 1 + tree_size() - num_leaves(); }
  int good_state() const { return tree_size() + 1; }
  int bad_state() const { return tree_size() + 2; }

  /// Throws InvalidParameter when the spec is not a legal instance.
  void validate() const;
};

/// Closed-form optimal EntRM value of a hard instance at the waiting state.
double hard_optimal_value(const HardInstanceSpec& spec);

/// Builds the hard instance; eps = 0 gives the reference MDP. Waits on action 0.
TabularMDP make_hard_mdp(const HardInstanceSpec& spec);

TabularMDP load_mdp(const std::string& path);
void save_mdp(const TabularMDP& mdp, const std::string& path);

}  // namespace rsdrl
