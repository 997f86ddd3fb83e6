#include "rsdrl/mdp.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "rsdrl/errors.hpp"
#include "rsdrl/json_io.hpp"

namespace rsdrl {

TabularMDP::TabularMDP(int num_states, int num_actions, int horizon, int initial_state)
    : S_(num_states), A_(num_actions), H_(horizon), initial_state_(initial_state) {
  if (num_states < 1 || num_actions < 1 || horizon < 1)
    throw InvalidParameter("MDP dimensions must be positive");
  if (initial_state < 0 || initial_state >= num_states)
    throw InvalidParameter("initial state out of range");
  P_.assign(std::size_t(H_) * S_ * A_ * S_, 0.0);
  r_.assign(std::size_t(H_) * S_ * A_, 0.0);
}

void TabularMDP::set_initial_state(int s) {
  if (s < 0 || s >= S_) throw InvalidParameter("initial state out of range");
  initial_state_ = s;
}

void TabularMDP::validate() const {
  for (int h = 0; h < H_; ++h)
    for (int s = 0; s < S_; ++s)
      for (int a = 0; a < A_; ++a) {
        double total = 0.0;
        for (double x : row(h, s, a)) {
          if (!std::isfinite(x) || x < 0.0) {
            std::ostringstream msg;
            msg << "negative or non-finite transition probability at (h=" << h << ", s=" << s
                << ", a=" << a << ")";
            throw InputError(msg.str());
          }
          total += x;
        }
        if (std::abs(total - 1.0) > kSimplexTol) {
          std::ostringstream msg;
          msg << "transition row (h=" << h << ", s=" << s << ", a=" << a << ") sums to " << total;
          throw InputError(msg.str());
        }
        const double rew = r(h, s, a);
        if (!(rew >= 0.0 && rew <= 1.0)) {
          std::ostringstream msg;
          msg << "reward " << rew << " at (h=" << h << ", s=" << s << ", a=" << a
              << ") outside [0, 1]";
          throw InputError(msg.str());
        }
      }
}

int sample_index(std::span<const double> probs, double u) {
  double acc = 0.0;
  int last = -1;
  for (std::size_t i = 0; i < probs.size(); ++i) {
    if (probs[i] <= 0.0) continue;
    acc += probs[i];
    last = int(i);
    if (u < acc) return last;
  }
  return last;  // rounding left u above the accumulated mass
}

Trajectory simulate_episode(const TabularMDP& mdp, const Policy& policy, StreamRng& rng) {
  if (policy.H() != mdp.H() || policy.S() != mdp.S())
    throw InvalidParameter("policy shape does not match the MDP");
  Trajectory traj;
  traj.steps.reserve(mdp.H());
  int s = mdp.initial_state();
  for (int h = 0; h < mdp.H(); ++h) {
    const int a = policy(h, s);
    if (a < 0 || a >= mdp.A()) throw InvalidParameter("policy action out of range");
    const int next = sample_index(mdp.row(h, s, a), rng.uniform());
    traj.steps.push_back({h, s, a, mdp.r(h, s, a), next});
    s = next;
  }
  return traj;
}

TabularMDP make_risky_mdp() {
  constexpr int S = 6, A = 5, H = 5;
  constexpr int kHigh = 1, kSafe = 5;
  TabularMDP m(S, A, H, 0);
  for (int h = 0; h < H; ++h)
    for (int s = 0; s < S; ++s) {
      for (int a = 0; a < A - 1; ++a) {
        m.p(h, s, a, kHigh) = 0.5;
        for (int n = 2; n <= 4; ++n) m.p(h, s, a, n) = 0.5 / 3.0;
      }
      m.p(h, s, A - 1, kSafe) = 0.999;
      for (int n = 1; n <= 4; ++n) m.p(h, s, A - 1, n) = 0.001 / 4.0;
      for (int a = 0; a < A; ++a) {
        if (s == kHigh) m.r(h, s, a) = 1.0;
        if (s == kSafe) m.r(h, s, a) = 0.4;
      }
    }
  return m;
}

int HardInstanceSpec::tree_size() const {
  long long n = 0, level = 1;
  for (int i = 0; i < depth; ++i) {
    n += level;
    level *= branching;
  }
  return int(n);
}

int HardInstanceSpec::num_leaves() const {
  long long n = 1;
  for (int i = 1; i < depth; ++i) n *= branching;
  return int(n);
}

void HardInstanceSpec::validate() const {
  auto fail = [](const std::string& m) { throw InvalidParameter("hard instance: " + m); };
  if (branching < 2) fail("branching must be at least 2");
  if (depth < 1) fail("depth must be at least 1");
  double size = 0.0, level = 1.0;
  for (int i = 0; i < depth; ++i) {
    size += level;
    level *= branching;
  }
  if (size > 1e6) fail("tree exceeds 10^6 nodes");
  if (horizon < 3 * depth) fail("horizon must be at least 3 * depth");
  if (wait_horizon < 1) fail("waiting horizon must be at least 1");
  if (wait_horizon + depth + 1 > horizon) fail("waiting horizon + depth + 1 must not exceed H");
  if (!(p >= 0.0) || !(eps >= 0.0) || !(p + eps <= 1.0)) fail("need p >= 0, eps >= 0, p + eps <= 1");
  if (h_star < depth || h_star > wait_horizon + depth - 1)
    fail("h_star must lie in [depth, wait_horizon + depth - 1]");
  if (leaf_star < 0 || leaf_star >= num_leaves()) fail("leaf_star out of range");
  if (a_star < 0 || a_star >= branching) fail("a_star out of range");
  if (!std::isfinite(beta)) fail("beta must be finite");
}

double hard_optimal_value(const HardInstanceSpec& spec) {
  spec.validate();
  const double q = spec.p + spec.eps;
  const double paid = spec.horizon - spec.reward_start();  // H' = H + 1 - H-tilde
  if (spec.beta == 0.0) return q * paid;
  return std::log1p(q * std::expm1(spec.beta * paid)) / spec.beta;
}

TabularMDP make_hard_mdp(const HardInstanceSpec& spec) {
  spec.validate();
  const int A = spec.branching, H = spec.horizon, S = spec.num_states();
  const int root = spec.root_state(), first_leaf = spec.first_leaf_state();
  const int good = spec.good_state(), bad = spec.bad_state();
  const int wait = HardInstanceSpec::kWaitState;
  TabularMDP m(S, A, H, wait);
  for (int h = 0; h < H; ++h) {
    for (int a = 0; a < A; ++a) {
      if (a == 0 && h < spec.wait_horizon) {
        m.p(h, wait, a, wait) = 1.0;
      } else {
        m.p(h, wait, a, root) = 1.0;
      }
      for (int node = root; node < first_leaf; ++node) {
        const int tree_index = node - 1;
        m.p(h, node, a, 1 + A * tree_index + 1 + a) = 1.0;
      }
      for (int leaf = first_leaf; leaf < good; ++leaf) {
        const bool star = h == spec.h_star && leaf - first_leaf == spec.leaf_star && a == spec.a_star;
        const double pg = spec.p + (star ? spec.eps : 0.0);
        m.p(h, leaf, a, good) = pg;
        m.p(h, leaf, a, bad) = 1.0 - pg;
      }
      m.p(h, good, a, good) = 1.0;
      m.p(h, bad, a, bad) = 1.0;
      if (h >= spec.reward_start()) m.r(h, good, a) = 1.0;
    }
  }
  return m;
}

TabularMDP load_mdp(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open MDP file " + path);
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw InputError("malformed MDP file " + path + ": " + e.what());
  }
  return mdp_from_json(j);
}

void save_mdp(const TabularMDP& mdp, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write MDP file " + path);
  out << mdp_to_json(mdp).dump() << '\n';
}

}  // namespace rsdrl
