#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <random>
#include <vector>

#include "rsdrl/algos.hpp"
#include "rsdrl/dist.hpp"
#include "rsdrl/mdp.hpp"
#include "rsdrl/planner.hpp"

namespace rsdrl::testing {

inline std::vector<double> random_simplex(std::mt19937_64& g, int n, double zero_prob = 0.0) {
  std::exponential_distribution<double> ex(1.0);
  std::bernoulli_distribution zero(zero_prob);
  std::vector<double> p(static_cast<std::size_t>(n));
  double total = 0.0;
  for (auto& x : p) {
    x = zero(g) ? 0.0 : ex(g);
    total += x;
  }
  if (total == 0.0) {
    p[std::uniform_int_distribution<int>(0, n - 1)(g)] = 1.0;
    return p;
  }
  for (auto& x : p) x /= total;
  return p;
}

inline DiscreteDistribution random_dist(std::mt19937_64& g, double lo, double hi, int max_atoms = 6) {
  const int n = std::uniform_int_distribution<int>(1, max_atoms)(g);
  std::uniform_real_distribution<double> u(lo, hi);
  std::vector<double> x(static_cast<std::size_t>(n));
  for (auto& v : x) v = u(g);
  return {x, random_simplex(g, n)};
}

/// Random MDP with sparse-ish rows and rewards in [0, 1].
inline TabularMDP random_mdp(std::mt19937_64& g, int S, int A, int H) {
  TabularMDP m(S, A, H, std::uniform_int_distribution<int>(0, S - 1)(g));
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int h = 0; h < H; ++h)
    for (int s = 0; s < S; ++s)
      for (int a = 0; a < A; ++a) {
        const auto p = random_simplex(g, S, 0.3);
        for (int n = 0; n < S; ++n) m.p(h, s, a, n) = p[std::size_t(n)];
        m.r(h, s, a) = u(g) < 0.2 ? 0.0 : u(g);
      }
  return m;
}

/// Expected-value dynamic programming, V_0 per state.
inline std::vector<double> risk_neutral_values(const TabularMDP& m) {
  std::vector<double> v(std::size_t(m.S()), 0.0), nv(v.size());
  for (int h = m.H() - 1; h >= 0; --h) {
    for (int s = 0; s < m.S(); ++s) {
      double best = -1e300;
      for (int a = 0; a < m.A(); ++a) {
        double q = m.r(h, s, a);
        for (int n = 0; n < m.S(); ++n) q += m.p(h, s, a, n) * v[std::size_t(n)];
        best = std::max(best, q);
      }
      nv[std::size_t(s)] = best;
    }
    v = nv;
  }
  return v;
}

/**
 * Maximum of sum_i P_i w_i over {P in simplex, ||P - p_hat||_1 <= c} by
 * enumerating the vertices of every orthant piece of the ball.
 */
inline double l1_ball_vertex_max(const std::vector<double>& p_hat, const std::vector<double>& w, double c) {
  const int n = int(p_hat.size());
  double best = -1e300;
  for (int mask = 0; mask < (1 << n); ++mask) {
    // Inequalities G x <= b describing the orthant piece.
    std::vector<Eigen::VectorXd> G;
    std::vector<double> b;
    Eigen::VectorXd budget(n);
    double budget_rhs = c;
    for (int i = 0; i < n; ++i) {
      const double sg = (mask >> i) & 1 ? 1.0 : -1.0;  // sign of P_i - p_hat_i
      Eigen::VectorXd row = Eigen::VectorXd::Zero(n);
      row(i) = -sg;
      G.push_back(row);
      b.push_back(-sg * p_hat[std::size_t(i)]);
      row = Eigen::VectorXd::Zero(n);
      row(i) = -1.0;
      G.push_back(row);
      b.push_back(0.0);
      budget(i) = sg;
      budget_rhs += sg * p_hat[std::size_t(i)];
    }
    G.push_back(budget);
    b.push_back(budget_rhs);
    const int m = int(G.size());
    // Choose n - 1 active inequalities plus the equality sum P = 1.
    std::vector<bool> sel(std::size_t(m), false);
    std::fill(sel.begin(), sel.begin() + (n - 1), true);
    do {
      Eigen::MatrixXd M(n, n);
      Eigen::VectorXd rhs(n);
      M.row(0) = Eigen::RowVectorXd::Ones(n);
      rhs(0) = 1.0;
      int r = 1;
      for (int k = 0; k < m; ++k)
        if (sel[std::size_t(k)]) {
          M.row(r) = G[std::size_t(k)].transpose();
          rhs(r) = b[std::size_t(k)];
          ++r;
        }
      Eigen::FullPivLU<Eigen::MatrixXd> lu(M);
      if (lu.rank() < n) continue;
      const Eigen::VectorXd x = lu.solve(rhs);
      bool feasible = true;
      for (int k = 0; k < m && feasible; ++k)
        if (G[std::size_t(k)].dot(x) > b[std::size_t(k)] + 1e-10) feasible = false;
      if (!feasible) continue;
      double obj = 0.0;
      for (int i = 0; i < n; ++i) obj += x(i) * w[std::size_t(i)];
      best = std::max(best, obj);
    } while (std::prev_permutation(sel.begin(), sel.end()));
  }
  return best;
}

/// Enumerates tail policies from step h and returns the best V_h(s) of each state.
inline std::vector<double> best_tail_values(const TabularMDP& m, RiskParam rp, int h) {
  const int S = m.S(), A = m.A(), H = m.H();
  std::vector<double> best(std::size_t(S), -1e300);
  Policy pi(H, S, 0);
  const int digits = (H - h) * S;
  std::vector<int> d(std::size_t(digits), 0);
  while (true) {
    for (int i = 0; i < digits; ++i) pi(h + i / S, i % S) = d[std::size_t(i)];
    const auto v = policy_eval(m, pi, rp);
    for (int s = 0; s < S; ++s) best[std::size_t(s)] = std::max(best[std::size_t(s)], v[std::size_t(h)][std::size_t(s)]);
    int i = digits - 1;
    while (i >= 0 && ++d[std::size_t(i)] == A) d[std::size_t(i--)] = 0;
    if (i < 0) break;
  }
  return best;
}

/**
 * Learner state whose counts are sampled from the true model: each pair is
 * unvisited with probability 0.2, otherwise visited N ~ U[1, 400] times.
 */
inline LearnerState random_count_snapshot(std::mt19937_64& g, const TabularMDP& m) {
  LearnerState st(m);
  std::bernoulli_distribution unvisited(0.2);
  std::uniform_int_distribution<int> visits(1, 400);
  for (int h = 0; h < m.H(); ++h)
    for (int s = 0; s < m.S(); ++s)
      for (int a = 0; a < m.A(); ++a) {
        if (unvisited(g)) continue;
        const auto row = m.row(h, s, a);
        std::discrete_distribution<int> next(row.begin(), row.end());
        const int n = visits(g);
        for (int i = 0; i < n; ++i) st.record(h, s, a, next(g));
      }
  return st;
}

/// Radius equal to the true l1 error of the empirical row.
inline std::function<double(const LearnerState&, int, int, int)> exact_l1_radius(const TabularMDP& truth) {
  return [truth](const LearnerState& st, int h, int s, int a) {
    const auto p = st.p_hat(h, s, a);
    double d = 0.0;
    for (int n = 0; n < truth.S(); ++n) d += std::abs(p[std::size_t(n)] - truth.p(h, s, a, n));
    return d;
  };
}

struct OptimismTally {
  int episodes = 0;
  int violations = 0;
  double worst = std::numeric_limits<double>::infinity();  ///< smallest sign(beta) (W_1 - W*_1)
};

/// Runs a learner with exact radii and checks sign(beta) (W_1 - W*_1) >= -1e-9 before each episode.
inline OptimismTally optimism_run(Algorithm algo, const TabularMDP& m, double beta, std::uint64_t seed,
                                  int episodes) {
  auto cfg = LearnerConfig::for_mdp(m, beta, 0.005, episodes);
  cfg.radius_override = exact_l1_radius(m);
  Learner learner(algo, cfg, m);
  const RiskParam rp(beta);
  const double w_star = rs_ddp_scalar(m, rp).w_star[0][std::size_t(m.initial_state())];
  OptimismTally t;
  for (int k = 0; k < episodes; ++k) {
    const Policy& pi = learner.begin_episode();
    const double w1 = learner.last_plan().w[0][std::size_t(m.initial_state())];
    const double gap = rp.sign() * (w1 - w_star);
    ++t.episodes;
    if (gap < -1e-9) ++t.violations;
    t.worst = std::min(t.worst, gap);
    auto rng = StreamRng::for_episode(seed, std::uint64_t(k));
    learner.end_episode(simulate_episode(m, pi, rng));
  }
  return t;
}

/// Actions taken by a learner over `episodes` episodes of one seed.
inline std::vector<int> action_sequence(Algorithm algo, const TabularMDP& m, double beta, std::uint64_t seed,
                                        int episodes) {
  Learner learner(algo, LearnerConfig::for_mdp(m, beta, 0.005, episodes), m);
  std::vector<int> actions;
  for (int k = 0; k < episodes; ++k) {
    auto rng = StreamRng::for_episode(seed, std::uint64_t(k));
    const auto traj = simulate_episode(m, learner.begin_episode(), rng);
    for (const auto& st : traj.steps) actions.push_back(st.action);
    learner.end_episode(traj);
  }
  return actions;
}

/**
 * One run of a uniformly random behaviour policy. Returns true when some
 * visited row leaves its l1 confidence ball at some episode.
 */
inline bool concentration_violated(const TabularMDP& m, double delta, int episodes, std::uint64_t seed) {
  const auto cfg = LearnerConfig::for_mdp(m, -1.0, delta, episodes);
  LearnerState st(m);
  for (int k = 0; k < episodes; ++k) {
    auto rng = StreamRng::for_episode(seed, std::uint64_t(k));
    Policy pi(m.H(), m.S());
    for (int h = 0; h < m.H(); ++h)
      for (int s = 0; s < m.S(); ++s) pi(h, s) = int(rng() % std::uint64_t(m.A()));
    st.observe(simulate_episode(m, pi, rng));
    for (int h = 0; h < m.H(); ++h)
      for (int s = 0; s < m.S(); ++s)
        for (int a = 0; a < m.A(); ++a) {
          if (st.count(h, s, a) == 0) continue;
          const auto p = st.p_hat(h, s, a);
          double d = 0.0;
          for (int n = 0; n < m.S(); ++n) d += std::abs(p[std::size_t(n)] - m.p(h, s, a, n));
          if (d > optimism_radius(st, cfg, h, s, a)) return true;
        }
  }
  return false;
}

}  // namespace rsdrl::testing
