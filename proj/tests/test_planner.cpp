#include <doctest.h>

#include <cmath>
#include <random>

#include "rsdrl/errors.hpp"
#include "rsdrl/mdp.hpp"
#include "rsdrl/planner.hpp"
#include "support.hpp"

using namespace rsdrl;
using rsdrl::testing::random_mdp;

namespace {

const double kBetas[] = {-2.0, -1.1, -0.3, 0.4, 1.5};

TabularMDP one_action_restriction(const TabularMDP& m, int a) {
  TabularMDP r(m.S(), 1, m.H(), m.initial_state());
  for (int h = 0; h < m.H(); ++h)
    for (int s = 0; s < m.S(); ++s) {
      for (int n = 0; n < m.S(); ++n) r.p(h, s, 0, n) = m.p(h, s, a, n);
      r.r(h, s, 0) = m.r(h, s, a);
    }
  return r;
}

}  // namespace

TEST_CASE("greedy_index: lowest index among near ties") {
  const std::vector<double> v{1.0, 3.0, 3.0 - 1e-13, 2.0};
  CHECK(greedy_index(v) == 1);
  const std::vector<double> w{1.0, 3.0 - 1e-13, 3.0};
  CHECK(greedy_index(w) == 1);
  const std::vector<double> x{1.0, 3.0 - 1e-6, 3.0};
  CHECK(greedy_index(x) == 2);
}

TEST_CASE("H = 1: value is the best immediate reward") {
  std::mt19937_64 g(21);
  for (int i = 0; i < 50; ++i) {
    const auto m = random_mdp(g, 3, 3, 1);
    for (double beta : kBetas) {
      const RiskParam rp(beta);
      const auto d = rs_ddp_distributional(m, rp);
      const auto sc = rs_ddp_scalar(m, rp);
      const auto bf = brute_force_optimal(m, rp);
      for (int s = 0; s < 3; ++s) {
        double best = 0.0;
        for (int a = 0; a < 3; ++a) best = std::max(best, m.r(0, s, a));
        CHECK(std::abs(d.v_star[0][std::size_t(s)] - best) <= 1e-12);
        CHECK(std::abs(sc.v_star[0][std::size_t(s)] - best) <= 1e-12);
        CHECK(bf.v_star[0][std::size_t(s)] == sc.v_star[0][std::size_t(s)]);
      }
    }
  }
}

TEST_CASE("deterministic chain: optimal return is a Dirac at the path sum") {
  TabularMDP m(3, 2, 3, 0);
  for (int h = 0; h < 3; ++h)
    for (int s = 0; s < 3; ++s) {
      m.p(h, s, 0, s) = 1.0;
      m.p(h, s, 1, (s + 1) % 3) = 1.0;
      m.r(h, s, 0) = 0.2;
      m.r(h, s, 1) = s == 1 ? 0.9 : 0.1;
    }
  const auto res = rs_ddp_distributional(m, RiskParam(-0.7));
  const auto& nu = res.dists->nu[0][0];
  REQUIRE(nu.size() == 1);
  // best path from 0: move to 1, move on collecting 0.9, then stay
  const auto bf = brute_force_optimal(m, RiskParam(-0.7));
  CHECK(nu.atoms()[0] == doctest::Approx(bf.v_star[0][0]).epsilon(1e-14));
  CHECK(nu.atoms()[0] == doctest::Approx(0.1 + 0.2 + 0.9).epsilon(1e-14));
}

TEST_CASE("distributional, scalar and brute force agree on random tiny MDPs") {
  std::mt19937_64 g(22);
  for (int i = 0; i < 200; ++i) {
    const int S = 1 + int(g() % 3), A = 1 + int(g() % 2), H = 1 + int(g() % 3);
    const auto m = random_mdp(g, S, A, H);
    const RiskParam rp(kBetas[i % 5]);
    const auto d = rs_ddp_distributional(m, rp);
    const auto sc = rs_ddp_scalar(m, rp);
    const auto bf = brute_force_optimal(m, rp);
    for (int s = 0; s < S; ++s) {
      CHECK(std::abs(d.v_star[0][std::size_t(s)] - bf.v_star[0][std::size_t(s)]) <= 1e-10);
      CHECK(std::abs(sc.v_star[0][std::size_t(s)] - bf.v_star[0][std::size_t(s)]) <= 1e-10);
    }
    for (int h = 0; h <= H; ++h)
      for (int s = 0; s < S; ++s) {
        const double v = sc.v_star[std::size_t(h)][std::size_t(s)];
        CHECK(std::abs(d.v_star[std::size_t(h)][std::size_t(s)] - v) <= 1e-10);
        CHECK(std::abs(std::log(sc.w_star[std::size_t(h)][std::size_t(s)]) / rp.beta - v) <= 1e-9);
        CHECK(std::abs(std::log(d.w_star[std::size_t(h)][std::size_t(s)]) / rp.beta - v) <= 1e-9);
        CHECK(v >= -1e-12);
        CHECK(v <= H - h + 1e-12);
      }
    // identical policies wherever the argmax is unique by a clear margin
    for (int h = 0; h < H; ++h)
      for (int s = 0; s < S; ++s) {
        const auto& q = sc.q_star[std::size_t(h)][std::size_t(s)];
        std::vector<double> sorted(q);
        std::sort(sorted.rbegin(), sorted.rend());
        if (sorted.size() < 2 || sorted[0] - sorted[1] > 1e-9) CHECK(d.policy(h, s) == sc.policy(h, s));
        for (int a = 0; a < A; ++a)
          CHECK(std::abs(entrm(d.dists->eta[std::size_t(h)][std::size_t(s)][std::size_t(a)], rp) -
                         q[std::size_t(a)]) <= 1e-9);
      }
  }
}

TEST_CASE("principle of optimality: the optimal tail is optimal") {
  std::mt19937_64 g(23);
  for (int i = 0; i < 40; ++i) {
    const auto m = random_mdp(g, 2, 2, 3);
    const RiskParam rp(kBetas[i % 5]);
    const auto bf = brute_force_optimal(m, rp);
    const auto tail_values = policy_eval(m, bf.policy, rp);
    // states reachable at step h under the optimal policy from any start
    std::vector<bool> reach(std::size_t(m.S()), true);
    for (int h = 0; h < m.H(); ++h) {
      const auto best = testing::best_tail_values(m, rp, h);
      for (int s = 0; s < m.S(); ++s)
        if (reach[std::size_t(s)])
          CHECK(std::abs(tail_values[std::size_t(h)][std::size_t(s)] - best[std::size_t(s)]) <= 1e-10);
      std::vector<bool> next(reach.size(), false);
      for (int s = 0; s < m.S(); ++s)
        if (reach[std::size_t(s)])
          for (int n = 0; n < m.S(); ++n)
            if (m.p(h, s, bf.policy(h, s), n) > 0.0) next[std::size_t(n)] = true;
      reach = next;
    }
  }
}

TEST_CASE("small beta approaches risk-neutral dynamic programming") {
  std::mt19937_64 g(24);
  for (int i = 0; i < 50; ++i) {
    const auto m = random_mdp(g, 4, 3, 5);
    const auto rn = testing::risk_neutral_values(m);
    const auto sc = rs_ddp_scalar(m, RiskParam(1e-8));
    const auto zero = rs_ddp_scalar(m, RiskParam(0.0));
    CHECK(zero.w_star.empty());
    for (int s = 0; s < 4; ++s) {
      CHECK(std::abs(sc.v_star[0][std::size_t(s)] - rn[std::size_t(s)]) <= 1e-6);
      CHECK(std::abs(zero.v_star[0][std::size_t(s)] - rn[std::size_t(s)]) <= 1e-12);
    }
  }
}

TEST_CASE("log domain agrees with the plain recursion and avoids overflow") {
  std::mt19937_64 g(25);
  const auto m = random_mdp(g, 3, 2, 4);
  for (double beta : {-100.0, 100.0}) {
    const auto sc = rs_ddp_scalar(m, RiskParam(beta));
    const auto bf = brute_force_optimal(m, RiskParam(beta));
    CHECK(sc.v_star[0][0] == doctest::Approx(bf.v_star[0][0]).epsilon(1e-10));
  }
  // |beta| H = 2000 forces the log domain; exp(beta H) overflows in plain form
  TabularMDP big(2, 2, 4, 0);
  for (int h = 0; h < 4; ++h)
    for (int s = 0; s < 2; ++s) {
      big.p(h, s, 0, 0) = 0.5;
      big.p(h, s, 0, 1) = 0.5;
      big.p(h, s, 1, s) = 1.0;
      big.r(h, s, 0) = 1.0;
      big.r(h, s, 1) = 0.5;
    }
  const auto res = rs_ddp_scalar(big, RiskParam(500.0));
  CHECK(std::isfinite(res.v_star[0][0]));
  CHECK(res.v_star[0][0] == doctest::Approx(4.0));
  const auto neg = rs_ddp_scalar(big, RiskParam(-500.0));
  CHECK(neg.v_star[0][0] == doctest::Approx(4.0));
}

TEST_CASE("policy_eval") {
  std::mt19937_64 g(26);
  for (int i = 0; i < 30; ++i) {
    const auto m = random_mdp(g, 3, 2, 3);
    const RiskParam rp(kBetas[i % 5]);
    const auto sc = rs_ddp_scalar(m, rp);
    const auto v = policy_eval(m, sc.policy, rp);
    for (int h = 0; h <= m.H(); ++h)
      for (int s = 0; s < m.S(); ++s)
        CHECK(std::abs(v[std::size_t(h)][std::size_t(s)] - sc.v_star[std::size_t(h)][std::size_t(s)]) <= 1e-12);
  }
  auto m = random_mdp(g, 3, 2, 3);
  for (int h = 0; h < 3; ++h)
    for (int s = 0; s < 3; ++s)
      for (int a = 0; a < 2; ++a) m.r(h, s, a) = 0.0;
  const auto z = policy_eval(m, Policy(3, 3, 1), RiskParam(-1.1));
  for (const auto& row : z)
    for (double x : row) CHECK(std::abs(x) <= 1e-14);
}

TEST_CASE("risky MDP: safe policy beats the risk-neutral optimum under beta = -1.1") {
  const auto m = make_risky_mdp();
  const RiskParam rp(-1.1);
  const auto safe = policy_eval(m, Policy(5, 6, 4), rp);
  const auto risky = policy_eval(m, Policy(5, 6, 0), rp);
  CHECK(std::abs(safe[0][0] - 1.5989319995876168) <= 1e-12);
  CHECK(std::abs(risky[0][0] - 1.4756794743436891) <= 1e-12);
  CHECK(safe[0][0] > risky[0][0]);
  // the risk-neutral optimum is the risky action
  const auto neutral = rs_ddp_scalar(m, RiskParam(0.0));
  CHECK(neutral.policy(0, 0) == 0);
  const auto opt = rs_ddp_scalar(m, rp);
  // at the last step every action pays the same, so only earlier steps matter
  for (int h = 0; h + 1 < 5; ++h)
    for (int s = 0; s < 6; ++s) CHECK(opt.policy(h, s) == 4);
  // and the distributional planner sees the same return distribution
  const auto dist_safe = rs_ddp_distributional(one_action_restriction(m, 4), rp);
  CHECK(std::abs(dist_safe.v_star[0][0] - safe[0][0]) <= 1e-12);
}

TEST_CASE("brute force on the smallest hard instance reaches the special triple") {
  for (double beta : {-1.0, 1.0}) {
    HardInstanceSpec spec;
    spec.branching = 2;
    spec.depth = 1;
    spec.horizon = 3;
    spec.wait_horizon = 1;
    spec.h_star = 1;
    spec.leaf_star = 0;
    spec.a_star = 1;
    spec.p = 0.4;
    spec.eps = 0.3;
    spec.beta = beta;
    const auto m = make_hard_mdp(spec);
    const auto bf = brute_force_optimal(m, RiskParam(beta));
    CHECK(bf.v_star[0][0] == doctest::Approx(hard_optimal_value(spec)).epsilon(1e-12));
    // follow the deterministic part of the optimal path
    int s = m.initial_state();
    bool reached = false;
    for (int h = 0; h < m.H(); ++h) {
      const int a = bf.policy(h, s);
      if (h == spec.h_star && s == spec.first_leaf_state() + spec.leaf_star && a == spec.a_star) reached = true;
      int next = -1;
      for (int n = 0; n < m.S(); ++n)
        if (m.p(h, s, a, n) == 1.0) next = n;
      if (next < 0) break;
      s = next;
    }
    CHECK(reached);
  }
}

TEST_CASE("support cap and enumeration guard") {
  std::mt19937_64 g(27);
  TabularMDP m(4, 2, 6, 0);
  for (int h = 0; h < 6; ++h)
    for (int s = 0; s < 4; ++s)
      for (int a = 0; a < 2; ++a) {
        for (int n = 0; n < 4; ++n) m.p(h, s, a, n) = 0.25;
        m.r(h, s, a) = std::uniform_real_distribution<double>(0.0, 1.0)(g);
      }
  try {
    rs_ddp_distributional(m, RiskParam(0.5), 50);
    FAIL("expected a capacity error");
  } catch (const CapacityError& e) {
    CHECK(std::string(e.what()).find("h=") != std::string::npos);
    CHECK(std::string(e.what()).find("a=") != std::string::npos);
  }
  CHECK_THROWS_AS(rs_ddp_distributional(m, RiskParam(0.5), 1), InvalidParameter);
  CHECK_THROWS_AS(brute_force_optimal(random_mdp(g, 4, 3, 4), RiskParam(0.5)), CapacityError);
}
