#include "rsdrl/planner.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "rsdrl/errors.hpp"

namespace rsdrl {

int greedy_index(std::span<const double> values) {
  if (values.empty()) throw InvalidParameter("greedy_index: empty value list");
  const double best = *std::max_element(values.begin(), values.end());
  for (std::size_t i = 0; i < values.size(); ++i)
    if (values[i] >= best - kTieTol) return int(i);
  return 0;
}

namespace {

enum class Domain { Neutral, Plain, Log };

Domain pick_domain(const TabularMDP& mdp, RiskParam rp) {
  if (rp.neutral()) return Domain::Neutral;
  return std::abs(rp.beta) * mdp.H() > kLogDomainThreshold ? Domain::Log : Domain::Plain;
}

// One-step scalar backup. `next_v` holds V_{h+1} and `next_w` exp(beta V_{h+1})
// (unused in the neutral and log domains). Returns the EntRM value and, in the
// plain domain, the exponential utility J.
struct Backup {
  double q;
  double j;
};

Backup backup(Domain dom, RiskParam rp, double reward, std::span<const double> row,
              const std::vector<double>& next_v, const std::vector<double>& next_w) {
  switch (dom) {
    case Domain::Neutral: {
      double e = 0.0;
      for (std::size_t n = 0; n < row.size(); ++n) e += row[n] * next_v[n];
      return {reward + e, std::numeric_limits<double>::quiet_NaN()};
    }
    case Domain::Plain: {
      double e = 0.0;
      for (std::size_t n = 0; n < row.size(); ++n) e += row[n] * next_w[n];
      const double j = std::exp(rp.beta * reward) * e;
      const double q = std::log(j) / rp.beta;
      if (!std::isfinite(q) || !(j > 0.0)) throw NumericRangeError("exponential utility out of range");
      return {q, j};
    }
    case Domain::Log: {
      double m = -std::numeric_limits<double>::infinity();
      for (std::size_t n = 0; n < row.size(); ++n)
        if (row[n] > 0.0) m = std::max(m, rp.beta * next_v[n]);
      double s = 0.0;
      for (std::size_t n = 0; n < row.size(); ++n)
        if (row[n] > 0.0) s += row[n] * std::exp(rp.beta * next_v[n] - m);
      const double q = reward + (m + std::log(s)) / rp.beta;
      if (!std::isfinite(q)) throw NumericRangeError("log-domain backup out of range");
      return {q, std::exp(rp.beta * q)};
    }
  }
  return {};
}

ValueTable zero_table(int H, int S, double terminal) {
  ValueTable t(H + 1, std::vector<double>(S, 0.0));
  t[H].assign(S, terminal);
  return t;
}

}  // namespace

PlanResult rs_ddp_scalar(const TabularMDP& mdp, RiskParam rp) {
  const int S = mdp.S(), A = mdp.A(), H = mdp.H();
  const Domain dom = pick_domain(mdp, rp);
  PlanResult res;
  res.policy = Policy(H, S);
  res.v_star = zero_table(H, S, 0.0);
  if (dom != Domain::Neutral) res.w_star = zero_table(H, S, 1.0);
  res.q_star.assign(H, std::vector<std::vector<double>>(S, std::vector<double>(A, 0.0)));
  static const std::vector<double> kNone;
  for (int h = H - 1; h >= 0; --h) {
    const auto& next_w = dom == Domain::Neutral ? kNone : res.w_star[h + 1];
    for (int s = 0; s < S; ++s) {
      std::vector<double> j(A);
      for (int a = 0; a < A; ++a) {
        const Backup b = backup(dom, rp, mdp.r(h, s, a), mdp.row(h, s, a), res.v_star[h + 1], next_w);
        res.q_star[h][s][a] = b.q;
        j[a] = b.j;
      }
      const int best = greedy_index(res.q_star[h][s]);
      res.policy(h, s) = best;
      res.v_star[h][s] = res.q_star[h][s][best];
      if (dom != Domain::Neutral) res.w_star[h][s] = j[best];
    }
  }
  return res;
}

ValueTable policy_eval(const TabularMDP& mdp, const Policy& policy, RiskParam rp) {
  const int S = mdp.S(), H = mdp.H();
  if (policy.H() != H || policy.S() != S) throw InvalidParameter("policy shape does not match the MDP");
  const Domain dom = pick_domain(mdp, rp);
  ValueTable v = zero_table(H, S, 0.0);
  std::vector<double> w(S, 1.0), w_next(S);
  for (int h = H - 1; h >= 0; --h) {
    for (int s = 0; s < S; ++s) {
      const int a = policy(h, s);
      if (a < 0 || a >= mdp.A()) throw InvalidParameter("policy action out of range");
      const Backup b = backup(dom, rp, mdp.r(h, s, a), mdp.row(h, s, a), v[h + 1], w);
      v[h][s] = b.q;
      w_next[s] = b.j;
    }
    std::swap(w, w_next);
  }
  return v;
}

PlanResult rs_ddp_distributional(const TabularMDP& mdp, RiskParam rp, std::size_t support_cap) {
  if (support_cap < 2) throw InvalidParameter("support_cap must be at least 2");
  const int S = mdp.S(), A = mdp.A(), H = mdp.H();
  PlanResult res;
  res.policy = Policy(H, S);
  res.v_star = zero_table(H, S, 0.0);
  if (!rp.neutral()) res.w_star = zero_table(H, S, 1.0);
  res.q_star.assign(H, std::vector<std::vector<double>>(S, std::vector<double>(A, 0.0)));
  DistTables dt;
  dt.nu.assign(H + 1, std::vector<DiscreteDistribution>(S, DiscreteDistribution::dirac(0.0)));
  dt.eta.assign(H, std::vector<std::vector<DiscreteDistribution>>(
                       S, std::vector<DiscreteDistribution>(A, DiscreteDistribution::dirac(0.0))));
  for (int h = H - 1; h >= 0; --h) {
    for (int s = 0; s < S; ++s) {
      for (int a = 0; a < A; ++a) {
        auto eta = shift(mix(mdp.row(h, s, a), dt.nu[h + 1]), mdp.r(h, s, a));
        if (eta.size() > support_cap) {
          std::ostringstream msg;
          msg << "support cap " << support_cap << " exceeded at (h=" << h << ", s=" << s
              << ", a=" << a << "): " << eta.size() << " atoms";
          throw CapacityError(msg.str());
        }
        res.q_star[h][s][a] = entrm(eta, rp);
        dt.eta[h][s][a] = std::move(eta);
      }
      const int best = greedy_index(res.q_star[h][s]);
      res.policy(h, s) = best;
      dt.nu[h][s] = dt.eta[h][s][best];
      res.v_star[h][s] = res.q_star[h][s][best];
      if (!rp.neutral()) res.w_star[h][s] = eu(dt.nu[h][s], rp);
    }
  }
  res.dists = std::move(dt);
  return res;
}

PlanResult brute_force_optimal(const TabularMDP& mdp, RiskParam rp) {
  const int S = mdp.S(), A = mdp.A(), H = mdp.H();
  const double count = std::pow(double(A), double(S) * H);
  if (count > kBruteForceLimit) {
    std::ostringstream msg;
    msg << "brute-force enumeration of " << count << " policies exceeds the limit of "
        << kBruteForceLimit;
    throw CapacityError(msg.str());
  }
  Policy pi(H, S, 0);
  Policy best_pi = pi;
  ValueTable best_v;
  double best = -std::numeric_limits<double>::infinity();
  const std::size_t digits = std::size_t(H) * S;
  while (true) {
    ValueTable v = policy_eval(mdp, pi, rp);
    double total = 0.0;
    for (double x : v[0]) total += x;
    if (best_v.empty() || total > best + 1e-12 * (1.0 + std::abs(best))) {
      best = total;
      best_pi = pi;
      best_v = std::move(v);
    }
    // Odometer over the [h][s] action array, last entry least significant.
    bool wrapped = true;
    for (std::size_t i = digits; i-- > 0;) {
      int& d = pi(int(i / S), int(i % S));
      if (++d < A) {
        wrapped = false;
        break;
      }
      d = 0;
    }
    if (wrapped) break;
  }
  PlanResult res;
  res.policy = best_pi;
  res.v_star = std::move(best_v);
  if (!rp.neutral()) {
    res.w_star = res.v_star;
    for (auto& row : res.w_star)
      for (double& x : row) x = std::exp(rp.beta * x);
  }
  return res;
}

}  // namespace rsdrl
