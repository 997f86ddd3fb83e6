#include "rsdrl/dist.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>
#include <utility>

#include "rsdrl/errors.hpp"

namespace rsdrl {

namespace {

using AtomList = std::vector<std::pair<double, double>>;

// Merges a list sorted by atom: drops zero mass, folds atoms within
// kAtomMergeTol of the first atom of their group.
void merge_sorted(const AtomList& pairs, std::vector<double>& atoms, std::vector<double>& probs) {
  atoms.clear();
  probs.clear();
  atoms.reserve(pairs.size());
  probs.reserve(pairs.size());
  for (const auto& [x, p] : pairs) {
    if (p == 0.0) continue;
    if (!atoms.empty() && x - atoms.back() <= kAtomMergeTol) {
      probs.back() += p;
    } else {
      atoms.push_back(x);
      probs.push_back(p);
    }
  }
}

void check_finite_beta(double beta) {
  if (!std::isfinite(beta)) throw InvalidParameter("risk parameter must be finite");
}

void require_nonzero(RiskParam rp, const char* op) {
  if (rp.neutral()) throw InvalidParameter(std::string(op) + " is undefined for beta = 0");
}

}  // namespace

RiskParam::RiskParam(double b) : beta(b) { check_finite_beta(b); }

BernoulliSupport::BernoulliSupport(double t1, double t2) : theta1(t1), theta2(t2) {
  if (!std::isfinite(t1) || !std::isfinite(t2) || !(t1 < t2))
    throw InvalidParameter("Bernoulli support requires finite theta1 < theta2");
}

DiscreteDistribution::DiscreteDistribution(std::vector<double> atoms, std::vector<double> probs) {
  if (atoms.size() != probs.size())
    throw InvalidParameter("atoms and probs must have the same length");
  AtomList pairs;
  pairs.reserve(atoms.size());
  double total = 0.0;
  for (std::size_t i = 0; i < atoms.size(); ++i) {
    if (!std::isfinite(atoms[i])) throw InvalidParameter("atoms must be finite");
    if (!std::isfinite(probs[i]) || probs[i] < 0.0)
      throw InvalidParameter("probabilities must be finite and nonnegative");
    total += probs[i];
    pairs.emplace_back(atoms[i], probs[i]);
  }
  if (std::abs(total - 1.0) > kMassTol)
    throw InvalidParameter("probabilities must sum to 1, got " + std::to_string(total));
  std::stable_sort(pairs.begin(), pairs.end(),
                   [](const auto& a, const auto& b) { return a.first < b.first; });
  merge_sorted(pairs, atoms_, probs_);
}

DiscreteDistribution DiscreteDistribution::dirac(double x) { return {{x}, {1.0}}; }

DiscreteDistribution DiscreteDistribution::bernoulli(double a, double b, double p) {
  return {{a, b}, {1.0 - p, p}};
}

double DiscreteDistribution::mean() const {
  return std::inner_product(atoms_.begin(), atoms_.end(), probs_.begin(), 0.0);
}

double DiscreteDistribution::variance() const {
  const double m = mean();
  double v = 0.0;
  for (std::size_t i = 0; i < atoms_.size(); ++i) v += probs_[i] * (atoms_[i] - m) * (atoms_[i] - m);
  return v;
}

double DiscreteDistribution::cdf(double x) const {
  double acc = 0.0;
  for (std::size_t i = 0; i < atoms_.size() && atoms_[i] <= x; ++i) acc += probs_[i];
  return std::min(acc, 1.0);
}

double DiscreteDistribution::prob_at(double x) const {
  for (std::size_t i = 0; i < atoms_.size(); ++i)
    if (std::abs(atoms_[i] - x) <= kAtomMergeTol) return probs_[i];
  return 0.0;
}

double entrm(const DiscreteDistribution& d, RiskParam rp) {
  if (rp.neutral()) return d.mean();
  const double beta = rp.beta;
  // Anchor at the atom with the largest exponent so every term is <= 1.
  const double anchor = beta > 0.0 ? d.max() : d.min();
  double s = 0.0;
  const auto& x = d.atoms();
  const auto& p = d.probs();
  for (std::size_t i = 0; i < x.size(); ++i) s += p[i] * std::exp(beta * (x[i] - anchor));
  const double v = anchor + std::log(s) / beta;
  if (!std::isfinite(v)) throw NumericRangeError("entrm evaluation is not finite");
  return v;
}

double eu(const DiscreteDistribution& d, RiskParam rp) {
  require_nonzero(rp, "eu");
  double s = 0.0;
  const auto& x = d.atoms();
  const auto& p = d.probs();
  for (std::size_t i = 0; i < x.size(); ++i) s += p[i] * std::exp(rp.beta * x[i]);
  if (!std::isfinite(s)) throw NumericRangeError("eu overflows double precision");
  return s;
}

DiscreteDistribution mix(std::span<const double> weights,
                         std::span<const DiscreteDistribution> dists) {
  if (weights.size() != dists.size())
    throw InvalidParameter("mix: weights and distributions differ in length");
  double total = 0.0;
  std::size_t n = 0;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    if (!std::isfinite(weights[i]) || weights[i] < 0.0)
      throw InvalidParameter("mix: weights must be nonnegative");
    total += weights[i];
    if (weights[i] > 0.0) n += dists[i].size();
  }
  if (std::abs(total - 1.0) > kMassTol)
    throw InvalidParameter("mix: weights must sum to 1, got " + std::to_string(total));
  AtomList pairs;
  pairs.reserve(n);
  for (std::size_t i = 0; i < weights.size(); ++i) {
    if (weights[i] == 0.0) continue;
    const auto& x = dists[i].atoms();
    const auto& p = dists[i].probs();
    for (std::size_t j = 0; j < x.size(); ++j) pairs.emplace_back(x[j], weights[i] * p[j]);
  }
  std::stable_sort(pairs.begin(), pairs.end(),
                   [](const auto& a, const auto& b) { return a.first < b.first; });
  std::vector<double> atoms, probs;
  merge_sorted(pairs, atoms, probs);
  return {DiscreteDistribution::Unchecked{}, std::move(atoms), std::move(probs)};
}

DiscreteDistribution shift(const DiscreteDistribution& d, double c) {
  if (!std::isfinite(c)) throw InvalidParameter("shift amount must be finite");
  AtomList pairs;
  pairs.reserve(d.size());
  for (std::size_t i = 0; i < d.size(); ++i) pairs.emplace_back(d.atoms()[i] + c, d.probs()[i]);
  std::vector<double> atoms, probs;
  merge_sorted(pairs, atoms, probs);
  return {DiscreteDistribution::Unchecked{}, std::move(atoms), std::move(probs)};
}

double sup_distance(const DiscreteDistribution& f, const DiscreteDistribution& g) {
  const auto& fx = f.atoms();
  const auto& gx = g.atoms();
  std::size_t i = 0, j = 0;
  double ff = 0.0, gg = 0.0, best = 0.0;
  while (i < fx.size() || j < gx.size()) {
    double x;
    if (j >= gx.size() || (i < fx.size() && fx[i] <= gx[j])) {
      x = fx[i];
    } else {
      x = gx[j];
    }
    while (i < fx.size() && fx[i] <= x + kAtomMergeTol) ff += f.probs()[i++];
    while (j < gx.size() && gx[j] <= x + kAtomMergeTol) gg += g.probs()[j++];
    best = std::max(best, std::abs(ff - gg));
  }
  return std::min(best, 1.0);
}

DiscreteDistribution optimism_cdf(const DiscreteDistribution& d, double c, double support_hi) {
  if (!(c >= 0.0 && c <= 1.0)) throw InvalidParameter("optimism_cdf: c must lie in [0, 1]");
  if (!std::isfinite(support_hi)) throw InvalidParameter("optimism_cdf: support_hi must be finite");
  if (d.max() > support_hi + kAtomMergeTol)
    throw InvalidParameter("optimism_cdf: atom exceeds support_hi");
  std::vector<double> atoms, probs;
  atoms.reserve(d.size() + 1);
  probs.reserve(d.size() + 1);
  double cum = 0.0, lowered_prev = 0.0;
  for (std::size_t i = 0; i < d.size(); ++i) {
    const double x = d.atoms()[i];
    if (x >= support_hi - kAtomMergeTol) break;
    cum += d.probs()[i];
    const double lowered = std::max(cum - c, 0.0);
    const double p = lowered - lowered_prev;
    lowered_prev = lowered;
    if (p > 0.0) {
      atoms.push_back(x);
      probs.push_back(p);
    }
  }
  const double top = 1.0 - lowered_prev;
  if (top > 0.0) {
    atoms.push_back(support_hi);
    probs.push_back(top);
  }
  return {std::move(atoms), std::move(probs)};
}

std::vector<double> optimism_pmf(std::span<const double> p_hat, std::span<const double> values,
                                 double c) {
  const std::size_t n = p_hat.size();
  if (values.size() != n || n == 0)
    throw InvalidParameter("optimism_pmf: p_hat and values must be nonempty and equal length");
  if (!(c >= 0.0)) throw InvalidParameter("optimism_pmf: radius must be nonnegative");
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (!(p_hat[i] >= 0.0)) throw InvalidParameter("optimism_pmf: negative probability");
    if (!std::isfinite(values[i])) throw InvalidParameter("optimism_pmf: values must be finite");
    total += p_hat[i];
  }
  if (std::abs(total - 1.0) > kMassTol)
    throw InvalidParameter("optimism_pmf: p_hat must sum to 1");

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
  // Values within kTieTol of a group's first value tie; ties are ordered by index.
  std::vector<std::size_t> group(n);
  std::size_t g = 0;
  double start = values[order[0]];
  for (std::size_t k = 0; k < n; ++k) {
    if (values[order[k]] - start > kTieTol) {
      ++g;
      start = values[order[k]];
    }
    group[order[k]] = g;
  }
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return group[a] != group[b] ? group[a] < group[b] : a < b;
  });

  std::vector<double> p(p_hat.begin(), p_hat.end());
  const std::size_t recipient = order.back();
  double budget = c / 2.0;
  for (std::size_t k = 0; k + 1 < n && budget > 0.0; ++k) {
    const std::size_t s = order[k];
    const double take = std::min(p[s], budget);
    p[s] -= take;
    p[recipient] += take;
    budget -= take;
  }
  return p;
}

namespace {

// expm1(a) / expm1(b) for a, b of one sign with |a| <= |b|, rescaled when expm1(b) would overflow.
double expm1_ratio(double a, double b) {
  if (b < 700.0) return std::expm1(a) / std::expm1(b);
  return std::exp(a - b) * std::expm1(-a) / std::expm1(-b);
}

struct ProjectedMass {
  double left = 0.0, right = 0.0;
};

// Both masses are accumulated directly so neither is formed as 1 minus the other.
ProjectedMass project_masses(const DiscreteDistribution& d, BernoulliSupport sup, RiskParam rp) {
  require_nonzero(rp, "bernoulli_project");
  const double t1 = sup.theta1, t2 = sup.theta2, beta = rp.beta;
  if (d.min() < t1 - kAtomMergeTol || d.max() > t2 + kAtomMergeTol)
    throw InvalidParameter("bernoulli_project: atom outside the projection support");
  const double span = t2 - t1;
  ProjectedMass m;
  for (std::size_t i = 0; i < d.size(); ++i) {
    const double x = std::clamp(d.atoms()[i], t1, t2);
    m.right += d.probs()[i] * expm1_ratio(beta * (x - t1), beta * span);
    m.left += d.probs()[i] * expm1_ratio(beta * (x - t2), -beta * span);
  }
  m.left = std::clamp(m.left, 0.0, 1.0);
  m.right = std::clamp(m.right, 0.0, 1.0);
  return m;
}

}  // namespace

double bernoulli_project_prob(const DiscreteDistribution& d, BernoulliSupport sup, RiskParam rp) {
  return project_masses(d, sup, rp).right;
}

DiscreteDistribution bernoulli_project(const DiscreteDistribution& d, BernoulliSupport sup,
                                       RiskParam rp) {
  const ProjectedMass m = project_masses(d, sup, rp);
  return DiscreteDistribution({sup.theta1, sup.theta2}, {m.left, m.right});
}

double lipschitz_const(RiskParam rp, double m) {
  require_nonzero(rp, "lipschitz_const");
  if (!(m >= 0.0) || !std::isfinite(m)) throw InvalidParameter("lipschitz_const: M must be >= 0");
  const double v = std::abs(std::expm1(rp.beta * m));
  if (!std::isfinite(v)) throw NumericRangeError("lipschitz_const overflows double precision");
  return v;
}

}  // namespace rsdrl
