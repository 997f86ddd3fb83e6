#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace rsdrl {

/// Absolute distance below which two atoms are treated as the same point.
inline constexpr double kAtomMergeTol = 1e-12;

/// Tolerance on the total probability mass of a distribution or weight vector.
inline constexpr double kMassTol = 1e-9;

/// Absolute tolerance used when comparing values for ties (greedy actions,
/// state ordering in optimism_pmf).
inline constexpr double kTieTol = 1e-11;

/// Risk parameter of the entropic risk measure. Negative values are risk
/// averse, positive values risk seeking and zero the risk-neutral limit.
struct RiskParam {
  double beta = 0.0;

  explicit RiskParam(double b);
  bool neutral() const { return beta == 0.0; }
  /// Sign of beta as +1, -1 or 0.
  int sign() const { return (beta > 0.0) - (beta < 0.0); }
};

/// Two-point support (theta1 < theta2) used by the Bernoulli projection.
struct BernoulliSupport {
  double theta1;
  double theta2;

  BernoulliSupport(double t1, double t2);
};

/**
 * Finite discrete distribution over the reals.
 *
 * Atoms are kept sorted and strictly increasing. Construction drops zero
 * probability atoms, merges atoms closer than kAtomMergeTol and rejects
 * negative probabilities or a total mass off 1 by more than kMassTol.
 */
class DiscreteDistribution {
 public:
  DiscreteDistribution(std::vector<double> atoms, std::vector<double> probs);

  /// Point mass at x.
  static DiscreteDistribution dirac(double x);

  /// Two-point distribution (a, b; p) with P(X = b) = p.
  static DiscreteDistribution bernoulli(double a, double b, double p);

  const std::vector<double>& atoms() const { return atoms_; }
  const std::vector<double>& probs() const { return probs_; }
  std::size_t size() const { return atoms_.size(); }

  double min() const { return atoms_.front(); }
  double max() const { return atoms_.back(); }
  double mean() const;
  double variance() const;

  /// P(X <= x).
  double cdf(double x) const;
  /// P(X = x) for an atom within kAtomMergeTol of x, zero otherwise.
  double prob_at(double x) const;

 private:
  struct Unchecked {};
  DiscreteDistribution(Unchecked, std::vector<double> atoms, std::vector<double> probs)
      : atoms_(std::move(atoms)), probs_(std::move(probs)) {}

  std::vector<double> atoms_;
  std::vector<double> probs_;

  friend DiscreteDistribution mix(std::span<const double>,
                                  std::span<const DiscreteDistribution>);
  friend DiscreteDistribution shift(const DiscreteDistribution&, double);
};

/// Entropic risk (1/beta) log E[exp(beta X)], or the mean when beta == 0.
double entrm(const DiscreteDistribution& d, RiskParam rp);

/// Exponential utility E[exp(beta X)]. Rejects beta == 0.
double eu(const DiscreteDistribution& d, RiskParam rp);

/// Mixture sum_i w_i F_i. Zero weight components are skipped.
DiscreteDistribution mix(std::span<const double> weights,
                         std::span<const DiscreteDistribution> dists);

/// Translate every atom by c.
DiscreteDistribution shift(const DiscreteDistribution& d, double c);

/// sup_x |F(x) - G(x)| over the union of both supports.
double sup_distance(const DiscreteDistribution& f, const DiscreteDistribution& g);

/**
 * CDF optimism operator: lowers the CDF by c below support_hi, clipped at
 * zero, and moves the removed mass onto support_hi.
 */
DiscreteDistribution optimism_cdf(const DiscreteDistribution& d, double c, double support_hi);

/**
 * Maximizes a monotone linear objective over the l1 ball of radius c around
 * p_hat intersected with the simplex.
 *
 * States are ordered by value (values within kTieTol form one group, ordered
 * by index). Up to c/2 mass is drained from the front of that order onto the
 * last state.
 */
std::vector<double> optimism_pmf(std::span<const double> p_hat,
                                 std::span<const double> values, double c);

/// Probability q placed on theta2 by bernoulli_project.
double bernoulli_project_prob(const DiscreteDistribution& d, BernoulliSupport sup,
                              RiskParam rp);

/// Projection onto (theta1, theta2; q) preserving exponential utility.
DiscreteDistribution bernoulli_project(const DiscreteDistribution& d, BernoulliSupport sup,
                                       RiskParam rp);

/// |exp(beta M) - 1|, the sup-norm Lipschitz constant of eu on [0, M].
double lipschitz_const(RiskParam rp, double m);

}  // namespace rsdrl
