#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "rsdrl/dist.hpp"
#include "rsdrl/mdp.hpp"
#include "rsdrl/planner.hpp"

namespace rsdrl {

enum class Algorithm { RodiMf, RodiMb, Rovi, RodiOtp, RodiPto, Rsvi, Rsvi2, Ucbvi };

/// Selector strings: "rodi-mf", "rodi-mb", "rovi", "rodi-otp", "rodi-pto", "rsvi", "rsvi2", "ucbvi".
std::string_view algorithm_name(Algorithm a);
/// Throws InvalidParameter on an unknown selector.
Algorithm parse_algorithm(std::string_view name);
const std::vector<Algorithm>& all_algorithms();
/// True for every learner except the risk-neutral baseline.
bool is_risk_sensitive(Algorithm a);

/// log(2SAT/delta) by default, log(SAT/delta) for the simple variant; T = K H.
enum class IotaMode { Theorem, Simple };

class LearnerState;

struct LearnerConfig {
  RiskParam beta{-1.1};
  double delta = 0.005;
  int S = 1, A = 1, H = 1;
  int K = 1;
  IotaMode iota_mode = IotaMode::Theorem;
  std::size_t support_cap = kDefaultSupportCap;
  /// Multiplier on the default l1 confidence radius (the UCBVI bonus is unaffected).
  double radius_scale = 1.0;
  /// Replaces the confidence radius when set (used to feed exact l1 errors).
  std::function<double(const LearnerState&, int h, int s, int a)> radius_override;

  static LearnerConfig for_mdp(const TabularMDP& mdp, double beta, double delta, int episodes);
  /// Throws InvalidParameter on delta outside (0, 1), K < 1 or bad sizes.
  void validate() const;
  double iota() const;
};

/**
 * Visit counts and empirical transition model of one learner. Rewards are
 * known and copied from the environment at construction.
 *
 * P-hat rows are count ratios of the visited pairs and uniform otherwise;
 * each observation rewrites only the touched row.
 */
class LearnerState {
 public:
  explicit LearnerState(const TabularMDP& mdp);

  /// State whose empirical model equals mdp exactly with `pseudo_count`
  /// visits per pair (synthetic snapshot for planner comparisons).
  static LearnerState with_model(const TabularMDP& mdp, std::int64_t pseudo_count);

  int S() const { return S_; }
  int A() const { return A_; }
  int H() const { return H_; }
  int initial_state() const { return initial_state_; }

  std::int64_t count(int h, int s, int a) const { return N_[pair(h, s, a)]; }
  std::int64_t next_count(int h, int s, int a, int next) const {
    return M_[pair(h, s, a) * S_ + next];
  }
  std::span<const double> p_hat(int h, int s, int a) const {
    return {P_.data() + pair(h, s, a) * S_, std::size_t(S_)};
  }
  double reward(int h, int s, int a) const { return r_[pair(h, s, a)]; }

  /// Add n observations of (h, s, a) -> next.
  void record(int h, int s, int a, int next, std::int64_t n = 1);
  void observe(const Trajectory& traj);

 private:
  std::size_t pair(int h, int s, int a) const { return (std::size_t(h) * S_ + s) * A_ + a; }
  void refresh_row(std::size_t pair_index);

  int S_, A_, H_, initial_state_;
  std::vector<std::int64_t> N_;
  std::vector<std::int64_t> M_;
  std::vector<double> P_;
  std::vector<double> r_;
};

/// Confidence radius radius_scale * sqrt(2 S iota / max(N, 1)), or the configured override.
double optimism_radius(const LearnerState& state, const LearnerConfig& cfg, int h, int s, int a);

/// Output of one planning pass. Row H of the value tables is terminal.
struct PlanOutput {
  Policy policy;
  ValueTable v;   ///< EntRM values (expected values for UCBVI)
  ValueTable w;   ///< exp(beta V); empty for UCBVI
  ActionTable q;  ///< state-action values on the same scale as v
  ActionTable upper_prob;  ///< RODI-OTP / RODI-PTO: mass on the upper Bernoulli atom
  std::optional<DistTables> dists;  ///< return distributions (RODI-MF / RODI-MB)
};

/// Coefficients q^L, q^R of the Bernoulli recursions on supports (0, H - h).
struct ParametricCoefficients {
  ActionTable q_left;
  ActionTable q_right;
};
ParametricCoefficients make_parametric_coefficients(const LearnerState& state, RiskParam rp);

PlanOutput rodi_mf_plan(const LearnerState& state, const LearnerConfig& cfg);
PlanOutput rodi_mb_plan(const LearnerState& state, const LearnerConfig& cfg);
PlanOutput rovi_plan(const LearnerState& state, const LearnerConfig& cfg);
PlanOutput rodi_otp_plan(const LearnerState& state, const LearnerConfig& cfg,
                         const ParametricCoefficients* coef = nullptr);
PlanOutput rodi_pto_plan(const LearnerState& state, const LearnerConfig& cfg,
                         const ParametricCoefficients* coef = nullptr);
PlanOutput rsvi_plan(const LearnerState& state, const LearnerConfig& cfg);
PlanOutput rsvi2_plan(const LearnerState& state, const LearnerConfig& cfg);
PlanOutput ucbvi_plan(const LearnerState& state, const LearnerConfig& cfg);

PlanOutput plan_with(Algorithm algo, const LearnerState& state, const LearnerConfig& cfg);

/// Anything that picks a policy per episode and learns from the trajectory.
class Agent {
 public:
  virtual ~Agent() = default;
  virtual const Policy& begin_episode() = 0;
  virtual void end_episode(const Trajectory& traj) = 0;
};

class Learner : public Agent {
 public:
  Learner(Algorithm algo, LearnerConfig cfg, const TabularMDP& mdp);

  Algorithm algorithm() const { return algo_; }
  const LearnerConfig& config() const { return cfg_; }
  const LearnerState& state() const { return state_; }
  LearnerState& state() { return state_; }

  /// Runs the planning pass on the current counts.
  const PlanOutput& plan();
  const PlanOutput& last_plan() const { return plan_; }
  void observe(const Trajectory& traj) { state_.observe(traj); }

  const Policy& begin_episode() override { return plan().policy; }
  void end_episode(const Trajectory& traj) override { observe(traj); }

 private:
  Algorithm algo_;
  LearnerConfig cfg_;
  LearnerState state_;
  std::optional<ParametricCoefficients> coef_;
  PlanOutput plan_;
};

/// Value tables of every risk-sensitive planning pass on one shared state.
struct ValueComparison {
  ValueTable rsvi, rsvi2, rodi_mf, rodi_mb, rovi, otp, pto, v_star;
};

ValueComparison compare_planners(const LearnerState& state, const LearnerConfig& cfg,
                                 const TabularMDP& truth);

struct ChainVerdict {
  bool main_chain = true;     ///< RSVI >= RSVI2 >= RODI-MF >= RODI-MB >= V*
  bool parametric = true;     ///< OTP <= PTO <= RSVI2
  std::string first_violation;
  bool holds() const { return main_chain && parametric; }
};

/// Checks both value orderings at every (h, s) with slack tol.
ChainVerdict check_value_chain(const ValueComparison& cmp, double tol = 1e-9);

}  // namespace rsdrl
