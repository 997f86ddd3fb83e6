#include "rsdrl/algos.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <sstream>

#include "rsdrl/errors.hpp"

namespace rsdrl {

namespace {

constexpr std::array<std::pair<Algorithm, std::string_view>, 8> kNames{{
    {Algorithm::RodiMf, "rodi-mf"},
    {Algorithm::RodiMb, "rodi-mb"},
    {Algorithm::Rovi, "rovi"},
    {Algorithm::RodiOtp, "rodi-otp"},
    {Algorithm::RodiPto, "rodi-pto"},
    {Algorithm::Rsvi, "rsvi"},
    {Algorithm::Rsvi2, "rsvi2"},
    {Algorithm::Ucbvi, "ucbvi"},
}};

void require_risk(const LearnerConfig& cfg, const char* who) {
  if (cfg.beta.neutral())
    throw InvalidParameter(std::string(who) + " requires a nonzero risk parameter");
}

void check_shape(const LearnerState& st, const LearnerConfig& cfg) {
  if (st.S() != cfg.S || st.A() != cfg.A || st.H() != cfg.H)
    throw InvalidParameter("learner state and configuration disagree on S, A or H");
}

PlanOutput empty_output(int H, int S, int A, bool with_w) {
  PlanOutput out;
  out.policy = Policy(H, S);
  out.v.assign(H + 1, std::vector<double>(S, 0.0));
  if (with_w) out.w.assign(H + 1, std::vector<double>(S, 1.0));
  out.q.assign(H, std::vector<std::vector<double>>(S, std::vector<double>(A, 0.0)));
  return out;
}

double dot(std::span<const double> p, const std::vector<double>& x) {
  double acc = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) acc += p[i] * x[i];
  return acc;
}

// (1/beta) log sum_i p_i exp(beta v_i), stable for any |beta| v.
double log_mean_exp(std::span<const double> p, const std::vector<double>& v, double beta) {
  double m = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < p.size(); ++i)
    if (p[i] > 0.0) m = std::max(m, beta * v[i]);
  double s = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i)
    if (p[i] > 0.0) s += p[i] * std::exp(beta * v[i] - m);
  return (m + std::log(s)) / beta;
}

bool use_log_domain(const LearnerConfig& cfg) {
  return std::abs(cfg.beta.beta) * cfg.H > kLogDomainThreshold;
}

void check_cap(const DiscreteDistribution& d, std::size_t cap, int h, int s, int a) {
  if (d.size() <= cap) return;
  std::ostringstream msg;
  msg << "support cap " << cap << " exceeded at (h=" << h << ", s=" << s << ", a=" << a
      << "): " << d.size() << " atoms";
  throw CapacityError(msg.str());
}

// Shared backward pass of RODI-MF (CDF optimism) and RODI-MB (PMF optimism).
PlanOutput distributional_pass(const LearnerState& st, const LearnerConfig& cfg, bool model_based) {
  require_risk(cfg, model_based ? "rodi-mb" : "rodi-mf");
  check_shape(st, cfg);
  const int S = st.S(), A = st.A(), H = st.H();
  PlanOutput out = empty_output(H, S, A, true);
  DistTables dt;
  dt.nu.assign(H + 1, std::vector<DiscreteDistribution>(S, DiscreteDistribution::dirac(0.0)));
  dt.eta.assign(H, std::vector<std::vector<DiscreteDistribution>>(
                       S, std::vector<DiscreteDistribution>(A, DiscreteDistribution::dirac(0.0))));
  for (int h = H - 1; h >= 0; --h) {
    const double rem = H - h;
    for (int s = 0; s < S; ++s) {
      for (int a = 0; a < A; ++a) {
        DiscreteDistribution eta = DiscreteDistribution::dirac(rem);
        if (st.count(h, s, a) > 0) {
          const double c = optimism_radius(st, cfg, h, s, a);
          const double r = st.reward(h, s, a);
          if (model_based) {
            const auto tilted = optimism_pmf(st.p_hat(h, s, a), out.v[h + 1], c);
            eta = shift(mix(tilted, dt.nu[h + 1]), r);
          } else {
            eta = optimism_cdf(shift(mix(st.p_hat(h, s, a), dt.nu[h + 1]), r), std::min(c, 1.0), rem);
          }
          check_cap(eta, cfg.support_cap, h, s, a);
        }
        out.q[h][s][a] = entrm(eta, cfg.beta);
        dt.eta[h][s][a] = std::move(eta);
      }
      const int best = greedy_index(out.q[h][s]);
      out.policy(h, s) = best;
      dt.nu[h][s] = dt.eta[h][s][best];
      out.v[h][s] = out.q[h][s][best];
      out.w[h][s] = use_log_domain(cfg) ? std::exp(cfg.beta.beta * out.v[h][s])
                                        : eu(dt.nu[h][s], cfg.beta);
    }
  }
  out.dists = std::move(dt);
  return out;
}

enum class Order { OptimismFirst, ProjectionFirst };

PlanOutput parametric_pass(const LearnerState& st, const LearnerConfig& cfg, Order order,
                           const ParametricCoefficients* coef) {
  require_risk(cfg, order == Order::OptimismFirst ? "rodi-otp" : "rodi-pto");
  check_shape(st, cfg);
  std::optional<ParametricCoefficients> local;
  if (coef == nullptr) {
    local = make_parametric_coefficients(st, cfg.beta);
    coef = &*local;
  }
  const int S = st.S(), A = st.A(), H = st.H();
  const double beta = cfg.beta.beta;
  PlanOutput out = empty_output(H, S, A, true);
  out.upper_prob.assign(H, std::vector<std::vector<double>>(S, std::vector<double>(A, 0.0)));
  std::vector<double> next_q(S, 0.0), cur_q(S, 0.0);
  for (int h = H - 1; h >= 0; --h) {
    const double rem = H - h;
    const double span = std::expm1(beta * rem);
    for (int s = 0; s < S; ++s) {
      for (int a = 0; a < A; ++a) {
        double q = 1.0;
        if (st.count(h, s, a) > 0) {
          const double c = optimism_radius(st, cfg, h, s, a);
          const double ql = coef->q_left[h][s][a], qr = coef->q_right[h][s][a];
          const double q_hat = std::clamp(dot(st.p_hat(h, s, a), next_q), 0.0, 1.0);
          if (order == Order::OptimismFirst) {
            const double lifted = std::min(q_hat + c, 1.0);
            q = (1.0 - lifted) * ql + lifted * qr;
          } else {
            q = std::min((1.0 - q_hat) * ql + q_hat * qr + c, 1.0);
          }
          q = std::clamp(q, 0.0, 1.0);
        }
        out.upper_prob[h][s][a] = q;
        out.q[h][s][a] = q == 1.0 ? rem : std::log1p(q * span) / beta;
      }
      const int best = greedy_index(out.q[h][s]);
      out.policy(h, s) = best;
      cur_q[s] = out.upper_prob[h][s][best];
      out.v[h][s] = out.q[h][s][best];
      out.w[h][s] = 1.0 + cur_q[s] * span;
    }
    std::swap(next_q, cur_q);
  }
  return out;
}

enum class Bonus { DoublyDecaying, Constant };

PlanOutput bonus_pass(const LearnerState& st, const LearnerConfig& cfg, Bonus kind) {
  require_risk(cfg, kind == Bonus::DoublyDecaying ? "rsvi2" : "rsvi");
  check_shape(st, cfg);
  const int S = st.S(), A = st.A(), H = st.H();
  const double beta = cfg.beta.beta;
  if (std::abs(beta) * H > 700.0)
    throw NumericRangeError("rsvi/rsvi2 exponential utilities overflow for |beta| H > 700");
  PlanOutput out = empty_output(H, S, A, true);
  std::vector<double> g(A);
  for (int h = H - 1; h >= 0; --h) {
    const double rem = H - h;
    const double top = std::exp(beta * rem);
    const double mult = std::abs(std::expm1(beta * (kind == Bonus::DoublyDecaying ? rem : H)));
    for (int s = 0; s < S; ++s) {
      for (int a = 0; a < A; ++a) {
        double& q = out.q[h][s][a];
        if (st.count(h, s, a) == 0) {
          g[a] = top;
          q = rem;
          continue;
        }
        const double b = mult * optimism_radius(st, cfg, h, s, a);
        const double base = std::exp(beta * st.reward(h, s, a)) * dot(st.p_hat(h, s, a), out.w[h + 1]);
        const double lifted = beta > 0.0 ? base + b : base - b;
        if (beta > 0.0 ? lifted >= top : lifted <= top) {
          g[a] = top;
          q = rem;
        } else {
          g[a] = lifted;
          q = std::log(lifted) / beta;
        }
      }
      const int best = greedy_index(out.q[h][s]);
      out.policy(h, s) = best;
      out.v[h][s] = out.q[h][s][best];
      out.w[h][s] = g[best];
    }
  }
  return out;
}

}  // namespace

std::string_view algorithm_name(Algorithm a) {
  for (const auto& [k, v] : kNames)
    if (k == a) return v;
  return "unknown";
}

Algorithm parse_algorithm(std::string_view name) {
  for (const auto& [k, v] : kNames)
    if (v == name) return k;
  throw InvalidParameter("unknown algorithm '" + std::string(name) + "'");
}

const std::vector<Algorithm>& all_algorithms() {
  static const std::vector<Algorithm> all = [] {
    std::vector<Algorithm> v;
    for (const auto& [k, name] : kNames) v.push_back(k);
    return v;
  }();
  return all;
}

bool is_risk_sensitive(Algorithm a) { return a != Algorithm::Ucbvi; }

LearnerConfig LearnerConfig::for_mdp(const TabularMDP& mdp, double beta, double delta, int episodes) {
  LearnerConfig cfg;
  cfg.beta = RiskParam(beta);
  cfg.delta = delta;
  cfg.S = mdp.S();
  cfg.A = mdp.A();
  cfg.H = mdp.H();
  cfg.K = episodes;
  cfg.validate();
  return cfg;
}

void LearnerConfig::validate() const {
  if (!(delta > 0.0 && delta < 1.0)) throw InvalidParameter("delta must lie in (0, 1)");
  if (K < 1) throw InvalidParameter("number of episodes must be at least 1");
  if (S < 1 || A < 1 || H < 1) throw InvalidParameter("S, A and H must be positive");
  if (support_cap < 2) throw InvalidParameter("support cap must be at least 2");
  if (!(radius_scale > 0.0) || !std::isfinite(radius_scale))
    throw InvalidParameter("radius scale must be positive");
}

double LearnerConfig::iota() const {
  const double T = double(K) * H;
  const double sat = double(S) * A * T;
  return iota_mode == IotaMode::Theorem ? std::log(2.0 * sat / delta) : std::log(sat / delta);
}

LearnerState::LearnerState(const TabularMDP& mdp)
    : S_(mdp.S()), A_(mdp.A()), H_(mdp.H()), initial_state_(mdp.initial_state()) {
  const std::size_t pairs = std::size_t(H_) * S_ * A_;
  N_.assign(pairs, 0);
  M_.assign(pairs * S_, 0);
  P_.assign(pairs * S_, 1.0 / S_);
  r_ = mdp.rewards();
}

LearnerState LearnerState::with_model(const TabularMDP& mdp, std::int64_t pseudo_count) {
  if (pseudo_count < 1) throw InvalidParameter("pseudo count must be positive");
  LearnerState st(mdp);
  for (int h = 0; h < st.H_; ++h)
    for (int s = 0; s < st.S_; ++s)
      for (int a = 0; a < st.A_; ++a) {
        const std::size_t k = st.pair(h, s, a);
        st.N_[k] = pseudo_count;
        for (int n = 0; n < st.S_; ++n) {
          st.P_[k * st.S_ + n] = mdp.p(h, s, a, n);
          st.M_[k * st.S_ + n] = std::llround(mdp.p(h, s, a, n) * double(pseudo_count));
        }
      }
  return st;
}

void LearnerState::refresh_row(std::size_t k) {
  const double n = double(N_[k]);
  for (int i = 0; i < S_; ++i) P_[k * S_ + i] = double(M_[k * S_ + i]) / n;
}

void LearnerState::record(int h, int s, int a, int next, std::int64_t n) {
  if (h < 0 || h >= H_ || s < 0 || s >= S_ || a < 0 || a >= A_ || next < 0 || next >= S_)
    throw InvalidParameter("observation index out of range");
  if (n < 0) throw InvalidParameter("observation count must be nonnegative");
  if (n == 0) return;
  const std::size_t k = pair(h, s, a);
  N_[k] += n;
  M_[k * S_ + next] += n;
  refresh_row(k);
}

void LearnerState::observe(const Trajectory& traj) {
  for (const Step& st : traj.steps) record(st.h, st.state, st.action, st.next_state);
}

double optimism_radius(const LearnerState& state, const LearnerConfig& cfg, int h, int s, int a) {
  if (cfg.radius_override) return cfg.radius_override(state, h, s, a);
  const double n = double(std::max<std::int64_t>(state.count(h, s, a), 1));
  return cfg.radius_scale * std::sqrt(2.0 * cfg.S * cfg.iota() / n);
}

ParametricCoefficients make_parametric_coefficients(const LearnerState& st, RiskParam rp) {
  if (rp.neutral()) throw InvalidParameter("Bernoulli coefficients require a nonzero beta");
  const int S = st.S(), A = st.A(), H = st.H();
  const double beta = rp.beta;
  ParametricCoefficients c;
  c.q_left.assign(H, std::vector<std::vector<double>>(S, std::vector<double>(A)));
  c.q_right = c.q_left;
  for (int h = 0; h < H; ++h) {
    const double rem = H - h;
    const double span = std::expm1(beta * rem);
    for (int s = 0; s < S; ++s)
      for (int a = 0; a < A; ++a) {
        const double r = st.reward(h, s, a);
        c.q_left[h][s][a] = std::clamp(std::expm1(beta * r) / span, 0.0, 1.0);
        c.q_right[h][s][a] = std::clamp(std::expm1(beta * (r + rem - 1.0)) / span, 0.0, 1.0);
      }
  }
  return c;
}

PlanOutput rodi_mf_plan(const LearnerState& state, const LearnerConfig& cfg) {
  return distributional_pass(state, cfg, false);
}

PlanOutput rodi_mb_plan(const LearnerState& state, const LearnerConfig& cfg) {
  return distributional_pass(state, cfg, true);
}

PlanOutput rovi_plan(const LearnerState& st, const LearnerConfig& cfg) {
  require_risk(cfg, "rovi");
  check_shape(st, cfg);
  const int S = st.S(), A = st.A(), H = st.H();
  const double beta = cfg.beta.beta;
  const bool log_domain = use_log_domain(cfg);
  PlanOutput out = empty_output(H, S, A, true);
  std::vector<double> j(A);
  for (int h = H - 1; h >= 0; --h) {
    const double rem = H - h;
    for (int s = 0; s < S; ++s) {
      for (int a = 0; a < A; ++a) {
        double& q = out.q[h][s][a];
        if (st.count(h, s, a) == 0) {
          j[a] = std::exp(beta * rem);
          q = rem;
          continue;
        }
        const double c = optimism_radius(st, cfg, h, s, a);
        const double r = st.reward(h, s, a);
        const auto tilted = optimism_pmf(st.p_hat(h, s, a), out.v[h + 1], c);
        if (log_domain) {
          q = r + log_mean_exp(tilted, out.v[h + 1], beta);
          j[a] = std::exp(beta * q);
        } else {
          j[a] = std::exp(beta * r) * dot(tilted, out.w[h + 1]);
          q = std::log(j[a]) / beta;
        }
        if (!std::isfinite(q)) throw NumericRangeError("rovi: exponential utility out of range");
      }
      const int best = greedy_index(out.q[h][s]);
      out.policy(h, s) = best;
      out.v[h][s] = out.q[h][s][best];
      out.w[h][s] = j[best];
    }
  }
  return out;
}

PlanOutput rodi_otp_plan(const LearnerState& state, const LearnerConfig& cfg,
                         const ParametricCoefficients* coef) {
  return parametric_pass(state, cfg, Order::OptimismFirst, coef);
}

PlanOutput rodi_pto_plan(const LearnerState& state, const LearnerConfig& cfg,
                         const ParametricCoefficients* coef) {
  return parametric_pass(state, cfg, Order::ProjectionFirst, coef);
}

PlanOutput rsvi_plan(const LearnerState& state, const LearnerConfig& cfg) {
  return bonus_pass(state, cfg, Bonus::Constant);
}

PlanOutput rsvi2_plan(const LearnerState& state, const LearnerConfig& cfg) {
  return bonus_pass(state, cfg, Bonus::DoublyDecaying);
}

PlanOutput ucbvi_plan(const LearnerState& st, const LearnerConfig& cfg) {
  check_shape(st, cfg);
  const int S = st.S(), A = st.A(), H = st.H();
  const double iota = cfg.iota();
  PlanOutput out = empty_output(H, S, A, false);
  for (int h = H - 1; h >= 0; --h) {
    const double rem = H - h;
    for (int s = 0; s < S; ++s) {
      for (int a = 0; a < A; ++a) {
        const std::int64_t n = st.count(h, s, a);
        if (n == 0) {
          out.q[h][s][a] = rem;
          continue;
        }
        const double bonus = (rem - 1.0) * std::sqrt(2.0 * iota / double(n));
        out.q[h][s][a] =
            std::min(rem, st.reward(h, s, a) + dot(st.p_hat(h, s, a), out.v[h + 1]) + bonus);
      }
      const int best = greedy_index(out.q[h][s]);
      out.policy(h, s) = best;
      out.v[h][s] = out.q[h][s][best];
    }
  }
  return out;
}

PlanOutput plan_with(Algorithm algo, const LearnerState& state, const LearnerConfig& cfg) {
  switch (algo) {
    case Algorithm::RodiMf: return rodi_mf_plan(state, cfg);
    case Algorithm::RodiMb: return rodi_mb_plan(state, cfg);
    case Algorithm::Rovi: return rovi_plan(state, cfg);
    case Algorithm::RodiOtp: return rodi_otp_plan(state, cfg);
    case Algorithm::RodiPto: return rodi_pto_plan(state, cfg);
    case Algorithm::Rsvi: return rsvi_plan(state, cfg);
    case Algorithm::Rsvi2: return rsvi2_plan(state, cfg);
    case Algorithm::Ucbvi: return ucbvi_plan(state, cfg);
  }
  throw InvalidParameter("unknown algorithm");
}

Learner::Learner(Algorithm algo, LearnerConfig cfg, const TabularMDP& mdp)
    : algo_(algo), cfg_(std::move(cfg)), state_(mdp) {
  cfg_.validate();
  check_shape(state_, cfg_);
  if (is_risk_sensitive(algo_)) require_risk(cfg_, std::string(algorithm_name(algo_)).c_str());
  if (algo_ == Algorithm::RodiOtp || algo_ == Algorithm::RodiPto)
    coef_ = make_parametric_coefficients(state_, cfg_.beta);
}

const PlanOutput& Learner::plan() {
  switch (algo_) {
    case Algorithm::RodiOtp: plan_ = rodi_otp_plan(state_, cfg_, &*coef_); break;
    case Algorithm::RodiPto: plan_ = rodi_pto_plan(state_, cfg_, &*coef_); break;
    default: plan_ = plan_with(algo_, state_, cfg_);
  }
  return plan_;
}

ValueComparison compare_planners(const LearnerState& state, const LearnerConfig& cfg,
                                 const TabularMDP& truth) {
  if (truth.S() != state.S() || truth.A() != state.A() || truth.H() != state.H())
    throw InvalidParameter("compare_planners: model shape differs from the learner state");
  ValueComparison out;
  out.rsvi = rsvi_plan(state, cfg).v;
  out.rsvi2 = rsvi2_plan(state, cfg).v;
  out.rodi_mf = rodi_mf_plan(state, cfg).v;
  out.rodi_mb = rodi_mb_plan(state, cfg).v;
  out.rovi = rovi_plan(state, cfg).v;
  out.otp = rodi_otp_plan(state, cfg).v;
  out.pto = rodi_pto_plan(state, cfg).v;
  out.v_star = rs_ddp_scalar(truth, cfg.beta).v_star;
  return out;
}

ChainVerdict check_value_chain(const ValueComparison& cmp, double tol) {
  ChainVerdict verdict;
  struct Link {
    const char* hi_name;
    const ValueTable* hi;
    const char* lo_name;
    const ValueTable* lo;
    bool main;
  };
  const Link links[] = {
      {"rsvi", &cmp.rsvi, "rsvi2", &cmp.rsvi2, true},
      {"rsvi2", &cmp.rsvi2, "rodi-mf", &cmp.rodi_mf, true},
      {"rodi-mf", &cmp.rodi_mf, "rodi-mb", &cmp.rodi_mb, true},
      {"rodi-mb", &cmp.rodi_mb, "v*", &cmp.v_star, true},
      {"rsvi2", &cmp.rsvi2, "rodi-pto", &cmp.pto, false},
      {"rodi-pto", &cmp.pto, "rodi-otp", &cmp.otp, false},
  };
  for (const Link& l : links) {
    for (std::size_t h = 0; h < l.hi->size(); ++h)
      for (std::size_t s = 0; s < (*l.hi)[h].size(); ++s) {
        const double hi = (*l.hi)[h][s], lo = (*l.lo)[h][s];
        if (hi >= lo - tol) continue;
        (l.main ? verdict.main_chain : verdict.parametric) = false;
        if (verdict.first_violation.empty()) {
          std::ostringstream msg;
          msg << l.hi_name << " < " << l.lo_name << " at (h=" << h << ", s=" << s << "): " << hi
              << " vs " << lo;
          verdict.first_violation = msg.str();
        }
      }
  }
  return verdict;
}

}  // namespace rsdrl
