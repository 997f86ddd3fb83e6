#include "rsdrl/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <fstream>
#include <iomanip>
#include <set>
#include <sstream>
#include <thread>

#include "rsdrl/errors.hpp"
#include "rsdrl/planner.hpp"

namespace rsdrl {

TabularMDP MdpSource::build() const {
  switch (kind) {
    case Kind::Risky: return make_risky_mdp();
    case Kind::Hard: return make_hard_mdp(hard);
    case Kind::File: return load_mdp(path);
  }
  throw InvalidParameter("unknown MDP source");
}

void ExperimentConfig::validate() const {
  if (episodes < 1) throw InvalidParameter("episodes must be at least 1");
  if (seeds.empty()) throw InvalidParameter("at least one seed is required");
  if (std::set<std::uint64_t>(seeds.begin(), seeds.end()).size() != seeds.size())
    throw InvalidParameter("seeds must be distinct");
  if (algorithms.empty()) throw InvalidParameter("at least one algorithm is required");
  if (std::set<Algorithm>(algorithms.begin(), algorithms.end()).size() != algorithms.size())
    throw InvalidParameter("algorithms must be distinct");
  if (!std::isfinite(beta)) throw InvalidParameter("beta must be finite");
  if (!(delta > 0.0 && delta < 1.0)) throw InvalidParameter("delta must lie in (0, 1)");
  if (beta == 0.0)
    for (Algorithm a : algorithms)
      if (is_risk_sensitive(a))
        throw InvalidParameter("beta = 0 is only supported by ucbvi, not " +
                               std::string(algorithm_name(a)));
}

unsigned resolve_thread_count(unsigned requested) {
  unsigned n = requested;
  if (n == 0) {
    n = std::max(1u, std::thread::hardware_concurrency());
    if (const char* env = std::getenv("RSDP_THREADS")) {
      char* end = nullptr;
      const long cap = std::strtol(env, &end, 10);
      if (end != env && *end == '\0' && cap >= 1) n = unsigned(cap);
    }
  }
  return std::max(1u, n);
}

std::vector<RegretRecord> run_agent(const TabularMDP& mdp, Agent& agent, const std::string& name,
                                    std::uint64_t seed, int episodes, RiskParam rp, double v_star) {
  std::vector<RegretRecord> out;
  out.reserve(std::size_t(episodes));
  const int s0 = mdp.initial_state();
  double cum = 0.0;
  for (int k = 1; k <= episodes; ++k) {
    const Policy* planned = nullptr;
    try {
      planned = &agent.begin_episode();
    } catch (const CapacityError& e) {
      throw CapacityError("episode " + std::to_string(k) + ": " + e.what());
    }
    const Policy& pi = *planned;
    const double v_pik = policy_eval(mdp, pi, rp)[0][s0];
    double gap = v_star - v_pik;
    if (gap < 0.0 && gap > -1e-9) gap = 0.0;
    cum += gap;
    out.push_back({name, seed, k, v_star, v_pik, gap, cum});
    StreamRng rng = StreamRng::for_episode(seed, std::uint64_t(k));
    agent.end_episode(simulate_episode(mdp, pi, rng));
  }
  return out;
}

std::vector<RegretRecord> run_experiment(const ExperimentConfig& cfg) {
  cfg.validate();
  return run_experiment(cfg.source.build(), cfg);
}

std::vector<RegretRecord> run_experiment(const TabularMDP& mdp, const ExperimentConfig& cfg) {
  cfg.validate();
  const RiskParam rp(cfg.beta);
  const double v_star = rs_ddp_scalar(mdp, rp).v_star[0][mdp.initial_state()];

  LearnerConfig lc = LearnerConfig::for_mdp(mdp, cfg.beta, cfg.delta, cfg.episodes);
  lc.support_cap = cfg.support_cap;
  lc.iota_mode = cfg.iota_mode;
  lc.radius_scale = cfg.radius_scale;
  lc.validate();

  const std::size_t n_seeds = cfg.seeds.size();
  const std::size_t n_cells = cfg.algorithms.size() * n_seeds;
  std::vector<std::vector<RegretRecord>> cells(n_cells);
  std::vector<std::exception_ptr> errors(n_cells);
  std::atomic<std::size_t> next{0};

  auto worker = [&] {
    for (std::size_t i = next++; i < n_cells; i = next++) {
      const Algorithm algo = cfg.algorithms[i / n_seeds];
      const std::uint64_t seed = cfg.seeds[i % n_seeds];
      const std::string name(algorithm_name(algo));
      try {
        Learner learner(algo, lc, mdp);
        cells[i] = run_agent(mdp, learner, name, seed, cfg.episodes, rp, v_star);
      } catch (const CapacityError& e) {
        std::ostringstream msg;
        msg << name << ", seed " << seed << ": " << e.what();
        errors[i] = std::make_exception_ptr(CapacityError(msg.str()));
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };

  const unsigned n_threads = std::min<unsigned>(resolve_thread_count(cfg.threads), unsigned(n_cells));
  if (n_threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < n_threads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);

  std::vector<RegretRecord> out;
  out.reserve(n_cells * std::size_t(cfg.episodes));
  for (auto& c : cells) out.insert(out.end(), c.begin(), c.end());
  return out;
}

std::map<std::string, RegretCurve> aggregate(const std::vector<RegretRecord>& records) {
  // algo -> seed -> cumulative regret by episode
  std::map<std::string, std::map<std::uint64_t, std::map<int, double>>> runs;
  for (const auto& r : records) {
    auto& run = runs[r.algo][r.seed];
    if (!run.emplace(r.episode, r.cum_regret).second)
      throw InvalidParameter("duplicate record for " + r.algo + ", seed " + std::to_string(r.seed) +
                             ", episode " + std::to_string(r.episode));
  }
  std::map<std::string, RegretCurve> out;
  int K = -1;
  for (const auto& [algo, by_seed] : runs) {
    for (const auto& [seed, curve] : by_seed) {
      const int len = int(curve.size());
      if (K < 0) K = len;
      if (len != K)
        throw InvalidParameter("records mix runs of different lengths (" + std::to_string(K) +
                               " and " + std::to_string(len) + " episodes)");
      if (curve.begin()->first != 1 || curve.rbegin()->first != K)
        throw InvalidParameter("run " + algo + "/" + std::to_string(seed) +
                               " does not cover episodes 1..K");
    }
    RegretCurve rc;
    rc.seeds = by_seed.size();
    rc.mean.assign(std::size_t(K), 0.0);
    rc.stddev.assign(std::size_t(K), 0.0);
    const double n = double(rc.seeds);
    for (const auto& [seed, curve] : by_seed)
      for (const auto& [k, v] : curve) rc.mean[std::size_t(k - 1)] += v / n;
    for (const auto& [seed, curve] : by_seed)
      for (const auto& [k, v] : curve) {
        const double d = v - rc.mean[std::size_t(k - 1)];
        rc.stddev[std::size_t(k - 1)] += d * d / n;
      }
    for (double& s : rc.stddev) s = std::sqrt(s);
    out.emplace(algo, std::move(rc));
  }
  return out;
}

std::string format_csv(const std::vector<RegretRecord>& records) {
  std::string out = std::string(kCsvHeader) + "\n";
  char buf[512];
  for (const auto& r : records) {
    std::snprintf(buf, sizeof buf, "%s,%llu,%d,%.12g,%.12g,%.12g,%.12g\n", r.algo.c_str(),
                  static_cast<unsigned long long>(r.seed), r.episode, r.v_star, r.v_pik,
                  r.per_episode_regret, r.cum_regret);
    out += buf;
  }
  return out;
}

namespace {

void write_file(const std::string& path, const std::string& body) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  out << body;
  if (!out) throw std::runtime_error("failed writing " + path);
}

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> parts;
  std::stringstream ss(line);
  std::string item;
  while (std::getline(ss, item, sep)) parts.push_back(item);
  if (!line.empty() && line.back() == sep) parts.emplace_back();
  return parts;
}

std::string xml_escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

}  // namespace

void emit_csv(const std::vector<RegretRecord>& records, const std::string& path) {
  write_file(path, format_csv(records));
}

std::vector<RegretRecord> read_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open " + path);
  std::string line;
  if (!std::getline(in, line) || line != kCsvHeader)
    throw InputError(path + ": missing or unexpected CSV header");
  std::vector<RegretRecord> out;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    const auto f = split(line, ',');
    if (f.size() != 7) throw InputError(path + ":" + std::to_string(lineno) + ": expected 7 fields");
    try {
      std::size_t pos = 0;
      RegretRecord r;
      r.algo = f[0];
      r.seed = std::stoull(f[1], &pos);
      r.episode = std::stoi(f[2]);
      r.v_star = std::stod(f[3]);
      r.v_pik = std::stod(f[4]);
      r.per_episode_regret = std::stod(f[5]);
      r.cum_regret = std::stod(f[6]);
      out.push_back(std::move(r));
    } catch (const std::logic_error&) {
      throw InputError(path + ":" + std::to_string(lineno) + ": malformed number");
    }
  }
  return out;
}

std::string render_svg(const std::map<std::string, RegretCurve>& curves) {
  constexpr double W = 800, Hgt = 500, left = 70, right = 170, top = 30, bottom = 50;
  const double pw = W - left - right, ph = Hgt - top - bottom;
  static const char* colors[] = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728",
                                 "#9467bd", "#8c564b", "#e377c2", "#7f7f7f"};
  std::size_t K = 0;
  double ymax = 0.0;
  for (const auto& [name, c] : curves) {
    K = std::max(K, c.mean.size());
    for (std::size_t i = 0; i < c.mean.size(); ++i) ymax = std::max(ymax, c.mean[i] + c.stddev[i]);
  }
  if (ymax <= 0.0) ymax = 1.0;
  const double xmax = K > 1 ? double(K) : 2.0;
  auto px = [&](double k) { return left + (k - 1.0) / (xmax - 1.0) * pw; };
  auto py = [&](double y) { return top + ph - y / ymax * ph; };

  std::ostringstream svg;
  svg.setf(std::ios::fixed);
  svg.precision(2);
  svg << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
      << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << Hgt
      << "\" viewBox=\"0 0 " << W << ' ' << Hgt << "\">\n"
      << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
      << "<g font-family=\"sans-serif\" font-size=\"12\">\n";
  svg << "<line x1=\"" << left << "\" y1=\"" << top + ph << "\" x2=\"" << left + pw << "\" y2=\""
      << top + ph << "\" stroke=\"black\"/>\n";
  svg << "<line x1=\"" << left << "\" y1=\"" << top << "\" x2=\"" << left << "\" y2=\"" << top + ph
      << "\" stroke=\"black\"/>\n";
  for (int t = 0; t <= 5; ++t) {
    const double yv = ymax * t / 5.0, xv = 1.0 + (xmax - 1.0) * t / 5.0;
    svg << "<text x=\"" << left - 8 << "\" y=\"" << py(yv) + 4 << "\" text-anchor=\"end\">"
        << std::setprecision(3) << std::defaultfloat << yv << "</text>\n";
    svg << std::fixed << std::setprecision(2);
    svg << "<text x=\"" << px(xv) << "\" y=\"" << top + ph + 18 << "\" text-anchor=\"middle\">"
        << std::llround(xv) << "</text>\n";
  }
  svg << "<text x=\"" << left + pw / 2 << "\" y=\"" << Hgt - 10
      << "\" text-anchor=\"middle\">episode</text>\n";
  svg << "<text x=\"18\" y=\"" << top + ph / 2 << "\" text-anchor=\"middle\" transform=\"rotate(-90 18 "
      << top + ph / 2 << ")\">cumulative regret</text>\n";

  std::size_t idx = 0;
  for (const auto& [name, c] : curves) {
    const char* color = colors[idx % 8];
    const std::size_t n = c.mean.size();
    if (n > 0) {
      svg << "<polygon fill=\"" << color << "\" fill-opacity=\"0.18\" stroke=\"none\" points=\"";
      for (std::size_t i = 0; i < n; ++i)
        svg << px(double(i + 1)) << ',' << py(c.mean[i] + c.stddev[i]) << ' ';
      for (std::size_t i = n; i-- > 0;)
        svg << px(double(i + 1)) << ',' << py(std::max(c.mean[i] - c.stddev[i], 0.0)) << ' ';
      svg << "\"/>\n";
      svg << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"";
      for (std::size_t i = 0; i < n; ++i) svg << px(double(i + 1)) << ',' << py(c.mean[i]) << ' ';
      svg << "\"/>\n";
    }
    const double ly = top + 10 + 18.0 * double(idx);
    svg << "<line x1=\"" << left + pw + 15 << "\" y1=\"" << ly << "\" x2=\"" << left + pw + 40
        << "\" y2=\"" << ly << "\" stroke=\"" << color << "\" stroke-width=\"2\"/>\n";
    svg << "<text x=\"" << left + pw + 46 << "\" y=\"" << ly + 4 << "\">" << xml_escape(name)
        << "</text>\n";
    ++idx;
  }
  svg << "</g>\n</svg>\n";
  return svg.str();
}

void emit_plot(const std::map<std::string, RegretCurve>& curves, const std::string& path) {
  write_file(path, render_svg(curves));
}

}  // namespace rsdrl
