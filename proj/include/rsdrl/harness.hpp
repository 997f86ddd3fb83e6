#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "rsdrl/algos.hpp"
#include "rsdrl/mdp.hpp"

namespace rsdrl {

/// Where the experiment MDP comes from: a generator or a JSON file.
struct MdpSource {
  enum class Kind { Risky, Hard, File };
  Kind kind = Kind::Risky;
  HardInstanceSpec hard;
  std::string path;

  TabularMDP build() const;
};

struct ExperimentConfig {
  MdpSource source;
  std::vector<Algorithm> algorithms;
  double beta = -1.1;
  double delta = 0.005;
  int episodes = 2000;
  std::vector<std::uint64_t> seeds;
  std::size_t support_cap = kDefaultSupportCap;
  IotaMode iota_mode = IotaMode::Theorem;
  double radius_scale = 1.0;
  /// Worker threads; 0 means RSDP_THREADS or the hardware concurrency.
  unsigned threads = 0;

  /// Throws InvalidParameter on K < 1, empty or repeated seeds, no algorithms,
  /// or beta == 0 with a risk-sensitive learner.
  void validate() const;
};

struct RegretRecord {
  std::string algo;
  std::uint64_t seed = 0;
  int episode = 0;  ///< 1-based
  double v_star = 0.0;
  double v_pik = 0.0;
  double per_episode_regret = 0.0;
  double cum_regret = 0.0;

  bool operator==(const RegretRecord&) const = default;
};

/// Thread count after applying the RSDP_THREADS cap; never below 1.
unsigned resolve_thread_count(unsigned requested);

/**
 * Plays `episodes` episodes of `agent` against `mdp` with the episode streams
 * of `seed`, scoring each deployed policy by exact policy evaluation.
 * Regret gaps above -1e-9 and below zero are rounding and reported as zero.
 */
std::vector<RegretRecord> run_agent(const TabularMDP& mdp, Agent& agent, const std::string& name,
                                    std::uint64_t seed, int episodes, RiskParam rp, double v_star);

/// Runs every (algorithm, seed) cell, in parallel. Output is ordered by
/// algorithm (config order), seed (config order) and episode, and does not
/// depend on the thread count.
std::vector<RegretRecord> run_experiment(const ExperimentConfig& cfg);
std::vector<RegretRecord> run_experiment(const TabularMDP& mdp, const ExperimentConfig& cfg);

/// Pointwise statistics of cumulative regret across seeds.
struct RegretCurve {
  std::vector<double> mean;
  std::vector<double> stddev;  ///< population standard deviation
  std::size_t seeds = 0;
};

/// Keyed by algorithm name. Throws InvalidParameter when runs differ in
/// length or skip episodes.
std::map<std::string, RegretCurve> aggregate(const std::vector<RegretRecord>& records);

inline constexpr const char* kCsvHeader =
    "algo,seed,episode,v_star,v_pik,per_episode_regret,cum_regret";

void emit_csv(const std::vector<RegretRecord>& records, const std::string& path);
std::string format_csv(const std::vector<RegretRecord>& records);
std::vector<RegretRecord> read_csv(const std::string& path);

/// Self-contained SVG: mean cumulative regret per algorithm with a +-1 std band.
void emit_plot(const std::map<std::string, RegretCurve>& curves, const std::string& path);
std::string render_svg(const std::map<std::string, RegretCurve>& curves);

}  // namespace rsdrl
