#include "rsdrl/cli.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include "rsdrl/algos.hpp"
#include "rsdrl/errors.hpp"
#include "rsdrl/harness.hpp"
#include "rsdrl/json_io.hpp"
#include "rsdrl/planner.hpp"

namespace rsdrl {

namespace {

using nlohmann::json;

struct HardFlags {
  int branching = 2;
  int depth = 2;
  int horizon = 6;
  std::optional<int> wait_horizon;
  std::optional<int> h_star;
  int leaf_star = 0;
  int a_star = 1;
  double p = 0.3;
  double eps = 0.2;

  void add_to(CLI::App* app) {
    app->add_option("--branching", branching, "hard instance: number of actions A");
    app->add_option("--depth", depth, "hard instance: tree depth d");
    app->add_option("--horizon", horizon, "hard instance: horizon H");
    app->add_option("--wait-horizon", wait_horizon, "hard instance: waiting horizon (default H/3)");
    app->add_option("--h-star", h_star, "hard instance: 0-based step of the favoured leaf (default d)");
    app->add_option("--leaf-star", leaf_star, "hard instance: favoured leaf index");
    app->add_option("--a-star", a_star, "hard instance: favoured action");
    app->add_option("--p", p, "hard instance: baseline probability of the good state");
    app->add_option("--eps", eps, "hard instance: extra probability at the favoured triple");
  }

  HardInstanceSpec spec(double beta) const {
    HardInstanceSpec s;
    s.branching = branching;
    s.depth = depth;
    s.horizon = horizon;
    s.wait_horizon = wait_horizon.value_or(horizon / 3);
    s.h_star = h_star.value_or(depth);
    s.leaf_star = leaf_star;
    s.a_star = a_star;
    s.p = p;
    s.eps = eps;
    s.beta = beta;
    s.validate();
    return s;
  }
};

struct SourceFlags {
  std::string mdp_path;
  std::string gen;
  CLI::Option* mdp_opt = nullptr;
  CLI::Option* gen_opt = nullptr;

  void add_to(CLI::App* app) {
    mdp_opt = app->add_option("--mdp", mdp_path, "MDP JSON file");
    gen_opt = app->add_option("--gen", gen, "generated MDP")->check(CLI::IsMember({"risky", "hard"}));
    mdp_opt->excludes(gen_opt);
  }

  MdpSource source(const HardFlags& hard, double beta) const {
    MdpSource src;
    if (mdp_opt->count() > 0) {
      src.kind = MdpSource::Kind::File;
      src.path = mdp_path;
    } else if (gen == "risky") {
      src.kind = MdpSource::Kind::Risky;
    } else if (gen == "hard") {
      src.kind = MdpSource::Kind::Hard;
      src.hard = hard.spec(beta);
    } else {
      throw InvalidParameter("one of --mdp or --gen is required");
    }
    return src;
  }
};

json table_json(const ValueTable& t, bool drop_terminal = true) {
  json out = json::array();
  const std::size_t rows = drop_terminal && !t.empty() ? t.size() - 1 : t.size();
  for (std::size_t h = 0; h < rows; ++h) out.push_back(t[h]);
  return out;
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ','))
    if (!item.empty()) out.push_back(item);
  return out;
}

int cmd_plan(const MdpSource& src, double beta, bool distributional, std::size_t cap,
             std::ostream& out) {
  const TabularMDP mdp = src.build();
  const RiskParam rp(beta);
  const PlanResult res = distributional ? rs_ddp_distributional(mdp, rp, cap) : rs_ddp_scalar(mdp, rp);
  json j;
  j["beta"] = beta;
  j["planner"] = distributional ? "distributional" : "scalar";
  j["initial_state"] = mdp.initial_state();
  j["v_star_1"] = res.v_star[0][std::size_t(mdp.initial_state())];
  j["policy"] = policy_to_json(res.policy);
  j["v_star"] = table_json(res.v_star);
  if (src.kind == MdpSource::Kind::Hard) j["closed_form_v_star_1"] = hard_optimal_value(src.hard);
  out << j.dump(2) << '\n';
  return kExitOk;
}

int cmd_run(ExperimentConfig cfg, const std::string& csv, const std::string& plot, std::ostream& out) {
  const auto records = run_experiment(cfg);
  emit_csv(records, csv);
  const auto curves = aggregate(records);
  if (!plot.empty()) emit_plot(curves, plot);
  json summary = json::object();
  for (Algorithm a : cfg.algorithms) {
    const auto& c = curves.at(std::string(algorithm_name(a)));
    summary[std::string(algorithm_name(a))] = {{"final_mean_cum_regret", c.mean.back()},
                                               {"final_std_cum_regret", c.stddev.back()}};
  }
  out << json{{"episodes", cfg.episodes}, {"seeds", cfg.seeds.size()}, {"csv", csv},
              {"final", summary}}
             .dump(2)
      << '\n';
  return kExitOk;
}

int cmd_compare(const std::string& path, double beta, std::optional<double> delta_flag,
                std::optional<int> episodes_flag, std::ostream& out) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open counts file " + path);
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw InputError("malformed counts file " + path + ": " + e.what());
  }
  TabularMDP mdp = make_risky_mdp();
  if (j.contains("mdp")) {
    mdp = mdp_from_json(j["mdp"]);
  } else if (j.value("gen", std::string("risky")) != "risky") {
    throw InputError("counts file: 'gen' must be \"risky\" or an 'mdp' object must be given");
  }
  const double delta = delta_flag.value_or(j.value("delta", 0.005));
  const int episodes = episodes_flag.value_or(j.value("episodes", 2000));
  LearnerConfig cfg = LearnerConfig::for_mdp(mdp, beta, delta, episodes);
  if (beta == 0.0) throw InvalidParameter("compare-values requires a nonzero beta");

  if (!j.contains("counts")) throw InputError("counts file requires a 'counts' array [H][S][A][S]");
  const json& c = j["counts"];
  LearnerState st(mdp);
  auto bad = [] { throw InputError("'counts' must have shape [H][S][A][S] of nonnegative integers"); };
  if (!c.is_array() || int(c.size()) != mdp.H()) bad();
  for (int h = 0; h < mdp.H(); ++h) {
    if (!c[h].is_array() || int(c[h].size()) != mdp.S()) bad();
    for (int s = 0; s < mdp.S(); ++s) {
      if (!c[h][s].is_array() || int(c[h][s].size()) != mdp.A()) bad();
      for (int a = 0; a < mdp.A(); ++a) {
        if (!c[h][s][a].is_array() || int(c[h][s][a].size()) != mdp.S()) bad();
        for (int n = 0; n < mdp.S(); ++n) {
          const json& x = c[h][s][a][n];
          if (!x.is_number_integer() || x.get<long long>() < 0) bad();
          st.record(h, s, a, n, x.get<long long>());
        }
      }
    }
  }
  const ValueComparison cmp = compare_planners(st, cfg, mdp);
  const ChainVerdict verdict = check_value_chain(cmp);
  const std::size_t s0 = std::size_t(mdp.initial_state());
  json v1 = {{"rsvi", cmp.rsvi[0][s0]},   {"rsvi2", cmp.rsvi2[0][s0]}, {"rodi-mf", cmp.rodi_mf[0][s0]},
             {"rodi-mb", cmp.rodi_mb[0][s0]}, {"rovi", cmp.rovi[0][s0]}, {"rodi-otp", cmp.otp[0][s0]},
             {"rodi-pto", cmp.pto[0][s0]}, {"v_star", cmp.v_star[0][s0]}};
  json tables = {{"rsvi", table_json(cmp.rsvi)},       {"rsvi2", table_json(cmp.rsvi2)},
                 {"rodi-mf", table_json(cmp.rodi_mf)}, {"rodi-mb", table_json(cmp.rodi_mb)},
                 {"rovi", table_json(cmp.rovi)},       {"rodi-otp", table_json(cmp.otp)},
                 {"rodi-pto", table_json(cmp.pto)},    {"v_star", table_json(cmp.v_star)}};
  out << json{{"beta", beta},
              {"v_1", v1},
              {"values", tables},
              {"chain_holds", verdict.main_chain},
              {"parametric_chain_holds", verdict.parametric},
              {"first_violation", verdict.first_violation}}
             .dump(2)
      << '\n';
  return kExitOk;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Risk-sensitive distributional RL: planning, learning and regret experiments", "rsdrl"};
  app.require_subcommand(1);

  // plan
  auto* plan = app.add_subcommand("plan", "compute the optimal EntRM value and policy");
  SourceFlags plan_src;
  HardFlags plan_hard;
  double plan_beta = 0.0;
  bool distributional = false;
  std::size_t plan_cap = kDefaultSupportCap;
  plan_src.add_to(plan);
  plan_hard.add_to(plan);
  plan->add_option("--beta", plan_beta, "risk parameter")->required();
  plan->add_flag("--distributional", distributional, "plan over full return distributions");
  plan->add_option("--support-cap", plan_cap, "atom cap for the distributional planner");

  // run
  auto* run = app.add_subcommand("run", "run a multi-seed regret experiment");
  SourceFlags run_src;
  HardFlags run_hard;
  std::string algos_flag, csv_out, plot_out, iota_flag = "theorem";
  double run_beta = 0.0, run_delta = 0.005, radius_scale = 1.0;
  int run_episodes = 2000, n_seeds = 10;
  unsigned threads = 0;
  std::size_t run_cap = kDefaultSupportCap;
  run_src.add_to(run);
  run_hard.add_to(run);
  run->add_option("--algos", algos_flag, "comma-separated algorithms (default: all)");
  run->add_option("--beta", run_beta, "risk parameter")->required();
  run->add_option("--delta", run_delta, "confidence level");
  run->add_option("--episodes", run_episodes, "episodes per run");
  run->add_option("--seeds", n_seeds, "number of seeds (0..N-1)");
  run->add_option("--out", csv_out, "CSV output path")->required();
  run->add_option("--plot", plot_out, "SVG output path");
  run->add_option("--support-cap", run_cap, "atom cap for distributional learners");
  run->add_option("--iota-mode", iota_flag, "confidence log term")->check(CLI::IsMember({"theorem", "simple"}));
  run->add_option("--radius-scale", radius_scale, "multiplier on the l1 confidence radius");
  run->add_option("--threads", threads, "worker threads (default: RSDP_THREADS or all cores)");

  // gen-mdp
  auto* gen = app.add_subcommand("gen-mdp", "write a generated MDP as JSON");
  std::string gen_kind, gen_out;
  HardFlags gen_hard;
  gen->add_option("kind", gen_kind, "risky or hard")->required()->check(CLI::IsMember({"risky", "hard"}));
  gen_hard.add_to(gen);
  gen->add_option("--out", gen_out, "output path")->required();

  // compare-values
  auto* cmp = app.add_subcommand("compare-values", "evaluate every planner on shared counts");
  std::string counts_path;
  double cmp_beta = 0.0;
  std::optional<double> cmp_delta;
  std::optional<int> cmp_episodes;
  cmp->add_option("--counts", counts_path, "counts JSON file")->required();
  cmp->add_option("--beta", cmp_beta, "risk parameter")->required();
  cmp->add_option("--delta", cmp_delta, "confidence level (default: file or 0.005)");
  cmp->add_option("--episodes", cmp_episodes, "episode budget K (default: file or 2000)");

  // plot
  auto* plot = app.add_subcommand("plot", "render an SVG from a results CSV");
  std::string plot_in, plot_svg;
  plot->add_option("--in", plot_in, "results CSV")->required();
  plot->add_option("--out", plot_svg, "SVG output path")->required();

  std::vector<std::string> argv(args.rbegin(), args.rend());
  try {
    app.parse(argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n";
    const auto subs = app.get_subcommands();
    err << (subs.empty() ? app.help() : subs.front()->help());
    return kExitValidation;
  }

  try {
    if (*plan) {
      return cmd_plan(plan_src.source(plan_hard, plan_beta), plan_beta, distributional, plan_cap, out);
    }
    if (*run) {
      ExperimentConfig cfg;
      cfg.source = run_src.source(run_hard, run_beta);
      for (const auto& name : split_list(algos_flag)) cfg.algorithms.push_back(parse_algorithm(name));
      if (cfg.algorithms.empty()) cfg.algorithms = all_algorithms();
      cfg.beta = run_beta;
      cfg.delta = run_delta;
      cfg.episodes = run_episodes;
      if (n_seeds < 1) throw InvalidParameter("--seeds must be at least 1");
      for (int i = 0; i < n_seeds; ++i) cfg.seeds.push_back(std::uint64_t(i));
      cfg.support_cap = run_cap;
      cfg.iota_mode = iota_flag == "simple" ? IotaMode::Simple : IotaMode::Theorem;
      cfg.radius_scale = radius_scale;
      cfg.threads = threads;
      return cmd_run(std::move(cfg), csv_out, plot_out, out);
    }
    if (*gen) {
      const TabularMDP mdp = gen_kind == "risky" ? make_risky_mdp() : make_hard_mdp(gen_hard.spec(1.0));
      save_mdp(mdp, gen_out);
      out << json{{"out", gen_out}, {"S", mdp.S()}, {"A", mdp.A()}, {"H", mdp.H()}}.dump() << '\n';
      return kExitOk;
    }
    if (*cmp) return cmd_compare(counts_path, cmp_beta, cmp_delta, cmp_episodes, out);
    if (*plot) {
      emit_plot(aggregate(read_csv(plot_in)), plot_svg);
      out << json{{"out", plot_svg}}.dump() << '\n';
      return kExitOk;
    }
  } catch (const InvalidParameter& e) {
    err << "error: " << e.what() << '\n';
    return kExitValidation;
  } catch (const InputError& e) {
    err << "error: " << e.what() << '\n';
    return kExitValidation;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
  return kExitValidation;
}

}  // namespace rsdrl
