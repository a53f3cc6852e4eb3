#pragma once
// Command-line front end: run, sweep, reproduce, list-algos.

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "oracle_thrift/runner.hpp"

namespace oracle_thrift {

enum ExitCode : int { kExitOk = 0, kExitConfig = 1, kExitRuntime = 2 };

inline constexpr std::uint64_t kPresetHorizon = 100'000;
inline constexpr std::size_t kPresetSeeds = 20;
inline constexpr std::uint64_t kPresetEnvSeed = 1;

struct FigurePreset {
  std::string figure;
  std::vector<RunConfig> configs;
};

/// Algorithm sets and pinned hyperparameters of the three figure presets.
inline FigurePreset figure_preset(const std::string& figure, std::uint64_t T, std::size_t seeds = kPresetSeeds,
                                  std::size_t workers = 1) {
  RunConfig base;
  base.T = T;
  base.workers = workers;
  base.seeds.clear();
  for (std::size_t s = 1; s <= seeds; ++s) base.seeds.push_back(s);
  base.env.env_seed = kPresetEnvSeed;
  base.algo.C = 1.5;
  base.algo.c_h = 1.0;
  base.algo.c_f = 1.0;

  auto with = [&](std::string name, bool every_round = false, std::string label = "") {
    RunConfig c = base;
    c.algo.name = std::move(name);
    c.algo.update_every_round = every_round;
    c.algo.label = std::move(label);
    return c;
  };

  FigurePreset p{figure, {}};
  if (figure == "fig2") {
    base.env = {"linear", 20, 3, kPresetEnvSeed, true};
    p.configs = {with("cucb"), with("aroq"), with("sroq")};
  } else if (figure == "fig3") {
    base.env = {"cov", 10, 3, kPresetEnvSeed, true};
    p.configs = {with("aroq-c", true, "ols-ucb-c"), with("aroq-c"), with("sroq-c")};
  } else if (figure == "fig4") {
    base.env = {"general", 5, 2, kPresetEnvSeed, true};
    p.configs = {with("aroq-gr", true, "sdcb"), with("aroq-gr"), with("sroq-gr")};
  } else {
    throw InvalidArgument("unknown figure: " + figure);
  }
  return p;
}

namespace detail {

inline void write_time_series(const std::vector<SweepResult>& sweeps, std::ostream& os,
                              double AggregateRow::*mean, double AggregateRow::*sd) {
  os << "algo,t,n,mean,std\n";
  for (const auto& s : sweeps) {
    for (const auto& r : s.aggregate.rows) {
      os << s.aggregate.algo << ',' << r.t << ',' << r.n << ',' << format_real(r.*mean) << ','
         << format_real(r.*sd) << '\n';
    }
  }
}

inline void write_totals(const std::vector<SweepResult>& sweeps, std::ostream& os,
                         double AggregateRow::*mean, double AggregateRow::*sd) {
  os << "algo,n,mean,std\n";
  for (const auto& s : sweeps) {
    if (s.aggregate.rows.empty()) continue;
    const auto& r = s.aggregate.rows.back();
    os << s.aggregate.algo << ',' << r.n << ',' << format_real(r.*mean) << ',' << format_real(r.*sd) << '\n';
  }
}

inline std::ofstream open_out(const std::filesystem::path& p) {
  std::ofstream os(p, std::ios::binary);
  if (!os) throw Error("cannot write " + p.string());
  return os;
}

}  // namespace detail

/// Writes the six panel tables: a cumulative adaptivity, b cumulative
/// queries, c regret, d runtime, e total adaptivity, f total queries.
inline void write_panels(const std::vector<SweepResult>& sweeps, const std::filesystem::path& dir) {
  using R = AggregateRow;
  auto a = detail::open_out(dir / "panel_a.csv");
  detail::write_time_series(sweeps, a, &R::mean_adaptivity, &R::std_adaptivity);
  auto b = detail::open_out(dir / "panel_b.csv");
  detail::write_time_series(sweeps, b, &R::mean_queries, &R::std_queries);
  auto c = detail::open_out(dir / "panel_c.csv");
  detail::write_time_series(sweeps, c, &R::mean_regret, &R::std_regret);
  auto d = detail::open_out(dir / "panel_d.csv");
  detail::write_totals(sweeps, d, &R::mean_elapsed_ms, &R::std_elapsed_ms);
  auto e = detail::open_out(dir / "panel_e.csv");
  detail::write_totals(sweeps, e, &R::mean_adaptivity, &R::std_adaptivity);
  auto f = detail::open_out(dir / "panel_f.csv");
  detail::write_totals(sweeps, f, &R::mean_queries, &R::std_queries);
}

inline std::filesystem::path default_output_root() {
  if (const char* env = std::getenv("ORACLE_THRIFT_OUT"); env && *env) return env;
  return "oracle_thrift_out";
}

struct CliFlags {
  std::string algo = "aroq";
  std::string env = "linear";
  std::uint64_t T = 1000;
  std::size_t d = 20;
  std::size_t m = 3;
  std::uint64_t seed = 1;
  std::size_t seeds = 1;
  std::string out;
  double C = 1.5;
  std::size_t M = 0;
  double alpha = 1.0;
  double c_h = 1.0;
  double c_f = 1.0;
  std::uint64_t warmup_cap = 0;
  double discretize = 0.0;
  bool update_every_round = false;
  std::size_t workers = 1;
  std::string timing = "on";
  std::uint64_t checkpoint_every = 0;
  std::int64_t env_seed = -1;
  std::string action_kind = "exact";

  RunConfig to_config(bool sweep) const {
    RunConfig c;
    c.env.kind = env;
    c.env.d = d;
    c.env.m = m;
    c.env.exact = action_kind == "exact";
    if (env_seed >= 0) c.env.env_seed = static_cast<std::uint64_t>(env_seed);
    c.algo.name = algo;
    c.algo.C = C;
    c.algo.M = M;
    c.algo.alpha = alpha;
    c.algo.c_h = c_h;
    c.algo.c_f = c_f;
    if (warmup_cap > 0) c.algo.warmup_cap = warmup_cap;
    if (discretize > 0.0) c.algo.discretize = discretize;
    c.algo.update_every_round = update_every_round;
    c.T = T;
    c.seeds.clear();
    const std::size_t n = sweep ? seeds : 1;
    for (std::size_t k = 0; k < n; ++k) c.seeds.push_back(seed + k);
    c.checkpoint_every = checkpoint_every;
    c.output = out.empty() ? default_output_root() : std::filesystem::path(out);
    c.workers = workers;
    c.timing = timing == "on";
    return c;
  }
};

namespace detail {

inline void add_run_flags(CLI::App* sub, CliFlags& f, bool sweep) {
  sub->add_option("--algo", f.algo, "Algorithm")
      ->check(CLI::IsMember(algorithm_names()))
      ->capture_default_str();
  sub->add_option("--env", f.env, "Environment")
      ->check(CLI::IsMember({"linear", "cov", "general"}))
      ->capture_default_str();
  sub->add_option("--T", f.T, "Horizon")->check(CLI::PositiveNumber)->capture_default_str();
  sub->add_option("--d", f.d, "Number of base arms")->check(CLI::Range(1, 64))->capture_default_str();
  sub->add_option("--m", f.m, "Maximum arms per action")->check(CLI::PositiveNumber)->capture_default_str();
  sub->add_option("--seed", f.seed, sweep ? "First trial seed" : "Trial seed")->capture_default_str();
  if (sweep) sub->add_option("--seeds", f.seeds, "Number of seeds")->check(CLI::PositiveNumber)->capture_default_str();
  sub->add_option("--out", f.out, "Output directory (default $ORACLE_THRIFT_OUT or ./oracle_thrift_out)");
  sub->add_option("--C", f.C, "Exploration constant")->capture_default_str();
  sub->add_option("--M", f.M, "Number of epochs for scheduled algorithms (0 = default)")->capture_default_str();
  sub->add_option("--alpha", f.alpha, "Approximation ratio for alpha-aroq")->capture_default_str();
  sub->add_option("--c-h", f.c_h, "Covariance radius constant")->capture_default_str();
  sub->add_option("--c-f", f.c_f, "Covariance width constant")->capture_default_str();
  sub->add_option("--warmup-cap", f.warmup_cap, "AROQ-C warm-up cap (0 = T/10)")->capture_default_str();
  sub->add_option("--discretize", f.discretize, "Discretization constant for general rewards (0 = off)")
      ->capture_default_str();
  sub->add_flag("--update-every-round", f.update_every_round, "Query the oracle every round");
  sub->add_option("--workers", f.workers, "Worker threads")->check(CLI::PositiveNumber)->capture_default_str();
  sub->add_option("--timing", f.timing, "Record wall time (off writes elapsed_ms = 0)")
      ->check(CLI::IsMember({"on", "off"}))
      ->capture_default_str();
  sub->add_option("--checkpoint-every", f.checkpoint_every, "Checkpoint cadence (0 = T/100)")->capture_default_str();
  sub->add_option("--env-seed", f.env_seed, "Instance seed (-1 = trial seed)")->capture_default_str();
  sub->add_option("--action-kind", f.action_kind, "Action set")
      ->check(CLI::IsMember({"exact", "at-most"}))
      ->capture_default_str();
}

inline int report_sweep(const SweepResult& s, const std::filesystem::path& dir, std::ostream& out,
                        std::ostream& err) {
  out << "wrote " << dir.string() << " (" << s.records.size() << " trials)\n";
  if (s.failures() == 0) return kExitOk;
  err << "warning: " << s.failures() << " trial(s) failed\n";
  for (const auto& r : s.records) {
    if (r.error) err << "  " << r.run_id << ": " << *r.error << '\n';
  }
  return kExitRuntime;
}

}  // namespace detail

inline int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Oracle-efficient combinatorial semi-bandit experiments", "oracle_thrift"};
  app.require_subcommand(1, 1);
  app.set_help_all_flag("--help-all", "Help for every subcommand");

  CliFlags run_flags;
  CliFlags sweep_flags;
  auto* run = app.add_subcommand("run", "Single trial");
  detail::add_run_flags(run, run_flags, false);
  auto* sweep = app.add_subcommand("sweep", "Trials over consecutive seeds");
  detail::add_run_flags(sweep, sweep_flags, true);

  std::string figure;
  double scale = 1.0;
  std::string repro_out;
  std::size_t repro_workers = 1;
  std::size_t repro_seeds = kPresetSeeds;
  std::string repro_timing = "on";
  auto* repro = app.add_subcommand("reproduce", "Figure presets");
  repro->add_option("figure", figure, "fig2 | fig3 | fig4")->required()->check(CLI::IsMember({"fig2", "fig3", "fig4"}));
  repro->add_option("--scale", scale, "Fraction of the preset horizon 10^5, in (0, 1]")->capture_default_str();
  repro->add_option("--out", repro_out, "Output root (default $ORACLE_THRIFT_OUT or ./oracle_thrift_out)");
  repro->add_option("--workers", repro_workers, "Worker threads")->check(CLI::PositiveNumber)->capture_default_str();
  repro->add_option("--seeds", repro_seeds, "Number of seeds")->check(CLI::PositiveNumber)->capture_default_str();
  repro->add_option("--timing", repro_timing, "Record wall time")
      ->check(CLI::IsMember({"on", "off"}))
      ->capture_default_str();

  auto* list = app.add_subcommand("list-algos", "List algorithms");

  std::vector<std::string> args;
  for (int k = argc - 1; k > 0; --k) args.emplace_back(argv[k]);
  try {
    app.parse(args);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kExitConfig;
  }

  if (*list) {
    out << "cucb        per-round CUCB baseline (linear)\n"
           "aroq        adaptive rare oracle queries (linear)\n"
           "sroq        scheduled rare oracle queries (linear)\n"
           "alpha-aroq  aroq with an alpha-approximation oracle (linear)\n"
           "aroq-c      adaptive, covariance-adaptive (linear)\n"
           "sroq-c      scheduled, covariance-adaptive (linear)\n"
           "aroq-gr     adaptive, general monotone rewards ([0,1] feedback)\n"
           "sroq-gr     scheduled, general monotone rewards ([0,1] feedback)\n";
    return kExitOk;
  }

  if (*run || *sweep) {
    const bool is_sweep = static_cast<bool>(*sweep);
    const RunConfig config = (is_sweep ? sweep_flags : run_flags).to_config(is_sweep);
    try {
      validate(config);
    } catch (const Error& e) {
      err << "error: " << e.what() << '\n';
      return kExitConfig;
    }
    try {
      const SweepResult s = run_sweep(config);
      write_sweep(config, s, config.output);
      return detail::report_sweep(s, config.output, out, err);
    } catch (const std::exception& e) {
      err << "error: " << e.what() << '\n';
      return kExitRuntime;
    }
  }

  // reproduce
  if (!(scale > 0.0 && scale <= 1.0)) {
    err << "error: scale must be in (0, 1]\n";
    return kExitConfig;
  }
  const auto T = static_cast<std::uint64_t>(std::llround(static_cast<double>(kPresetHorizon) * scale));
  FigurePreset preset;
  try {
    preset = figure_preset(figure, T, repro_seeds, repro_workers);
    for (auto& c : preset.configs) {
      c.timing = repro_timing == "on";
      validate(c);
    }
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kExitConfig;
  }
  const std::filesystem::path root =
      (repro_out.empty() ? default_output_root() : std::filesystem::path(repro_out)) / figure;
  try {
    std::filesystem::create_directories(root);
    std::vector<SweepResult> sweeps;
    int code = kExitOk;
    nlohmann::json meta{{"schema_version", kSchemaVersion}, {"figure", figure}, {"T", T}, {"scale", scale},
                        {"seeds", repro_seeds}};
    nlohmann::json algos = nlohmann::json::array();
    for (const auto& c : preset.configs) {
      SweepResult s = run_sweep(c);
      const auto dir = root / c.algo.display_name();
      write_sweep(c, s, dir);
      if (detail::report_sweep(s, dir, out, err) != kExitOk) code = kExitRuntime;
      algos.push_back({{"label", c.algo.display_name()}, {"config", config_json(c)}});
      if (!meta.contains("environment")) {
        for (const auto& r : s.records) {
          if (r.ok()) {
            meta["environment"] = r.env_metadata;
            break;
          }
        }
      }
      sweeps.push_back(std::move(s));
    }
    meta["algorithms"] = algos;
    write_panels(sweeps, root);
    auto os = detail::open_out(root / "metadata.json");
    os << meta.dump(2) << '\n';
    return code;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
}

}  // namespace oracle_thrift
