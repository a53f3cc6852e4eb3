#pragma once
// Seeded trial execution with exact (alpha-)pseudo-regret, complexity metering,
// checkpointing, sweeps over seeds, and CSV / JSON persistence.

#include <algorithm>
#include <atomic>
#include <charconv>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <unordered_map>
#include <vector>

#include "json.hpp"
#include "oracle_thrift/algo_cov.hpp"
#include "oracle_thrift/algo_general.hpp"
#include "oracle_thrift/algo_linear.hpp"
#include "oracle_thrift/core.hpp"
#include "oracle_thrift/envs.hpp"
#include "oracle_thrift/oracle.hpp"
#include "oracle_thrift/policy.hpp"
#include "oracle_thrift/schedule.hpp"

namespace oracle_thrift {

inline constexpr int kSchemaVersion = 1;
inline constexpr std::uint64_t kMaxCheckpoints = 10'000;
inline constexpr std::uint64_t kNoiseStream = 0x5A;

struct EnvSpec {
  std::string kind = "linear";
  std::size_t d = 20;
  std::size_t m = 3;
  /// Seed of the instance (means, covariance, pmfs); the trial seed when empty.
  std::optional<std::uint64_t> env_seed;
  bool exact = true;
};

struct AlgoSpec {
  std::string name = "aroq";
  double C = 1.5;
  std::size_t M = 0;  // 0 = default_epochs(T)
  double alpha = 1.0;
  double c_h = 1.0;
  double c_f = 1.0;
  std::optional<std::uint64_t> warmup_cap;
  std::optional<double> discretize;
  bool update_every_round = false;
  /// Name written to results; defaults to `name`.
  std::string label;

  std::string display_name() const { return label.empty() ? name : label; }
};

struct RunConfig {
  EnvSpec env;
  AlgoSpec algo;
  std::uint64_t T = 1000;
  std::vector<std::uint64_t> seeds{1};
  std::uint64_t checkpoint_every = 0;  // 0 = max(1, T / 100)
  std::filesystem::path output;
  std::size_t workers = 1;
  /// When false, elapsed_ms is written as 0 so outputs are byte-reproducible.
  bool timing = true;
  std::uint64_t max_batch_checkpoints = kMaxCheckpoints;

  std::uint64_t cadence() const { return checkpoint_every == 0 ? std::max<std::uint64_t>(1, T / 100) : checkpoint_every; }
};

struct Checkpoint {
  std::uint64_t t = 0;
  /// sum_t (alpha * rbar(a*) - rbar(a_t)); alpha = 1 except for alpha-aroq.
  double cum_regret = 0.0;
  std::uint64_t cum_adaptivity = 0;
  std::uint64_t cum_queries = 0;
  double elapsed_ms = 0.0;
  /// sum_t (rbar(a*) - rbar(a_t)); not part of the CSV schema.
  double cum_pseudo_regret = 0.0;

  friend bool operator==(const Checkpoint&, const Checkpoint&) = default;
};

struct RunRecord {
  std::string run_id;
  std::string algo;
  std::string env;
  std::size_t d = 0;
  std::size_t m = 0;
  std::uint64_t T = 0;
  std::uint64_t seed = 0;
  std::uint64_t env_seed = 0;
  std::vector<Checkpoint> checkpoints;
  std::optional<Action> best_action;
  double best_reward = 0.0;
  ComplexityLedger ledger;
  nlohmann::json env_metadata;
  nlohmann::json policy_metadata;
  std::optional<std::string> error;

  bool ok() const noexcept { return !error.has_value(); }
  const Checkpoint& final() const { return checkpoints.back(); }
};

// ---------------------------------------------------------------------------
// Construction and validation
// ---------------------------------------------------------------------------

inline const std::vector<std::string>& algorithm_names() {
  static const std::vector<std::string> names{"cucb",  "aroq",   "sroq",    "alpha-aroq",
                                              "aroq-c", "sroq-c", "aroq-gr", "sroq-gr"};
  return names;
}

inline bool is_known_algorithm(const std::string& name) {
  const auto& n = algorithm_names();
  return std::find(n.begin(), n.end(), name) != n.end();
}

inline bool is_known_environment(const std::string& kind) {
  return kind == "linear" || kind == "cov" || kind == "general";
}

inline bool is_general_algorithm(const std::string& name) { return name == "aroq-gr" || name == "sroq-gr"; }
inline bool is_scheduled_algorithm(const std::string& name) {
  return name == "sroq" || name == "sroq-c" || name == "sroq-gr";
}

/// Throws InvalidArgument for any configuration that cannot run.
inline void validate(const RunConfig& c) {
  if (!is_known_algorithm(c.algo.name)) throw InvalidArgument("unknown algorithm: " + c.algo.name);
  if (!is_known_environment(c.env.kind)) throw InvalidArgument("unknown environment: " + c.env.kind);
  if (c.env.d < 1 || c.env.d > Action::kMaxArms) throw InvalidArgument("d must be in [1, 64]");
  if (c.env.m < 1 || c.env.m > c.env.d) throw InvalidArgument("m must be in [1, d]");
  if (c.T < 1) throw InvalidArgument("T must be positive");
  if (c.seeds.empty()) throw InvalidArgument("at least one seed is required");
  if ((c.T + c.cadence() - 1) / c.cadence() > kMaxCheckpoints) {
    throw InvalidArgument("checkpoint cadence gives more than 10^4 checkpoints");
  }
  const bool linear_env = c.env.kind != "general";
  const bool unit_env = c.env.kind != "cov";
  if (!is_general_algorithm(c.algo.name) && !linear_env) {
    throw InvalidArgument("algorithm requires linear feedback");
  }
  if (is_general_algorithm(c.algo.name) && !unit_env) {
    throw InvalidArgument("algorithm requires feedback in [0, 1]");
  }
  if (!(c.algo.C > 0.0)) throw InvalidArgument("C must be positive");
  if (!(c.algo.alpha > 0.0 && c.algo.alpha <= 1.0)) throw InvalidArgument("alpha must be in (0, 1]");
  if (!(c.algo.c_h > 0.0) || !(c.algo.c_f > 0.0)) throw InvalidArgument("c_h and c_f must be positive");
  if (c.algo.discretize && !(*c.algo.discretize > 0.0)) throw InvalidArgument("discretize constant must be positive");
  if (is_scheduled_algorithm(c.algo.name)) {
    std::uint64_t horizon = c.T;
    if (c.algo.name == "sroq-c") {
      const std::uint64_t warm = (c.env.d * (c.env.d + 1) + 1) / 2;
      if (c.T < warm + 4) throw InvalidArgument("horizon too short for the pair warm-up");
      horizon = c.T - warm;
    }
    if (horizon < 4) throw InvalidArgument("scheduled algorithms need T >= 4");
    if (c.algo.M != 0 && (c.algo.M < 2 || static_cast<double>(c.algo.M) > std::log2(static_cast<double>(horizon)))) {
      throw InvalidArgument("M must be in [2, log2(T)]");
    }
  }
}

inline std::unique_ptr<Environment> make_environment(const EnvSpec& spec, std::uint64_t env_seed) {
  if (spec.kind == "linear") {
    return std::make_unique<LinearUniformEnv>(LinearUniformEnv::random(spec.d, spec.m, env_seed, spec.exact));
  }
  if (spec.kind == "cov") {
    return std::make_unique<CovarianceGaussianEnv>(CovarianceGaussianEnv::random(spec.d, spec.m, env_seed, spec.exact));
  }
  if (spec.kind == "general") {
    return std::make_unique<GeneralDiscreteEnv>(GeneralDiscreteEnv::random(spec.d, spec.m, env_seed, spec.exact));
  }
  throw InvalidArgument("unknown environment: " + spec.kind);
}

/// The environment must outlive the returned policy.
inline std::unique_ptr<Policy> make_policy(const AlgoSpec& a, const Environment& env, std::uint64_t T,
                                           std::size_t workers = 1) {
  const auto set = env.action_set();
  const std::string label = a.display_name();
  BatchExecutor exec(ExactOracle{}, workers);
  const LinearParams lp{a.C, a.update_every_round};
  const CovParams cp{a.c_h, a.c_f, a.warmup_cap, a.update_every_round};
  const GeneralParams gp{a.C, a.update_every_round, a.discretize};

  if (a.name == "cucb") return std::make_unique<AroqPolicy>(set, T, LinearParams{a.C, true}, exec, label);
  if (a.name == "aroq") return std::make_unique<AroqPolicy>(set, T, lp, exec, label);
  if (a.name == "alpha-aroq") {
    return std::make_unique<AroqPolicy>(set, T, lp, BatchExecutor(wrap_alpha(ExactOracle{}, a.alpha), workers),
                                        label);
  }
  if (a.name == "sroq") return std::make_unique<SroqPolicy>(set, T, a.M, lp, exec);
  if (a.name == "aroq-c") return std::make_unique<AroqCPolicy>(set, T, cp, exec, label);
  if (a.name == "sroq-c") return std::make_unique<SroqCPolicy>(set, T, a.M, cp, exec);
  if (a.name == "aroq-gr") return std::make_unique<AroqGrPolicy>(set, T, env.reward_fn(), gp, exec, label);
  if (a.name == "sroq-gr") return std::make_unique<SroqGrPolicy>(set, T, a.M, env.reward_fn(), gp, exec);
  throw InvalidArgument("unknown algorithm: " + a.name);
}

inline std::string make_run_id(const std::string& algo, const EnvSpec& env, std::uint64_t T, std::uint64_t seed) {
  return algo + "-" + env.kind + "-d" + std::to_string(env.d) + "-m" + std::to_string(env.m) + "-T" +
         std::to_string(T) + "-s" + std::to_string(seed);
}

// ---------------------------------------------------------------------------
// Trial loop
// ---------------------------------------------------------------------------

struct TrialOptions {
  std::uint64_t checkpoint_every = 1;
  bool timing = true;
  std::uint64_t max_batch_checkpoints = kMaxCheckpoints;
  double alpha = 1.0;
};

/// Plays `policy` for T rounds against `env`, filling record.checkpoints,
/// best_action, best_reward, ledger and metadata. Errors are caught and
/// stored with the partial record.
inline void run_policy(const Environment& env, Policy& policy, std::uint64_t T, Rng& rng, const TrialOptions& opt,
                       RunRecord& rec) {
  const auto start = std::chrono::steady_clock::now();
  const auto set = env.action_set();
  Checkpoint cp;
  std::uint64_t done = 0;
  std::uint64_t batch_checkpoints = 0;
  auto record = [&](std::uint64_t t) {
    cp.t = t;
    cp.cum_adaptivity = policy.ledger().adaptivity_rounds();
    cp.cum_queries = policy.ledger().total_queries();
    cp.elapsed_ms = opt.timing ? std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count()
                               : 0.0;
    rec.checkpoints.push_back(cp);
  };

  try {
    const OracleResult best = optimal_action(env);
    rec.best_action = best.action;
    rec.best_reward = best.value;
    std::unordered_map<std::uint64_t, double> reward_cache;
    auto expected = [&](const Action& a) {
      auto it = reward_cache.find(a.bits());
      if (it == reward_cache.end()) it = reward_cache.emplace(a.bits(), env.expected_reward(a)).first;
      return it->second;
    };

    for (std::uint64_t t = 1; t <= T; ++t) {
      const std::uint64_t rounds_before = policy.ledger().adaptivity_rounds();
      const Action a = policy.select(t);
      if (!set->contains(a)) throw Error("policy played an infeasible action " + a.to_string());
      const auto y = env.sample(rng);
      policy.observe(Observation::from_full(t, a, y));
      const double r = expected(a);
      cp.cum_regret += opt.alpha * best.value - r;
      cp.cum_pseudo_regret += best.value - r;
      done = t;

      const bool batched = policy.ledger().adaptivity_rounds() != rounds_before;
      const bool on_grid = t % opt.checkpoint_every == 0 || t == T;
      if (on_grid) {
        record(t);
      } else if (batched && batch_checkpoints < opt.max_batch_checkpoints) {
        ++batch_checkpoints;
        record(t);
      }
    }
  } catch (const std::exception& e) {
    rec.error = e.what();
    if (rec.checkpoints.empty() || rec.checkpoints.back().t != done) record(done);
  }
  rec.ledger = policy.ledger();
  rec.env_metadata = env.metadata();
  rec.policy_metadata = policy.metadata();
}

inline RunRecord run_trial(const RunConfig& config, std::uint64_t seed, std::size_t batch_workers = 1) {
  RunRecord rec;
  rec.algo = config.algo.display_name();
  rec.env = config.env.kind;
  rec.d = config.env.d;
  rec.m = config.env.m;
  rec.T = config.T;
  rec.seed = seed;
  rec.env_seed = config.env.env_seed.value_or(seed);
  rec.run_id = make_run_id(rec.algo, config.env, config.T, seed);

  std::unique_ptr<Environment> env;
  std::unique_ptr<Policy> policy;
  try {
    env = make_environment(config.env, rec.env_seed);
    policy = make_policy(config.algo, *env, config.T, batch_workers);
  } catch (const std::exception& e) {
    rec.error = e.what();
    rec.checkpoints.push_back(Checkpoint{});
    return rec;
  }
  Rng rng = make_stream(rec.env_seed, kNoiseStream, seed);
  TrialOptions opt{config.cadence(), config.timing, config.max_batch_checkpoints,
                   config.algo.name == "alpha-aroq" ? config.algo.alpha : 1.0};
  run_policy(*env, *policy, config.T, rng, opt, rec);
  if (const auto* cov = dynamic_cast<const CovarianceGaussianEnv*>(env.get())) {
    const auto p = sigma_profile(*cov);
    rec.env_metadata["sigma_profile"] = {{"per_arm_max", p.per_arm_max}, {"max_action_sum", p.max_action_sum}};
  }
  return rec;
}

// ---------------------------------------------------------------------------
// Aggregation and sweeps
// ---------------------------------------------------------------------------

struct AggregateRow {
  std::uint64_t t = 0;
  std::size_t n = 0;
  double mean_regret = 0, std_regret = 0;
  double mean_adaptivity = 0, std_adaptivity = 0;
  double mean_queries = 0, std_queries = 0;
  double mean_elapsed_ms = 0, std_elapsed_ms = 0;
};

struct Aggregate {
  std::string algo;
  std::vector<AggregateRow> rows;
  std::size_t failures = 0;
};

namespace detail {

inline std::pair<double, double> mean_std(const std::vector<double>& xs) {
  if (xs.empty()) return {0.0, 0.0};
  double mean = 0.0;
  for (double x : xs) mean += x;
  mean /= static_cast<double>(xs.size());
  double var = 0.0;
  for (double x : xs) var += (x - mean) * (x - mean);
  var /= static_cast<double>(xs.size());
  return {mean, std::sqrt(var)};
}

}  // namespace detail

/// Mean and population std per uniform-grid checkpoint over successful
/// records, in record order (so results do not depend on execution order).
inline Aggregate aggregate(const std::vector<RunRecord>& records, std::uint64_t cadence) {
  Aggregate agg;
  std::vector<const RunRecord*> ok;
  for (const auto& r : records) {
    if (agg.algo.empty()) agg.algo = r.algo;
    if (r.ok()) {
      ok.push_back(&r);
    } else {
      ++agg.failures;
    }
  }
  if (ok.empty()) return agg;
  const std::uint64_t T = ok.front()->T;
  std::vector<std::uint64_t> ts;
  for (std::uint64_t t = cadence; t < T; t += cadence) ts.push_back(t);
  ts.push_back(T);

  std::vector<std::map<std::uint64_t, const Checkpoint*>> index(ok.size());
  for (std::size_t k = 0; k < ok.size(); ++k) {
    for (const auto& c : ok[k]->checkpoints) index[k][c.t] = &c;
  }
  for (auto t : ts) {
    std::vector<double> reg, ada, qry, ms;
    for (const auto& idx : index) {
      const auto it = idx.find(t);
      if (it == idx.end()) continue;
      reg.push_back(it->second->cum_regret);
      ada.push_back(static_cast<double>(it->second->cum_adaptivity));
      qry.push_back(static_cast<double>(it->second->cum_queries));
      ms.push_back(it->second->elapsed_ms);
    }
    AggregateRow row;
    row.t = t;
    row.n = reg.size();
    std::tie(row.mean_regret, row.std_regret) = detail::mean_std(reg);
    std::tie(row.mean_adaptivity, row.std_adaptivity) = detail::mean_std(ada);
    std::tie(row.mean_queries, row.std_queries) = detail::mean_std(qry);
    std::tie(row.mean_elapsed_ms, row.std_elapsed_ms) = detail::mean_std(ms);
    agg.rows.push_back(row);
  }
  return agg;
}

struct SweepResult {
  std::vector<RunRecord> records;  // in seed order
  Aggregate aggregate;
  std::size_t failures() const { return aggregate.failures; }
};

/// Runs every seed; `workers` bounds trial threads times batch threads.
inline SweepResult run_sweep(const RunConfig& config) {
  validate(config);
  const std::size_t n = config.seeds.size();
  const std::size_t workers = std::max<std::size_t>(1, config.workers);
  const std::size_t trial_threads = std::min(workers, n);
  const std::size_t batch_workers = std::max<std::size_t>(1, workers / trial_threads);

  SweepResult out;
  out.records.resize(n);
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t k = next++; k < n; k = next++) out.records[k] = run_trial(config, config.seeds[k], batch_workers);
  };
  if (trial_threads <= 1) {
    work();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < trial_threads; ++w) pool.emplace_back(work);
  }
  out.aggregate = aggregate(out.records, config.cadence());
  return out;
}

// ---------------------------------------------------------------------------
// Persistence
// ---------------------------------------------------------------------------

inline const char* kResultsHeader = "run_id,algo,env,d,m,T,seed,t,cum_regret,cum_adaptivity,cum_queries,elapsed_ms";

/// Shortest-faithful text with 17 significant digits.
inline std::string format_real(double x) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), x, std::chars_format::general, 17);
  return std::string(buf, res.ptr);
}

inline void write_results(const std::vector<RunRecord>& records, std::ostream& os) {
  os << kResultsHeader << '\n';
  for (const auto& r : records) {
    for (const auto& c : r.checkpoints) {
      os << r.run_id << ',' << r.algo << ',' << r.env << ',' << r.d << ',' << r.m << ',' << r.T << ',' << r.seed
         << ',' << c.t << ',' << format_real(c.cum_regret) << ',' << c.cum_adaptivity << ',' << c.cum_queries << ','
         << format_real(c.elapsed_ms) << '\n';
    }
  }
}

inline void write_results(const std::vector<RunRecord>& records, const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream os(path, std::ios::binary);
  if (!os) throw Error("cannot open " + path.string() + " for writing");
  write_results(records, os);
  if (!os) throw Error("failed writing " + path.string());
}

namespace detail {

template <class T>
T parse_number(const std::string& s, const std::string& what) {
  T v{};
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc{} || res.ptr != s.data() + s.size()) throw Error("malformed " + what + ": '" + s + "'");
  return v;
}

}  // namespace detail

/// Rows are grouped into records by run_id, in first-appearance order.
inline std::vector<RunRecord> read_results(std::istream& is) {
  std::string line;
  if (!std::getline(is, line) || line != kResultsHeader) throw Error("results file has an unexpected header");
  std::vector<RunRecord> out;
  std::unordered_map<std::string, std::size_t> by_id;
  std::size_t lineno = 1;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::vector<std::string> f;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) f.push_back(cell);
    if (f.size() != 12) throw Error("malformed results row at line " + std::to_string(lineno));
    auto [it, inserted] = by_id.emplace(f[0], out.size());
    if (inserted) {
      RunRecord r;
      r.run_id = f[0];
      r.algo = f[1];
      r.env = f[2];
      r.d = detail::parse_number<std::size_t>(f[3], "d");
      r.m = detail::parse_number<std::size_t>(f[4], "m");
      r.T = detail::parse_number<std::uint64_t>(f[5], "T");
      r.seed = detail::parse_number<std::uint64_t>(f[6], "seed");
      out.push_back(std::move(r));
    }
    Checkpoint c;
    c.t = detail::parse_number<std::uint64_t>(f[7], "t");
    c.cum_regret = detail::parse_number<double>(f[8], "cum_regret");
    c.cum_adaptivity = detail::parse_number<std::uint64_t>(f[9], "cum_adaptivity");
    c.cum_queries = detail::parse_number<std::uint64_t>(f[10], "cum_queries");
    c.elapsed_ms = detail::parse_number<double>(f[11], "elapsed_ms");
    out[it->second].checkpoints.push_back(c);
  }
  return out;
}

inline std::vector<RunRecord> read_results(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw Error("cannot open " + path.string());
  return read_results(is);
}

inline void write_aggregate(const Aggregate& agg, std::ostream& os) {
  os << "algo,t,n,mean_regret,std_regret,mean_adaptivity,std_adaptivity,mean_queries,std_queries,"
        "mean_elapsed_ms,std_elapsed_ms\n";
  for (const auto& r : agg.rows) {
    os << agg.algo << ',' << r.t << ',' << r.n << ',' << format_real(r.mean_regret) << ','
       << format_real(r.std_regret) << ',' << format_real(r.mean_adaptivity) << ','
       << format_real(r.std_adaptivity) << ',' << format_real(r.mean_queries) << ',' << format_real(r.std_queries)
       << ',' << format_real(r.mean_elapsed_ms) << ',' << format_real(r.std_elapsed_ms) << '\n';
  }
}

inline nlohmann::json config_json(const RunConfig& c) {
  nlohmann::json algo{{"name", c.algo.name},   {"label", c.algo.display_name()}, {"C", c.algo.C},
                      {"M", c.algo.M},         {"alpha", c.algo.alpha},          {"c_h", c.algo.c_h},
                      {"c_f", c.algo.c_f},     {"update_every_round", c.algo.update_every_round}};
  algo["warmup_cap"] = c.algo.warmup_cap ? nlohmann::json(*c.algo.warmup_cap) : nlohmann::json(nullptr);
  algo["discretize"] = c.algo.discretize ? nlohmann::json(*c.algo.discretize) : nlohmann::json(nullptr);
  nlohmann::json env{{"kind", c.env.kind}, {"d", c.env.d}, {"m", c.env.m},
                     {"action_set", c.env.exact ? "exact" : "at-most"}};
  env["env_seed"] = c.env.env_seed ? nlohmann::json(*c.env.env_seed) : nlohmann::json(nullptr);
  return {{"env", env},
          {"algo", algo},
          {"T", c.T},
          {"seeds", c.seeds},
          {"checkpoint_every", c.cadence()},
          {"workers", c.workers},
          {"timing", c.timing}};
}

inline std::vector<std::size_t> arms_one_based(const Action& a) {
  auto arms = a.arms();
  for (auto& i : arms) ++i;
  return arms;
}

inline nlohmann::json sweep_metadata(const RunConfig& config, const SweepResult& sweep) {
  nlohmann::json j;
  j["schema_version"] = kSchemaVersion;
  j["config"] = config_json(config);
  nlohmann::json trials = nlohmann::json::array();
  for (const auto& r : sweep.records) {
    nlohmann::json t{{"run_id", r.run_id}, {"seed", r.seed}, {"env_seed", r.env_seed}};
    if (r.best_action) {
      t["best_action"] = arms_one_based(*r.best_action);
      t["best_reward"] = r.best_reward;
    }
    t["adaptivity_rounds"] = r.ledger.adaptivity_rounds();
    t["total_queries"] = r.ledger.total_queries();
    if (!r.checkpoints.empty()) {
      t["final_regret"] = r.final().cum_regret;
      t["final_pseudo_regret"] = r.final().cum_pseudo_regret;
    }
    t["environment"] = r.env_metadata;
    t["algorithm"] = r.policy_metadata;
    t["error"] = r.error ? nlohmann::json(*r.error) : nlohmann::json(nullptr);
    if (!j.contains("grid") && r.policy_metadata.is_object() && r.policy_metadata.contains("grid")) {
      j["grid"] = r.policy_metadata["grid"];
    }
    trials.push_back(std::move(t));
  }
  j["trials"] = std::move(trials);
  j["failures"] = sweep.failures();
  return j;
}

inline nlohmann::json read_metadata(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw Error("cannot open " + path.string());
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(is);
  } catch (const nlohmann::json::exception& e) {
    throw Error("malformed metadata: " + std::string(e.what()));
  }
  if (!j.contains("schema_version") || j["schema_version"] != kSchemaVersion) {
    throw Error("metadata schema_version mismatch");
  }
  return j;
}

/// Writes results.csv, aggregate.csv and metadata.json under `dir`.
inline void write_sweep(const RunConfig& config, const SweepResult& sweep, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  write_results(sweep.records, dir / "results.csv");
  {
    std::ofstream os(dir / "aggregate.csv", std::ios::binary);
    if (!os) throw Error("cannot write " + (dir / "aggregate.csv").string());
    write_aggregate(sweep.aggregate, os);
  }
  std::ofstream os(dir / "metadata.json");
  if (!os) throw Error("cannot write " + (dir / "metadata.json").string());
  os << sweep_metadata(config, sweep).dump(2) << '\n';
}

}  // namespace oracle_thrift
