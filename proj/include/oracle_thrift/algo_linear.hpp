#pragma once
// Worst-case linear rewards: adaptive rare oracle queries (AROQ), the
// per-round CUCB baseline, the alpha-approximate AROQ variant, and scheduled
// rare oracle queries with base-arm elimination (SROQ).
//
// The two control flows live in reusable bases so the general-reward
// algorithms only swap the objective handed to the oracle.

#include <cmath>
#include <limits>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "oracle_thrift/core.hpp"
#include "oracle_thrift/oracle.hpp"
#include "oracle_thrift/policy.hpp"
#include "oracle_thrift/schedule.hpp"

namespace oracle_thrift {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

struct LinearParams {
  double C = 1.5;
  bool update_every_round = false;
};

/// mu_i +/- sqrt(C * log_term / n_i) per arm; unseen arms get +/-inf.
inline std::vector<double> confidence_weights(const ArmStats& stats, double log_term, double C, bool upper) {
  std::vector<double> w(stats.dim());
  for (std::size_t i = 0; i < w.size(); ++i) {
    const auto n = stats.count(i);
    if (n == 0) {
      w[i] = upper ? kInf : -kInf;
    } else {
      const double bonus = std::sqrt(C * log_term / static_cast<double>(n));
      w[i] = stats.mean(i) + (upper ? bonus : -bonus);
    }
  }
  return w;
}

/// sum_{i in a} (mu_i + sqrt(C ln t / n_i)); +inf if any arm of a is unseen.
inline double ucb_index_adaptive(const Action& a, const ArmStats& stats, std::uint64_t t, double C) {
  if (t < 1) throw InvalidArgument("round index starts at 1");
  const double log_t = std::log(static_cast<double>(t));
  double total = 0.0;
  bool unseen = false;
  a.for_each_arm([&](std::size_t i) {
    const auto n = stats.count(i);
    if (n == 0) {
      unseen = true;
    } else {
      total += stats.mean(i) + std::sqrt(C * log_t / static_cast<double>(n));
    }
  });
  return unseen ? kInf : total;
}

/// 1 + sqrt(T m p / d): plays of arm i needed to close its current epoch.
inline double aroq_threshold(std::uint64_t previous, std::uint64_t horizon, std::size_t m, std::size_t d) {
  return 1.0 + std::sqrt(static_cast<double>(horizon) * static_cast<double>(m) *
                         static_cast<double>(previous) / static_cast<double>(d));
}

inline bool aroq_trigger(std::uint64_t current, std::uint64_t previous, std::uint64_t horizon, std::size_t m,
                         std::size_t d) {
  return static_cast<double>(current) >= aroq_threshold(previous, horizon, m, d);
}

/// Per-arm epoch bookkeeping of the adaptive framework.
class ArmEpochs {
 public:
  ArmEpochs(std::size_t d, std::size_t m, std::uint64_t horizon)
      : d_(d), m_(m), horizon_(horizon), epoch_(d, 1), current_(d, 0), previous_(d, 0),
        threshold_(d, aroq_threshold(0, horizon, m, d)) {}

  /// Closes every epoch whose trigger fires; returns true if any did.
  bool advance() {
    bool any = false;
    for (std::size_t i = 0; i < d_; ++i) {
      if (static_cast<double>(current_[i]) >= threshold_[i]) {
        ++epoch_[i];
        previous_[i] = current_[i];
        current_[i] = 0;
        threshold_[i] = aroq_threshold(previous_[i], horizon_, m_, d_);
        any = true;
      }
    }
    return any;
  }

  void record_play(const Action& a) {
    a.for_each_arm([&](std::size_t i) { ++current_[i]; });
  }

  std::uint64_t epoch(std::size_t i) const { return epoch_.at(i); }
  std::uint64_t current(std::size_t i) const { return current_.at(i); }
  std::uint64_t previous(std::size_t i) const { return previous_.at(i); }
  std::uint64_t total_epochs() const {
    std::uint64_t s = 0;
    for (auto e : epoch_) s += e;
    return s;
  }

 private:
  std::size_t d_;
  std::size_t m_;
  std::uint64_t horizon_;
  std::vector<std::uint64_t> epoch_;
  std::vector<std::uint64_t> current_;
  std::vector<std::uint64_t> previous_;
  std::vector<double> threshold_;
};

// ---------------------------------------------------------------------------
// Adaptive rare oracle queries
// ---------------------------------------------------------------------------

/// Holds the current action until some arm's epoch closes, then issues one
/// single-query batch. The first round always queries.
class AdaptiveRarePolicy : public Policy {
 public:
  AdaptiveRarePolicy(std::shared_ptr<const ActionSet> set, std::uint64_t horizon, bool update_every_round,
                     BatchExecutor executor)
      : Policy(std::move(executor)),
        set_(std::move(set)),
        horizon_(horizon),
        update_every_round_(update_every_round),
        stats_(set_->dim()),
        epochs_(set_->dim(), set_->max_arms(), horizon) {
    if (horizon < 1) throw InvalidArgument("horizon must be positive");
  }

  Action select(std::uint64_t t) final {
    if (t < 1 || t > horizon_) throw InvalidArgument("round outside [1, T]");
    bool update = epochs_.advance();
    if (update_every_round_ || !current_) update = true;
    if (update) {
      current_ = query_one(OracleQuery{make_objective(t), set_, {}}).action;
      last_query_round_ = t;
    }
    return *current_;
  }

  void observe(const Observation& obs) final {
    stats_.update(obs);
    epochs_.record_play(obs.action);
    on_observe(obs);
  }

  const SufficientStats& stats() const noexcept { return stats_; }
  const ArmEpochs& epochs() const noexcept { return epochs_; }
  const std::optional<Action>& current() const noexcept { return current_; }
  std::uint64_t last_query_round() const noexcept { return last_query_round_; }
  const std::shared_ptr<const ActionSet>& action_set() const noexcept { return set_; }
  std::uint64_t horizon() const noexcept { return horizon_; }

 protected:
  /// Objective the oracle maximizes at round t.
  virtual Objective make_objective(std::uint64_t t) = 0;
  virtual void on_observe(const Observation&) {}

 private:
  std::shared_ptr<const ActionSet> set_;
  std::uint64_t horizon_;
  bool update_every_round_;
  SufficientStats stats_;
  ArmEpochs epochs_;
  std::optional<Action> current_;
  std::uint64_t last_query_round_ = 0;
};

/// AROQ with linear UCB indices. With update_every_round it is CUCB; with an
/// alpha-wrapped oracle it is the alpha-approximate variant.
class AroqPolicy final : public AdaptiveRarePolicy {
 public:
  AroqPolicy(std::shared_ptr<const ActionSet> set, std::uint64_t horizon, LinearParams params,
             BatchExecutor executor, std::string name = "aroq")
      : AdaptiveRarePolicy(std::move(set), horizon, params.update_every_round, std::move(executor)),
        params_(params),
        name_(std::move(name)) {}

  std::string_view name() const override { return name_; }

  /// UCB index of `a` under the weights frozen at the last oracle call.
  double frozen_index(const Action& a) const { return linear_value(frozen_weights_, a); }
  const std::vector<double>& frozen_weights() const noexcept { return frozen_weights_; }

  nlohmann::json metadata() const override {
    return {{"C", params_.C}, {"update_every_round", params_.update_every_round},
            {"arm_epochs_total", epochs().total_epochs()}};
  }

 protected:
  Objective make_objective(std::uint64_t t) override {
    frozen_weights_ = confidence_weights(stats().arms(), std::log(static_cast<double>(t)), params_.C, true);
    return LinearWeights{frozen_weights_};
  }

 private:
  LinearParams params_;
  std::string name_;
  std::vector<double> frozen_weights_;
};

// ---------------------------------------------------------------------------
// Scheduled rare oracle queries with elimination
// ---------------------------------------------------------------------------
struct EpochRecord {
  std::size_t tau = 0;
  std::uint64_t start = 0;
  std::uint64_t end = 0;          // exclusive
  std::uint64_t surviving = 0;    // arm mask after elimination
  std::optional<PairMask> allowed_pairs;
  double max_lcb = 0.0;
  std::vector<std::pair<std::size_t, OracleResult>> representatives;  // (arm, argmax UCB containing it)
};

/// One batch per epoch: a representative query per surviving arm plus one
/// max-LCB query, then round-robin play over the survivors' representatives.
class ScheduledEliminationPolicy : public Policy {
 public:
  ScheduledEliminationPolicy(std::shared_ptr<const ActionSet> set, std::uint64_t horizon, std::size_t epochs,
                             BatchExecutor executor)
      : Policy(std::move(executor)),
        set_(std::move(set)),
        grid_(build_grid(horizon, epochs == 0 ? default_epochs(horizon) : epochs)),
        stats_(set_->dim()),
        surviving_(full_mask(set_->dim())) {}

  Action select(std::uint64_t t) final {
    if (t < 1 || t > grid_.horizon) throw InvalidArgument("round outside [1, T]");
    while (next_epoch_ <= grid_.epochs() && t >= grid_.start(next_epoch_)) {
      run_epoch(next_epoch_);
      ++next_epoch_;
    }
    const auto& reps = log_.back().representatives;
    return reps[t % reps.size()].second.action;
  }

  void observe(const Observation& obs) final {
    stats_.update(obs);
    on_observe(obs);
  }

  const EpochGrid& grid() const noexcept { return grid_; }
  const std::vector<EpochRecord>& epoch_log() const noexcept { return log_; }
  const SufficientStats& stats() const noexcept { return stats_; }
  std::uint64_t surviving() const noexcept { return surviving_; }
  const std::shared_ptr<const ActionSet>& action_set() const noexcept { return set_; }

  nlohmann::json metadata() const override {
    nlohmann::json j;
    j["grid"] = grid_.boundaries;
    j["eta"] = grid_.eta;
    nlohmann::json surv = nlohmann::json::array();
    for (const auto& e : log_) surv.push_back(Action(set_->dim(), e.surviving).to_string());
    j["surviving_per_epoch"] = surv;
    return j;
  }

 protected:
  struct Objectives {
    Objective ucb;
    Objective lcb;
  };
  /// UCB and LCB objectives for the epoch starting now.
  virtual Objectives make_objectives() = 0;
  virtual void on_observe(const Observation&) {}

 private:
  void run_epoch(std::size_t tau) {
    const Objectives obj = make_objectives();
    const Constraints prev{0, surviving_, std::nullopt};

    OracleBatch batch;
    std::vector<std::size_t> arms;
    Action(set_->dim(), surviving_).for_each_arm([&](std::size_t i) {
      Constraints c = prev;
      c.must_include = std::uint64_t{1} << i;
      if (has_feasible(*set_, c)) {
        batch.push_back(OracleQuery{obj.ucb, set_, c});
        arms.push_back(i);
      }
    });
    batch.push_back(OracleQuery{obj.lcb, set_, prev});
    const auto results = query(batch);

    EpochRecord rec;
    rec.tau = tau;
    rec.start = grid_.start(tau);
    rec.end = grid_.end(tau);
    rec.max_lcb = results.back().value;
    std::uint64_t next = 0;
    for (std::size_t k = 0; k < arms.size(); ++k) {
      if (results[k].value >= rec.max_lcb) {
        next |= std::uint64_t{1} << arms[k];
        rec.representatives.emplace_back(arms[k], results[k]);
      }
    }
    if (rec.representatives.empty()) {
      // Unreachable in exact arithmetic: the max-LCB action's arms survive.
      next = results.back().action.bits();
      results.back().action.for_each_arm(
          [&](std::size_t i) { rec.representatives.emplace_back(i, results.back()); });
    }
    surviving_ = next;
    rec.surviving = next;
    log_.push_back(std::move(rec));
  }

  std::shared_ptr<const ActionSet> set_;
  EpochGrid grid_;
  SufficientStats stats_;
  std::uint64_t surviving_;
  std::size_t next_epoch_ = 1;
  std::vector<EpochRecord> log_;
};

class SroqPolicy final : public ScheduledEliminationPolicy {
 public:
  SroqPolicy(std::shared_ptr<const ActionSet> set, std::uint64_t horizon, std::size_t epochs, LinearParams params,
             BatchExecutor executor)
      : ScheduledEliminationPolicy(std::move(set), horizon, epochs, std::move(executor)), params_(params) {}

  std::string_view name() const override { return "sroq"; }

 protected:
  Objectives make_objectives() override {
    const double log_T = std::log(static_cast<double>(grid().horizon));
    return {LinearWeights{confidence_weights(stats().arms(), log_T, params_.C, true)},
            LinearWeights{confidence_weights(stats().arms(), log_T, params_.C, false)}};
  }

 private:
  LinearParams params_;
};

}  // namespace oracle_thrift
