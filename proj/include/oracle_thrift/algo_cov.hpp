#pragma once
// Covariance-adaptive linear rewards: the covariance estimator and its
// upper confidence matrix, the ellipsoidal bonus, and the adaptive
// (AROQ-C) and scheduled (SROQ-C) algorithms.

#include <cmath>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "oracle_thrift/algo_linear.hpp"
#include "oracle_thrift/core.hpp"
#include "oracle_thrift/oracle.hpp"
#include "oracle_thrift/policy.hpp"
#include "oracle_thrift/schedule.hpp"

namespace oracle_thrift {

struct CovParams {
  double c_h = 1.0;
  double c_f = 1.0;
  /// Upper bound on the AROQ-C warm-up; defaults to floor(T / 10).
  std::optional<std::uint64_t> warmup_cap;
  bool update_every_round = false;
};

/// h = c_h * sqrt(ln t + ln d).
inline double cov_h(double t, std::size_t d, double c_h) {
  return c_h * std::sqrt(std::log(t) + std::log(static_cast<double>(d)));
}

/// f = c_f * (ln t + d ln ln max(t, 3)).
inline double cov_f(double t, std::size_t d, double c_f) {
  return c_f * (std::log(t) + static_cast<double>(d) * std::log(std::log(std::max(t, 3.0))));
}

/// Covariance estimates derived from running sums at a fixed confidence
/// radius h. Pair quantities are undefined (nullopt) until the pair
/// co-occurs.
class CovBundle {
 public:
  CovBundle(const SufficientStats& stats, double h) : stats_(&stats), h_(h) {}

  std::size_t dim() const noexcept { return stats_->dim(); }
  double h() const noexcept { return h_; }
  const SufficientStats& stats() const noexcept { return *stats_; }

  std::uint64_t count(std::size_t i) const { return stats_->arms().count(i); }
  std::uint64_t count(std::size_t i, std::size_t j) const { return stats_->pairs().count(i, j); }
  double mean(std::size_t i) const { return stats_->arms().mean(i); }

  std::optional<double> second_moment(std::size_t i, std::size_t j) const {
    const auto e = stats_->pairs().get(i, j);
    if (e.count == 0) return std::nullopt;
    return e.product_sum / static_cast<double>(e.count);
  }
  std::optional<double> sigma_hat(std::size_t i, std::size_t j) const {
    const auto s = second_moment(i, j);
    if (!s) return std::nullopt;
    return *s - mean(i) * mean(j);
  }
  /// sigma_hat + (5h / sqrt(n) + h^2 / n + 1 / n^2) / 4 with n the pair count.
  std::optional<double> sigma_bar(std::size_t i, std::size_t j) const {
    const auto sh = sigma_hat(i, j);
    if (!sh) return std::nullopt;
    const double n = static_cast<double>(count(i, j));
    return *sh + 0.25 * (5.0 * h_ / std::sqrt(n) + h_ * h_ / n + 1.0 / (n * n));
  }

 private:
  const SufficientStats* stats_;
  double h_;
};

/// a^T D_n^-1 G D_n^-1 a expanded through pair counts, before clamping.
inline double ellipsoid_quadform_raw(const Action& a, const CovBundle& b) {
  double q = 0.0;
  a.for_each_arm([&](std::size_t i) {
    if (b.count(i) == 0) throw UnseenArm(i);
  });
  a.for_each_arm([&](std::size_t i) {
    const double ni = static_cast<double>(b.count(i));
    a.for_each_arm([&](std::size_t j) {
      const auto nij = b.count(i, j);
      if (nij == 0) return;
      const double nj = static_cast<double>(b.count(j));
      q += static_cast<double>(nij) * *b.sigma_bar(i, j) / (ni * nj);
    });
    q += *b.sigma_bar(i, i) / ni + 1.0 / (ni * ni);
  });
  return q;
}

inline double ellipsoid_quadform(const Action& a, const CovBundle& b) {
  return std::max(ellipsoid_quadform_raw(a, b), 0.0);
}

inline double cov_ucb(const Action& a, const CovBundle& b, double f) {
  double mean = 0.0;
  a.for_each_arm([&](std::size_t i) { mean += b.mean(i); });
  return mean + f * std::sqrt(ellipsoid_quadform(a, b));
}

inline double cov_lcb(const Action& a, const CovBundle& b, double f) {
  double mean = 0.0;
  a.for_each_arm([&](std::size_t i) { mean += b.mean(i); });
  return mean - f * std::sqrt(ellipsoid_quadform(a, b));
}

/// Dense, immutable copy of the index ingredients handed to the oracle.
/// Unseen arms map to +inf (UCB) / -inf (LCB).
class CovIndexSnapshot {
 public:
  CovIndexSnapshot(const CovBundle& b, double f) : d_(b.dim()), f_(f), mean_(d_), seen_(d_), pair_(d_ * d_, 0.0), diag_(d_, 0.0) {
    for (std::size_t i = 0; i < d_; ++i) {
      mean_[i] = b.mean(i);
      seen_[i] = b.count(i) > 0;
    }
    for (std::size_t i = 0; i < d_; ++i) {
      if (!seen_[i]) continue;
      const double ni = static_cast<double>(b.count(i));
      for (std::size_t j = 0; j < d_; ++j) {
        const auto nij = b.count(i, j);
        if (!seen_[j] || nij == 0) continue;
        pair_[i * d_ + j] = static_cast<double>(nij) * *b.sigma_bar(i, j) / (ni * static_cast<double>(b.count(j)));
      }
      diag_[i] = *b.sigma_bar(i, i) / ni + 1.0 / (ni * ni);
    }
  }

  double ucb(const Action& a) const { return index(a, +1.0); }
  double lcb(const Action& a) const { return index(a, -1.0); }
  double f() const noexcept { return f_; }

 private:
  double index(const Action& a, double sign) const {
    double mean = 0.0;
    double q = 0.0;
    bool unseen = false;
    a.for_each_arm([&](std::size_t i) {
      if (!seen_[i]) {
        unseen = true;
        return;
      }
      mean += mean_[i];
      a.for_each_arm([&](std::size_t j) { q += pair_[i * d_ + j]; });
      q += diag_[i];
    });
    if (unseen) return sign * kInf;
    return mean + sign * f_ * std::sqrt(std::max(q, 0.0));
  }

  std::size_t d_;
  double f_;
  std::vector<double> mean_;
  std::vector<bool> seen_;
  std::vector<double> pair_;
  std::vector<double> diag_;
};

// ---------------------------------------------------------------------------
// Pair warm-up
// ---------------------------------------------------------------------------

/// Round-robin over the lexicographic enumeration of pairs (i <= j), playing
/// the canonically smallest action containing both arms. Pairs with no
/// containing action are skipped.
class PairWarmup {
 public:
  explicit PairWarmup(const ActionSet& set) {
    const std::size_t d = set.dim();
    for (std::size_t i = 0; i < d; ++i) {
      for (std::size_t j = i; j < d; ++j) {
        Constraints c;
        c.must_include = (std::uint64_t{1} << i) | (std::uint64_t{1} << j);
        pairs_.emplace_back(i, j);
        actions_.push_back(first_feasible(set, c));
        if (!actions_.back()) ++skipped_;
      }
    }
    if (skipped_ == pairs_.size()) throw EmptyFeasibleSet("no action contains any pair");
  }

  std::size_t pair_count() const noexcept { return pairs_.size(); }
  std::size_t skipped_pairs() const noexcept { return skipped_; }

  Action action_for(std::uint64_t t) const {
    std::size_t k = static_cast<std::size_t>(t % pairs_.size());
    while (!actions_[k]) k = (k + 1) % pairs_.size();
    return *actions_[k];
  }

 private:
  std::vector<std::pair<std::size_t, std::size_t>> pairs_;
  std::vector<std::optional<Action>> actions_;
  std::size_t skipped_ = 0;
};

/// min(ceil(d (d+1) ln^3 T / 2), cap) with cap defaulting to floor(T / 10).
inline std::uint64_t aroq_c_warmup_length(std::size_t d, std::uint64_t horizon, std::optional<std::uint64_t> cap) {
  const double lt = std::log(static_cast<double>(horizon));
  const double full = std::ceil(static_cast<double>(d * (d + 1)) * lt * lt * lt / 2.0);
  const std::uint64_t c = cap.value_or(horizon / 10);
  return std::min<std::uint64_t>(static_cast<std::uint64_t>(full), c);
}

inline bool aroq_c_trigger(std::uint64_t current, std::uint64_t previous) {
  return current >= 1 + 2 * previous;
}

// ---------------------------------------------------------------------------
// AROQ-C
// ---------------------------------------------------------------------------
class AroqCPolicy final : public Policy {
 public:
  AroqCPolicy(std::shared_ptr<const ActionSet> set, std::uint64_t horizon, CovParams params, BatchExecutor executor,
              std::string name = "aroq-c")
      : Policy(std::move(executor)),
        set_(std::move(set)),
        horizon_(horizon),
        params_(params),
        name_(std::move(name)),
        stats_(set_->dim()),
        warmup_(*set_),
        warmup_length_(aroq_c_warmup_length(set_->dim(), horizon, params.warmup_cap)),
        full_warmup_length_(aroq_c_warmup_length(set_->dim(), horizon, std::numeric_limits<std::uint64_t>::max())),
        epoch_(set_->dim() * set_->dim(), 0),
        current_(set_->dim() * set_->dim(), 0),
        previous_(set_->dim() * set_->dim(), 0) {}

  std::string_view name() const override { return name_; }

  Action select(std::uint64_t t) override {
    if (t < 1 || t > horizon_) throw InvalidArgument("round outside [1, T]");
    if (t <= warmup_length_) {
      action_ = warmup_.action_for(t);
      return *action_;
    }
    const std::size_t d = set_->dim();
    bool update = false;
    if (!adaptive_started_) {
      // The warm-up counts become each pair's previous epoch.
      for (std::size_t i = 0; i < d; ++i) {
        for (std::size_t j = i; j < d; ++j) {
          const auto k = i * d + j;
          epoch_[k] = 1;
          previous_[k] = current_[k];
          current_[k] = 0;
        }
      }
      adaptive_started_ = true;
      update = true;
    }
    for (std::size_t i = 0; i < d; ++i) {
      for (std::size_t j = i; j < d; ++j) {
        const auto k = i * d + j;
        if (aroq_c_trigger(current_[k], previous_[k])) {
          ++epoch_[k];
          previous_[k] = current_[k];
          current_[k] = 0;
          update = true;
        }
      }
    }
    if (update || params_.update_every_round) {
      const double tt = static_cast<double>(t);
      const CovBundle bundle(stats_, cov_h(tt, d, params_.c_h));
      auto snap = std::make_shared<const CovIndexSnapshot>(bundle, cov_f(tt, d, params_.c_f));
      action_ = query_one(OracleQuery{GeneralEvaluator{[snap](const Action& a) { return snap->ucb(a); }}, set_, {}})
                    .action;
    }
    return *action_;
  }

  void observe(const Observation& obs) override {
    stats_.update(obs);
    const std::size_t d = set_->dim();
    obs.action.for_each_arm([&](std::size_t i) {
      obs.action.for_each_arm([&](std::size_t j) {
        if (i <= j) ++current_[i * d + j];
      });
    });
  }

  const SufficientStats& stats() const noexcept { return stats_; }
  std::uint64_t warmup_length() const noexcept { return warmup_length_; }
  bool warmup_capped() const noexcept { return warmup_length_ < full_warmup_length_; }
  std::uint64_t pair_epoch(std::size_t i, std::size_t j) const {
    if (i > j) std::swap(i, j);
    return epoch_.at(i * set_->dim() + j);
  }

  nlohmann::json metadata() const override {
    return {{"c_h", params_.c_h},
            {"c_f", params_.c_f},
            {"warmup_rounds", warmup_length_},
            {"warmup_uncapped_rounds", full_warmup_length_},
            {"warmup_capped", warmup_capped()},
            {"warmup_skipped_pairs", warmup_.skipped_pairs()},
            {"update_every_round", params_.update_every_round}};
  }

 private:
  std::shared_ptr<const ActionSet> set_;
  std::uint64_t horizon_;
  CovParams params_;
  std::string name_;
  SufficientStats stats_;
  PairWarmup warmup_;
  std::uint64_t warmup_length_;
  std::uint64_t full_warmup_length_;
  bool adaptive_started_ = false;
  std::vector<std::uint64_t> epoch_;
  std::vector<std::uint64_t> current_;
  std::vector<std::uint64_t> previous_;
  std::optional<Action> action_;
};

// ---------------------------------------------------------------------------
// SROQ-C
// ---------------------------------------------------------------------------

/// min(floor(L / 2), ceil((d^2 m^2 L ln T)^(2/3))) rounds of pair exploration
/// in an epoch of length L.
inline std::uint64_t sroq_c_pair_phase_length(std::uint64_t epoch_length, std::size_t d, std::size_t m,
                                              std::uint64_t horizon) {
  const double dm = static_cast<double>(d * m);
  const double raw = std::pow(dm * dm * static_cast<double>(epoch_length) * std::log(static_cast<double>(horizon)),
                              2.0 / 3.0);
  return std::min<std::uint64_t>(epoch_length / 2, static_cast<std::uint64_t>(std::ceil(raw)));
}

struct CovEpochRecord {
  std::size_t tau = 0;
  std::uint64_t start = 0;
  std::uint64_t pair_phase_start = 0;
  std::uint64_t end = 0;  // exclusive
  std::uint64_t surviving = 0;
  PairMask allowed_pairs;
  double max_lcb = 0.0;
  double max_lcb_restricted = 0.0;
  std::vector<std::pair<std::size_t, OracleResult>> single_reps;
  std::vector<std::pair<std::pair<std::size_t, std::size_t>, OracleResult>> pair_reps;
};

class SroqCPolicy final : public Policy {
 public:
  SroqCPolicy(std::shared_ptr<const ActionSet> set, std::uint64_t horizon, std::size_t epochs, CovParams params,
              BatchExecutor executor)
      : Policy(std::move(executor)),
        set_(std::move(set)),
        horizon_(horizon),
        params_(params),
        stats_(set_->dim()),
        warmup_(*set_),
        warmup_length_((set_->dim() * (set_->dim() + 1) + 1) / 2),
        surviving_(full_mask(set_->dim())),
        allowed_(set_->dim(), true) {
    if (horizon_ < warmup_length_ + 4) throw InvalidArgument("horizon too short for the pair warm-up");
    const std::uint64_t rest = horizon_ - warmup_length_;
    grid_ = build_grid(rest, epochs == 0 ? default_epochs(rest) : epochs);
  }

  std::string_view name() const override { return "sroq-c"; }

  Action select(std::uint64_t t) override {
    if (t < 1 || t > horizon_) throw InvalidArgument("round outside [1, T]");
    if (t <= warmup_length_) return warmup_.action_for(t);
    while (next_epoch_ <= grid_.epochs() && t >= warmup_length_ + grid_.start(next_epoch_)) {
      run_epoch(next_epoch_);
      ++next_epoch_;
    }
    const auto& rec = log_.back();
    if (t < rec.pair_phase_start) return rec.single_reps[t % rec.single_reps.size()].second.action;
    return rec.pair_reps[t % rec.pair_reps.size()].second.action;
  }

  void observe(const Observation& obs) override { stats_.update(obs); }

  const SufficientStats& stats() const noexcept { return stats_; }
  const EpochGrid& grid() const noexcept { return grid_; }
  std::uint64_t warmup_length() const noexcept { return warmup_length_; }
  const std::vector<CovEpochRecord>& epoch_log() const noexcept { return log_; }

  nlohmann::json metadata() const override {
    nlohmann::json j;
    std::vector<std::uint64_t> shifted;
    for (auto b : grid_.boundaries) shifted.push_back(b + warmup_length_);
    j["grid"] = shifted;
    j["eta"] = grid_.eta;
    j["warmup_rounds"] = warmup_length_;
    j["c_h"] = params_.c_h;
    j["c_f"] = params_.c_f;
    nlohmann::json surv = nlohmann::json::array();
    for (const auto& e : log_) surv.push_back(Action(set_->dim(), e.surviving).to_string());
    j["surviving_per_epoch"] = surv;
    return j;
  }

 private:
  void run_epoch(std::size_t tau) {
    const std::size_t d = set_->dim();
    const double T = static_cast<double>(horizon_);
    const CovBundle bundle(stats_, cov_h(T, d, params_.c_h));
    auto snap = std::make_shared<const CovIndexSnapshot>(bundle, cov_f(T, d, params_.c_f));
    const Objective ucb = GeneralEvaluator{[snap](const Action& a) { return snap->ucb(a); }};
    const Objective lcb = GeneralEvaluator{[snap](const Action& a) { return snap->lcb(a); }};
    const Constraints prev{0, surviving_, allowed_};

    // Batch 1: single representatives, pair representatives, max LCB.
    OracleBatch batch;
    std::vector<std::size_t> single_arms;
    std::vector<std::pair<std::size_t, std::size_t>> pair_arms;
    Action(d, surviving_).for_each_arm([&](std::size_t i) {
      Constraints c = prev;
      c.must_include = std::uint64_t{1} << i;
      if (has_feasible(*set_, c)) {
        batch.push_back(OracleQuery{ucb, set_, c});
        single_arms.push_back(i);
      }
    });
    Action(d, surviving_).for_each_arm([&](std::size_t i) {
      Action(d, surviving_).for_each_arm([&](std::size_t j) {
        if (j <= i || !allowed_.allowed(i, j)) return;
        Constraints c = prev;
        c.must_include = (std::uint64_t{1} << i) | (std::uint64_t{1} << j);
        if (has_feasible(*set_, c)) {
          batch.push_back(OracleQuery{ucb, set_, c});
          pair_arms.emplace_back(i, j);
        }
      });
    });
    batch.push_back(OracleQuery{lcb, set_, prev});
    const auto r1 = query(batch);

    CovEpochRecord rec;
    rec.tau = tau;
    rec.start = warmup_length_ + grid_.start(tau);
    rec.end = warmup_length_ + grid_.end(tau);
    rec.max_lcb = r1.back().value;
    std::uint64_t next = 0;
    for (std::size_t k = 0; k < single_arms.size(); ++k) {
      if (r1[k].value >= rec.max_lcb) {
        next |= std::uint64_t{1} << single_arms[k];
        rec.single_reps.emplace_back(single_arms[k], r1[k]);
      }
    }
    if (rec.single_reps.empty()) {
      next = r1.back().action.bits();
      r1.back().action.for_each_arm([&](std::size_t i) { rec.single_reps.emplace_back(i, r1.back()); });
    }
    surviving_ = next;

    // Batch 2: max LCB over the arm-restricted set.
    const Constraints restricted{0, surviving_, allowed_};
    const OracleResult lcb2 = query_one(OracleQuery{lcb, set_, restricted});
    rec.max_lcb_restricted = lcb2.value;
    PairMask next_pairs(d, false);
    for (std::size_t k = 0; k < pair_arms.size(); ++k) {
      const auto [i, j] = pair_arms[k];
      const auto& res = r1[single_arms.size() + k];
      if (((surviving_ >> i) & 1U) && ((surviving_ >> j) & 1U) && res.value >= lcb2.value) {
        next_pairs.set(i, j, true);
        rec.pair_reps.push_back({{i, j}, res});
      }
    }
    if (rec.pair_reps.empty() && lcb2.action.size() >= 2) {
      lcb2.action.for_each_arm([&](std::size_t i) {
        lcb2.action.for_each_arm([&](std::size_t j) {
          if (i < j) {
            next_pairs.set(i, j, true);
            rec.pair_reps.push_back({{i, j}, lcb2});
          }
        });
      });
    }
    allowed_ = next_pairs;
    rec.surviving = surviving_;
    rec.allowed_pairs = allowed_;

    const std::uint64_t len = rec.end - rec.start;
    const std::uint64_t pair_len =
        rec.pair_reps.empty() ? 0 : sroq_c_pair_phase_length(len, d, set_->max_arms(), horizon_);
    rec.pair_phase_start = rec.end - pair_len;
    log_.push_back(std::move(rec));
  }

  std::shared_ptr<const ActionSet> set_;
  std::uint64_t horizon_;
  CovParams params_;
  SufficientStats stats_;
  PairWarmup warmup_;
  std::uint64_t warmup_length_;
  EpochGrid grid_;
  std::uint64_t surviving_;
  PairMask allowed_;
  std::size_t next_epoch_ = 1;
  std::vector<CovEpochRecord> log_;
};

}  // namespace oracle_thrift
