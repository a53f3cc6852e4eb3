#pragma once
// General monotone rewards: per-arm empirical CDFs, optimistic and
// pessimistic shifted distributions, exact expectations over their product,
// and the adaptive (AROQ-GR) and scheduled (SROQ-GR) algorithms with an
// optional discretization of continuous feedback.

#include <cmath>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "oracle_thrift/algo_linear.hpp"
#include "oracle_thrift/core.hpp"
#include "oracle_thrift/envs.hpp"
#include "oracle_thrift/oracle.hpp"

namespace oracle_thrift {

inline constexpr std::uint64_t kDefaultJointSupportBudget = 1'000'000;

class EmpiricalCdf {
 public:
  void add(double x) {
    if (!(x >= 0.0 && x <= 1.0)) throw InvalidArgument("general-reward feedback must lie in [0, 1]");
    ++counts_[x];
    ++n_;
  }

  std::uint64_t count() const noexcept { return n_; }
  const std::map<double, std::uint64_t>& counts() const noexcept { return counts_; }

  /// Fraction of observations <= x; 0 when empty.
  double operator()(double x) const {
    if (n_ == 0) return 0.0;
    std::uint64_t below = 0;
    for (const auto& [v, c] : counts_) {
      if (v > x) break;
      below += c;
    }
    return static_cast<double>(below) / static_cast<double>(n_);
  }

 private:
  std::map<double, std::uint64_t> counts_;
  std::uint64_t n_ = 0;
};

/// Finite distribution on [0, 1]; support ascending, masses positive.
struct DiscreteDist {
  std::vector<double> support;
  std::vector<double> mass;

  double cdf(double x) const {
    double acc = 0.0;
    for (std::size_t k = 0; k < support.size() && support[k] <= x; ++k) acc += mass[k];
    return acc;
  }
  double total_mass() const {
    double acc = 0.0;
    for (double p : mass) acc += p;
    return acc;
  }

  static DiscreteDist point(double x) { return {{x}, {1.0}}; }
};

enum class Shift { Lower, Upper };

/// Lower: CDF max(F - eps, 0) below 1, the removed mass sits at 1 (dominates
/// the empirical distribution). Upper: CDF min(F + eps, 1) on [0, 1), the
/// added mass sits at 0. An empty CDF gives a point mass at 1 (Lower) or 0
/// (Upper).
inline DiscreteDist shifted_distribution(const EmpiricalCdf& cdf, Shift dir, double eps) {
  if (eps < 0.0 || std::isnan(eps)) throw InvalidArgument("shift must be nonnegative");
  if (cdf.count() == 0) return DiscreteDist::point(dir == Shift::Lower ? 1.0 : 0.0);

  const double n = static_cast<double>(cdf.count());
  DiscreteDist out;
  auto push = [&](double x, double p) {
    if (p > 0.0) {
      out.support.push_back(x);
      out.mass.push_back(p);
    }
  };

  std::uint64_t cum = 0;
  double prev = 0.0;
  if (dir == Shift::Upper) {
    const auto it0 = cdf.counts().find(0.0);
    const std::uint64_t at_zero = it0 == cdf.counts().end() ? 0 : it0->second;
    prev = std::min(static_cast<double>(at_zero) / n + eps, 1.0);
    push(0.0, prev);
    cum = at_zero;
  }
  for (const auto& [x, c] : cdf.counts()) {
    if (x >= 1.0 || (dir == Shift::Upper && x == 0.0)) continue;
    cum += c;
    const double f = static_cast<double>(cum) / n;
    const double shifted = dir == Shift::Lower ? std::max(f - eps, 0.0) : std::min(f + eps, 1.0);
    push(x, shifted - prev);
    prev = shifted;
  }
  push(1.0, 1.0 - prev);
  return out;
}

/// Exact E[reward(a, X)] with X drawn from the product of per-arm `dists`
/// (indexed by arm; only the arms of `a` are read).
inline double expected_value(std::span<const DiscreteDist> dists, const Action& a, const RewardFn& reward,
                             std::uint64_t budget = kDefaultJointSupportBudget) {
  if (dists.size() != a.dim()) throw DimensionMismatch("one distribution per arm required");
  const auto arms = a.arms();
  unsigned __int128 joint = 1;
  for (std::size_t i : arms) {
    if (dists[i].support.empty()) throw InvalidArgument("empty distribution");
    joint *= dists[i].support.size();
    if (joint > budget) {
      throw JointSupportBudgetExceeded(
          joint > std::numeric_limits<std::uint64_t>::max() ? std::numeric_limits<std::uint64_t>::max()
                                                            : static_cast<std::uint64_t>(joint),
          budget);
    }
  }
  std::vector<double> y(a.dim(), 0.0);
  std::vector<std::size_t> idx(arms.size(), 0);
  double total = 0.0;
  while (true) {
    double p = 1.0;
    for (std::size_t k = 0; k < arms.size(); ++k) {
      const auto& dk = dists[arms[k]];
      p *= dk.mass[idx[k]];
      y[arms[k]] = dk.support[idx[k]];
    }
    total += p * reward(a, y);
    std::size_t pos = 0;
    while (pos < idx.size() && ++idx[pos] == dists[arms[pos]].support.size()) idx[pos++] = 0;
    if (pos == idx.size()) break;
  }
  return total;
}

/// Maps y in [0, 1] to j / s where I_1 = [0, 1/s] and I_j = ((j-1)/s, j/s].
inline double discretize_observation(double y, std::uint64_t s) {
  if (s < 1) throw InvalidArgument("interval count must be positive");
  if (!(y >= 0.0 && y <= 1.0)) throw InvalidArgument("observation outside [0, 1]");
  const double sd = static_cast<double>(s);
  std::uint64_t j = static_cast<std::uint64_t>(std::ceil(y * sd));
  if (j > 1 && y <= static_cast<double>(j - 1) / sd) --j;
  j = std::clamp<std::uint64_t>(j, 1, s);
  return static_cast<double>(j) / sd;
}

/// s = ceil(C sqrt(m T)).
inline std::uint64_t discretization_intervals(double C, std::size_t m, std::uint64_t horizon) {
  return static_cast<std::uint64_t>(
      std::ceil(C * std::sqrt(static_cast<double>(m) * static_cast<double>(horizon))));
}

struct GeneralParams {
  double C = 1.5;
  bool update_every_round = false;
  /// Discretization constant; disabled when empty.
  std::optional<double> discretize;
  std::uint64_t joint_budget = kDefaultJointSupportBudget;
};

/// Per-arm CDFs fed from semi-bandit feedback, optionally discretized.
class CdfBank {
 public:
  CdfBank(std::size_t d, std::optional<std::uint64_t> intervals) : cdfs_(d), intervals_(intervals) {}

  void update(const Observation& obs) {
    for (const auto& [i, y] : obs.feedback) {
      cdfs_.at(i).add(intervals_ ? discretize_observation(y, *intervals_) : y);
    }
  }

  /// Shift per arm is sqrt(C * log_term / n_i).
  std::vector<DiscreteDist> shifted(Shift dir, double C, double log_term) const {
    std::vector<DiscreteDist> out;
    out.reserve(cdfs_.size());
    for (const auto& cdf : cdfs_) {
      const double eps = cdf.count() == 0 ? 0.0 : std::sqrt(C * log_term / static_cast<double>(cdf.count()));
      out.push_back(shifted_distribution(cdf, dir, eps));
    }
    return out;
  }

  const EmpiricalCdf& operator[](std::size_t i) const { return cdfs_.at(i); }
  std::optional<std::uint64_t> intervals() const noexcept { return intervals_; }

 private:
  std::vector<EmpiricalCdf> cdfs_;
  std::optional<std::uint64_t> intervals_;
};

namespace detail {

inline Objective expectation_objective(std::vector<DiscreteDist> dists, RewardFn reward, std::uint64_t budget) {
  auto shared = std::make_shared<const std::vector<DiscreteDist>>(std::move(dists));
  return GeneralEvaluator{[shared, reward = std::move(reward), budget](const Action& a) {
    return expected_value(*shared, a, reward, budget);
  }};
}

inline std::optional<std::uint64_t> intervals_for(const GeneralParams& p, std::size_t m, std::uint64_t horizon) {
  if (!p.discretize) return std::nullopt;
  return discretization_intervals(*p.discretize, m, horizon);
}

}  // namespace detail

class AroqGrPolicy final : public AdaptiveRarePolicy {
 public:
  AroqGrPolicy(std::shared_ptr<const ActionSet> set, std::uint64_t horizon, RewardFn reward, GeneralParams params,
               BatchExecutor executor, std::string name = "aroq-gr")
      : AdaptiveRarePolicy(set, horizon, params.update_every_round, std::move(executor)),
        reward_(std::move(reward)),
        params_(params),
        name_(std::move(name)),
        cdfs_(set->dim(), detail::intervals_for(params, set->max_arms(), horizon)) {}

  std::string_view name() const override { return name_; }
  const CdfBank& cdfs() const noexcept { return cdfs_; }

  nlohmann::json metadata() const override {
    nlohmann::json j{{"C", params_.C}, {"update_every_round", params_.update_every_round},
                     {"arm_epochs_total", epochs().total_epochs()}};
    if (cdfs_.intervals()) j["discretization_intervals"] = *cdfs_.intervals();
    return j;
  }

 protected:
  Objective make_objective(std::uint64_t t) override {
    return detail::expectation_objective(cdfs_.shifted(Shift::Lower, params_.C, std::log(static_cast<double>(t))),
                                         reward_, params_.joint_budget);
  }
  void on_observe(const Observation& obs) override { cdfs_.update(obs); }

 private:
  RewardFn reward_;
  GeneralParams params_;
  std::string name_;
  CdfBank cdfs_;
};

class SroqGrPolicy final : public ScheduledEliminationPolicy {
 public:
  SroqGrPolicy(std::shared_ptr<const ActionSet> set, std::uint64_t horizon, std::size_t epochs, RewardFn reward,
               GeneralParams params, BatchExecutor executor)
      : ScheduledEliminationPolicy(set, horizon, epochs, std::move(executor)),
        reward_(std::move(reward)),
        params_(params),
        cdfs_(set->dim(), detail::intervals_for(params, set->max_arms(), horizon)) {}

  std::string_view name() const override { return "sroq-gr"; }
  const CdfBank& cdfs() const noexcept { return cdfs_; }

 protected:
  Objectives make_objectives() override {
    const double log_T = std::log(static_cast<double>(grid().horizon));
    return {detail::expectation_objective(cdfs_.shifted(Shift::Lower, params_.C, log_T), reward_, params_.joint_budget),
            detail::expectation_objective(cdfs_.shifted(Shift::Upper, params_.C, log_T), reward_, params_.joint_budget)};
  }
  void on_observe(const Observation& obs) override { cdfs_.update(obs); }

 private:
  RewardFn reward_;
  GeneralParams params_;
  CdfBank cdfs_;
};

}  // namespace oracle_thrift
