#pragma once
// Seeded synthetic environments with exact expected rewards.

#include <array>
#include <cmath>
#include <memory>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "json.hpp"
#include "oracle_thrift/core.hpp"
#include "oracle_thrift/oracle.hpp"

namespace oracle_thrift {

using Rng = std::mt19937_64;

/// Independent deterministic generator for a (seed, stream, substream) key.
inline Rng make_stream(std::uint64_t seed, std::uint64_t stream, std::uint64_t substream = 0) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32),
                    static_cast<std::uint32_t>(substream),
                    static_cast<std::uint32_t>(substream >> 32)};
  return Rng(seq);
}

/// r(a, y) for a full reward vector y.
using RewardFn = std::function<double(const Action&, std::span<const double>)>;

class Environment {
 public:
  virtual ~Environment() = default;

  virtual std::string_view name() const = 0;
  virtual std::shared_ptr<const ActionSet> action_set() const = 0;
  virtual std::vector<double> sample(Rng& rng) const = 0;
  virtual double expected_reward(const Action& a) const = 0;
  virtual double reward_of(const Action& a, std::span<const double> y) const = 0;
  /// Mean vector when r(a, y) = <a, y>; empty otherwise.
  virtual std::optional<std::vector<double>> linear_means() const { return std::nullopt; }
  /// True when every feedback value lies in [0, 1].
  virtual bool unit_bounded() const = 0;
  virtual nlohmann::json metadata() const = 0;

  std::size_t dim() const { return action_set()->dim(); }

  RewardFn reward_fn() const {
    return [this](const Action& a, std::span<const double> y) { return reward_of(a, y); };
  }
};

inline double linear_reward(const Action& a, std::span<const double> y) {
  double r = 0.0;
  a.for_each_arm([&](std::size_t i) { r += y[i]; });
  return r;
}

inline std::shared_ptr<const ActionSet> make_action_set(std::size_t d, std::size_t m, bool exact) {
  return std::make_shared<const ActionSet>(exact ? ActionSet::exact(d, m) : ActionSet::at_most(d, m));
}

// ---------------------------------------------------------------------------
// Linear rewards, uniform noise around the means
// ---------------------------------------------------------------------------

/// y_i ~ Uniform[mu_i - b_i, mu_i + b_i] with b_i = noise_scale * min(mu_i, 1 - mu_i).
class LinearUniformEnv final : public Environment {
 public:
  LinearUniformEnv(std::vector<double> mu, std::shared_ptr<const ActionSet> set, double noise_scale = 1.0)
      : mu_(std::move(mu)), set_(std::move(set)), noise_scale_(noise_scale) {
    if (!set_ || set_->dim() != mu_.size()) throw DimensionMismatch("means length differs from d");
    if (!(noise_scale_ >= 0.0 && noise_scale_ <= 1.0)) throw InvalidArgument("noise scale must be in [0, 1]");
    half_width_.resize(mu_.size());
    for (std::size_t i = 0; i < mu_.size(); ++i) {
      if (!(mu_[i] >= 0.0 && mu_[i] <= 1.0)) throw InvalidArgument("means must lie in [0, 1]");
      half_width_[i] = noise_scale_ * std::min(mu_[i], 1.0 - mu_[i]);
    }
  }

  static LinearUniformEnv random(std::size_t d, std::size_t m, std::uint64_t seed, bool exact = true,
                                 double noise_scale = 1.0) {
    Rng rng = make_stream(seed, 0xE1);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    std::vector<double> mu(d);
    for (auto& x : mu) x = unif(rng);
    return LinearUniformEnv(std::move(mu), make_action_set(d, m, exact), noise_scale);
  }

  std::string_view name() const override { return "linear"; }
  std::shared_ptr<const ActionSet> action_set() const override { return set_; }
  const std::vector<double>& means() const noexcept { return mu_; }

  std::vector<double> sample(Rng& rng) const override {
    std::uniform_real_distribution<double> unif(-1.0, 1.0);
    std::vector<double> y(mu_.size());
    for (std::size_t i = 0; i < y.size(); ++i) y[i] = mu_[i] + half_width_[i] * unif(rng);
    return y;
  }
  double expected_reward(const Action& a) const override { return linear_reward(a, mu_); }
  double reward_of(const Action& a, std::span<const double> y) const override { return linear_reward(a, y); }
  std::optional<std::vector<double>> linear_means() const override { return mu_; }
  bool unit_bounded() const override { return true; }
  nlohmann::json metadata() const override {
    return {{"kind", "linear"}, {"d", set_->dim()}, {"m", set_->max_arms()},
            {"action_set", set_->kind_name()}, {"means", mu_}, {"noise_scale", noise_scale_}};
  }

 private:
  std::vector<double> mu_;
  std::vector<double> half_width_;
  std::shared_ptr<const ActionSet> set_;
  double noise_scale_;
};

// ---------------------------------------------------------------------------
// Linear rewards with correlated Gaussian noise
// ---------------------------------------------------------------------------
class CovarianceGaussianEnv final : public Environment {
 public:
  CovarianceGaussianEnv(std::vector<double> mu, Eigen::MatrixXd sigma, std::shared_ptr<const ActionSet> set)
      : mu_(std::move(mu)), sigma_(std::move(sigma)), set_(std::move(set)) {
    const auto d = static_cast<Eigen::Index>(mu_.size());
    if (!set_ || set_->dim() != mu_.size() || sigma_.rows() != d || sigma_.cols() != d) {
      throw DimensionMismatch("covariance environment dimensions disagree");
    }
    if (!sigma_.isApprox(sigma_.transpose(), 1e-12)) throw InvalidArgument("covariance must be symmetric");
    if (sigma_.isZero(0.0)) {
      chol_ = Eigen::MatrixXd::Zero(d, d);
    } else {
      Eigen::LLT<Eigen::MatrixXd> llt(sigma_);
      if (llt.info() != Eigen::Success) throw InvalidArgument("covariance must be positive definite");
      chol_ = llt.matrixL();
    }
  }

  /// Sigma = scale * (A A^T + I) / (2 max_i (A A^T + I)_ii), A standard normal.
  static CovarianceGaussianEnv random(std::size_t d, std::size_t m, std::uint64_t seed, bool exact = true,
                                      double scale = 1.0) {
    Rng rng = make_stream(seed, 0xC0);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    std::normal_distribution<double> normal(0.0, 1.0);
    std::vector<double> mu(d);
    for (auto& x : mu) x = unif(rng);
    const auto n = static_cast<Eigen::Index>(d);
    Eigen::MatrixXd a(n, n);
    for (Eigen::Index r = 0; r < n; ++r) {
      for (Eigen::Index c = 0; c < n; ++c) a(r, c) = normal(rng);
    }
    Eigen::MatrixXd sigma = a * a.transpose() + Eigen::MatrixXd::Identity(n, n);
    sigma /= 2.0 * sigma.diagonal().maxCoeff();
    sigma = (0.5 * scale * (sigma + sigma.transpose())).eval();
    return CovarianceGaussianEnv(std::move(mu), std::move(sigma), make_action_set(d, m, exact));
  }

  std::string_view name() const override { return "cov"; }
  std::shared_ptr<const ActionSet> action_set() const override { return set_; }
  const std::vector<double>& means() const noexcept { return mu_; }
  const Eigen::MatrixXd& covariance() const noexcept { return sigma_; }

  std::vector<double> sample(Rng& rng) const override {
    std::normal_distribution<double> normal(0.0, 1.0);
    const auto d = static_cast<Eigen::Index>(mu_.size());
    Eigen::VectorXd z(d);
    for (Eigen::Index i = 0; i < d; ++i) z(i) = normal(rng);
    const Eigen::VectorXd noise = chol_ * z;
    std::vector<double> y(mu_.size());
    for (Eigen::Index i = 0; i < d; ++i) y[static_cast<std::size_t>(i)] = mu_[static_cast<std::size_t>(i)] + noise(i);
    return y;
  }
  double expected_reward(const Action& a) const override { return linear_reward(a, mu_); }
  double reward_of(const Action& a, std::span<const double> y) const override { return linear_reward(a, y); }
  std::optional<std::vector<double>> linear_means() const override { return mu_; }
  bool unit_bounded() const override { return false; }
  nlohmann::json metadata() const override {
    nlohmann::json sigma = nlohmann::json::array();
    for (Eigen::Index r = 0; r < sigma_.rows(); ++r) {
      std::vector<double> row(static_cast<std::size_t>(sigma_.cols()));
      for (Eigen::Index c = 0; c < sigma_.cols(); ++c) row[static_cast<std::size_t>(c)] = sigma_(r, c);
      sigma.push_back(row);
    }
    return {{"kind", "cov"}, {"d", set_->dim()}, {"m", set_->max_arms()},
            {"action_set", set_->kind_name()}, {"means", mu_}, {"covariance", sigma}};
  }

 private:
  std::vector<double> mu_;
  Eigen::MatrixXd sigma_;
  Eigen::MatrixXd chol_;
  std::shared_ptr<const ActionSet> set_;
};

struct SigmaProfile {
  /// max over actions containing i of sigma_i^2(a); 0 when no action contains i.
  std::vector<double> per_arm_max;
  /// max over actions of sum_{i in a} sigma_i^2(a).
  double max_action_sum = 0.0;
};

/// sigma_i^2(a) = sum_{j in a} max(Sigma_ij, 0).
inline double clipped_variance(const Eigen::MatrixXd& sigma, const Action& a, std::size_t i) {
  double s = 0.0;
  a.for_each_arm([&](std::size_t j) {
    s += std::max(sigma(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)), 0.0);
  });
  return s;
}

inline SigmaProfile sigma_profile(const Eigen::MatrixXd& sigma, const ActionSet& set) {
  SigmaProfile p;
  p.per_arm_max.assign(set.dim(), 0.0);
  bool any = false;
  for_each_feasible(set, Constraints{}, [&](const Action& a) {
    double total = 0.0;
    a.for_each_arm([&](std::size_t i) {
      const double v = clipped_variance(sigma, a, i);
      p.per_arm_max[i] = std::max(p.per_arm_max[i], v);
      total += v;
    });
    p.max_action_sum = any ? std::max(p.max_action_sum, total) : total;
    any = true;
    return true;
  });
  return p;
}

inline SigmaProfile sigma_profile(const CovarianceGaussianEnv& env) {
  return sigma_profile(env.covariance(), *env.action_set());
}

// ---------------------------------------------------------------------------
// Non-linear monotone rewards over a five-point support
// ---------------------------------------------------------------------------
class GeneralDiscreteEnv final : public Environment {
 public:
  static constexpr std::array<double, 5> kSupport{0.2, 0.4, 0.6, 0.8, 1.0};
  using Pmf = std::array<double, 5>;

  GeneralDiscreteEnv(std::vector<Pmf> pmfs, std::shared_ptr<const ActionSet> set)
      : pmfs_(std::move(pmfs)), set_(std::move(set)) {
    if (!set_ || set_->dim() != pmfs_.size()) throw DimensionMismatch("pmf count differs from d");
    for (const auto& p : pmfs_) {
      double total = 0.0;
      for (double x : p) {
        if (x < 0.0) throw InvalidArgument("negative probability mass");
        total += x;
      }
      if (std::abs(total - 1.0) > 1e-12) throw InvalidArgument("pmf must sum to 1");
    }
  }

  /// Each arm puts 0.99 on a dominant support value drawn uniformly at
  /// construction, and 0.0025 on each of the other four values.
  static GeneralDiscreteEnv random(std::size_t d, std::size_t m, std::uint64_t seed, bool exact = true) {
    Rng rng = make_stream(seed, 0x6E);
    std::uniform_int_distribution<std::size_t> pick(0, kSupport.size() - 1);
    std::vector<Pmf> pmfs(d);
    for (auto& p : pmfs) {
      const std::size_t dom = pick(rng);
      for (std::size_t k = 0; k < p.size(); ++k) p[k] = (k == dom) ? 0.99 : 0.01 / 4.0;
    }
    return GeneralDiscreteEnv(std::move(pmfs), make_action_set(d, m, exact));
  }

  std::string_view name() const override { return "general"; }
  std::shared_ptr<const ActionSet> action_set() const override { return set_; }
  const std::vector<Pmf>& pmfs() const noexcept { return pmfs_; }
  /// Lipschitz-type bound on the reward, sqrt(m).
  double reward_bound() const { return std::sqrt(static_cast<double>(set_->max_arms())); }

  static double sqrt_sum_reward(const Action& a, std::span<const double> y) {
    return std::sqrt(std::max(linear_reward(a, y), 0.0));
  }

  std::vector<double> sample(Rng& rng) const override {
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    std::vector<double> y(pmfs_.size());
    for (std::size_t i = 0; i < y.size(); ++i) {
      const double u = unif(rng);
      double acc = 0.0;
      std::size_t k = 0;
      for (; k + 1 < kSupport.size(); ++k) {
        acc += pmfs_[i][k];
        if (u < acc) break;
      }
      y[i] = kSupport[k];
    }
    return y;
  }

  /// Exact expectation by enumerating the joint support of the active arms.
  double expected_reward(const Action& a) const override {
    const auto arms = a.arms();
    std::vector<double> y(pmfs_.size(), 0.0);
    std::vector<std::size_t> idx(arms.size(), 0);
    double total = 0.0;
    while (true) {
      double p = 1.0;
      for (std::size_t k = 0; k < arms.size(); ++k) {
        p *= pmfs_[arms[k]][idx[k]];
        y[arms[k]] = kSupport[idx[k]];
      }
      if (p > 0.0) total += p * sqrt_sum_reward(a, y);
      std::size_t pos = 0;
      while (pos < idx.size() && ++idx[pos] == kSupport.size()) idx[pos++] = 0;
      if (pos == idx.size()) break;
    }
    return total;
  }

  double reward_of(const Action& a, std::span<const double> y) const override { return sqrt_sum_reward(a, y); }
  bool unit_bounded() const override { return true; }
  nlohmann::json metadata() const override {
    nlohmann::json pm = nlohmann::json::array();
    for (const auto& p : pmfs_) pm.push_back(std::vector<double>(p.begin(), p.end()));
    return {{"kind", "general"}, {"d", set_->dim()}, {"m", set_->max_arms()},
            {"action_set", set_->kind_name()}, {"support", std::vector<double>(kSupport.begin(), kSupport.end())},
            {"pmfs", pm}, {"reward_bound", reward_bound()}};
  }

 private:
  std::vector<Pmf> pmfs_;
  std::shared_ptr<const ActionSet> set_;
};

// ---------------------------------------------------------------------------
// Optimal action (bookkeeping only, never charged to a ledger)
// ---------------------------------------------------------------------------
inline OracleResult optimal_action(const Environment& env, std::uint64_t cap = kDefaultEnumerationCap) {
  const auto set = env.action_set();
  if (auto mu = env.linear_means()) {
    OracleQuery q{LinearWeights{std::move(*mu)}, set, {}};
    if (set->is_cardinality()) return solve_top_m_linear(q);
    return solve_exact(q, cap);
  }
  OracleQuery q{GeneralEvaluator{[&env](const Action& a) { return env.expected_reward(a); }}, set, {}};
  return solve_exact(q, cap);
}

}  // namespace oracle_thrift
