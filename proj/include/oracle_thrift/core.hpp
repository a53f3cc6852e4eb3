#pragma once
// Shared domain types: actions over d base arms, action sets, semi-bandit
// observations, running sufficient statistics and the oracle complexity
// ledger.

#include <algorithm>
#include <bit>
#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <span>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <utility>
#include <variant>
#include <vector>

namespace oracle_thrift {

// ---------------------------------------------------------------------------
// Errors
// ---------------------------------------------------------------------------
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidArgument : public Error {
 public:
  using Error::Error;
};

class DimensionMismatch : public Error {
 public:
  using Error::Error;
};

class EmptyFeasibleSet : public Error {
 public:
  using Error::Error;
};

class EnumerationBudgetExceeded : public Error {
 public:
  EnumerationBudgetExceeded(std::uint64_t size, std::uint64_t cap)
      : Error("feasible set of " + std::to_string(size) +
              " actions exceeds enumeration cap " + std::to_string(cap)),
        size_(size) {}
  std::uint64_t size() const noexcept { return size_; }

 private:
  std::uint64_t size_;
};

class JointSupportBudgetExceeded : public Error {
 public:
  JointSupportBudgetExceeded(std::uint64_t size, std::uint64_t budget)
      : Error("joint support of " + std::to_string(size) +
              " outcomes exceeds budget " + std::to_string(budget)),
        size_(size) {}
  std::uint64_t size() const noexcept { return size_; }

 private:
  std::uint64_t size_;
};

class UnseenArm : public Error {
 public:
  explicit UnseenArm(std::size_t arm)
      : Error("arm " + std::to_string(arm + 1) + " has no observations"),
        arm_(arm) {}
  std::size_t arm() const noexcept { return arm_; }

 private:
  std::size_t arm_;
};

// ---------------------------------------------------------------------------
// Action
// ---------------------------------------------------------------------------

/// A subset of the d base arms, stored as a bit mask (bit i = arm i).
class Action {
 public:
  static constexpr std::size_t kMaxArms = 64;

  Action() = default;
  Action(std::size_t dim, std::uint64_t bits) : dim_(dim), bits_(bits) {
    if (dim == 0 || dim > kMaxArms) {
      throw InvalidArgument("action dimension must be in [1, 64]");
    }
    if (dim < kMaxArms && (bits >> dim) != 0) {
      throw InvalidArgument("action has bits beyond its dimension");
    }
  }

  static Action from_arms(std::size_t dim, std::span<const std::size_t> arms) {
    std::uint64_t bits = 0;
    for (std::size_t i : arms) {
      if (i >= dim) throw InvalidArgument("arm index out of range");
      bits |= std::uint64_t{1} << i;
    }
    return Action(dim, bits);
  }
  static Action from_arms(std::size_t dim, std::initializer_list<std::size_t> arms) {
    return from_arms(dim, std::span<const std::size_t>(arms.begin(), arms.size()));
  }

  std::size_t dim() const noexcept { return dim_; }
  std::uint64_t bits() const noexcept { return bits_; }
  std::size_t size() const noexcept { return static_cast<std::size_t>(std::popcount(bits_)); }
  bool empty() const noexcept { return bits_ == 0; }
  bool contains(std::size_t i) const noexcept {
    return i < dim_ && ((bits_ >> i) & 1U) != 0;
  }

  template <class F>
  void for_each_arm(F&& f) const {
    std::uint64_t rest = bits_;
    while (rest != 0) {
      f(static_cast<std::size_t>(std::countr_zero(rest)));
      rest &= rest - 1;
    }
  }

  std::vector<std::size_t> arms() const {
    std::vector<std::size_t> out;
    out.reserve(size());
    for_each_arm([&](std::size_t i) { out.push_back(i); });
    return out;
  }

  /// 1-based arm list, e.g. "{1,3}".
  std::string to_string() const {
    std::string s = "{";
    bool first = true;
    for_each_arm([&](std::size_t i) {
      if (!first) s += ',';
      s += std::to_string(i + 1);
      first = false;
    });
    return s + "}";
  }

  friend bool operator==(const Action&, const Action&) = default;

 private:
  std::size_t dim_ = 0;
  std::uint64_t bits_ = 0;
};

/// Tie-break order used by every solver: fewer arms first, then the
/// ascending arm-index lists compared lexicographically.
inline bool canonical_less(const Action& a, const Action& b) noexcept {
  const auto na = a.size();
  const auto nb = b.size();
  if (na != nb) return na < nb;
  std::uint64_t x = a.bits();
  std::uint64_t y = b.bits();
  while (x != 0 && y != 0) {
    const int i = std::countr_zero(x);
    const int j = std::countr_zero(y);
    if (i != j) return i < j;
    x &= x - 1;
    y &= y - 1;
  }
  return false;
}

inline std::uint64_t full_mask(std::size_t dim) noexcept {
  return dim >= 64 ? ~std::uint64_t{0} : ((std::uint64_t{1} << dim) - 1);
}

// ---------------------------------------------------------------------------
// ActionSet
// ---------------------------------------------------------------------------
struct CardinalityAtMost {
  std::size_t m;
};
struct CardinalityExact {
  std::size_t m;
};
struct ExplicitActions {
  std::vector<Action> actions;
};

class ActionSet {
 public:
  using Kind = std::variant<CardinalityAtMost, CardinalityExact, ExplicitActions>;

  static ActionSet at_most(std::size_t d, std::size_t m) {
    return ActionSet(d, CardinalityAtMost{m});
  }
  static ActionSet exact(std::size_t d, std::size_t m) {
    return ActionSet(d, CardinalityExact{m});
  }
  static ActionSet explicit_list(std::size_t d, std::vector<Action> actions) {
    return ActionSet(d, ExplicitActions{std::move(actions)});
  }

  std::size_t dim() const noexcept { return dim_; }
  std::size_t max_arms() const noexcept { return m_; }
  const Kind& kind() const noexcept { return kind_; }
  bool is_cardinality() const noexcept {
    return !std::holds_alternative<ExplicitActions>(kind_);
  }
  bool is_exact() const noexcept { return std::holds_alternative<CardinalityExact>(kind_); }

  bool contains(const Action& a) const {
    if (a.dim() != dim_ || a.empty()) return false;
    return std::visit(
        [&](const auto& k) -> bool {
          using K = std::decay_t<decltype(k)>;
          if constexpr (std::is_same_v<K, CardinalityAtMost>) {
            return a.size() <= k.m;
          } else if constexpr (std::is_same_v<K, CardinalityExact>) {
            return a.size() == k.m;
          } else {
            return std::find(k.actions.begin(), k.actions.end(), a) != k.actions.end();
          }
        },
        kind_);
  }

  std::string kind_name() const {
    switch (kind_.index()) {
      case 0: return "at-most";
      case 1: return "exact";
      default: return "explicit";
    }
  }

 private:
  ActionSet(std::size_t d, Kind kind) : dim_(d), kind_(std::move(kind)) {
    if (d == 0 || d > Action::kMaxArms) {
      throw InvalidArgument("action set dimension must be in [1, 64]");
    }
    std::visit(
        [&](const auto& k) {
          using K = std::decay_t<decltype(k)>;
          if constexpr (std::is_same_v<K, ExplicitActions>) {
            if (k.actions.empty()) throw InvalidArgument("explicit action set is empty");
            m_ = 0;
            for (std::size_t idx = 0; idx < k.actions.size(); ++idx) {
              const Action& a = k.actions[idx];
              if (a.dim() != d) throw DimensionMismatch("explicit action has wrong dimension");
              if (a.empty()) throw InvalidArgument("explicit action activates no arm");
              for (std::size_t j = 0; j < idx; ++j) {
                if (k.actions[j] == a) throw InvalidArgument("duplicate explicit action");
              }
              m_ = std::max(m_, a.size());
            }
          } else {
            if (k.m == 0 || k.m > d) throw InvalidArgument("m must be in [1, d]");
            m_ = k.m;
          }
        },
        kind_);
  }

  std::size_t dim_;
  Kind kind_;
  std::size_t m_ = 0;
};

// ---------------------------------------------------------------------------
// Observation
// ---------------------------------------------------------------------------

/// Semi-bandit feedback for one round; `feedback` holds (arm, y) for exactly
/// the activated arms, ascending by arm.
struct Observation {
  std::uint64_t t = 0;
  Action action;
  std::vector<std::pair<std::size_t, double>> feedback;

  static Observation from_full(std::uint64_t t, const Action& a, std::span<const double> y) {
    if (y.size() != a.dim()) throw DimensionMismatch("reward vector length differs from d");
    Observation obs{t, a, {}};
    obs.feedback.reserve(a.size());
    a.for_each_arm([&](std::size_t i) { obs.feedback.emplace_back(i, y[i]); });
    return obs;
  }
};

// ---------------------------------------------------------------------------
// Sufficient statistics
// ---------------------------------------------------------------------------
class ArmStats {
 public:
  explicit ArmStats(std::size_t d = 0) : count_(d, 0), sum_(d, 0.0) {}

  std::size_t dim() const noexcept { return count_.size(); }
  std::uint64_t count(std::size_t i) const { return count_.at(i); }
  double sum(std::size_t i) const { return sum_.at(i); }
  /// Sample mean; 0 while the arm is unseen.
  double mean(std::size_t i) const {
    const auto n = count_.at(i);
    return n == 0 ? 0.0 : sum_[i] / static_cast<double>(n);
  }

  void add(std::size_t i, double y) {
    ++count_.at(i);
    sum_[i] += y;
  }

 private:
  std::vector<std::uint64_t> count_;
  std::vector<double> sum_;
};

struct PairEntry {
  std::uint64_t count = 0;
  double product_sum = 0.0;
};

/// Sparse co-occurrence statistics over unordered pairs (i <= j), including
/// the diagonal.
class PairStats {
 public:
  explicit PairStats(std::size_t d = 0) : dim_(d) {}

  std::size_t dim() const noexcept { return dim_; }
  PairEntry get(std::size_t i, std::size_t j) const {
    auto it = entries_.find(key(i, j));
    return it == entries_.end() ? PairEntry{} : it->second;
  }
  std::uint64_t count(std::size_t i, std::size_t j) const { return get(i, j).count; }
  double product_sum(std::size_t i, std::size_t j) const { return get(i, j).product_sum; }
  std::size_t stored_pairs() const noexcept { return entries_.size(); }

  void add(std::size_t i, std::size_t j, double product) {
    auto& e = entries_[key(i, j)];
    ++e.count;
    e.product_sum += product;
  }

 private:
  static std::uint32_t key(std::size_t i, std::size_t j) noexcept {
    if (i > j) std::swap(i, j);
    return static_cast<std::uint32_t>(i * Action::kMaxArms + j);
  }

  std::size_t dim_;
  std::unordered_map<std::uint32_t, PairEntry> entries_;
};

/// Arm and pair statistics updated together from observations.
class SufficientStats {
 public:
  explicit SufficientStats(std::size_t d = 0) : arms_(d), pairs_(d) {}

  std::size_t dim() const noexcept { return arms_.dim(); }
  const ArmStats& arms() const noexcept { return arms_; }
  const PairStats& pairs() const noexcept { return pairs_; }

  void update(const Observation& obs) {
    if (obs.action.dim() != dim()) {
      throw DimensionMismatch("observation dimension differs from statistics dimension");
    }
    if (obs.feedback.size() != obs.action.size()) {
      throw InvalidArgument("feedback keys must match the activated arms");
    }
    for (const auto& [i, y] : obs.feedback) {
      if (!obs.action.contains(i)) throw InvalidArgument("feedback for an inactive arm");
      arms_.add(i, y);
    }
    const auto& fb = obs.feedback;
    for (std::size_t p = 0; p < fb.size(); ++p) {
      for (std::size_t q = p; q < fb.size(); ++q) {
        pairs_.add(fb[p].first, fb[q].first, fb[p].second * fb[q].second);
      }
    }
  }

 private:
  ArmStats arms_;
  PairStats pairs_;
};

// ---------------------------------------------------------------------------
// ComplexityLedger
// ---------------------------------------------------------------------------
class BatchExecutor;

/// Oracle adaptivity rounds and total queries. Only BatchExecutor mutates it.
class ComplexityLedger {
 public:
  std::uint64_t adaptivity_rounds() const noexcept { return adaptivity_rounds_; }
  std::uint64_t total_queries() const noexcept { return total_queries_; }
  friend bool operator==(const ComplexityLedger&, const ComplexityLedger&) = default;

 private:
  friend class BatchExecutor;
  void record_batch(std::uint64_t queries) noexcept {
    ++adaptivity_rounds_;
    total_queries_ += queries;
  }

  std::uint64_t adaptivity_rounds_ = 0;
  std::uint64_t total_queries_ = 0;
};

}  // namespace oracle_thrift
