#pragma once
// Combinatorial optimization oracle: exact enumeration, a top-m fast path
// for cardinality-constrained linear objectives, an alpha-approximation
// wrapper, and the batch executor that meters adaptivity and query counts.

#include <algorithm>
#include <array>
#include <cmath>
#include <exception>
#include <functional>
#include <limits>
#include <memory>
#include <numeric>
#include <optional>
#include <thread>
#include <variant>
#include <vector>

#include "oracle_thrift/core.hpp"

namespace oracle_thrift {

// ---------------------------------------------------------------------------
// Objectives and queries
// ---------------------------------------------------------------------------
using Evaluator = std::function<double(const Action&)>;

struct LinearWeights {
  std::vector<double> w;
};

/// Must be pure and safe to call concurrently.
struct GeneralEvaluator {
  Evaluator f;
};

using Objective = std::variant<LinearWeights, GeneralEvaluator>;

/// Symmetric d x d mask of pairs (i != j) that may co-occur in an action.
class PairMask {
 public:
  PairMask() = default;
  PairMask(std::size_t d, bool allow_all) : rows_(d, allow_all ? full_mask(d) : 0) {}

  std::size_t dim() const noexcept { return rows_.size(); }
  bool allowed(std::size_t i, std::size_t j) const { return ((rows_.at(i) >> j) & 1U) != 0; }
  void set(std::size_t i, std::size_t j, bool allow) {
    const std::uint64_t bi = std::uint64_t{1} << i;
    const std::uint64_t bj = std::uint64_t{1} << j;
    if (allow) {
      rows_.at(i) |= bj;
      rows_.at(j) |= bi;
    } else {
      rows_.at(i) &= ~bj;
      rows_.at(j) &= ~bi;
    }
  }
  /// True when every pair of distinct arms in `a` is allowed.
  bool admits(const Action& a) const {
    bool ok = true;
    a.for_each_arm([&](std::size_t i) {
      const std::uint64_t others = a.bits() & ~(std::uint64_t{1} << i);
      if ((others & ~rows_[i]) != 0) ok = false;
    });
    return ok;
  }

 private:
  std::vector<std::uint64_t> rows_;
};

struct Constraints {
  std::uint64_t must_include = 0;
  std::optional<std::uint64_t> surviving_arms;
  std::optional<PairMask> allowed_pairs;

  bool none() const noexcept {
    return must_include == 0 && !surviving_arms && !allowed_pairs;
  }
};

struct OracleQuery {
  Objective objective;
  std::shared_ptr<const ActionSet> base;
  Constraints constraints{};
};

using OracleBatch = std::vector<OracleQuery>;

struct OracleResult {
  Action action;
  double value = 0.0;
  friend bool operator==(const OracleResult&, const OracleResult&) = default;
};

inline constexpr std::uint64_t kDefaultEnumerationCap = 10'000'000;

// ---------------------------------------------------------------------------
// Feasible-set enumeration
// ---------------------------------------------------------------------------
namespace detail {

inline std::uint64_t binomial_saturating(std::uint64_t n, std::uint64_t k) {
  if (k > n) return 0;
  k = std::min(k, n - k);
  constexpr auto kMax = std::numeric_limits<std::uint64_t>::max();
  unsigned __int128 r = 1;
  for (std::uint64_t i = 1; i <= k; ++i) {
    r = r * (n - k + i) / i;
    if (r > kMax) return kMax;
  }
  return static_cast<std::uint64_t>(r);
}

inline bool passes(const Action& a, const Constraints& c) {
  if ((a.bits() & c.must_include) != c.must_include) return false;
  if (c.surviving_arms && (a.bits() & ~*c.surviving_arms) != 0) return false;
  if (c.allowed_pairs && !c.allowed_pairs->admits(a)) return false;
  return true;
}

}  // namespace detail

/// Upper bound on the constrained feasible-set size (exact when no pair mask).
inline std::uint64_t feasible_size_bound(const ActionSet& set, const Constraints& c) {
  if (const auto* ex = std::get_if<ExplicitActions>(&set.kind())) {
    return ex->actions.size();
  }
  const std::size_t d = set.dim();
  const std::uint64_t candidates = c.surviving_arms ? (*c.surviving_arms & full_mask(d)) : full_mask(d);
  if ((c.must_include & ~candidates) != 0) return 0;
  const std::size_t n_must = static_cast<std::size_t>(std::popcount(c.must_include));
  const std::size_t n_rest = static_cast<std::size_t>(std::popcount(candidates & ~c.must_include));
  const std::size_t m = set.max_arms();
  const std::size_t kmin = set.is_exact() ? m : std::max<std::size_t>(1, n_must);
  std::uint64_t total = 0;
  for (std::size_t k = kmin; k <= m; ++k) {
    if (k < n_must) continue;
    const auto add = detail::binomial_saturating(n_rest, k - n_must);
    total = (total > std::numeric_limits<std::uint64_t>::max() - add)
                ? std::numeric_limits<std::uint64_t>::max()
                : total + add;
  }
  return total;
}

/// Visits every action of the constrained feasible set. For cardinality sets
/// the visiting order is canonical (see canonical_less). The visitor returns
/// false to stop early.
template <class Visitor>
void for_each_feasible(const ActionSet& set, const Constraints& c, Visitor&& visit,
                       std::uint64_t cap = kDefaultEnumerationCap) {
  const auto bound = feasible_size_bound(set, c);
  if (bound > cap) throw EnumerationBudgetExceeded(bound, cap);

  if (const auto* ex = std::get_if<ExplicitActions>(&set.kind())) {
    for (const Action& a : ex->actions) {
      if (detail::passes(a, c) && !visit(a)) return;
    }
    return;
  }

  const std::size_t d = set.dim();
  const std::uint64_t candidates = c.surviving_arms ? (*c.surviving_arms & full_mask(d)) : full_mask(d);
  if ((c.must_include & ~candidates) != 0) return;
  const std::size_t n_must = static_cast<std::size_t>(std::popcount(c.must_include));
  const std::size_t m = set.max_arms();
  if (n_must > m) return;

  std::vector<std::size_t> rest;
  Action(d, candidates & ~c.must_include).for_each_arm([&](std::size_t i) { rest.push_back(i); });

  const std::size_t kmin = set.is_exact() ? m : std::max<std::size_t>(1, n_must);
  std::vector<std::size_t> idx;
  for (std::size_t k = kmin; k <= m; ++k) {
    if (k < n_must) continue;
    const std::size_t r = k - n_must;
    if (r > rest.size()) break;
    idx.resize(r);
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    while (true) {
      std::uint64_t bits = c.must_include;
      for (std::size_t p : idx) bits |= std::uint64_t{1} << rest[p];
      const Action a(d, bits);
      if ((!c.allowed_pairs || c.allowed_pairs->admits(a)) && !visit(a)) return;
      // next combination in lexicographic order
      std::size_t pos = r;
      while (pos > 0 && idx[pos - 1] == rest.size() - r + pos - 1) --pos;
      if (pos == 0) break;
      ++idx[pos - 1];
      for (std::size_t q = pos; q < r; ++q) idx[q] = idx[q - 1] + 1;
    }
  }
}

/// Canonically smallest feasible action, if any. Issues no oracle query.
inline std::optional<Action> first_feasible(const ActionSet& set, const Constraints& c,
                                            std::uint64_t cap = kDefaultEnumerationCap) {
  std::optional<Action> best;
  const bool ordered = set.is_cardinality();
  for_each_feasible(
      set, c,
      [&](const Action& a) {
        if (!best || canonical_less(a, *best)) best = a;
        return !ordered;
      },
      cap);
  return best;
}

inline bool has_feasible(const ActionSet& set, const Constraints& c,
                         std::uint64_t cap = kDefaultEnumerationCap) {
  return first_feasible(set, c, cap).has_value();
}

// ---------------------------------------------------------------------------
// Linear objective values
// ---------------------------------------------------------------------------

/// Value of a linear objective with possibly infinite weights. Ordering:
/// more +inf arms first, then fewer -inf arms, then the finite remainder.
struct LinearScore {
  int pos_inf = 0;
  int neg_inf = 0;
  double finite = 0.0;

  double value() const noexcept {
    if (pos_inf > 0) return std::numeric_limits<double>::infinity();
    if (neg_inf > 0) return -std::numeric_limits<double>::infinity();
    return finite;
  }
  friend bool operator>(const LinearScore& a, const LinearScore& b) noexcept {
    if (a.pos_inf != b.pos_inf) return a.pos_inf > b.pos_inf;
    if (a.neg_inf != b.neg_inf) return a.neg_inf < b.neg_inf;
    return a.finite > b.finite;
  }
  friend bool operator==(const LinearScore&, const LinearScore&) = default;
};

// Finite weights are summed in sorted order so that actions with equal weight
// multisets get bit-identical scores.
inline LinearScore linear_score(std::span<const double> w, const Action& a) {
  LinearScore s;
  std::array<double, 64> buf;
  std::size_t n = 0;
  a.for_each_arm([&](std::size_t i) {
    const double x = w[i];
    if (x == std::numeric_limits<double>::infinity()) {
      ++s.pos_inf;
    } else if (x == -std::numeric_limits<double>::infinity()) {
      ++s.neg_inf;
    } else {
      buf[n++] = x;
    }
  });
  std::sort(buf.begin(), buf.begin() + static_cast<std::ptrdiff_t>(n));
  for (std::size_t k = 0; k < n; ++k) s.finite += buf[k];
  return s;
}

inline double linear_value(std::span<const double> w, const Action& a) {
  return linear_score(w, a).value();
}

// ---------------------------------------------------------------------------
// Solvers
// ---------------------------------------------------------------------------
namespace detail {

inline void validate_query(const OracleQuery& q) {
  if (!q.base) throw InvalidArgument("oracle query has no base action set");
  if (const auto* lw = std::get_if<LinearWeights>(&q.objective)) {
    if (lw->w.size() != q.base->dim()) throw DimensionMismatch("weight vector length differs from d");
    for (double x : lw->w) {
      if (std::isnan(x)) throw InvalidArgument("NaN objective weight");
    }
  } else if (!std::get<GeneralEvaluator>(q.objective).f) {
    throw InvalidArgument("empty objective evaluator");
  }
  if (q.constraints.allowed_pairs && q.constraints.allowed_pairs->dim() != q.base->dim()) {
    throw DimensionMismatch("pair mask dimension differs from d");
  }
}

}  // namespace detail

/// Argmax over the constrained feasible set by enumeration; ties go to the
/// canonically smallest action.
inline OracleResult solve_exact(const OracleQuery& q, std::uint64_t cap = kDefaultEnumerationCap) {
  detail::validate_query(q);
  std::optional<OracleResult> best;

  if (const auto* lw = std::get_if<LinearWeights>(&q.objective)) {
    LinearScore best_score;
    for_each_feasible(
        *q.base, q.constraints,
        [&](const Action& a) {
          const LinearScore s = linear_score(lw->w, a);
          if (!best || s > best_score || (s == best_score && canonical_less(a, best->action))) {
            best = OracleResult{a, s.value()};
            best_score = s;
          }
          return true;
        },
        cap);
  } else {
    const auto& f = std::get<GeneralEvaluator>(q.objective).f;
    for_each_feasible(
        *q.base, q.constraints,
        [&](const Action& a) {
          const double v = f(a);
          if (std::isnan(v)) throw InvalidArgument("objective evaluated to NaN");
          if (!best || v > best->value || (v == best->value && canonical_less(a, best->action))) {
            best = OracleResult{a, v};
          }
          return true;
        },
        cap);
  }
  if (!best) throw EmptyFeasibleSet("constraints eliminate every action");
  return *best;
}

/// Top-m selection for linear weights over an unconstrained cardinality set.
/// Agrees with solve_exact on every valid instance.
inline Action solve_top_m_linear(std::span<const double> w, std::size_t m, bool exact_m) {
  const std::size_t d = w.size();
  if (d == 0 || d > Action::kMaxArms) throw InvalidArgument("d must be in [1, 64]");
  if (m == 0 || m > d) throw InvalidArgument("m must be in [1, d]");
  for (double x : w) {
    if (std::isnan(x)) throw InvalidArgument("NaN objective weight");
  }
  std::vector<std::size_t> order(d);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return w[a] > w[b]; });
  std::uint64_t bits = 0;
  if (exact_m) {
    for (std::size_t k = 0; k < m; ++k) bits |= std::uint64_t{1} << order[k];
  } else {
    for (std::size_t k = 0; k < m && w[order[k]] > 0.0; ++k) bits |= std::uint64_t{1} << order[k];
    if (bits == 0) bits = std::uint64_t{1} << order[0];
  }
  return Action(d, bits);
}

inline OracleResult solve_top_m_linear(const OracleQuery& q) {
  detail::validate_query(q);
  const auto* lw = std::get_if<LinearWeights>(&q.objective);
  if (lw == nullptr || !q.base->is_cardinality() || !q.constraints.none()) {
    throw InvalidArgument("top-m fast path needs an unconstrained linear cardinality query");
  }
  const Action a = solve_top_m_linear(lw->w, q.base->max_arms(), q.base->is_exact());
  return {a, linear_value(lw->w, a)};
}

using Oracle = std::function<OracleResult(const OracleQuery&)>;

/// Exact enumeration oracle. With `fast_linear` it routes eligible linear
/// queries through the top-m path.
struct ExactOracle {
  std::uint64_t cap = kDefaultEnumerationCap;
  bool fast_linear = false;

  OracleResult operator()(const OracleQuery& q) const {
    if (fast_linear && q.base && q.base->is_cardinality() && q.constraints.none() &&
        std::holds_alternative<LinearWeights>(q.objective)) {
      return solve_top_m_linear(q);
    }
    return solve_exact(q, cap);
  }
};

inline double objective_value(const Objective& obj, const Action& a) {
  if (const auto* lw = std::get_if<LinearWeights>(&obj)) return linear_value(lw->w, a);
  return std::get<GeneralEvaluator>(obj).f(a);
}

/// Alpha-approximation test double: returns the canonically smallest action
/// with value >= alpha * optimum among a deterministic sample of at most 64
/// feasible actions (the first 63 in enumeration order plus the optimum).
inline Oracle wrap_alpha(Oracle inner, double alpha, std::uint64_t cap = kDefaultEnumerationCap) {
  if (!(alpha > 0.0 && alpha <= 1.0)) throw InvalidArgument("alpha must be in (0, 1]");
  return [inner = std::move(inner), alpha, cap](const OracleQuery& q) -> OracleResult {
    const OracleResult opt = inner(q);
    if (alpha == 1.0 || !std::isfinite(opt.value)) return opt;
    const double threshold = alpha * opt.value;
    std::optional<OracleResult> pick;
    if (opt.value >= threshold) pick = opt;
    std::size_t sampled = 0;
    for_each_feasible(
        *q.base, q.constraints,
        [&](const Action& a) {
          if (a == opt.action) return true;
          if (sampled == 63) return false;
          ++sampled;
          const double v = objective_value(q.objective, a);
          if (v >= threshold && (!pick || canonical_less(a, pick->action))) pick = OracleResult{a, v};
          return true;
        },
        cap);
    return pick ? *pick : opt;
  };
}

// ---------------------------------------------------------------------------
// Batch executor
// ---------------------------------------------------------------------------

/// Runs one round of independent oracle queries. Each call costs one
/// adaptivity round and |batch| queries, charged before evaluation so a
/// failing batch is still counted.
class BatchExecutor {
 public:
  explicit BatchExecutor(Oracle oracle = ExactOracle{}, std::size_t workers = 1)
      : oracle_(std::move(oracle)), workers_(std::max<std::size_t>(1, workers)) {}

  std::vector<OracleResult> execute(const OracleBatch& batch) {
    if (batch.empty()) throw InvalidArgument("oracle batch is empty");
    for (const auto& q : batch) {
      if (!q.base || q.base != batch.front().base) {
        throw InvalidArgument("batch queries must share the base action set");
      }
    }
    ledger_.record_batch(batch.size());

    std::vector<std::optional<OracleResult>> slots(batch.size());
    std::vector<std::exception_ptr> errors(batch.size());
    auto work = [&](std::size_t begin, std::size_t stride) {
      for (std::size_t k = begin; k < batch.size(); k += stride) {
        try {
          slots[k] = oracle_(batch[k]);
        } catch (...) {
          errors[k] = std::current_exception();
        }
      }
    };
    const std::size_t n_threads = std::min(workers_, batch.size());
    if (n_threads <= 1) {
      work(0, 1);
    } else {
      std::vector<std::jthread> pool;
      pool.reserve(n_threads);
      for (std::size_t w = 0; w < n_threads; ++w) pool.emplace_back(work, w, n_threads);
    }
    for (const auto& e : errors) {
      if (e) std::rethrow_exception(e);
    }
    std::vector<OracleResult> out;
    out.reserve(batch.size());
    for (auto& s : slots) out.push_back(*s);
    return out;
  }

  OracleResult execute_one(OracleQuery q) {
    OracleBatch batch;
    batch.push_back(std::move(q));
    return execute(batch).front();
  }

  const ComplexityLedger& ledger() const noexcept { return ledger_; }
  std::size_t workers() const noexcept { return workers_; }

 private:
  Oracle oracle_;
  std::size_t workers_;
  ComplexityLedger ledger_;
};

}  // namespace oracle_thrift
