#include <gtest/gtest.h>

#include <limits>
#include <memory>
#include <random>
#include <vector>

#include "oracle_thrift/oracle.hpp"

using namespace oracle_thrift;

namespace {

std::shared_ptr<const ActionSet> at_most(std::size_t d, std::size_t m) {
  return std::make_shared<const ActionSet>(ActionSet::at_most(d, m));
}
std::shared_ptr<const ActionSet> exact(std::size_t d, std::size_t m) {
  return std::make_shared<const ActionSet>(ActionSet::exact(d, m));
}

std::vector<double> random_weights(std::mt19937_64& rng, std::size_t d, double lo = -1.0, double hi = 1.0) {
  std::uniform_real_distribution<double> unif(lo, hi);
  std::vector<double> w(d);
  for (auto& x : w) x = unif(rng);
  return w;
}

// Independent reference: every subset of size <= 3 by nested loops, strict
// improvement only, visiting sizes ascending and index tuples ascending.
Action naive_at_most3(const std::vector<double>& w, std::size_t must) {
  const std::size_t d = w.size();
  double best = -std::numeric_limits<double>::infinity();
  std::vector<std::size_t> arg;
  auto consider = [&](std::vector<std::size_t> s) {
    if (std::find(s.begin(), s.end(), must) == s.end()) return;
    double v = 0;
    for (auto i : s) v += w[i];
    if (v > best) {
      best = v;
      arg = s;
    }
  };
  for (std::size_t i = 0; i < d; ++i) consider({i});
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t j = i + 1; j < d; ++j) consider({i, j});
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t j = i + 1; j < d; ++j)
      for (std::size_t k = j + 1; k < d; ++k) consider({i, j, k});
  return Action::from_arms(d, arg);
}

}  // namespace

TEST(SolveExact, TopTwoPositive) {
  const auto r = solve_exact({LinearWeights{{1.0, 0.0, 0.5}}, at_most(3, 2), {}});
  EXPECT_EQ(r.action, Action::from_arms(3, {0, 2}));
  EXPECT_DOUBLE_EQ(r.value, 1.5);
}

TEST(SolveExact, TieGoesToFirstArm) {
  const auto r = solve_exact({LinearWeights{{0.7, 0.7}}, exact(2, 1), {}});
  EXPECT_EQ(r.action, Action::from_arms(2, {0}));
}

TEST(SolveExact, MustIncludeMatchesNaiveEnumeration) {
  std::mt19937_64 rng(11);
  const auto set = at_most(10, 3);
  for (int rep = 0; rep < 200; ++rep) {
    const auto w = random_weights(rng, 10);
    Constraints c;
    c.must_include = std::uint64_t{1} << 4;
    const auto r = solve_exact({LinearWeights{w}, set, c});
    EXPECT_EQ(r.action, naive_at_most3(w, 4));
    EXPECT_TRUE(r.action.contains(4));
  }
}

TEST(SolveExact, ConstraintsRestrictFeasibleSet) {
  const auto set = exact(4, 2);
  Constraints c;
  c.surviving_arms = 0b0111;
  PairMask mask(4, true);
  mask.set(0, 1, false);
  c.allowed_pairs = mask;
  const auto r = solve_exact({LinearWeights{{5.0, 4.0, 1.0, 9.0}}, set, c});
  EXPECT_EQ(r.action, Action::from_arms(4, {0, 2}));
  EXPECT_DOUBLE_EQ(r.value, 6.0);
}

TEST(SolveExact, EmptyFeasibleSet) {
  Constraints c;
  c.surviving_arms = 0b001;
  EXPECT_THROW(solve_exact({LinearWeights{{1.0, 1.0, 1.0}}, exact(3, 2), c}), EmptyFeasibleSet);
  Constraints c2;
  c2.must_include = 0b011;
  EXPECT_THROW(solve_exact({LinearWeights{{1.0, 1.0, 1.0}}, exact(3, 1), c2}), EmptyFeasibleSet);
}

TEST(SolveExact, EnumerationCap) {
  const auto set = exact(40, 8);
  try {
    solve_exact({LinearWeights{std::vector<double>(40, 1.0)}, set, {}});
    FAIL() << "expected EnumerationBudgetExceeded";
  } catch (const EnumerationBudgetExceeded&) {
  }
  EXPECT_THROW(solve_exact({LinearWeights{std::vector<double>(6, 1.0)}, exact(6, 3), {}}, 10),
               EnumerationBudgetExceeded);
}

TEST(SolveExact, GeneralEvaluatorAndExplicitSet) {
  const auto set = std::make_shared<const ActionSet>(ActionSet::explicit_list(
      3, {Action::from_arms(3, {2}), Action::from_arms(3, {0, 1}), Action::from_arms(3, {1})}));
  GeneralEvaluator f{[](const Action& a) { return a.contains(1) ? 1.0 : 0.5; }};
  // {0,1} and {1} tie; the explicit list's insertion order does not matter for ties.
  const auto r = solve_exact({f, set, {}});
  EXPECT_EQ(r.action, Action::from_arms(3, {1}));
}

TEST(SolveExact, RejectsInvalidQueries) {
  EXPECT_THROW(solve_exact({LinearWeights{{1.0}}, exact(2, 1), {}}), DimensionMismatch);
  EXPECT_THROW(solve_exact({LinearWeights{{1.0, std::nan("")}}, exact(2, 1), {}}), InvalidArgument);
  EXPECT_THROW(solve_exact({LinearWeights{{1.0, 1.0}}, nullptr, {}}), InvalidArgument);
}

TEST(SolveExact, RescalingInvariance) {
  std::mt19937_64 rng(3);
  const auto set = at_most(8, 3);
  for (int rep = 0; rep < 100; ++rep) {
    auto w = random_weights(rng, 8);
    const auto a = solve_exact({LinearWeights{w}, set, {}}).action;
    for (auto& x : w) x *= 3.7;
    EXPECT_EQ(solve_exact({LinearWeights{w}, set, {}}).action, a);
  }
}

TEST(SolveExact, InfiniteWeightsPreferMoreUnseenArms) {
  const double inf = std::numeric_limits<double>::infinity();
  const auto r = solve_exact({LinearWeights{{0.9, inf, 0.1, inf}}, at_most(4, 3), {}});
  EXPECT_EQ(r.action, Action::from_arms(4, {0, 1, 3}));
  EXPECT_EQ(r.value, inf);
  const auto lcb = solve_exact({LinearWeights{{-inf, 0.2, -inf, 0.5}}, exact(4, 2), {}});
  EXPECT_EQ(lcb.action, Action::from_arms(4, {1, 3}));
}

TEST(TopM, Examples) {
  const std::vector<double> w{0.9, 0.1, 0.5, 0.7};
  EXPECT_EQ(solve_top_m_linear(w, 2, false), Action::from_arms(4, {0, 3}));
  const std::vector<double> neg{-1.0, -2.0};
  EXPECT_EQ(solve_top_m_linear(neg, 2, false), Action::from_arms(2, {0}));
}

TEST(TopM, AgreesWithEnumeration) {
  std::mt19937_64 rng(5);
  std::uniform_int_distribution<int> coin(0, 4);
  for (int rep = 0; rep < 1000; ++rep) {
    auto w = random_weights(rng, 12);
    // Inject ties and zeros so the tie-break paths are exercised.
    for (auto& x : w) {
      const int c = coin(rng);
      if (c == 0) x = 0.0;
      if (c == 1) x = 0.25;
    }
    for (bool ex : {false, true}) {
      const auto set = ex ? exact(12, 4) : at_most(12, 4);
      const OracleQuery q{LinearWeights{w}, set, {}};
      EXPECT_EQ(solve_top_m_linear(w, 4, ex), solve_exact(q).action) << "rep " << rep;
      EXPECT_EQ(solve_top_m_linear(q), solve_exact(q));
    }
  }
}

TEST(TopM, RejectsConstrainedQueries) {
  Constraints c;
  c.must_include = 1;
  EXPECT_THROW(solve_top_m_linear({LinearWeights{{1.0, 2.0}}, exact(2, 1), c}), InvalidArgument);
}

TEST(WrapAlpha, AlphaOneIsExact) {
  std::mt19937_64 rng(9);
  const Oracle alpha1 = wrap_alpha(ExactOracle{}, 1.0);
  const auto set = at_most(8, 3);
  for (int rep = 0; rep < 50; ++rep) {
    const OracleQuery q{LinearWeights{random_weights(rng, 8)}, set, {}};
    EXPECT_EQ(alpha1(q), solve_exact(q));
  }
}

TEST(WrapAlpha, HalfApproximationTwoArms) {
  const auto r = wrap_alpha(ExactOracle{}, 0.5)({LinearWeights{{1.0, 0.6}}, exact(2, 1), {}});
  EXPECT_TRUE(r.action == Action::from_arms(2, {0}) || r.action == Action::from_arms(2, {1}));
  EXPECT_GE(r.value, 0.5 * 1.0);
}

TEST(WrapAlpha, ValueGuarantee) {
  std::mt19937_64 rng(13);
  const Oracle approx = wrap_alpha(ExactOracle{}, 0.8);
  const auto set = at_most(10, 3);
  for (int rep = 0; rep < 200; ++rep) {
    const OracleQuery q{LinearWeights{random_weights(rng, 10, 0.0, 1.0)}, set, {}};
    const auto opt = solve_exact(q);
    const auto r = approx(q);
    EXPECT_GE(r.value, 0.8 * opt.value);
    EXPECT_DOUBLE_EQ(r.value, linear_value(std::get<LinearWeights>(q.objective).w, r.action));
  }
}

TEST(WrapAlpha, RejectsBadAlpha) {
  EXPECT_THROW(wrap_alpha(ExactOracle{}, 0.0), InvalidArgument);
  EXPECT_THROW(wrap_alpha(ExactOracle{}, 1.5), InvalidArgument);
}

TEST(BatchExecutor, RepresentativeBatchCountsOneRound) {
  std::mt19937_64 rng(17);
  const auto set = exact(20, 3);
  const auto w = random_weights(rng, 20);
  OracleBatch batch;
  for (std::size_t i = 0; i < 20; ++i) {
    Constraints c;
    c.must_include = std::uint64_t{1} << i;
    batch.push_back({LinearWeights{w}, set, c});
  }
  batch.push_back({LinearWeights{w}, set, {}});
  BatchExecutor ex;
  const auto results = ex.execute(batch);
  EXPECT_EQ(ex.ledger().adaptivity_rounds(), 1u);
  EXPECT_EQ(ex.ledger().total_queries(), 21u);
  for (std::size_t i = 0; i < 20; ++i) EXPECT_TRUE(results[i].action.contains(i));
}

TEST(BatchExecutor, WorkerCountDoesNotChangeResults) {
  std::mt19937_64 rng(19);
  const auto set = at_most(12, 3);
  OracleBatch batch;
  for (int k = 0; k < 37; ++k) batch.push_back({LinearWeights{random_weights(rng, 12)}, set, {}});
  BatchExecutor one(ExactOracle{}, 1);
  BatchExecutor eight(ExactOracle{}, 8);
  EXPECT_EQ(one.execute(batch), eight.execute(batch));
  EXPECT_EQ(one.ledger(), eight.ledger());
}

TEST(BatchExecutor, FailedBatchIsStillCharged) {
  const auto set = exact(3, 2);
  Constraints impossible;
  impossible.surviving_arms = 0b001;
  BatchExecutor ex(ExactOracle{}, 4);
  OracleBatch batch{{LinearWeights{{1, 2, 3}}, set, {}}, {LinearWeights{{1, 2, 3}}, set, impossible}};
  EXPECT_THROW(ex.execute(batch), EmptyFeasibleSet);
  EXPECT_EQ(ex.ledger().adaptivity_rounds(), 1u);
  EXPECT_EQ(ex.ledger().total_queries(), 2u);
}

TEST(BatchExecutor, RejectsEmptyAndMixedBatches) {
  BatchExecutor ex;
  EXPECT_THROW(ex.execute({}), InvalidArgument);
  const auto s1 = exact(3, 1);
  const auto s2 = exact(3, 1);
  EXPECT_THROW(ex.execute({{LinearWeights{{1, 2, 3}}, s1, {}}, {LinearWeights{{1, 2, 3}}, s2, {}}}), InvalidArgument);
  EXPECT_EQ(ex.ledger().adaptivity_rounds(), 0u);
}

TEST(BatchExecutor, LedgerMatchesCallLog) {
  std::mt19937_64 rng(23);
  std::uniform_int_distribution<int> size(1, 6);
  const auto set = at_most(6, 2);
  BatchExecutor ex(ExactOracle{}, 3);
  std::uint64_t calls = 0, queries = 0;
  for (int k = 0; k < 40; ++k) {
    OracleBatch b;
    const int n = size(rng);
    for (int j = 0; j < n; ++j) b.push_back({LinearWeights{random_weights(rng, 6)}, set, {}});
    const auto before = ex.ledger();
    ex.execute(b);
    EXPECT_GE(ex.ledger().adaptivity_rounds(), before.adaptivity_rounds());
    ++calls;
    queries += static_cast<std::uint64_t>(n);
  }
  EXPECT_EQ(ex.ledger().adaptivity_rounds(), calls);
  EXPECT_EQ(ex.ledger().total_queries(), queries);
}
