#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <vector>

#include "oracle_thrift/envs.hpp"

using namespace oracle_thrift;

TEST(LinearUniformEnv, ExpectedReward) {
  LinearUniformEnv env({0.2, 0.5, 0.9}, make_action_set(3, 2, false));
  EXPECT_DOUBLE_EQ(env.expected_reward(Action::from_arms(3, {0, 2})), 1.1);
}

TEST(LinearUniformEnv, SamplesInUnitIntervalWithCorrectMeans) {
  const auto env = LinearUniformEnv::random(20, 3, 42);
  Rng rng = make_stream(1, 2);
  std::vector<double> sum(20, 0.0);
  const int n = 100000;
  for (int k = 0; k < n; ++k) {
    const auto y = env.sample(rng);
    for (std::size_t i = 0; i < y.size(); ++i) {
      ASSERT_GE(y[i], 0.0);
      ASSERT_LE(y[i], 1.0);
      sum[i] += y[i];
    }
  }
  for (std::size_t i = 0; i < 20; ++i) EXPECT_NEAR(sum[i] / n, env.means()[i], 0.01);
}

TEST(LinearUniformEnv, SameSeedSameStream) {
  const auto e1 = LinearUniformEnv::random(5, 2, 9);
  const auto e2 = LinearUniformEnv::random(5, 2, 9);
  EXPECT_EQ(e1.means(), e2.means());
  Rng r1 = make_stream(3, 4, 5);
  Rng r2 = make_stream(3, 4, 5);
  for (int k = 0; k < 100; ++k) EXPECT_EQ(e1.sample(r1), e2.sample(r2));
  Rng r3 = make_stream(3, 4, 6);
  Rng r4 = make_stream(3, 4, 5);
  EXPECT_NE(e1.sample(r3), e1.sample(r4));
}

TEST(LinearUniformEnv, Validation) {
  EXPECT_THROW(LinearUniformEnv({0.2, 1.2}, make_action_set(2, 1, true)), InvalidArgument);
  EXPECT_THROW(LinearUniformEnv({0.2}, make_action_set(2, 1, true)), DimensionMismatch);
}

TEST(OptimalAction, TopTwoMeans) {
  LinearUniformEnv env({0.9, 0.1, 0.5, 0.7}, make_action_set(4, 2, true));
  const auto r = optimal_action(env);
  EXPECT_EQ(r.action, Action::from_arms(4, {0, 3}));
  EXPECT_DOUBLE_EQ(r.value, 1.6);
}

TEST(OptimalAction, CovarianceAgreesWithExhaustiveScan) {
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const auto env = CovarianceGaussianEnv::random(8, 3, seed, seed % 2 == 0);
    const auto r = optimal_action(env);
    double best = -1e300;
    for (std::uint64_t bits = 1; bits < (1u << 8); ++bits) {
      const Action a(8, bits);
      if (!env.action_set()->contains(a)) continue;
      best = std::max(best, env.expected_reward(a));
    }
    EXPECT_DOUBLE_EQ(r.value, best);
  }
}

TEST(OptimalAction, GeneralPrefersLargerDominantValues) {
  using P = GeneralDiscreteEnv::Pmf;
  const P top{0, 0, 0, 0, 1};
  const P low{1, 0, 0, 0, 0};
  GeneralDiscreteEnv env({top, top, low, low}, make_action_set(4, 2, true));
  EXPECT_EQ(optimal_action(env).action, Action::from_arms(4, {0, 1}));
  EXPECT_DOUBLE_EQ(optimal_action(env).value, std::sqrt(2.0));
}

TEST(GeneralDiscreteEnv, PointMassAtOne) {
  using P = GeneralDiscreteEnv::Pmf;
  const P top{0, 0, 0, 0, 1};
  GeneralDiscreteEnv env({top, top}, make_action_set(2, 2, true));
  EXPECT_DOUBLE_EQ(env.expected_reward(Action::from_arms(2, {0, 1})), std::sqrt(2.0));
}

TEST(GeneralDiscreteEnv, ExpectedRewardMatchesMonteCarlo) {
  const auto env = GeneralDiscreteEnv::random(5, 2, 3);
  Rng rng = make_stream(77, 1);
  const int n = 1000000;
  const std::vector<Action> actions{Action::from_arms(5, {0, 1}), Action::from_arms(5, {2, 4}),
                                    Action::from_arms(5, {1, 3})};
  std::vector<double> sum(actions.size(), 0.0), sq(actions.size(), 0.0);
  for (int k = 0; k < n; ++k) {
    const auto y = env.sample(rng);
    for (std::size_t j = 0; j < actions.size(); ++j) {
      const double r = env.reward_of(actions[j], y);
      sum[j] += r;
      sq[j] += r * r;
    }
  }
  for (std::size_t j = 0; j < actions.size(); ++j) {
    const double mean = sum[j] / n;
    const double var = sq[j] / n - mean * mean;
    const double se = std::sqrt(std::max(var, 1e-18) / n);
    EXPECT_NEAR(mean, env.expected_reward(actions[j]), 3.0 * se + 1e-12) << actions[j].to_string();
  }
}

TEST(GeneralDiscreteEnv, RandomPmfShape) {
  const auto env = GeneralDiscreteEnv::random(5, 2, 8);
  for (const auto& p : env.pmfs()) {
    int dominant = 0;
    for (double x : p) {
      if (x == 0.99) ++dominant;
      else EXPECT_DOUBLE_EQ(x, 0.0025);
    }
    EXPECT_EQ(dominant, 1);
  }
  EXPECT_DOUBLE_EQ(env.reward_bound(), std::sqrt(2.0));
}

TEST(GeneralDiscreteEnv, MonotoneOnOrderedPairs) {
  const auto env = GeneralDiscreteEnv::random(5, 2, 4);
  Rng rng = make_stream(5, 5);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  const auto set = env.action_set();
  for (int k = 0; k < 2000; ++k) {
    const auto y = env.sample(rng);
    auto y2 = y;
    for (auto& v : y2) {
      // raise each coordinate to a support value at least as large
      const double up = GeneralDiscreteEnv::kSupport[static_cast<std::size_t>(unif(rng) * 5)];
      v = std::max(v, up);
    }
    for (std::uint64_t bits = 1; bits < 32; ++bits) {
      const Action a(5, bits);
      if (!set->contains(a)) continue;
      ASSERT_LE(env.reward_of(a, y), env.reward_of(a, y2));
      ASSERT_GE(env.reward_of(a, y), 0.0);
      ASSERT_LE(env.reward_of(a, y2), env.reward_bound() + 1e-15);
    }
  }
}

TEST(CovarianceGaussianEnv, SampleCovarianceMatchesSigma) {
  const auto env = CovarianceGaussianEnv::random(10, 3, 21);
  const auto& S = env.covariance();
  EXPECT_TRUE(S.isApprox(S.transpose()));
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(S);
  EXPECT_GT(es.eigenvalues().minCoeff(), 0.0);

  Rng rng = make_stream(21, 9);
  const int n = 100000;
  Eigen::VectorXd mean = Eigen::VectorXd::Zero(10);
  Eigen::MatrixXd second = Eigen::MatrixXd::Zero(10, 10);
  for (int k = 0; k < n; ++k) {
    const auto y = env.sample(rng);
    const Eigen::Map<const Eigen::VectorXd> v(y.data(), 10);
    mean += v;
    second += v * v.transpose();
  }
  mean /= n;
  const Eigen::MatrixXd cov = second / n - mean * mean.transpose();
  EXPECT_LE((cov - S).cwiseAbs().maxCoeff(), 0.05);
  for (int i = 0; i < 10; ++i) EXPECT_NEAR(mean(i), env.means()[static_cast<std::size_t>(i)], 0.02);
}

TEST(SigmaProfile, IdentityCovariance) {
  const auto set = make_action_set(5, 3, true);
  const auto p = sigma_profile(Eigen::MatrixXd::Identity(5, 5), *set);
  for (double v : p.per_arm_max) EXPECT_DOUBLE_EQ(v, 1.0);
  EXPECT_DOUBLE_EQ(p.max_action_sum, 3.0);
}

TEST(SigmaProfile, NegativeOffDiagonalIsClipped) {
  Eigen::MatrixXd S(3, 3);
  S << 0.5, -0.1, -0.2, -0.1, 0.7, -0.3, -0.2, -0.3, 0.9;
  const auto set = make_action_set(3, 2, false);
  const Action a = Action::from_arms(3, {0, 2});
  EXPECT_DOUBLE_EQ(clipped_variance(S, a, 0), 0.5);
  EXPECT_DOUBLE_EQ(clipped_variance(S, a, 2), 0.9);
  const auto p = sigma_profile(S, *set);
  EXPECT_DOUBLE_EQ(p.per_arm_max[1], 0.7);
}

TEST(SigmaProfile, MatchesBruteForce) {
  const auto env = CovarianceGaussianEnv::random(6, 2, 5);
  const auto& S = env.covariance();
  const auto p = sigma_profile(env);
  std::vector<double> per(6, 0.0);
  double total_max = -1.0;
  for (std::size_t i = 0; i < 6; ++i) {
    for (std::size_t j = i + 1; j < 6; ++j) {
      double tot = 0.0;
      for (std::size_t k : {i, j}) {
        double s = std::max(S(static_cast<int>(k), static_cast<int>(i)), 0.0) +
                   std::max(S(static_cast<int>(k), static_cast<int>(j)), 0.0);
        per[k] = std::max(per[k], s);
        tot += s;
      }
      total_max = std::max(total_max, tot);
    }
  }
  for (std::size_t i = 0; i < 6; ++i) EXPECT_NEAR(p.per_arm_max[i], per[i], 1e-15);
  EXPECT_NEAR(p.max_action_sum, total_max, 1e-15);
}

TEST(Environment, MetadataCarriesInstance) {
  const auto cov = CovarianceGaussianEnv::random(4, 2, 1);
  const auto j = cov.metadata();
  EXPECT_EQ(j["kind"], "cov");
  EXPECT_EQ(j["covariance"].size(), 4u);
  const auto lin = LinearUniformEnv::random(4, 2, 1);
  EXPECT_EQ(lin.metadata()["means"].size(), 4u);
}
