#include <cmath>
#include <numeric>
#include <stdexcept>
#include <vector>

#include <gtest/gtest.h>

#include "fastcb/allocation.hpp"
#include "fastcb/random.hpp"
#include "fastcb/verify.hpp"

using namespace fastcb;

namespace {
double total(const ActionDistribution& p) { return std::accumulate(p.begin(), p.end(), 0.0); }
}  // namespace

TEST(Allocation, ReweightedWorkedExample) {
  const std::vector<double> y{0.1, 0.3};
  const auto p = reweighted_igw(y, 20.0);
  EXPECT_NEAR(p[1], 0.023809523809523809524, 1e-15);
  EXPECT_NEAR(p[0], 0.97619047619047619048, 1e-15);
  // conditional regret of the allocation when y = f*
  EXPECT_NEAR(p[1] * (y[1] - y[0]), 0.0047619047619047619048, 1e-15);
}

TEST(Allocation, SquareCbWorkedExample) {
  const std::vector<double> y{0.1, 0.3};
  const auto p = igw(y, 20.0);
  EXPECT_NEAR(p[1], 1.0 / 6.0, 1e-15);
  EXPECT_NEAR(p[0], 5.0 / 6.0, 1e-15);
}

TEST(Allocation, RewardWorkedExample) {
  const std::vector<double> y{0.9, 0.5};
  const auto p = reward_igw(y, 20.0);
  EXPECT_NEAR(p[1], 0.09183673469387755102, 1e-15);
  EXPECT_NEAR(p[0], 0.90816326530612244898, 1e-15);
}

TEST(Allocation, ZeroBestPredictionExtension) {
  const std::vector<double> y{0.0, 0.4, 0.0};
  const auto p = reweighted_igw(y, 10.0);
  EXPECT_NEAR(p[1], 0.0, 0.0);
  EXPECT_NEAR(p[2], 1.0 / 3.0, 1e-15);
  EXPECT_NEAR(p[0], 2.0 / 3.0, 1e-15);
  const std::vector<double> zero{0.0, 0.0};
  EXPECT_EQ(reward_igw(zero, 10.0), (ActionDistribution{0.5, 0.5}));
}

TEST(Allocation, TiesGoToLowestIndex) {
  const std::vector<double> y{0.2, 0.2, 0.5};
  EXPECT_EQ(argmin_lowest(y), 0u);
  const std::vector<double> r{0.5, 0.2, 0.5};
  EXPECT_EQ(argmax_lowest(r), 0u);
  const auto p = reweighted_igw(y, 10.0);
  EXPECT_NEAR(p[1], 0.2 / (3 * 0.2), 1e-15);
}

TEST(Allocation, AllEqualPredictionsGiveUniform) {
  const std::vector<double> y{0.3, 0.3, 0.3, 0.3};
  for (const auto& p : {reweighted_igw(y, 50.0), igw(y, 50.0)})
    for (double v : p) EXPECT_NEAR(v, 0.25, 1e-15);
}

TEST(Allocation, DistributionsAreValid) {
  Rng rng(4);
  for (int i = 0; i < 20000; ++i) {
    const std::size_t A = 2 + uniform_index(rng, 9);
    std::vector<double> y(A);
    for (auto& v : y) v = detail::draw_probability(rng);
    const double gamma = std::exp(uniform(rng, std::log(0.5), std::log(1e5)));
    for (const auto& p : {reweighted_igw(y, gamma), igw(y, gamma), reward_igw(y, gamma)}) {
      ASSERT_EQ(p.size(), A);
      for (double v : p) ASSERT_GE(v, 0.0);
      ASSERT_NEAR(total(p), 1.0, 1e-12);
    }
  }
}

TEST(Allocation, GreedyMassAtLeastUniform) {
  Rng rng(8);
  for (int i = 0; i < 5000; ++i) {
    const std::size_t A = 2 + uniform_index(rng, 9);
    std::vector<double> y(A);
    for (auto& v : y) v = uniform01(rng);
    const auto p = reweighted_igw(y, 2.0 * A + uniform(rng, 0, 100));
    ASSERT_GE(p[argmin_lowest(y)], 1.0 / A - 1e-12);
  }
}

TEST(Allocation, InvalidInputsThrow) {
  const std::vector<double> one{0.5};
  const std::vector<double> y{0.1, 0.3};
  const std::vector<double> bad{0.1, 1.3};
  EXPECT_THROW(reweighted_igw(one, 10.0), std::invalid_argument);
  EXPECT_THROW(reweighted_igw(y, 0.0), std::invalid_argument);
  EXPECT_THROW(igw(y, -1.0), std::invalid_argument);
  EXPECT_THROW(reward_igw(bad, 10.0), std::invalid_argument);
}

TEST(Allocation, PerRoundThresholds) {
  const std::vector<double> y{0.1, 0.3}, f{0.1, 0.3};
  const auto p = reweighted_igw(y, 3.0);
  EXPECT_THROW(per_round_gap_losses(p, y, f, 3.0), std::invalid_argument);
  EXPECT_NO_THROW(per_round_gap_losses(p, y, f, 4.0));
  EXPECT_THROW(per_round_gap_rewards(p, y, f, 7.9), std::invalid_argument);
}

TEST(Allocation, PerRoundHandComputed) {
  // y = f = (0.1, 0.3), gamma = 20: lhs = p2 * 0.2, rhs = (10/20)(p1*0.1 + p2*0.3), tri term zero.
  const std::vector<double> y{0.1, 0.3};
  const auto p = reweighted_igw(y, 20.0);
  const auto s = per_round_gap_losses(p, y, y, 20.0);
  EXPECT_NEAR(s.lhs, 0.0047619047619047619048, 1e-15);
  EXPECT_NEAR(s.rhs, 0.5 * (p[0] * 0.1 + p[1] * 0.3), 1e-15);
}

TEST(Allocation, PerRoundPropertyLosses) {
  CheckOptions o;
  o.samples = 100'000;
  o.seed = 21;
  const auto r = check_per_round_losses(o);
  EXPECT_EQ(r.violations, 0u) << (r.witnesses.empty() ? "" : r.witnesses.front());
}

TEST(Allocation, PerRoundPropertyRewards) {
  CheckOptions o;
  o.samples = 100'000;
  o.seed = 22;
  const auto r = check_per_round_rewards(o);
  EXPECT_EQ(r.violations, 0u) << (r.witnesses.empty() ? "" : r.witnesses.front());
}

TEST(Allocation, ComputeGamma) {
  EXPECT_NEAR(compute_gamma(2, 1e4, 1.0), 81.649658092772603273, 1e-12);
  EXPECT_EQ(compute_gamma(4, 0.0, std::log(16.0)), 40.0);
  EXPECT_GE(compute_gamma(3, 5.0, 2.0), 30.0);
}
