#include <cmath>
#include <map>
#include <stdexcept>
#include <vector>

#include <gtest/gtest.h>

#include "fastcb/plugin_learning.hpp"
#include "fastcb/verify.hpp"

using namespace fastcb;

namespace {

FiniteDistribution one_atom(std::vector<double> means) {
  return FiniteDistribution({DistributionAtom{0, 1.0, std::move(means)}});
}

}  // namespace

TEST(Plugin, TriGeneralizationExample) {
  const auto dist = one_atom({0.5, 0.5});
  const TabularFunction fhat(1, 2, {0.25, 0.75});
  EXPECT_NEAR(tri_generalization_error(fhat, dist), 0.13333333333333333333, 1e-15);
}

TEST(Plugin, RisksAndInducedPolicy) {
  const FiniteDistribution dist({DistributionAtom{0, 0.25, {0.1, 0.4}}, DistributionAtom{1, 0.75, {0.6, 0.2}}});
  EXPECT_EQ(induced_policy(dist.truth()), (Policy{0, 1}));
  EXPECT_NEAR(optimal_risk(dist), 0.25 * 0.1 + 0.75 * 0.2, 1e-15);
  EXPECT_NEAR(exact_risk(Policy{1, 0}, dist), 0.25 * 0.4 + 0.75 * 0.6, 1e-15);
}

TEST(Plugin, DistributionValidation) {
  EXPECT_THROW(FiniteDistribution({DistributionAtom{0, 0.5, {0.1}}}), std::invalid_argument);
  EXPECT_THROW(one_atom({1.2}), std::invalid_argument);
}

TEST(Plugin, TruthHasZeroRegretAndZeroTri) {
  const FiniteDistribution dist({DistributionAtom{0, 0.3, {0.1, 0.4}}, DistributionAtom{1, 0.7, {0.6, 0.2}}});
  const auto s = regret_decomposition_check(dist.truth(), dist);
  EXPECT_EQ(s.lhs, 0.0);
  EXPECT_EQ(s.rhs, 0.0);
}

TEST(Plugin, RegretDecompositionProperty) {
  CheckOptions o;
  o.samples = 20'000;
  o.seed = 31;
  const auto r = check_regret_decomposition(o);
  EXPECT_EQ(r.violations, 0u) << (r.witnesses.empty() ? "" : r.witnesses.front());
}

TEST(Plugin, PolicyMassProperty) {
  CheckOptions o;
  o.samples = 20'000;
  o.seed = 32;
  const auto r = check_policy_mass(o);
  EXPECT_EQ(r.violations, 0u) << (r.witnesses.empty() ? "" : r.witnesses.front());
}

TEST(Plugin, BoundValue) {
  EXPECT_NEAR(plugin_bound(1.0, 2, 2, 0.05, 1e4), 0.53326186216782027036, 1e-14);
  EXPECT_THROW(plugin_bound(1.0, 2, 2, 1.5, 1e4), std::invalid_argument);
}

TEST(Plugin, FitsPreferLowestIndexOnTies) {
  FiniteClass cls({TabularFunction(1, 2, {0.3, 0.3}), TabularFunction(1, 2, {0.3, 0.3})});
  const CscDataset data{{0, {1.0, 0.0}}, {0, {0.0, 1.0}}};
  EXPECT_EQ(fit_least_squares(data, cls), 0u);
  EXPECT_EQ(fit_logloss_mle(data, cls).index, 0u);
  EXPECT_EQ(fit_erm_policy(data, cls), 0u);
}

TEST(Plugin, LogLossRejectsImpossibleCandidate) {
  FiniteClass cls({TabularFunction(1, 1, {0.0}), TabularFunction(1, 1, {0.5})});
  const CscDataset data{{0, {1.0}}};
  const auto fit = fit_logloss_mle(data, cls);
  EXPECT_EQ(fit.index, 1u);
  EXPECT_FALSE(fit.all_infinite);
  FiniteClass bad({TabularFunction(1, 1, {0.0})});
  EXPECT_TRUE(fit_logloss_mle(data, bad).all_infinite);
  EXPECT_THROW(fit_least_squares(CscDataset{}, cls), std::invalid_argument);
}

TEST(Plugin, StatisticsMatchDirectObjectives) {
  Rng rng(12);
  const FiniteDistribution dist({DistributionAtom{0, 0.4, {0.2, 0.7, 0.5}}, DistributionAtom{1, 0.6, {0.9, 0.1, 0.3}}});
  const auto data = sample_dataset(dist, 500, rng);
  const TabularFunction f(2, 3, {0.25, 0.6, 0.5, 0.8, 0.15, 0.35});
  const auto stats = CscStatistics::from_dataset(data, 2, 3);
  double sq = 0.0, ll = 0.0;
  for (const auto& r : data)
    for (std::size_t a = 0; a < 3; ++a) {
      sq += (f(r.context, a) - r.losses[a]) * (f(r.context, a) - r.losses[a]);
      ll += log_loss(f(r.context, a), r.losses[a]);
    }
  EXPECT_NEAR(empirical_square_loss(f, stats), sq, 1e-9);
  EXPECT_NEAR(empirical_log_loss(f, stats), ll, 1e-9);
}

TEST(Plugin, MultinomialMle) {
  // One context, three labels of class 1 and one of class 2. Label
  // probabilities are 1 - f: A says (0.75, 0.25), B says (0.5, 0.5).
  FiniteClass cls({TabularFunction(1, 2, {0.5, 0.5}), TabularFunction(1, 2, {0.25, 0.75})});
  const std::vector<LabeledContext> labels{{0, 0}, {0, 0}, {0, 0}, {0, 1}};
  EXPECT_EQ(fit_multinomial_mle(labels, cls).index, 1u);
  auto loglik = [&](std::size_t k) {
    double s = 0.0;
    for (const auto& l : labels) s += std::log(1.0 - cls[k](l.context, l.label));
    return s;
  };
  EXPECT_NEAR(loglik(1), -2.2493405784752334012, 1e-14);
  EXPECT_NEAR(loglik(0), -2.7725887222397812377, 1e-14);
  const std::vector<LabeledContext> bad{{0, 2}};
  EXPECT_THROW(fit_multinomial_mle(bad, cls), std::invalid_argument);
}

TEST(LowerBound, InstanceValues) {
  const auto inst = LowerBoundInstance::make(200'000'000);
  EXPECT_NEAR(optimal_risk(inst.dist), 6.424999968e-7, 1e-18);
  const double gap = exact_risk(induced_policy(inst.cls[LowerBoundInstance::kFtilde]), inst.dist) -
                     optimal_risk(inst.dist);
  EXPECT_NEAR(gap, 8.1988347238376702309e-6, 1e-18);
  EXPECT_GE(gap, std::pow(2.0, -5) / std::sqrt(2e8));
  EXPECT_LE(optimal_risk(inst.dist), inst.lstar_bound);
  EXPECT_THROW(LowerBoundInstance::make(10'000), std::invalid_argument);
}

TEST(LowerBound, BadEventMakesLeastSquaresPickTheWrongFunction) {
  const auto inst = LowerBoundInstance::make(1u << 24);
  LowerBoundCounts c;
  c.n2 = 1;
  c.n2_ones = 0;
  c.n1 = inst.n - 1;
  c.n1_ones = static_cast<std::uint64_t>(std::floor(inst.mu * static_cast<double>(c.n1)));
  const auto stats = lower_bound_statistics(inst, c);
  EXPECT_EQ(fit_least_squares(stats, inst.cls), LowerBoundInstance::kFtilde);
  EXPECT_EQ(fit_logloss_mle(stats, inst.cls).index, LowerBoundInstance::kFstar);
}

// The sufficient-statistic sampler must reproduce the joint law of the
// counts obtained by drawing n examples one at a time.
TEST(LowerBound, SufficientStatisticsMatchPerExampleSimulation) {
  const std::uint64_t n = 10'000;
  const double p = 1e-3, mu = 0.02;
  const int reps = 20'000;
  auto moments = [&](auto draw) {
    double m[4] = {0, 0, 0, 0}, s[4] = {0, 0, 0, 0};
    for (int i = 0; i < reps; ++i) {
      const LowerBoundCounts c = draw(i);
      const double v[4] = {double(c.n1), double(c.n2), double(c.n1_ones), double(c.n2_ones)};
      for (int k = 0; k < 4; ++k) {
        m[k] += v[k];
        s[k] += v[k] * v[k];
      }
    }
    std::vector<double> out;
    for (int k = 0; k < 4; ++k) {
      out.push_back(m[k] / reps);
      out.push_back(s[k] / reps - (m[k] / reps) * (m[k] / reps));
    }
    return out;
  };
  Rng fast_rng(1), slow_rng(2);
  const auto fast = moments([&](int) { return sample_lower_bound_counts(n, p, mu, fast_rng); });
  const auto slow = moments([&](int) {
    LowerBoundCounts c;
    for (std::uint64_t i = 0; i < n; ++i) {
      if (bernoulli(slow_rng, p)) {
        ++c.n2;
        c.n2_ones += bernoulli(slow_rng, 0.5);
      } else {
        ++c.n1;
        c.n1_ones += bernoulli(slow_rng, mu);
      }
    }
    return c;
  });
  // Exact moments: n2 ~ Bin(n, p), n2_ones ~ Bin(n, p/2), n1_ones ~ Bin(n, (1-p) mu).
  const double nd = double(n);
  const double mean_n2 = nd * p, var_n2 = nd * p * (1 - p);
  const double q1 = (1 - p) * mu, q2 = p / 2;
  const std::vector<double> exact{nd - mean_n2, var_n2, mean_n2, var_n2, nd * q1, nd * q1 * (1 - q1), nd * q2,
                                  nd * q2 * (1 - q2)};
  for (std::size_t k = 0; k < exact.size(); k += 2) {
    const double se = std::sqrt(exact[k + 1] / reps);
    EXPECT_NEAR(fast[k], exact[k], 5 * se + 1e-12) << k;
    EXPECT_NEAR(slow[k], exact[k], 5 * se + 1e-12) << k;
    EXPECT_NEAR(fast[k + 1], exact[k + 1], 0.05 * exact[k + 1]) << k;
    EXPECT_NEAR(slow[k + 1], exact[k + 1], 0.05 * exact[k + 1]) << k;
  }
}

TEST(LowerBound, BinomialMatchesMoments) {
  Rng rng(3);
  for (auto [n, p] : std::vector<std::pair<std::uint64_t, double>>{{20, 0.3}, {1000, 0.9}, {200'000'000, 5e-9}, {100000, 0.4}}) {
    double m = 0, s = 0;
    const int reps = 20000;
    for (int i = 0; i < reps; ++i) {
      const double v = double(binomial(rng, n, p));
      ASSERT_LE(v, double(n));
      m += v;
      s += v * v;
    }
    m /= reps;
    const double var = s / reps - m * m, exact_var = n * p * (1 - p);
    EXPECT_NEAR(m, n * p, 5 * std::sqrt(exact_var / reps)) << n << " " << p;
    EXPECT_NEAR(var, exact_var, 0.06 * exact_var) << n << " " << p;
  }
}

TEST(LowerBound, ReplicateIsDeterministic) {
  const auto inst = LowerBoundInstance::make(200'000'000);
  const auto a = lower_bound_replicate(inst, 5), b = lower_bound_replicate(inst, 5);
  EXPECT_EQ(a.counts.n1_ones, b.counts.n1_ones);
  EXPECT_EQ(a.ls_pick, b.ls_pick);
  EXPECT_LE(a.lstar, inst.lstar_bound);
}
