#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

#include <gtest/gtest.h>

#include "fastcb/divergences.hpp"
#include "fastcb/random.hpp"
#include "fastcb/verify.hpp"

using namespace fastcb;

// Reference values: tests/oracles/expected_values.py (mpmath, 50 digits).

TEST(Divergences, TriangularWorkedExample) {
  const std::vector<double> p{0.5, 0.5}, q{0.25, 0.75};
  EXPECT_NEAR(tri_discrimination(p, q), 0.13333333333333333333, 1e-15);
  EXPECT_NEAR(tri_discrimination_bernoulli(0.5, 0.25), 0.13333333333333333333, 1e-15);
}

TEST(Divergences, TriangularZeroOverZeroIsZero) {
  EXPECT_EQ(tri_term(0.0, 0.0), 0.0);
  const std::vector<double> p{0.0, 1.0}, q{0.0, 1.0};
  EXPECT_EQ(tri_discrimination(p, q), 0.0);
}

TEST(Divergences, TriangularSymmetricAndBounded) {
  Rng rng(7);
  for (int i = 0; i < 1000; ++i) {
    const double p = uniform01(rng), q = uniform01(rng);
    EXPECT_DOUBLE_EQ(tri_discrimination_bernoulli(p, q), tri_discrimination_bernoulli(q, p));
    EXPECT_LE(tri_discrimination_bernoulli(p, q), 2.0 + 1e-12);
    EXPECT_GE(tri_discrimination_bernoulli(p, q), 0.0);
  }
  EXPECT_NEAR(tri_discrimination_bernoulli(0.0, 1.0), 2.0, 1e-15);
}

TEST(Divergences, BinaryKlWorkedExample) {
  EXPECT_NEAR(binary_kl(0.5, 0.25), 0.14384103622589046372, 1e-15);
  EXPECT_EQ(binary_kl(0.3, 0.3), 0.0);
}

TEST(Divergences, BinaryKlInfiniteWithoutAbsoluteContinuity) {
  EXPECT_TRUE(std::isinf(binary_kl(0.5, 0.0)));
  EXPECT_TRUE(std::isinf(binary_kl(0.5, 1.0)));
  EXPECT_EQ(binary_kl(0.0, 0.0), 0.0);
  EXPECT_NEAR(binary_kl(0.0, 0.5), std::log(2.0), 1e-15);
}

TEST(Divergences, HellingerWorkedExample) {
  EXPECT_NEAR(hellinger_bernoulli(0.5, 0.25), 0.03407417371093171325, 1e-15);
  const std::vector<double> p{0.5, 0.5}, q{0.25, 0.75};
  EXPECT_NEAR(hellinger_simplex(p, q), 0.03407417371093171325, 1e-15);
}

TEST(Divergences, HellingerBounds) {
  EXPECT_NEAR(hellinger_bernoulli(0.0, 1.0), 1.0, 1e-15);
  EXPECT_EQ(hellinger_bernoulli(0.4, 0.4), 0.0);
}

TEST(Divergences, LogLoss) {
  EXPECT_NEAR(log_loss(0.25, 1.0), std::log(4.0), 1e-15);
  EXPECT_NEAR(log_loss(0.25, 0.0), -std::log(0.75), 1e-15);
  EXPECT_TRUE(std::isinf(log_loss(0.0, 1.0)));
  EXPECT_TRUE(std::isinf(log_loss(1.0, 0.0)));
  EXPECT_EQ(log_loss(1.0, 1.0), 0.0);
}

TEST(Divergences, InvalidInputsThrow) {
  EXPECT_THROW(binary_kl(-0.1, 0.5), std::invalid_argument);
  EXPECT_THROW(binary_kl(0.5, 1.5), std::invalid_argument);
  EXPECT_THROW(hellinger_bernoulli(std::nan(""), 0.5), std::invalid_argument);
  const std::vector<double> a{0.5, 0.5}, b{1.0};
  EXPECT_THROW(tri_discrimination(a, b), std::invalid_argument);
  const std::vector<double> bad{0.7, 0.7};
  EXPECT_THROW(hellinger_simplex(bad, a), std::invalid_argument);
}

// Property checks at reduced sample counts; the acceptance binary runs 10^6.
class InequalityProperty : public ::testing::TestWithParam<int> {};

TEST_P(InequalityProperty, NoViolations) {
  CheckOptions o;
  o.samples = 50'000;
  o.seed = 11;
  CheckResult r;
  switch (GetParam()) {
    case 0: r = check_refined_pinsker(o); break;
    case 1: r = check_pinsker_square(o); break;
    case 2: r = check_hellinger_tri(o); break;
    case 3: r = check_multinomial_hellinger(o); break;
    case 4: r = check_exp_concavity(o); break;
  }
  EXPECT_EQ(r.violations, 0u) << r.name << (r.witnesses.empty() ? "" : " " + r.witnesses.front());
  EXPECT_GT(r.evaluated, o.samples / 2);
}

INSTANTIATE_TEST_SUITE_P(All, InequalityProperty, ::testing::Range(0, 5));

// Sanity check of the checker itself: a deliberately false inequality must fail.
TEST(Verifier, DetectsViolations) {
  CheckOptions o;
  CheckResult r("false");
  detail::record(r, 1.0, 0.5, o, "x");
  EXPECT_EQ(r.violations, 1u);
  EXPECT_FALSE(r.passed());
}
