#include <gtest/gtest.h>

#include "valab/verify.hpp"

using namespace valab;

TEST(Verify, ContractionAndNegativeControl) {
  const auto ok = verify_contraction(0);
  EXPECT_TRUE(ok.passed) << ok.detail;
  EXPECT_LE(ok.measured, 0.99 + 1e-12);
  const auto bad = verify_contraction(0, 1.01);
  EXPECT_FALSE(bad.passed);
  EXPECT_GT(bad.measured, 0.99);
}

TEST(Verify, RecursionChecks) {
  const auto rates = verify_recursion_rates(1, 3, 200);
  EXPECT_TRUE(rates.passed) << rates.detail;
  EXPECT_GE(rates.measured, 0.0);
  const auto identity = verify_transformed_identity(1, 100);
  EXPECT_TRUE(identity.passed) << identity.detail;
  EXPECT_LE(identity.measured, 1e-10);
  const auto expected = verify_expected_update(1, 5);
  EXPECT_TRUE(expected.passed) << expected.detail;
  EXPECT_LE(expected.measured, 1e-12);
}

TEST(Verify, GradientAndNormChecks) {
  const auto l1 = verify_gradient_equivalence(2, 30);
  EXPECT_TRUE(l1.passed) << l1.detail;
  const auto l2 = verify_behavior_minimizer(2, 5, 20);
  EXPECT_TRUE(l2.passed) << l2.detail;
}

TEST(Verify, StochasticApproximationSmall) {
  const auto sa = verify_synchronous_sa(3, 1, 1, 100000);
  EXPECT_TRUE(sa.passed) << sa.detail;
}

TEST(Verify, FormatResults) {
  const std::vector<CheckResult> results{{"alpha", true, 0.5, 1.0, "ok"}, {"beta", false, 2.0, 1.0, "bad"}};
  const std::string text = format_results(results);
  EXPECT_EQ(text.rfind("PASS alpha", 0), 0u);
  EXPECT_NE(text.find("\nFAIL beta"), std::string::npos);
}
