#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "npch/calculus.hpp"
#include "npch/errors.hpp"

using namespace npch;

TEST(Calculus, ConstantWeightClosedForm) {
  // int_0^{1/4} dr / (4 r log^2 r) = 1 / (4 log 4)
  for (double c : {0.0, 1.0, 3.5}) {
    const CalculusReport r = calculus_weight_check(reference_weight(0, c), c);
    EXPECT_NEAR(r.lhs, c / (8.0 * std::numbers::ln2), 1e-9 * (1.0 + c));
    EXPECT_NEAR(r.rhs, c * std::numbers::ln2, 1e-9 * (1.0 + c));
    EXPECT_TRUE(r.ok);
  }
}

TEST(Calculus, LinearWeightRhs) {
  const CalculusReport r = calculus_weight_check(reference_weight(1, 1.0), 1.0);
  EXPECT_NEAR(r.rhs, std::numbers::ln2 + 0.25, 1e-9);
  EXPECT_GE(r.residual, -1e-6);
}

TEST(Calculus, OscillatingWeight) {
  const CalculusReport r = calculus_weight_check(reference_weight(2, 1.0), 1.0);
  EXPECT_GE(r.residual, -1e-6);
  EXPECT_GT(r.shells, 0);
}

TEST(Calculus, TableMatchesFunction) {
  std::vector<std::pair<double, double>> table;
  for (int k = 1; k <= 4000; ++k) {
    const double r = 0.25 * k / 4000.0;
    table.emplace_back(r, 1.0 + r);
  }
  const CalculusReport t = calculus_weight_check(table, 1.0);
  const CalculusReport f = calculus_weight_check(reference_weight(1, 1.0), 1.0);
  EXPECT_NEAR(t.rhs, f.rhs, 1e-4);
  EXPECT_NEAR(t.lhs, f.lhs, 1e-4);
}

TEST(Calculus, Rejects) {
  EXPECT_THROW(calculus_weight_check([](double r) { return r < 0.1 ? 0.9 : 1.0; }, 1.0), DomainError);
  EXPECT_THROW(calculus_weight_check(reference_weight(0, 1.0), -1.0), DomainError);
}
