#include <gtest/gtest.h>

#include <cmath>

#include "oracles.hpp"
#include "slatesim/error.hpp"
#include "slatesim/stats.hpp"

namespace slatesim {
namespace {

TEST(SignTest, AllPositive) {
  std::vector<double> a(10, 1.0);
  std::vector<double> b(10, 0.0);
  EXPECT_NEAR(sign_test(a, b), 2.0 * std::pow(0.5, 10), 1e-15);
  EXPECT_NEAR(sign_test(a, b), 0.001953125, 1e-15);
}

TEST(SignTest, EightOfTen) {
  std::vector<double> a{1, 1, 1, 1, 1, 1, 1, 1, 0, 0};
  std::vector<double> b{0, 0, 0, 0, 0, 0, 0, 0, 1, 1};
  EXPECT_NEAR(sign_test(a, b), 0.109375, 1e-12);
}

TEST(SignTest, TiesDroppedAndSymmetric) {
  std::vector<double> a{1, 1, 1, 1, 1, 1, 5, 5};
  std::vector<double> b{0, 0, 0, 0, 0, 0, 5, 5};
  EXPECT_NEAR(sign_test(a, b), 2.0 * std::pow(0.5, 6), 1e-15);
  EXPECT_EQ(sign_test(a, b), sign_test(b, a));
}

TEST(SignTest, Errors) {
  std::vector<double> same(6, 0.3);
  EXPECT_THROW(sign_test(same, same), StateError);
  EXPECT_THROW(sign_test(std::vector<double>{1, 2, 3, 4}, std::vector<double>{0, 0, 0, 0}), DomainError);
  EXPECT_THROW(sign_test(std::vector<double>(6, 1), std::vector<double>(5, 0)), DomainError);
}

TEST(BinomialCdf, MatchesExactIntegerSums) {
  for (unsigned n = 1; n <= 50; ++n) {
    for (unsigned k = 0; k <= n; ++k) {
      EXPECT_NEAR(binomial_half_cdf(k, n), testing::binomial_half_cdf_exact(k, n), 1e-12) << n << " " << k;
    }
  }
}

TEST(BootstrapMeanCi, CoversTrueMeanAtNominalRate) {
  // Nominal 95 % coverage; accepted band 88 % to 99 % at n = 20.
  RngStream data = derive_stream(1, "bootstrap-data", 0);
  int covered = 0;
  constexpr int reps = 400;
  for (int r = 0; r < reps; ++r) {
    std::vector<double> x(20);
    for (auto& v : x) v = 0.3 + data.normal();
    RngStream boot = derive_stream(1, "bootstrap", static_cast<std::uint64_t>(r));
    const auto ci = bootstrap_mean_ci(x, boot, 0.95, 1000);
    EXPECT_LE(ci.lower, ci.mean);
    EXPECT_GE(ci.upper, ci.mean);
    covered += ci.lower <= 0.3 && 0.3 <= ci.upper;
  }
  EXPECT_GE(covered, static_cast<int>(0.88 * reps));
  EXPECT_LE(covered, static_cast<int>(0.99 * reps));
}

TEST(BootstrapMeanCi, ConstantDataHasZeroWidth) {
  RngStream rng(3);
  const auto ci = bootstrap_mean_ci(std::vector<double>(8, 0.0), rng);
  EXPECT_EQ(ci.mean, 0.0);
  EXPECT_EQ(ci.lower, 0.0);
  EXPECT_EQ(ci.upper, 0.0);
  EXPECT_THROW(bootstrap_mean_ci(std::vector<double>{}, rng), DomainError);
}

}  // namespace
}  // namespace slatesim
