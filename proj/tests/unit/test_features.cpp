#include <gtest/gtest.h>

#include <cmath>

#include "generators.hpp"
#include "slatesim/features.hpp"

namespace slatesim {
namespace {

TEST(Featurize, DirectFromDefinition) {
  const auto f = featurize(reset(100), Item{0, 0.3, 20});
  const QFeatures expect{100, 0, 1.0, 0, 0.3, 20, 0.3, 0.015};
  for (std::size_t i = 0; i < kNumFeatures; ++i) EXPECT_DOUBLE_EQ(f[i], expect[i]) << i;
}

TEST(Featurize, ZeroSurvivalZeroesConditionalBeta) {
  SlateState s = reset(100);
  s.survival = 0.0;
  EXPECT_EQ(featurize(s, Item{0, 0.9, 20})[6], 0.0);
}

TEST(Featurize, BudgetChangeTouchesOnlyFirstComponent) {
  for (std::uint64_t c = 0; c < 200; ++c) {
    RngStream rng = testing::case_stream("feature-locality", c);
    SlateState s = reset(1 + rng.uniform() * 500);
    s.slot = static_cast<int>(rng.below(30));
    s.survival = rng.uniform();
    s.prefix_cost = rng.uniform() * 300;
    const Item it{0, rng.uniform(), 0.01 + rng.uniform() * 100};
    SlateState t = s;
    t.budget_remaining += 1 + rng.uniform() * 50;
    const auto a = featurize(s, it);
    const auto b = featurize(t, it);
    EXPECT_NE(a[0], b[0]);
    for (std::size_t i = 1; i < kNumFeatures; ++i) EXPECT_EQ(a[i], b[i]);
    for (double v : a) EXPECT_TRUE(std::isfinite(v));
  }
}

TEST(Featurize, RatioUsesCostFloor) {
  EXPECT_DOUBLE_EQ(featurize(reset(10), Item{0, 0.5, 0.001}, 0.01)[7], 50.0);
}

TEST(FeatureMatrix, AppendAndIndex) {
  FeatureMatrix m;
  m.append(QFeatures{1, 2, 3, 4, 5, 6, 7, 8});
  m.append(QFeatures{9, 10, 11, 12, 13, 14, 15, 16});
  ASSERT_EQ(m.rows(), 2u);
  EXPECT_EQ(m(1, 0), 9.0);
  EXPECT_EQ(m.row(0)[7], 8.0);
  m.clear();
  EXPECT_TRUE(m.empty());
}

}  // namespace
}  // namespace slatesim
