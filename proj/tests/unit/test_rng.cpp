#include <gtest/gtest.h>

#include <array>
#include <set>
#include <vector>

#include "slatesim/rng.hpp"

namespace slatesim {
namespace {

std::vector<std::uint64_t> draws(RngStream s, int n) {
  std::vector<std::uint64_t> out(static_cast<std::size_t>(n));
  for (auto& v : out) v = s();
  return out;
}

TEST(DeriveStream, SameInputsGiveIdenticalDraws) {
  EXPECT_EQ(draws(derive_stream(42, "episode", 7), 1000), draws(derive_stream(42, "episode", 7), 1000));
}

TEST(DeriveStream, DistinctIndexDiffers) {
  const auto a = draws(derive_stream(42, "episode", 7), 1000);
  const auto b = draws(derive_stream(42, "episode", 8), 1000);
  EXPECT_NE(a, b);
  std::size_t equal = 0;
  for (std::size_t i = 0; i < a.size(); ++i) equal += a[i] == b[i];
  EXPECT_EQ(equal, 0u);
}

TEST(DeriveStream, DistinctLabelDiffers) {
  EXPECT_NE(draws(derive_stream(42, "episode", 7), 1000), draws(derive_stream(42, "costs", 7), 1000));
}

TEST(DeriveStream, DistinctMasterSeedDiffers) {
  EXPECT_NE(draws(derive_stream(1, "episode", 0), 100), draws(derive_stream(2, "episode", 0), 100));
}

TEST(DeriveStream, NoKeyCollisionsAcrossManyPairs) {
  std::set<std::uint64_t> keys;
  const char* labels[] = {"episode", "costs", "catalog", "train", "eval", "policy", "env"};
  for (const char* label : labels) {
    for (std::uint64_t i = 0; i < 2000; ++i) keys.insert(derive_stream(9, label, i).key());
  }
  EXPECT_EQ(keys.size(), 7u * 2000u);
}

TEST(StableHash, MatchesFnv1a) {
  EXPECT_EQ(stable_hash(""), 0xcbf29ce484222325ULL);
  EXPECT_EQ(stable_hash("a"), 0xaf63dc4c8601ec8cULL);
}

// Chi-squared on 100 equiprobable bins, 10^5 draws; 0.999 quantile of
// chi2(99) is 148.23.
TEST(RngStream, UniformityChiSquared) {
  constexpr int kBins = 100;
  constexpr int kDraws = 100000;
  const char* labels[] = {"episode", "costs", "catalog", "train", "eval"};
  for (const char* label : labels) {
    for (std::uint64_t index : {0ULL, 1ULL, 7ULL, 123456ULL}) {
      RngStream s = derive_stream(20240917, label, index);
      std::array<int, kBins> counts{};
      for (int i = 0; i < kDraws; ++i) ++counts[static_cast<std::size_t>(s.uniform() * kBins)];
      double chi2 = 0.0;
      const double expected = static_cast<double>(kDraws) / kBins;
      for (int c : counts) chi2 += (c - expected) * (c - expected) / expected;
      EXPECT_LT(chi2, 148.23) << label << " " << index;
    }
  }
}

TEST(RngStream, BelowStaysInRangeAndCoversIt) {
  RngStream s(5);
  std::array<int, 7> counts{};
  for (int i = 0; i < 70000; ++i) {
    const auto v = s.below(7);
    ASSERT_LT(v, 7u);
    ++counts[v];
  }
  for (int c : counts) EXPECT_NEAR(c, 10000, 500);
}

TEST(RngStream, UniformInHalfOpenUnitInterval) {
  RngStream s(11);
  for (int i = 0; i < 100000; ++i) {
    const double u = s.uniform();
    ASSERT_GE(u, 0.0);
    ASSERT_LT(u, 1.0);
  }
}

TEST(RngStream, NormalMoments) {
  RngStream s(3);
  double sum = 0.0;
  double sq = 0.0;
  constexpr int n = 200000;
  for (int i = 0; i < n; ++i) {
    const double z = s.normal();
    sum += z;
    sq += z * z;
  }
  EXPECT_NEAR(sum / n, 0.0, 0.01);
  EXPECT_NEAR(sq / n, 1.0, 0.02);
}

TEST(RngStream, SplitDoesNotAdvanceParent) {
  RngStream s(17);
  const auto before = s.position();
  (void)s.split("child", 3);
  EXPECT_EQ(s.position(), before);
  EXPECT_EQ(s.split("child", 3), s.split("child", 3));
  EXPECT_NE(s.split("child", 3).key(), s.split("child", 4).key());
}

}  // namespace
}  // namespace slatesim
