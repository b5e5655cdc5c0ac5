#include <gtest/gtest.h>

#include <cmath>

#include "generators.hpp"
#include "slatesim/config.hpp"
#include "slatesim/error.hpp"
#include "slatesim/regressor.hpp"

namespace slatesim {
namespace {

FeatureMatrix random_features(RngStream& rng, std::size_t n) {
  FeatureMatrix x;
  for (std::size_t i = 0; i < n; ++i) {
    QFeatures f;
    for (auto& v : f) v = rng.uniform() * 10.0;
    x.append(f);
  }
  return x;
}

std::vector<std::unique_ptr<QRegressor>> all_kinds() {
  std::vector<std::unique_ptr<QRegressor>> out;
  out.push_back(std::make_unique<GradientBoostedTrees>());
  out.push_back(std::make_unique<RidgeRegressor>(1e-3));
  out.push_back(std::make_unique<LookupTableRegressor>());
  return out;
}

TEST(Regressor, ConstantTargetsPredictConstant) {
  RngStream rng(1);
  const auto x = random_features(rng, 300);
  const std::vector<double> y(300, 0.5);
  for (auto& r : all_kinds()) {
    r->fit(x, y);
    RngStream probe(2);
    const auto z = random_features(probe, 50);
    for (std::size_t i = 0; i < z.rows(); ++i) {
      if (r->kind() == RegressorKind::kLookupTable) continue;
      EXPECT_NEAR(r->predict(z.row(i).first<kNumFeatures>()), 0.5, 1e-6) << to_string(r->kind());
    }
    for (std::size_t i = 0; i < x.rows(); ++i) {
      EXPECT_NEAR(r->predict(x.row(i).first<kNumFeatures>()), 0.5, 1e-6);
    }
  }
}

TEST(Regressor, UnfittedPredictIsStateError) {
  const QFeatures f{};
  for (auto& r : all_kinds()) EXPECT_THROW(r->predict(f), StateError);
}

TEST(Regressor, EmptyOrNonFiniteDataIsTrainingError) {
  FeatureMatrix empty;
  RngStream rng(3);
  const auto x = random_features(rng, 3);
  for (auto& r : all_kinds()) {
    EXPECT_THROW(r->fit(empty, std::vector<double>{}), TrainingError);
    EXPECT_THROW(r->fit(x, std::vector<double>{1.0, 2.0}), TrainingError);
    EXPECT_THROW(r->fit(x, std::vector<double>{1.0, NAN, 2.0}), TrainingError);
  }
}

TEST(Regressor, FitIsDeterministicAndBatchMatchesSingle) {
  RngStream rng(4);
  const auto x = random_features(rng, 2000);
  std::vector<double> y(2000);
  for (std::size_t i = 0; i < y.size(); ++i) y[i] = std::sin(x(i, 0)) + 0.3 * x(i, 4) * x(i, 2);
  for (auto& r : all_kinds()) {
    auto twin = r->clone();
    r->fit(x, y);
    twin->fit(x, y);
    std::vector<double> batch(x.rows());
    r->predict(x, batch);
    for (std::size_t i = 0; i < x.rows(); ++i) {
      const double single = r->predict(x.row(i).first<kNumFeatures>());
      ASSERT_EQ(batch[i], single);
      ASSERT_EQ(single, twin->predict(x.row(i).first<kNumFeatures>()));
      ASSERT_TRUE(std::isfinite(single));
    }
  }
}

TEST(GradientBoostedTrees, ReducesSquaredError) {
  RngStream rng(5);
  const auto x = random_features(rng, 3000);
  std::vector<double> y(3000);
  double mean = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    y[i] = (x(i, 1) > 5 ? 2.0 : 0.0) + 0.1 * x(i, 3);
    mean += y[i];
  }
  mean /= 3000.0;
  GradientBoostedTrees g;
  g.fit(x, y);
  double base = 0.0;
  double fit = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    base += (y[i] - mean) * (y[i] - mean);
    const double e = y[i] - g.predict(x.row(i).first<kNumFeatures>());
    fit += e * e;
  }
  EXPECT_LT(fit, 0.05 * base);
  EXPECT_EQ(g.num_trees(), 100u);
}

TEST(RidgeRegressor, RecoversLinearFunction) {
  RngStream rng(6);
  const auto x = random_features(rng, 500);
  std::vector<double> y(500);
  for (std::size_t i = 0; i < y.size(); ++i) y[i] = 1.5 + 2.0 * x(i, 0) - 0.5 * x(i, 5);
  RidgeRegressor r(1e-10);
  r.fit(x, y);
  EXPECT_NEAR(r.intercept(), 1.5, 1e-5);
  EXPECT_NEAR(r.weights()[0], 2.0, 1e-6);
  EXPECT_NEAR(r.weights()[5], -0.5, 1e-6);
}

TEST(LookupTableRegressor, MeanPerKeyAndDefault) {
  FeatureMatrix x;
  x.append(QFeatures{1, 0, 0, 0, 0, 0, 0, 0});
  x.append(QFeatures{1, 0, 0, 0, 0, 0, 0, 0});
  x.append(QFeatures{2, 0, 0, 0, 0, 0, 0, 0});
  LookupTableRegressor t(-1.0);
  t.fit(x, std::vector<double>{1.0, 3.0, 5.0});
  EXPECT_EQ(t.size(), 2u);
  EXPECT_EQ(t.predict(QFeatures{1, 0, 0, 0, 0, 0, 0, 0}), 2.0);
  EXPECT_EQ(t.predict(QFeatures{2, 0, 0, 0, 0, 0, 0, 0}), 5.0);
  EXPECT_EQ(t.predict(QFeatures{3, 0, 0, 0, 0, 0, 0, 0}), -1.0);
}

TEST(Regressor, JsonRoundTripPreservesPredictions) {
  RngStream rng(7);
  const auto x = random_features(rng, 400);
  std::vector<double> y(400);
  for (std::size_t i = 0; i < y.size(); ++i) y[i] = x(i, 2) * x(i, 6);
  for (auto& r : all_kinds()) {
    r->fit(x, y);
    const auto back = regressor_from_json(nlohmann::json::parse(r->to_json().dump()));
    EXPECT_EQ(back->kind(), r->kind());
    for (std::size_t i = 0; i < x.rows(); ++i) {
      ASSERT_EQ(back->predict(x.row(i).first<kNumFeatures>()),
                r->predict(x.row(i).first<kNumFeatures>()));
    }
  }
}

TEST(MakeRegressor, FollowsConfig) {
  RunConfig c;
  EXPECT_EQ(make_regressor(c)->kind(), RegressorKind::kGradientBoostedTrees);
  c.regressor = RegressorKind::kRidge;
  EXPECT_EQ(make_regressor(c)->kind(), RegressorKind::kRidge);
  c.regressor = RegressorKind::kLookupTable;
  EXPECT_EQ(make_regressor(c)->kind(), RegressorKind::kLookupTable);
}

}  // namespace
}  // namespace slatesim
