#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <span>
#include <vector>

#include "json.hpp"
#include "slatesim/config.hpp"
#include "slatesim/features.hpp"

namespace slatesim {

// Maps (state, item) features to a Q estimate. fit() replaces any previous
// model; predictions are deterministic once fitted.
class QRegressor {
 public:
  virtual ~QRegressor() = default;

  virtual RegressorKind kind() const = 0;
  virtual bool fitted() const = 0;
  // Throws TrainingError on an empty or mismatched data set.
  virtual void fit(const FeatureMatrix& x, std::span<const double> y) = 0;
  // Throws StateError when not fitted.
  virtual double predict(std::span<const double, kNumFeatures> x) const = 0;
  virtual void predict(const FeatureMatrix& x, std::span<double> out) const;

  virtual nlohmann::json to_json() const = 0;
  virtual std::unique_ptr<QRegressor> clone() const = 0;

  double predict(const QFeatures& x) const {
    return predict(std::span<const double, kNumFeatures>(x));
  }
};

// Least-squares gradient boosting over fixed-depth regression trees with
// histogram split search. Split ties go to the lower feature index, then the
// lower threshold.
class GradientBoostedTrees final : public QRegressor {
 public:
  explicit GradientBoostedTrees(GbrtParams params = {});

  RegressorKind kind() const override { return RegressorKind::kGradientBoostedTrees; }
  bool fitted() const override { return fitted_; }
  void fit(const FeatureMatrix& x, std::span<const double> y) override;
  double predict(std::span<const double, kNumFeatures> x) const override;
  void predict(const FeatureMatrix& x, std::span<double> out) const override;
  nlohmann::json to_json() const override;
  std::unique_ptr<QRegressor> clone() const override;

  static GradientBoostedTrees from_json(const nlohmann::json& doc);

  const GbrtParams& params() const { return params_; }
  std::size_t num_trees() const { return trees_; }
  double base_score() const { return base_; }

 private:
  std::size_t internal_nodes() const { return (std::size_t{1} << params_.max_depth) - 1; }
  std::size_t leaves() const { return std::size_t{1} << params_.max_depth; }

  GbrtParams params_;
  bool fitted_ = false;
  double base_ = 0.0;
  std::size_t trees_ = 0;
  // Complete binary trees in heap order; a node that did not split sends
  // everything left via an infinite threshold.
  std::vector<std::uint8_t> split_feature_;
  std::vector<double> split_threshold_;
  std::vector<double> leaf_value_;
};

// Ridge regression on standardised features with an unpenalised intercept.
class RidgeRegressor final : public QRegressor {
 public:
  explicit RidgeRegressor(double lambda = 1e-3) : lambda_(lambda) {}

  RegressorKind kind() const override { return RegressorKind::kRidge; }
  bool fitted() const override { return fitted_; }
  void fit(const FeatureMatrix& x, std::span<const double> y) override;
  double predict(std::span<const double, kNumFeatures> x) const override;
  nlohmann::json to_json() const override;
  std::unique_ptr<QRegressor> clone() const override;

  static RidgeRegressor from_json(const nlohmann::json& doc);

  double intercept() const { return intercept_; }
  const QFeatures& weights() const { return weights_; }

 private:
  double lambda_;
  bool fitted_ = false;
  double intercept_ = 0.0;
  QFeatures weights_{};  // on raw (unstandardised) features
};

// Exact-match table: the mean target per distinct feature vector. Unseen
// keys predict `default_value`. Intended for small tabular problems.
class LookupTableRegressor final : public QRegressor {
 public:
  explicit LookupTableRegressor(double default_value = 0.0) : default_value_(default_value) {}

  RegressorKind kind() const override { return RegressorKind::kLookupTable; }
  bool fitted() const override { return fitted_; }
  void fit(const FeatureMatrix& x, std::span<const double> y) override;
  double predict(std::span<const double, kNumFeatures> x) const override;
  nlohmann::json to_json() const override;
  std::unique_ptr<QRegressor> clone() const override;

  static LookupTableRegressor from_json(const nlohmann::json& doc);

  std::size_t size() const { return table_.size(); }

 private:
  double default_value_;
  bool fitted_ = false;
  std::map<QFeatures, double> table_;
};

std::unique_ptr<QRegressor> make_regressor(const RunConfig& cfg);
std::unique_ptr<QRegressor> regressor_from_json(const nlohmann::json& doc);

}  // namespace slatesim
