#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <vector>

#include "slatesim/catalog.hpp"
#include "slatesim/env.hpp"

namespace slatesim {

inline constexpr std::size_t kNumFeatures = 8;

// (state, item) input to the Q regressor, in this order:
//   0 budget_remaining, 1 slot, 2 survival, 3 prefix cost sum,
//   4 sigma, 5 cost, 6 sigma * survival, 7 sigma / max(cost, floor)
using QFeatures = std::array<double, kNumFeatures>;

QFeatures featurize(const SlateState& state, const Item& item,
                    double cost_floor = kDefaultCostFloor);

// Dense row-major matrix with kNumFeatures columns.
class FeatureMatrix {
 public:
  FeatureMatrix() = default;
  explicit FeatureMatrix(std::size_t rows) : data_(rows * kNumFeatures, 0.0) {}

  std::size_t rows() const { return data_.size() / kNumFeatures; }
  bool empty() const { return data_.empty(); }
  void clear() { data_.clear(); }
  void reserve(std::size_t rows) { data_.reserve(rows * kNumFeatures); }

  void append(const QFeatures& row) { data_.insert(data_.end(), row.begin(), row.end()); }

  std::span<const double, kNumFeatures> row(std::size_t i) const {
    return std::span<const double, kNumFeatures>(data_.data() + i * kNumFeatures, kNumFeatures);
  }
  std::span<double, kNumFeatures> row(std::size_t i) {
    return std::span<double, kNumFeatures>(data_.data() + i * kNumFeatures, kNumFeatures);
  }
  double operator()(std::size_t i, std::size_t f) const { return data_[i * kNumFeatures + f]; }

 private:
  std::vector<double> data_;
};

}  // namespace slatesim
