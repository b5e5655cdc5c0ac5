#include "slatesim/regressor.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "slatesim/error.hpp"

namespace slatesim {

using nlohmann::json;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void check_fit_input(const FeatureMatrix& x, std::span<const double> y) {
  if (x.rows() == 0) throw TrainingError("fit: no training samples");
  if (x.rows() != y.size()) throw TrainingError("fit: feature and target counts differ");
  for (double v : y) {
    if (!std::isfinite(v)) throw TrainingError("fit: non-finite target");
  }
}

[[noreturn]] void not_fitted() { throw StateError("predict called on an unfitted regressor"); }

json threshold_to_json(double t) { return std::isinf(t) ? json(nullptr) : json(t); }
double threshold_from_json(const json& v) { return v.is_null() ? kInf : v.get<double>(); }

// Upper bin edges per feature: value v falls into the first bin whose edge
// is >= v.
std::vector<double> bin_edges(std::vector<double> values, int max_bins) {
  std::sort(values.begin(), values.end());
  std::vector<double> distinct;
  distinct.reserve(values.size());
  for (double v : values) {
    if (distinct.empty() || v != distinct.back()) distinct.push_back(v);
  }
  if (distinct.size() <= static_cast<std::size_t>(max_bins)) return distinct;
  std::vector<double> edges;
  const std::size_t n = values.size();
  for (int b = 1; b <= max_bins; ++b) {
    const std::size_t idx =
        std::min(n - 1, (static_cast<std::size_t>(b) * n + max_bins - 1) / max_bins - 1);
    const double e = values[idx];
    if (edges.empty() || e > edges.back()) edges.push_back(e);
  }
  if (edges.back() < values.back()) edges.push_back(values.back());
  return edges;
}

}  // namespace

void QRegressor::predict(const FeatureMatrix& x, std::span<double> out) const {
  for (std::size_t i = 0; i < x.rows(); ++i) out[i] = predict(x.row(i));
}

// --- gradient boosting ------------------------------------------------------

GradientBoostedTrees::GradientBoostedTrees(GbrtParams params) : params_(params) {
  if (params_.max_depth < 1 || params_.max_depth > 8) {
    throw ConfigError("gbrt: max_depth must lie in [1, 8]");
  }
  if (params_.rounds < 1) throw ConfigError("gbrt: rounds must be >= 1");
  if (params_.max_bins < 2 || params_.max_bins > 256) {
    throw ConfigError("gbrt: max_bins must lie in [2, 256]");
  }
}

void GradientBoostedTrees::fit(const FeatureMatrix& x, std::span<const double> y) {
  check_fit_input(x, y);
  const std::size_t n = x.rows();
  const std::size_t depth = static_cast<std::size_t>(params_.max_depth);
  const std::size_t n_internal = internal_nodes();
  const std::size_t n_leaves = leaves();
  const auto min_leaf = static_cast<std::size_t>(params_.min_samples_leaf);

  std::vector<std::vector<double>> edges(kNumFeatures);
  std::vector<std::uint8_t> bins(n * kNumFeatures);
  std::size_t max_nb = 0;
  for (std::size_t f = 0; f < kNumFeatures; ++f) {
    std::vector<double> column(n);
    for (std::size_t i = 0; i < n; ++i) column[i] = x(i, f);
    edges[f] = bin_edges(std::move(column), params_.max_bins);
    max_nb = std::max(max_nb, edges[f].size());
    for (std::size_t i = 0; i < n; ++i) {
      const auto it = std::lower_bound(edges[f].begin(), edges[f].end(), x(i, f));
      bins[i * kNumFeatures + f] = static_cast<std::uint8_t>(it - edges[f].begin());
    }
  }

  double sum = 0.0;
  for (double v : y) sum += v;
  base_ = sum / static_cast<double>(n);
  trees_ = static_cast<std::size_t>(params_.rounds);
  split_feature_.assign(trees_ * n_internal, 0);
  split_threshold_.assign(trees_ * n_internal, kInf);
  leaf_value_.assign(trees_ * n_leaves, 0.0);

  std::vector<double> residual(n);
  for (std::size_t i = 0; i < n; ++i) residual[i] = y[i] - base_;
  std::vector<std::uint32_t> node(n);
  std::vector<double> hist_sum;
  std::vector<std::uint32_t> hist_cnt;
  std::vector<int> level_feature;
  std::vector<int> level_bin;

  for (std::size_t t = 0; t < trees_; ++t) {
    std::fill(node.begin(), node.end(), 0);
    for (std::size_t level = 0; level < depth; ++level) {
      const std::size_t width = std::size_t{1} << level;
      const std::size_t stride = kNumFeatures * max_nb;
      hist_sum.assign(width * stride, 0.0);
      hist_cnt.assign(width * stride, 0);
      for (std::size_t i = 0; i < n; ++i) {
        const std::size_t base = node[i] * stride;
        const std::uint8_t* b = &bins[i * kNumFeatures];
        for (std::size_t f = 0; f < kNumFeatures; ++f) {
          const std::size_t slot = base + f * max_nb + b[f];
          hist_sum[slot] += residual[i];
          ++hist_cnt[slot];
        }
      }

      level_feature.assign(width, -1);
      level_bin.assign(width, -1);
      for (std::size_t p = 0; p < width; ++p) {
        const std::size_t base = p * stride;
        double total = 0.0;
        std::size_t count = 0;
        for (std::size_t b = 0; b < edges[0].size(); ++b) {
          total += hist_sum[base + b];
          count += hist_cnt[base + b];
        }
        if (count < 2 * min_leaf) continue;
        const double parent = total * total / static_cast<double>(count);
        double best_gain = 1e-12;
        for (std::size_t f = 0; f < kNumFeatures; ++f) {
          double left_sum = 0.0;
          std::size_t left_cnt = 0;
          const std::size_t nb = edges[f].size();
          for (std::size_t b = 0; b + 1 < nb; ++b) {
            left_sum += hist_sum[base + f * max_nb + b];
            left_cnt += hist_cnt[base + f * max_nb + b];
            if (left_cnt < min_leaf) continue;
            const std::size_t right_cnt = count - left_cnt;
            if (right_cnt < min_leaf) break;
            const double right_sum = total - left_sum;
            const double gain = left_sum * left_sum / static_cast<double>(left_cnt) +
                                right_sum * right_sum / static_cast<double>(right_cnt) - parent;
            if (gain > best_gain) {
              best_gain = gain;
              level_feature[p] = static_cast<int>(f);
              level_bin[p] = static_cast<int>(b);
            }
          }
        }
        const std::size_t heap = (width - 1) + p;
        if (level_feature[p] >= 0) {
          const auto f = static_cast<std::size_t>(level_feature[p]);
          split_feature_[t * n_internal + heap] = static_cast<std::uint8_t>(f);
          split_threshold_[t * n_internal + heap] = edges[f][static_cast<std::size_t>(level_bin[p])];
        }
      }

      for (std::size_t i = 0; i < n; ++i) {
        const std::uint32_t p = node[i];
        int right = 0;
        if (level_feature[p] >= 0) {
          right = bins[i * kNumFeatures + static_cast<std::size_t>(level_feature[p])] > level_bin[p];
        }
        node[i] = 2 * p + static_cast<std::uint32_t>(right);
      }
    }

    std::vector<double> leaf_sum(n_leaves, 0.0);
    std::vector<std::size_t> leaf_cnt(n_leaves, 0);
    for (std::size_t i = 0; i < n; ++i) {
      leaf_sum[node[i]] += residual[i];
      ++leaf_cnt[node[i]];
    }
    double* leaf = &leaf_value_[t * n_leaves];
    for (std::size_t l = 0; l < n_leaves; ++l) {
      if (leaf_cnt[l] > 0) {
        leaf[l] = params_.learning_rate * leaf_sum[l] / static_cast<double>(leaf_cnt[l]);
      }
    }
    for (std::size_t i = 0; i < n; ++i) residual[i] -= leaf[node[i]];
  }
  fitted_ = true;
}

double GradientBoostedTrees::predict(std::span<const double, kNumFeatures> x) const {
  if (!fitted_) not_fitted();
  const std::size_t n_internal = internal_nodes();
  const std::size_t n_leaves = leaves();
  const auto depth = static_cast<std::size_t>(params_.max_depth);
  double out = base_;
  for (std::size_t t = 0; t < trees_; ++t) {
    const std::uint8_t* feat = &split_feature_[t * n_internal];
    const double* thr = &split_threshold_[t * n_internal];
    std::size_t idx = 0;
    for (std::size_t d = 0; d < depth; ++d) {
      idx = 2 * idx + 1 + static_cast<std::size_t>(x[feat[idx]] > thr[idx]);
    }
    out += leaf_value_[t * n_leaves + (idx - n_internal)];
  }
  return out;
}

namespace {

// Sums the trees over rows [b0, b1) with the depth fixed at compile time.
template <std::size_t Depth>
void accumulate_trees(const FeatureMatrix& x, std::size_t b0, std::size_t b1, std::size_t trees,
                      const std::uint8_t* feat_all, const double* thr_all,
                      const double* leaf_all, double* out) {
  constexpr std::size_t kInternal = (std::size_t{1} << Depth) - 1;
  constexpr std::size_t kLeaves = std::size_t{1} << Depth;
  for (std::size_t t = 0; t < trees; ++t) {
    const std::uint8_t* feat = feat_all + t * kInternal;
    const double* thr = thr_all + t * kInternal;
    const double* leaf = leaf_all + t * kLeaves;
    for (std::size_t i = b0; i < b1; ++i) {
      const double* row = x.row(i).data();
      std::size_t idx = 0;
      for (std::size_t d = 0; d < Depth; ++d) {
        idx = 2 * idx + 1 + static_cast<std::size_t>(row[feat[idx]] > thr[idx]);
      }
      out[i] += leaf[idx - kInternal];
    }
  }
}

}  // namespace

void GradientBoostedTrees::predict(const FeatureMatrix& x, std::span<double> out) const {
  if (!fitted_) not_fitted();
  // Row blocks small enough that the block and all trees stay in cache.
  constexpr std::size_t kBlock = 128;
  const std::size_t rows = x.rows();
  const std::uint8_t* feat = split_feature_.data();
  const double* thr = split_threshold_.data();
  const double* leaf = leaf_value_.data();
  for (std::size_t b0 = 0; b0 < rows; b0 += kBlock) {
    const std::size_t b1 = std::min(rows, b0 + kBlock);
    std::fill(out.begin() + static_cast<std::ptrdiff_t>(b0),
              out.begin() + static_cast<std::ptrdiff_t>(b1), base_);
    switch (params_.max_depth) {
      case 1: accumulate_trees<1>(x, b0, b1, trees_, feat, thr, leaf, out.data()); break;
      case 2: accumulate_trees<2>(x, b0, b1, trees_, feat, thr, leaf, out.data()); break;
      case 3: accumulate_trees<3>(x, b0, b1, trees_, feat, thr, leaf, out.data()); break;
      case 4: accumulate_trees<4>(x, b0, b1, trees_, feat, thr, leaf, out.data()); break;
      case 5: accumulate_trees<5>(x, b0, b1, trees_, feat, thr, leaf, out.data()); break;
      case 6: accumulate_trees<6>(x, b0, b1, trees_, feat, thr, leaf, out.data()); break;
      default:
        for (std::size_t i = b0; i < b1; ++i) out[i] = predict(std::span<const double, kNumFeatures>(x.row(i).data(), kNumFeatures));
    }
  }
}

json GradientBoostedTrees::to_json() const {
  json trees = json::array();
  const std::size_t n_internal = internal_nodes();
  const std::size_t n_leaves = leaves();
  for (std::size_t t = 0; t < trees_; ++t) {
    json feat = json::array();
    json thr = json::array();
    json leaf = json::array();
    for (std::size_t k = 0; k < n_internal; ++k) {
      feat.push_back(split_feature_[t * n_internal + k]);
      thr.push_back(threshold_to_json(split_threshold_[t * n_internal + k]));
    }
    for (std::size_t k = 0; k < n_leaves; ++k) leaf.push_back(leaf_value_[t * n_leaves + k]);
    trees.push_back(json{{"feature", feat}, {"threshold", thr}, {"leaf", leaf}});
  }
  return json{{"type", "gbrt"},
              {"rounds", params_.rounds},
              {"max_depth", params_.max_depth},
              {"learning_rate", params_.learning_rate},
              {"min_samples_leaf", params_.min_samples_leaf},
              {"max_bins", params_.max_bins},
              {"fitted", fitted_},
              {"base_score", base_},
              {"trees", trees}};
}

GradientBoostedTrees GradientBoostedTrees::from_json(const json& doc) {
  GbrtParams p;
  p.rounds = doc.at("rounds").get<int>();
  p.max_depth = doc.at("max_depth").get<int>();
  p.learning_rate = doc.at("learning_rate").get<double>();
  p.min_samples_leaf = doc.at("min_samples_leaf").get<int>();
  p.max_bins = doc.at("max_bins").get<int>();
  GradientBoostedTrees model(p);
  model.fitted_ = doc.at("fitted").get<bool>();
  model.base_ = doc.at("base_score").get<double>();
  const auto& trees = doc.at("trees");
  model.trees_ = trees.size();
  const std::size_t n_internal = model.internal_nodes();
  const std::size_t n_leaves = model.leaves();
  for (const auto& tree : trees) {
    const auto& feat = tree.at("feature");
    const auto& thr = tree.at("threshold");
    const auto& leaf = tree.at("leaf");
    if (feat.size() != n_internal || thr.size() != n_internal || leaf.size() != n_leaves) {
      throw ParseError("gbrt model: tree shape does not match max_depth");
    }
    for (std::size_t k = 0; k < n_internal; ++k) {
      const auto f = feat[k].get<unsigned>();
      if (f >= kNumFeatures) throw ParseError("gbrt model: split feature out of range");
      model.split_feature_.push_back(static_cast<std::uint8_t>(f));
      model.split_threshold_.push_back(threshold_from_json(thr[k]));
    }
    for (std::size_t k = 0; k < n_leaves; ++k) model.leaf_value_.push_back(leaf[k].get<double>());
  }
  return model;
}

std::unique_ptr<QRegressor> GradientBoostedTrees::clone() const {
  return std::make_unique<GradientBoostedTrees>(*this);
}

// --- ridge ------------------------------------------------------------------

void RidgeRegressor::fit(const FeatureMatrix& x, std::span<const double> y) {
  check_fit_input(x, y);
  const std::size_t n = x.rows();
  const auto d = static_cast<Eigen::Index>(kNumFeatures);
  Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> raw(
      x.row(0).data(), static_cast<Eigen::Index>(n), d);
  Eigen::Map<const Eigen::VectorXd> target(y.data(), static_cast<Eigen::Index>(n));

  const Eigen::RowVectorXd mean = raw.colwise().mean();
  const Eigen::MatrixXd centered = raw.rowwise() - mean;
  Eigen::VectorXd scale = (centered.colwise().squaredNorm() / static_cast<double>(n)).cwiseSqrt();
  const double y_mean = target.mean();

  // Constant columns carry no signal; dropping them keeps the system well posed.
  Eigen::MatrixXd z = centered;
  for (Eigen::Index f = 0; f < d; ++f) {
    if (scale(f) > 1e-12) {
      z.col(f) /= scale(f);
    } else {
      z.col(f).setZero();
      scale(f) = 0.0;
    }
  }
  Eigen::MatrixXd gram = z.transpose() * z;
  gram.diagonal().array() += lambda_ * static_cast<double>(n) + 1e-12;
  const Eigen::VectorXd rhs = z.transpose() * (target.array() - y_mean).matrix();
  const Eigen::VectorXd w = gram.ldlt().solve(rhs);

  intercept_ = y_mean;
  for (Eigen::Index f = 0; f < d; ++f) {
    const double wf = scale(f) > 0.0 ? w(f) / scale(f) : 0.0;
    weights_[static_cast<std::size_t>(f)] = wf;
    intercept_ -= wf * mean(f);
  }
  fitted_ = true;
}

double RidgeRegressor::predict(std::span<const double, kNumFeatures> x) const {
  if (!fitted_) not_fitted();
  double out = intercept_;
  for (std::size_t f = 0; f < kNumFeatures; ++f) out += weights_[f] * x[f];
  return out;
}

json RidgeRegressor::to_json() const {
  return json{{"type", "ridge"},
              {"lambda", lambda_},
              {"fitted", fitted_},
              {"intercept", intercept_},
              {"weights", weights_}};
}

RidgeRegressor RidgeRegressor::from_json(const json& doc) {
  RidgeRegressor model(doc.at("lambda").get<double>());
  model.fitted_ = doc.at("fitted").get<bool>();
  model.intercept_ = doc.at("intercept").get<double>();
  model.weights_ = doc.at("weights").get<QFeatures>();
  return model;
}

std::unique_ptr<QRegressor> RidgeRegressor::clone() const {
  return std::make_unique<RidgeRegressor>(*this);
}

// --- lookup table -----------------------------------------------------------

void LookupTableRegressor::fit(const FeatureMatrix& x, std::span<const double> y) {
  check_fit_input(x, y);
  std::map<QFeatures, std::pair<double, std::size_t>> acc;
  for (std::size_t i = 0; i < x.rows(); ++i) {
    QFeatures key;
    std::copy(x.row(i).begin(), x.row(i).end(), key.begin());
    auto& cell = acc[key];
    cell.first += y[i];
    ++cell.second;
  }
  table_.clear();
  for (const auto& [key, cell] : acc) {
    table_.emplace(key, cell.first / static_cast<double>(cell.second));
  }
  fitted_ = true;
}

double LookupTableRegressor::predict(std::span<const double, kNumFeatures> x) const {
  if (!fitted_) not_fitted();
  QFeatures key;
  std::copy(x.begin(), x.end(), key.begin());
  const auto it = table_.find(key);
  return it == table_.end() ? default_value_ : it->second;
}

json LookupTableRegressor::to_json() const {
  json entries = json::array();
  for (const auto& [key, value] : table_) entries.push_back(json{{"key", key}, {"value", value}});
  return json{{"type", "lookup"},
              {"default_value", default_value_},
              {"fitted", fitted_},
              {"entries", entries}};
}

LookupTableRegressor LookupTableRegressor::from_json(const json& doc) {
  LookupTableRegressor model(doc.at("default_value").get<double>());
  model.fitted_ = doc.at("fitted").get<bool>();
  for (const auto& e : doc.at("entries")) {
    model.table_.emplace(e.at("key").get<QFeatures>(), e.at("value").get<double>());
  }
  return model;
}

std::unique_ptr<QRegressor> LookupTableRegressor::clone() const {
  return std::make_unique<LookupTableRegressor>(*this);
}

// --- factories --------------------------------------------------------------

std::unique_ptr<QRegressor> make_regressor(const RunConfig& cfg) {
  switch (cfg.regressor) {
    case RegressorKind::kGradientBoostedTrees:
      return std::make_unique<GradientBoostedTrees>(cfg.gbrt);
    case RegressorKind::kRidge:
      return std::make_unique<RidgeRegressor>(cfg.ridge_lambda);
    case RegressorKind::kLookupTable:
      return std::make_unique<LookupTableRegressor>();
  }
  throw ConfigError("unknown regressor kind");
}

std::unique_ptr<QRegressor> regressor_from_json(const json& doc) {
  try {
    const auto type = doc.at("type").get<std::string>();
    if (type == "gbrt") return GradientBoostedTrees::from_json(doc).clone();
    if (type == "ridge") return RidgeRegressor::from_json(doc).clone();
    if (type == "lookup") return LookupTableRegressor::from_json(doc).clone();
    throw ParseError("unknown regressor type '" + type + "'");
  } catch (const json::exception& e) {
    throw ParseError(std::string("regressor model: ") + e.what());
  }
}

}  // namespace slatesim
