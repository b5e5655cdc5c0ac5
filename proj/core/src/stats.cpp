#include "slatesim/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "slatesim/error.hpp"

namespace slatesim {

double binomial_half_cdf(std::size_t k, std::size_t n) {
  if (k >= n) return 1.0;
  // Sum of C(n, i) / 2^n in log space keeps n in the thousands finite.
  double total = 0.0;
  for (std::size_t i = 0; i <= k; ++i) {
    const double log_term = std::lgamma(static_cast<double>(n) + 1.0) -
                            std::lgamma(static_cast<double>(i) + 1.0) -
                            std::lgamma(static_cast<double>(n - i) + 1.0) -
                            static_cast<double>(n) * std::log(2.0);
    total += std::exp(log_term);
  }
  return std::min(total, 1.0);
}

double sign_test(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw DomainError("sign_test: samples differ in length");
  if (a.size() < 5) throw DomainError("sign_test: need at least 5 pairs");
  std::size_t positive = 0;
  std::size_t negative = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i] > b[i]) ++positive;
    else if (a[i] < b[i]) ++negative;
  }
  const std::size_t n = positive + negative;
  if (n == 0) throw StateError("sign_test: every pair is tied, the test is undefined");
  const double tail = binomial_half_cdf(std::min(positive, negative), n);
  return std::min(1.0, 2.0 * tail);
}

ConfidenceInterval bootstrap_mean_ci(std::span<const double> values, RngStream& rng, double level,
                                     int resamples) {
  if (values.empty()) throw DomainError("bootstrap_mean_ci: no values");
  if (!(level > 0.0 && level < 1.0)) throw DomainError("bootstrap_mean_ci: level must be in (0, 1)");
  if (resamples < 1) throw DomainError("bootstrap_mean_ci: resamples must be >= 1");
  const auto n = values.size();
  ConfidenceInterval ci;
  ci.mean = std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(n);
  std::vector<double> means(static_cast<std::size_t>(resamples));
  for (auto& m : means) {
    double sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) sum += values[rng.below(n)];
    m = sum / static_cast<double>(n);
  }
  std::sort(means.begin(), means.end());
  const double alpha = (1.0 - level) / 2.0;
  auto quantile = [&](double q) {
    const double pos = q * static_cast<double>(means.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const auto hi = std::min(lo + 1, means.size() - 1);
    return means[lo] + (pos - static_cast<double>(lo)) * (means[hi] - means[lo]);
  };
  ci.lower = quantile(alpha);
  ci.upper = quantile(1.0 - alpha);
  return ci;
}

}  // namespace slatesim
