#pragma once

#include <cstddef>
#include <span>

#include "slatesim/rng.hpp"

namespace slatesim {

// Two-sided exact binomial sign test on paired differences a[i] - b[i].
// Zero differences are dropped. Throws DomainError for fewer than 5 pairs or
// unequal lengths, StateError when every pair is tied.
double sign_test(std::span<const double> a, std::span<const double> b);

// P(X <= k) for X ~ Binomial(n, 1/2).
double binomial_half_cdf(std::size_t k, std::size_t n);

struct ConfidenceInterval {
  double mean = 0.0;
  double lower = 0.0;
  double upper = 0.0;
};

// Percentile bootstrap interval for the mean of `values`.
ConfidenceInterval bootstrap_mean_ci(std::span<const double> values, RngStream& rng,
                                     double level = 0.95, int resamples = 2000);

}  // namespace slatesim
