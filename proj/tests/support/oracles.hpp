#pragma once

// Independent reference computations. None of these call into the code they
// check: they enumerate outcomes directly.

#include <algorithm>
#include <cstdint>
#include <functional>
#include <map>
#include <vector>

namespace slatesim::testing {

struct CascadeMass {
  std::vector<double> select;  // P(first "yes" lands on slot k)
  double abandon = 0.0;
};

// Each slot independently "would select" with probability sigma_k; the user
// takes the first such slot. Sums the probability of all 2^K outcome vectors.
inline CascadeMass cascade_by_enumeration(const std::vector<double>& sigma) {
  const std::size_t k = sigma.size();
  CascadeMass m;
  m.select.assign(k, 0.0);
  for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << k); ++mask) {
    double p = 1.0;
    for (std::size_t j = 0; j < k; ++j) p *= (mask >> j & 1u) ? sigma[j] : 1.0 - sigma[j];
    if (mask == 0) {
      m.abandon += p;
    } else {
      std::size_t first = 0;
      while (!(mask >> first & 1u)) ++first;
      m.select[first] += p;
    }
  }
  return m;
}

// Best achievable utility by include/exclude recursion.
inline double knapsack_value_recursive(const std::vector<double>& u, const std::vector<double>& c,
                                       double budget, std::size_t i = 0) {
  if (i == u.size()) return 0.0;
  double best = knapsack_value_recursive(u, c, budget, i + 1);
  if (c[i] <= budget) best = std::max(best, u[i] + knapsack_value_recursive(u, c, budget - c[i], i + 1));
  return best;
}

// Exact action values of the per-slot, charge-on-click slate MDP for a tiny
// catalog (the user clicks at most once per slate), by recursion over states and reward outcomes. The action set at a
// state is every affordable item not yet placed; no action means terminal.
struct TabularOracle {
  std::vector<double> sigma;
  std::vector<double> cost;
  int slate_size = 2;
  double gamma = 0.8;

  double state_value(double budget, std::vector<int>& prefix, bool engaged) const {
    double best = 0.0;
    bool any = false;
    for (int a = 0; a < static_cast<int>(sigma.size()); ++a) {
      if (!available(budget, prefix, a)) continue;
      const double q = action_value(budget, prefix, engaged, a);
      best = any ? std::max(best, q) : q;
      any = true;
    }
    return best;
  }

  bool available(double budget, const std::vector<int>& prefix, int a) const {
    if (static_cast<int>(prefix.size()) >= slate_size) return false;
    if (std::find(prefix.begin(), prefix.end(), a) != prefix.end()) return false;
    return cost[static_cast<std::size_t>(a)] <= budget;
  }

  double action_value(double budget, std::vector<int>& prefix, bool engaged, int a) const {
    const double s = sigma[static_cast<std::size_t>(a)];
    const double c = cost[static_cast<std::size_t>(a)];
    const double click = engaged ? 0.0 : s;
    prefix.push_back(a);
    double q = 0.0;
    for (int r = 0; r <= 1; ++r) {
      const double p = r ? click : 1.0 - click;
      if (p == 0.0) continue;
      q += p * (r + gamma * state_value(budget - c * r, prefix, engaged || r == 1));
    }
    prefix.pop_back();
    return q;
  }
};

// P(X <= k), X ~ Binomial(n, 1/2), with exact integer binomials (n <= 60).
inline double binomial_half_cdf_exact(unsigned k, unsigned n) {
  std::uint64_t sum = 0;
  std::uint64_t choose = 1;
  for (unsigned i = 0; i <= k && i <= n; ++i) {
    sum += choose;
    choose = choose * (n - i) / (i + 1);
  }
  return static_cast<double>(sum) / static_cast<double>(std::uint64_t{1} << n);
}

}  // namespace slatesim::testing
