#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "json.hpp"
#include "slatesim/catalog.hpp"

namespace slatesim {

// max sum(utilities[S]) subject to sum(costs[S]) <= budget.
struct KnapsackInstance {
  std::vector<double> utilities;
  std::vector<double> costs;
  double budget = 0.0;
};

struct KnapsackSolution {
  std::vector<std::size_t> selected;  // ascending
  double total_utility = 0.0;
  double total_cost = 0.0;
};

inline constexpr std::size_t kBruteForceMaxItems = 25;
inline constexpr std::int64_t kDefaultDpTableCap = 50'000'000;

// Throws DomainError on length mismatch, negative/non-finite utilities,
// non-positive costs or a negative budget.
void validate(const KnapsackInstance& instance);

// Exhaustive search. Ties: lower total cost, then the lexicographically
// smallest index set. Throws ResourceError for more than 25 items.
KnapsackSolution solve_bruteforce(const KnapsackInstance& instance);

// Dynamic programme over costs rounded up to multiples of `resolution`, so
// the answer is always feasible for the true costs. Same tie rules as the
// brute force. Throws ResourceError when (n + 1) * (capacity + 1) exceeds
// `table_cap`.
KnapsackSolution solve_dp(const KnapsackInstance& instance, double resolution = 0.1,
                          std::int64_t table_cap = kDefaultDpTableCap);

// Items by sigma/cost descending, appended while the running cost stays
// within budget, at most `slate_size` of them.
std::vector<ItemId> greedy_ratio_slate(const ItemCatalog& catalog, double budget, int slate_size);

// Utilities are the item relevances (the static relaxation ignores position).
KnapsackInstance knapsack_instance(const ItemCatalog& catalog, double budget);

nlohmann::json to_json(const KnapsackInstance& instance);
KnapsackInstance knapsack_instance_from_json(const nlohmann::json& doc);
nlohmann::json to_json(const KnapsackSolution& solution);
KnapsackSolution knapsack_solution_from_json(const nlohmann::json& doc);

}  // namespace slatesim
