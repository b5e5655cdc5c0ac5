#include "slatesim/knapsack.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "slatesim/error.hpp"

namespace slatesim {

using nlohmann::json;

namespace {

bool nearly_equal(double a, double b) {
  return std::abs(a - b) <= 1e-12 * std::max({1.0, std::abs(a), std::abs(b)});
}

KnapsackSolution make_solution(const KnapsackInstance& inst, std::vector<std::size_t> selected) {
  KnapsackSolution s;
  s.selected = std::move(selected);
  std::sort(s.selected.begin(), s.selected.end());
  for (std::size_t i : s.selected) {
    s.total_utility += inst.utilities[i];
    s.total_cost += inst.costs[i];
  }
  return s;
}

// Smallest integer k with k * resolution >= cost.
std::int64_t units_up(double cost, double resolution) {
  auto k = static_cast<std::int64_t>(std::ceil(cost / resolution));
  while (k > 0 && static_cast<double>(k - 1) * resolution >= cost) --k;
  while (static_cast<double>(k) * resolution < cost) ++k;
  return k;
}

// Largest integer k with k * resolution <= budget.
std::int64_t units_down(double budget, double resolution) {
  auto k = static_cast<std::int64_t>(std::floor(budget / resolution));
  while (static_cast<double>(k + 1) * resolution <= budget) ++k;
  while (k > 0 && static_cast<double>(k) * resolution > budget) --k;
  return std::max<std::int64_t>(k, 0);
}

}  // namespace

void validate(const KnapsackInstance& inst) {
  if (inst.utilities.size() != inst.costs.size()) {
    throw DomainError("knapsack: utilities and costs differ in length");
  }
  for (std::size_t i = 0; i < inst.utilities.size(); ++i) {
    if (!std::isfinite(inst.utilities[i]) || inst.utilities[i] < 0.0) {
      throw DomainError("knapsack: utility " + std::to_string(i) + " must be finite and >= 0");
    }
    if (!std::isfinite(inst.costs[i]) || inst.costs[i] <= 0.0) {
      throw DomainError("knapsack: cost " + std::to_string(i) + " must be finite and > 0");
    }
  }
  if (!std::isfinite(inst.budget) || inst.budget < 0.0) {
    throw DomainError("knapsack: budget must be finite and >= 0");
  }
}

KnapsackSolution solve_bruteforce(const KnapsackInstance& inst) {
  validate(inst);
  const std::size_t n = inst.utilities.size();
  if (n > kBruteForceMaxItems) {
    throw ResourceError("solve_bruteforce: " + std::to_string(n) +
                        " items exceeds the enumeration limit of 25");
  }
  std::uint32_t best_mask = 0;
  double best_u = 0.0;
  double best_c = 0.0;
  const std::uint32_t end = std::uint32_t{1} << n;
  for (std::uint32_t mask = 1; mask < end; ++mask) {
    double u = 0.0;
    double c = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      if (mask & (std::uint32_t{1} << i)) {
        u += inst.utilities[i];
        c += inst.costs[i];
      }
    }
    if (c > inst.budget) continue;
    bool better = false;
    if (!nearly_equal(u, best_u)) {
      better = u > best_u;
    } else if (!nearly_equal(c, best_c)) {
      better = c < best_c;
    } else {
      // Lexicographic order on ascending index lists: the first differing
      // index decides, and the set holding the smaller index wins.
      const std::uint32_t diff = mask ^ best_mask;
      if (diff != 0) {
        const std::uint32_t lowest = diff & (~diff + 1);
        better = (mask & lowest) != 0;
      }
    }
    if (better) {
      best_mask = mask;
      best_u = u;
      best_c = c;
    }
  }
  std::vector<std::size_t> selected;
  for (std::size_t i = 0; i < n; ++i) {
    if (best_mask & (std::uint32_t{1} << i)) selected.push_back(i);
  }
  return make_solution(inst, std::move(selected));
}

KnapsackSolution solve_dp(const KnapsackInstance& inst, double resolution, std::int64_t table_cap) {
  validate(inst);
  if (!(resolution > 0.0) || !std::isfinite(resolution)) {
    throw DomainError("solve_dp: resolution must be > 0");
  }
  const std::size_t n = inst.utilities.size();
  const std::int64_t capacity = units_down(inst.budget, resolution);
  const double cells = static_cast<double>(n + 1) * static_cast<double>(capacity + 1);
  if (cells > static_cast<double>(table_cap)) {
    throw ResourceError("solve_dp: table of " + std::to_string(static_cast<long long>(cells)) +
                        " cells exceeds the cap of " + std::to_string(table_cap) +
                        "; use a coarser resolution");
  }
  std::vector<std::int64_t> weight(n);
  for (std::size_t i = 0; i < n; ++i) weight[i] = units_up(inst.costs[i], resolution);

  // value/cost[i][w]: best over items i..n-1 with capacity w, ordered by
  // utility descending then true cost ascending.
  const auto width = static_cast<std::size_t>(capacity + 1);
  std::vector<double> value((n + 1) * width, 0.0);
  std::vector<double> spent((n + 1) * width, 0.0);
  auto at = [width](std::size_t i, std::int64_t w) { return i * width + static_cast<std::size_t>(w); };
  auto prefer = [](double u1, double c1, double u2, double c2) {
    if (!nearly_equal(u1, u2)) return u1 > u2;
    return !nearly_equal(c1, c2) ? c1 < c2 : true;
  };

  for (std::size_t i = n; i-- > 0;) {
    for (std::int64_t w = 0; w <= capacity; ++w) {
      double u = value[at(i + 1, w)];
      double c = spent[at(i + 1, w)];
      if (weight[i] <= w) {
        const double u_in = inst.utilities[i] + value[at(i + 1, w - weight[i])];
        const double c_in = inst.costs[i] + spent[at(i + 1, w - weight[i])];
        if (prefer(u_in, c_in, u, c)) {
          u = u_in;
          c = c_in;
        }
      }
      value[at(i, w)] = u;
      spent[at(i, w)] = c;
    }
  }

  std::vector<std::size_t> selected;
  std::int64_t w = capacity;
  for (std::size_t i = 0; i < n; ++i) {
    if (weight[i] > w) continue;
    const double u_in = inst.utilities[i] + value[at(i + 1, w - weight[i])];
    const double c_in = inst.costs[i] + spent[at(i + 1, w - weight[i])];
    // Including the lower index on a tie gives the lexicographically smaller set.
    if (prefer(u_in, c_in, value[at(i + 1, w)], spent[at(i + 1, w)])) {
      selected.push_back(i);
      w -= weight[i];
    }
  }
  return make_solution(inst, std::move(selected));
}

std::vector<ItemId> greedy_ratio_slate(const ItemCatalog& catalog, double budget, int slate_size) {
  if (slate_size < 1) throw DomainError("greedy_ratio_slate: slate size must be >= 1");
  std::vector<ItemId> slate;
  double spent = 0.0;
  for (ItemId id : catalog.by_ratio()) {
    if (slate.size() >= static_cast<std::size_t>(slate_size)) break;
    if (spent + catalog.cost(id) > budget) break;
    spent += catalog.cost(id);
    slate.push_back(id);
  }
  return slate;
}

KnapsackInstance knapsack_instance(const ItemCatalog& catalog, double budget) {
  KnapsackInstance inst;
  inst.budget = budget;
  inst.utilities.resize(catalog.size());
  inst.costs.resize(catalog.size());
  for (const auto& it : catalog.items()) {
    inst.utilities[static_cast<std::size_t>(it.id)] = it.sigma;
    inst.costs[static_cast<std::size_t>(it.id)] = it.cost;
  }
  return inst;
}

json to_json(const KnapsackInstance& inst) {
  return json{{"utilities", inst.utilities}, {"costs", inst.costs}, {"budget", inst.budget}};
}

KnapsackInstance knapsack_instance_from_json(const json& doc) {
  KnapsackInstance inst;
  try {
    doc.at("utilities").get_to(inst.utilities);
    doc.at("costs").get_to(inst.costs);
    doc.at("budget").get_to(inst.budget);
  } catch (const json::exception& e) {
    throw ParseError(std::string("knapsack instance: ") + e.what());
  }
  validate(inst);
  return inst;
}

json to_json(const KnapsackSolution& s) {
  return json{{"selected", s.selected},
              {"total_utility", s.total_utility},
              {"total_cost", s.total_cost}};
}

KnapsackSolution knapsack_solution_from_json(const json& doc) {
  KnapsackSolution s;
  try {
    doc.at("selected").get_to(s.selected);
    doc.at("total_utility").get_to(s.total_utility);
    doc.at("total_cost").get_to(s.total_cost);
  } catch (const json::exception& e) {
    throw ParseError(std::string("knapsack solution: ") + e.what());
  }
  return s;
}

}  // namespace slatesim
