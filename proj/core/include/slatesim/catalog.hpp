#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <vector>

#include "slatesim/rng.hpp"

namespace slatesim {

using ItemId = std::int32_t;

struct Item {
  ItemId id = 0;
  double sigma = 0.0;  // relevance probability in [0, 1]
  double cost = 0.0;   // evaluation cost, seconds

  friend bool operator==(const Item&, const Item&) = default;
};

struct CostDistribution {
  double low = 0.0;
  double high = 100.0;
};

// Median-parameterised log-normal: u0 = loc * exp(scale * Z).
struct BudgetDistribution {
  double loc = 100.0;
  double scale = 0.5;
};

// Beta(alpha, beta) relevance. alpha == 0 pins sigma to 0; beta == 0 pins it to 1.
struct RelevanceParams {
  double alpha = 2.0;
  double beta = 8.0;
};

inline constexpr double kDefaultCostFloor = 0.01;

// Immutable item universe. Items keep their construction (file) order; ids
// must be a permutation of 0..n-1.
class ItemCatalog {
 public:
  ItemCatalog() = default;
  explicit ItemCatalog(std::vector<Item> items);

  std::size_t size() const { return items_.size(); }
  bool empty() const { return items_.empty(); }
  std::span<const Item> items() const { return items_; }

  const Item& item(ItemId id) const { return items_[position_[static_cast<std::size_t>(id)]]; }
  double sigma(ItemId id) const { return item(id).sigma; }
  double cost(ItemId id) const { return item(id).cost; }

  // Ids ordered by sigma / cost descending, lowest id first on ties.
  std::span<const ItemId> by_ratio() const { return by_ratio_; }
  // Ids ordered by cost ascending, lowest id first on ties.
  std::span<const ItemId> by_cost() const { return by_cost_; }
  // Number of items with cost <= budget; they are by_cost()[0..n).
  std::size_t affordable_count(double budget) const;

  // Same items with replaced costs (cost vector indexed by id).
  ItemCatalog with_costs(std::span<const double> costs_by_id) const;

  friend bool operator==(const ItemCatalog& a, const ItemCatalog& b) {
    return a.items_ == b.items_;
  }

 private:
  std::vector<Item> items_;
  std::vector<std::size_t> position_;
  std::vector<ItemId> by_ratio_;
  std::vector<ItemId> by_cost_;
  std::vector<double> sorted_costs_;
};

// Throws ConfigError unless low < high and both are finite with low >= 0.
void validate(const CostDistribution& dist);
void validate(const BudgetDistribution& dist);

// n costs in (max(low, floor), high]; draws below the floor are clamped to it.
std::vector<double> sample_costs(std::size_t n, const CostDistribution& dist, RngStream& rng,
                                 double cost_floor = kDefaultCostFloor);

double sample_initial_budget(const BudgetDistribution& dist, RngStream& rng);

// Synthetic relevance and costs, rounded to nine significant digits.
ItemCatalog generate_synthetic_catalog(std::size_t n, const RelevanceParams& relevance,
                                       const CostDistribution& cost_dist, RngStream& rng,
                                       double cost_floor = kDefaultCostFloor);

// CSV with header `item_id,sigma,cost`. Floats use the shortest text that
// reads back to the same double.
void save_catalog(const ItemCatalog& catalog, std::ostream& out);
void save_catalog(const ItemCatalog& catalog, const std::filesystem::path& path);
ItemCatalog load_catalog(std::istream& in);
ItemCatalog load_catalog(const std::filesystem::path& path);

}  // namespace slatesim
