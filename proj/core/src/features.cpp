#include "slatesim/features.hpp"

#include <algorithm>

namespace slatesim {

QFeatures featurize(const SlateState& state, const Item& item, double cost_floor) {
  const double conditional_beta = item.sigma * state.survival;
  return {state.budget_remaining,
          static_cast<double>(state.slot),
          state.survival,
          state.prefix_cost,
          item.sigma,
          item.cost,
          conditional_beta,
          item.sigma / std::max(item.cost, cost_floor)};
}

}  // namespace slatesim
