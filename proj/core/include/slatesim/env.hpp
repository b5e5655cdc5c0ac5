#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <vector>

#include "json.hpp"
#include "slatesim/catalog.hpp"
#include "slatesim/config.hpp"
#include "slatesim/rng.hpp"

namespace slatesim {

struct EnvOptions {
  int slate_size = 30;
  ResponseMode response_mode = ResponseMode::kBernoulliPerSlot;
  ChargeMode charge_mode = ChargeMode::kOnClick;
  // Categorical mode only. Empty: use the cascade abandon probability.
  std::optional<double> no_choice_weight;
};

EnvOptions env_options(const RunConfig& cfg);

// MDP state: remaining budget plus the ordered slate prefix.
struct SlateState {
  double budget_remaining = 0.0;
  std::vector<ItemId> prefix;
  int slot = 0;            // == prefix.size()
  double survival = 1.0;   // prod over prefix of (1 - sigma)
  double prefix_cost = 0.0;
  bool engaged = false;    // the user has already clicked in this slate

  friend bool operator==(const SlateState&, const SlateState&) = default;
};

struct StepOutcome {
  SlateState next_state;
  int reward = 0;
  bool clicked = false;
  bool affordable = false;
};

// One slate episode. Field names match the JSON-lines schema.
struct EpisodeLog {
  std::int64_t user_id = 0;
  double initial_budget = 0.0;
  std::vector<ItemId> actions;
  std::vector<double> sigmas;
  std::vector<double> costs;
  std::vector<int> rewards;
  std::vector<int> click_vector;
  std::vector<double> budget_path;  // u_0 .. u_n, one more entry than actions
  ResponseMode response_mode = ResponseMode::kBernoulliPerSlot;
  std::uint64_t seed = 0;

  int total_reward() const;
  friend bool operator==(const EpisodeLog&, const EpisodeLog&) = default;
};

// Throws DomainError unless u0 > 0.
SlateState reset(double initial_budget);

bool in_prefix(const SlateState& state, ItemId id);

// { i : cost_i <= budget and i not in prefix }, ascending id.
std::vector<ItemId> affordable_items(const SlateState& state, const ItemCatalog& catalog);

// Places `item` at the next slot. In per-slot mode the user scans in order
// and clicks with probability sigma unless an earlier slot was clicked, so
// the click lands on slot k with probability beta_k. It pays only if
// cost <= budget. In
// categorical mode the reward is resolved once per slate by rollout_slate,
// so step() reports reward 0.
StepOutcome step(const SlateState& state, ItemId item, const ItemCatalog& catalog,
                 const EnvOptions& options, RngStream& rng);

// Returns the next item to place, or nullopt to stop the slate early.
using SlatePolicy = std::function<std::optional<ItemId>(const SlateState&)>;

EpisodeLog rollout_slate(const SlatePolicy& policy, double initial_budget,
                         const ItemCatalog& catalog, const EnvOptions& options, RngStream& rng,
                         std::int64_t user_id = 0);

nlohmann::json to_json(const EpisodeLog& log);
EpisodeLog episode_from_json(const nlohmann::json& doc);
void write_episode_jsonl(std::ostream& out, const EpisodeLog& log);
std::vector<EpisodeLog> read_episodes_jsonl(std::istream& in);

}  // namespace slatesim
