#include "slatesim/env.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>
#include <string>

#include "slatesim/choice.hpp"
#include "slatesim/error.hpp"

namespace slatesim {

EnvOptions env_options(const RunConfig& cfg) {
  return EnvOptions{cfg.slate_size, cfg.response_mode, cfg.charge_mode, cfg.no_choice_weight};
}

int EpisodeLog::total_reward() const {
  int total = 0;
  for (int r : rewards) total += r;
  return total;
}

SlateState reset(double initial_budget) {
  if (!(initial_budget > 0.0) || !std::isfinite(initial_budget)) {
    throw DomainError("reset: initial budget must be finite and > 0");
  }
  SlateState s;
  s.budget_remaining = initial_budget;
  return s;
}

bool in_prefix(const SlateState& state, ItemId id) {
  return std::find(state.prefix.begin(), state.prefix.end(), id) != state.prefix.end();
}

std::vector<ItemId> affordable_items(const SlateState& state, const ItemCatalog& catalog) {
  const auto by_cost = catalog.by_cost();
  const std::size_t n = catalog.affordable_count(state.budget_remaining);
  std::vector<ItemId> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (!in_prefix(state, by_cost[i])) out.push_back(by_cost[i]);
  }
  std::sort(out.begin(), out.end());
  return out;
}

StepOutcome step(const SlateState& state, ItemId item, const ItemCatalog& catalog,
                 const EnvOptions& options, RngStream& rng) {
  if (item < 0 || static_cast<std::size_t>(item) >= catalog.size()) {
    throw ContractViolation("step: unknown item id " + std::to_string(item));
  }
  if (state.slot >= options.slate_size) {
    throw ContractViolation("step: slate already holds " + std::to_string(options.slate_size) +
                            " items");
  }
  if (in_prefix(state, item)) {
    throw ContractViolation("step: item " + std::to_string(item) + " already in the slate");
  }
  const Item& it = catalog.item(item);

  StepOutcome out;
  out.affordable = it.cost <= state.budget_remaining;
  if (options.response_mode == ResponseMode::kBernoulliPerSlot) {
    out.clicked = !state.engaged && bernoulli_click(it.sigma, rng) == 1;
    out.reward = (out.clicked && out.affordable) ? 1 : 0;
  }

  SlateState& next = out.next_state;
  next = state;
  next.prefix.push_back(item);
  next.slot = state.slot + 1;
  next.survival = state.survival * (1.0 - it.sigma);
  next.prefix_cost = state.prefix_cost + it.cost;
  next.engaged = state.engaged || out.clicked;
  if (options.charge_mode == ChargeMode::kOnClick) {
    next.budget_remaining = state.budget_remaining - it.cost * out.reward;
  } else if (out.affordable) {
    next.budget_remaining = state.budget_remaining - it.cost;
  }
  return out;
}

EpisodeLog rollout_slate(const SlatePolicy& policy, double initial_budget,
                         const ItemCatalog& catalog, const EnvOptions& options, RngStream& rng,
                         std::int64_t user_id) {
  if (options.slate_size < 1) throw ContractViolation("rollout_slate: slate size must be >= 1");
  EpisodeLog log;
  log.user_id = user_id;
  log.initial_budget = initial_budget;
  log.response_mode = options.response_mode;
  log.seed = rng.key();

  SlateState state = reset(initial_budget);
  log.budget_path.push_back(state.budget_remaining);
  std::vector<char> affordable;
  while (state.slot < options.slate_size) {
    const auto choice = policy(state);
    if (!choice) break;
    StepOutcome out = step(state, *choice, catalog, options, rng);
    const Item& it = catalog.item(*choice);
    log.actions.push_back(*choice);
    log.sigmas.push_back(it.sigma);
    log.costs.push_back(it.cost);
    log.rewards.push_back(out.reward);
    log.click_vector.push_back(out.clicked ? 1 : 0);
    affordable.push_back(out.affordable ? 1 : 0);
    state = std::move(out.next_state);
    log.budget_path.push_back(state.budget_remaining);
  }

  if (options.response_mode == ResponseMode::kCategoricalPerSlate && !log.actions.empty()) {
    const SelectionProfile profile = selection_probabilities(log.sigmas);
    const double no_choice = options.no_choice_weight.value_or(profile.abandon);
    const UserResponse response = sample_user_choice(profile.betas, no_choice, rng);
    log.click_vector = response.click_vector;
    if (response.clicked_slot && affordable[*response.clicked_slot]) {
      const std::size_t k = *response.clicked_slot;
      log.rewards[k] = 1;
      if (options.charge_mode == ChargeMode::kOnClick) {
        for (std::size_t j = k + 1; j < log.budget_path.size(); ++j) {
          log.budget_path[j] -= log.costs[k];
        }
      }
    }
  }
  return log;
}

nlohmann::json to_json(const EpisodeLog& log) {
  return nlohmann::json{{"user_id", log.user_id},
                        {"initial_budget", log.initial_budget},
                        {"actions", log.actions},
                        {"sigmas", log.sigmas},
                        {"costs", log.costs},
                        {"rewards", log.rewards},
                        {"click_vector", log.click_vector},
                        {"budget_path", log.budget_path},
                        {"response_mode", std::string(to_string(log.response_mode))},
                        {"seed", log.seed}};
}

EpisodeLog episode_from_json(const nlohmann::json& doc) {
  EpisodeLog log;
  try {
    doc.at("user_id").get_to(log.user_id);
    doc.at("initial_budget").get_to(log.initial_budget);
    doc.at("actions").get_to(log.actions);
    doc.at("sigmas").get_to(log.sigmas);
    doc.at("costs").get_to(log.costs);
    doc.at("rewards").get_to(log.rewards);
    doc.at("click_vector").get_to(log.click_vector);
    doc.at("budget_path").get_to(log.budget_path);
    log.response_mode = parse_response_mode(doc.at("response_mode").get<std::string>());
    doc.at("seed").get_to(log.seed);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("episode log: ") + e.what());
  } catch (const ConfigError& e) {
    throw ParseError(std::string("episode log: ") + e.what());
  }
  return log;
}

void write_episode_jsonl(std::ostream& out, const EpisodeLog& log) {
  out << to_json(log).dump() << '\n';
}

std::vector<EpisodeLog> read_episodes_jsonl(std::istream& in) {
  std::vector<EpisodeLog> logs;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    auto doc = nlohmann::json::parse(line, nullptr, false);
    if (doc.is_discarded()) {
      throw ParseError("episode log line " + std::to_string(line_no) + ": invalid JSON");
    }
    logs.push_back(episode_from_json(doc));
  }
  return logs;
}

}  // namespace slatesim
