#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

namespace slatesim {

enum class Algorithm { kSarsa, kQLearning, kMonteCarlo };
enum class ResponseMode { kBernoulliPerSlot, kCategoricalPerSlate };
enum class ChargeMode { kOnClick, kOnExamination };
enum class RegressorKind { kGradientBoostedTrees, kRidge, kLookupTable };

std::string_view to_string(Algorithm a);
std::string_view to_string(ResponseMode m);
std::string_view to_string(ChargeMode m);
std::string_view to_string(RegressorKind k);
Algorithm parse_algorithm(std::string_view s);
ResponseMode parse_response_mode(std::string_view s);
ChargeMode parse_charge_mode(std::string_view s);
RegressorKind parse_regressor_kind(std::string_view s);

struct GbrtParams {
  int rounds = 100;
  int max_depth = 3;
  double learning_rate = 0.1;
  int min_samples_leaf = 5;
  int max_bins = 64;

  friend bool operator==(const GbrtParams&, const GbrtParams&) = default;
};

// Every simulation knob. The first block carries the simulation-table
// parameters; the rest are implementation settings.
struct RunConfig {
  int num_users = 150;
  int num_items = 142998;
  int slate_size = 30;
  double cost_low = 0.0;
  double cost_high = 100.0;
  std::vector<double> user_budget = {100, 150, 200, 250, 300, 350, 400, 450, 500};
  double user_budget_scale = 0.5;
  double epsilon = 0.1;
  std::vector<double> discount_factor = {0.2, 0.4, 0.6, 0.8, 1.0};

  std::vector<Algorithm> algorithms = {Algorithm::kSarsa, Algorithm::kQLearning,
                                       Algorithm::kMonteCarlo};
  bool include_bandit = true;
  std::vector<std::uint64_t> seeds = {0, 1, 2,  3,  4,  5,  6,  7,  8,  9,
                                      10, 11, 12, 13, 14, 15, 16, 17, 18, 19};
  std::uint64_t master_seed = 20240917;

  ResponseMode response_mode = ResponseMode::kBernoulliPerSlot;
  ChargeMode charge_mode = ChargeMode::kOnClick;
  std::optional<double> no_choice_weight;  // empty: cascade abandon probability

  double relevance_alpha = 2.0;
  double relevance_beta = 8.0;
  double cost_floor = 0.01;
  bool resample_costs_per_user = false;

  int top_m = 50;
  int random_r = 10;

  RegressorKind regressor = RegressorKind::kGradientBoostedTrees;
  GbrtParams gbrt;
  double ridge_lambda = 1e-3;

  int iterations = 20;
  int users_per_iteration = 20;
  int episodes_per_user = 1;
  bool carry_budget = false;
  int eval_episodes = 500;
  int diagnostic_eval_episodes = 20;

  double resolution = 0.1;
  std::int64_t dp_table_cap = 50'000'000;
  bool record_timing = false;

  friend bool operator==(const RunConfig&, const RunConfig&) = default;
};

// Names of all recognised keys, in document order.
const std::vector<std::string>& config_keys();

// Throws ConfigError naming the first offending key.
void validate(const RunConfig& cfg);

// Unknown keys and out-of-range values are rejected with ConfigError.
RunConfig config_from_json(const nlohmann::json& doc);
nlohmann::json config_to_json(const RunConfig& cfg);

// Overrides one key from a textual value. The text is parsed as JSON first
// and falls back to a plain string ("QLearning", "charge_on_click").
void apply_override(RunConfig& cfg, std::string_view key, std::string_view value);

// Applies SLATESIM_<KEY> environment variables (key upper-cased).
void apply_env_overrides(RunConfig& cfg, const char* prefix = "SLATESIM_");

RunConfig load_config(const std::filesystem::path& path);
void save_config(const RunConfig& cfg, const std::filesystem::path& path);

}  // namespace slatesim
