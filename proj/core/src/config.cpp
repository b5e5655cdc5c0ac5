#include "slatesim/config.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>

#include "slatesim/error.hpp"

namespace slatesim {

using nlohmann::json;

std::string_view to_string(Algorithm a) {
  switch (a) {
    case Algorithm::kSarsa: return "SARSA";
    case Algorithm::kQLearning: return "QLearning";
    case Algorithm::kMonteCarlo: return "MonteCarlo";
  }
  return "?";
}

std::string_view to_string(ResponseMode m) {
  return m == ResponseMode::kBernoulliPerSlot ? "bernoulli_per_slot"
                                              : "categorical_per_slate";
}

std::string_view to_string(ChargeMode m) {
  return m == ChargeMode::kOnClick ? "charge_on_click" : "charge_on_examination";
}

std::string_view to_string(RegressorKind k) {
  switch (k) {
    case RegressorKind::kGradientBoostedTrees: return "gbrt";
    case RegressorKind::kRidge: return "ridge";
    case RegressorKind::kLookupTable: return "lookup";
  }
  return "?";
}

Algorithm parse_algorithm(std::string_view s) {
  if (s == "SARSA" || s == "sarsa") return Algorithm::kSarsa;
  if (s == "QLearning" || s == "qlearning" || s == "q_learning") return Algorithm::kQLearning;
  if (s == "MonteCarlo" || s == "montecarlo" || s == "monte_carlo") return Algorithm::kMonteCarlo;
  throw ConfigError("unknown algorithm '" + std::string(s) + "'");
}

ResponseMode parse_response_mode(std::string_view s) {
  if (s == "bernoulli_per_slot") return ResponseMode::kBernoulliPerSlot;
  if (s == "categorical_per_slate") return ResponseMode::kCategoricalPerSlate;
  throw ConfigError("unknown response_mode '" + std::string(s) + "'");
}

ChargeMode parse_charge_mode(std::string_view s) {
  if (s == "charge_on_click") return ChargeMode::kOnClick;
  if (s == "charge_on_examination") return ChargeMode::kOnExamination;
  throw ConfigError("unknown charge_mode '" + std::string(s) + "'");
}

RegressorKind parse_regressor_kind(std::string_view s) {
  if (s == "gbrt") return RegressorKind::kGradientBoostedTrees;
  if (s == "ridge") return RegressorKind::kRidge;
  if (s == "lookup") return RegressorKind::kLookupTable;
  throw ConfigError("unknown regressor '" + std::string(s) + "'");
}

namespace {

struct KeySpec {
  std::string name;
  std::function<void(RunConfig&, const json&)> read;
  std::function<json(const RunConfig&)> write;
};

[[noreturn]] void bad(const std::string& key, const std::string& what) {
  throw ConfigError("config key '" + key + "': " + what);
}

template <typename T>
T as(const std::string& key, const json& v) {
  try {
    if constexpr (std::is_same_v<T, bool>) {
      if (!v.is_boolean()) bad(key, "expected true/false");
      return v.get<bool>();
    } else if constexpr (std::is_integral_v<T>) {
      if (v.is_number_integer() || v.is_number_unsigned()) return v.get<T>();
      if (v.is_number_float()) {
        const double d = v.get<double>();
        if (d == static_cast<double>(static_cast<T>(d))) return static_cast<T>(d);
      }
      bad(key, "expected an integer");
    } else if constexpr (std::is_floating_point_v<T>) {
      if (!v.is_number()) bad(key, "expected a number");
      return v.get<T>();
    } else {
      if (!v.is_string()) bad(key, "expected a string");
      return v.get<T>();
    }
  } catch (const json::exception& e) {
    bad(key, e.what());
  }
}

template <typename T>
std::vector<T> as_list(const std::string& key, const json& v) {
  std::vector<T> out;
  if (v.is_array()) {
    for (const auto& e : v) out.push_back(as<T>(key, e));
  } else {
    out.push_back(as<T>(key, v));
  }
  return out;
}

template <typename T>
KeySpec scalar(std::string name, T RunConfig::*field) {
  return {name,
          [name, field](RunConfig& c, const json& v) { c.*field = as<T>(name, v); },
          [field](const RunConfig& c) { return json(c.*field); }};
}

template <typename T>
KeySpec list(std::string name, std::vector<T> RunConfig::*field) {
  return {name,
          [name, field](RunConfig& c, const json& v) { c.*field = as_list<T>(name, v); },
          [field](const RunConfig& c) { return json(c.*field); }};
}

template <typename T>
KeySpec gbrt(std::string name, T GbrtParams::*field) {
  return {name,
          [name, field](RunConfig& c, const json& v) { c.gbrt.*field = as<T>(name, v); },
          [field](const RunConfig& c) { return json(c.gbrt.*field); }};
}

template <typename E>
KeySpec enumerated(std::string name, E RunConfig::*field, E (*parse)(std::string_view)) {
  return {name,
          [name, field, parse](RunConfig& c, const json& v) {
            const auto s = as<std::string>(name, v);
            try {
              c.*field = parse(s);
            } catch (const ConfigError& e) {
              bad(name, e.what());
            }
          },
          [field](const RunConfig& c) { return json(std::string(to_string(c.*field))); }};
}

const std::vector<KeySpec>& key_specs() {
  static const std::vector<KeySpec> specs = [] {
    std::vector<KeySpec> s;
    s.push_back(scalar("num_users", &RunConfig::num_users));
    s.push_back(scalar("num_items", &RunConfig::num_items));
    s.push_back(scalar("slate_size", &RunConfig::slate_size));
    s.push_back(scalar("cost_low", &RunConfig::cost_low));
    s.push_back(scalar("cost_high", &RunConfig::cost_high));
    s.push_back(list("user_budget", &RunConfig::user_budget));
    s.push_back(scalar("user_budget_scale", &RunConfig::user_budget_scale));
    s.push_back(scalar("epsilon", &RunConfig::epsilon));
    s.push_back(list("discount_factor", &RunConfig::discount_factor));
    s.push_back({"algorithms",
                 [](RunConfig& c, const json& v) {
                   c.algorithms.clear();
                   for (const auto& name : as_list<std::string>("algorithms", v)) {
                     try {
                       c.algorithms.push_back(parse_algorithm(name));
                     } catch (const ConfigError& e) {
                       bad("algorithms", e.what());
                     }
                   }
                 },
                 [](const RunConfig& c) {
                   json out = json::array();
                   for (auto a : c.algorithms) out.push_back(std::string(to_string(a)));
                   return out;
                 }});
    s.push_back(scalar("include_bandit", &RunConfig::include_bandit));
    s.push_back(list("seeds", &RunConfig::seeds));
    s.push_back(scalar("master_seed", &RunConfig::master_seed));
    s.push_back(enumerated("response_mode", &RunConfig::response_mode, &parse_response_mode));
    s.push_back(enumerated("charge_mode", &RunConfig::charge_mode, &parse_charge_mode));
    s.push_back({"no_choice_weight",
                 [](RunConfig& c, const json& v) {
                   if (v.is_null()) {
                     c.no_choice_weight.reset();
                   } else {
                     c.no_choice_weight = as<double>("no_choice_weight", v);
                   }
                 },
                 [](const RunConfig& c) {
                   return c.no_choice_weight ? json(*c.no_choice_weight) : json(nullptr);
                 }});
    s.push_back(scalar("relevance_alpha", &RunConfig::relevance_alpha));
    s.push_back(scalar("relevance_beta", &RunConfig::relevance_beta));
    s.push_back(scalar("cost_floor", &RunConfig::cost_floor));
    s.push_back(scalar("resample_costs_per_user", &RunConfig::resample_costs_per_user));
    s.push_back(scalar("top_m", &RunConfig::top_m));
    s.push_back(scalar("random_r", &RunConfig::random_r));
    s.push_back(enumerated("regressor", &RunConfig::regressor, &parse_regressor_kind));
    s.push_back(gbrt("gbrt_rounds", &GbrtParams::rounds));
    s.push_back(gbrt("gbrt_max_depth", &GbrtParams::max_depth));
    s.push_back(gbrt("gbrt_learning_rate", &GbrtParams::learning_rate));
    s.push_back(gbrt("gbrt_min_samples_leaf", &GbrtParams::min_samples_leaf));
    s.push_back(gbrt("gbrt_max_bins", &GbrtParams::max_bins));
    s.push_back(scalar("ridge_lambda", &RunConfig::ridge_lambda));
    s.push_back(scalar("iterations", &RunConfig::iterations));
    s.push_back(scalar("users_per_iteration", &RunConfig::users_per_iteration));
    s.push_back(scalar("episodes_per_user", &RunConfig::episodes_per_user));
    s.push_back(scalar("carry_budget", &RunConfig::carry_budget));
    s.push_back(scalar("eval_episodes", &RunConfig::eval_episodes));
    s.push_back(scalar("diagnostic_eval_episodes", &RunConfig::diagnostic_eval_episodes));
    s.push_back(scalar("resolution", &RunConfig::resolution));
    s.push_back(scalar("dp_table_cap", &RunConfig::dp_table_cap));
    s.push_back(scalar("record_timing", &RunConfig::record_timing));
    return s;
  }();
  return specs;
}

const KeySpec* find_key(std::string_view key) {
  for (const auto& s : key_specs()) {
    if (s.name == key) return &s;
  }
  return nullptr;
}

std::string trim(std::string_view s) {
  auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

json parse_value_text(std::string_view text) {
  const std::string t = trim(text);
  json v = json::parse(t, nullptr, /*allow_exceptions=*/false);
  if (v.is_discarded()) return json(t);
  return v;
}

// `key: value` / `key = value` lines, '#' comments. Values are JSON scalars
// or arrays; bare words become strings.
json parse_key_value_lines(const std::string& text) {
  json doc = json::object();
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    const std::string t = trim(line);
    if (t.empty()) continue;
    auto sep = t.find_first_of(":=");
    if (sep == std::string::npos) {
      throw ConfigError("config line " + std::to_string(line_no) + ": expected 'key: value'");
    }
    std::string key = trim(std::string_view(t).substr(0, sep));
    if (key.size() >= 2 && key.front() == '"' && key.back() == '"') {
      key = key.substr(1, key.size() - 2);
    }
    doc[key] = parse_value_text(std::string_view(t).substr(sep + 1));
  }
  return doc;
}

void check(bool ok, const char* key, const std::string& what) {
  if (!ok) bad(key, what);
}

}  // namespace

const std::vector<std::string>& config_keys() {
  static const std::vector<std::string> keys = [] {
    std::vector<std::string> k;
    for (const auto& s : key_specs()) k.push_back(s.name);
    return k;
  }();
  return keys;
}

void validate(const RunConfig& c) {
  check(c.num_users >= 1, "num_users", "must be >= 1");
  check(c.num_items >= 1, "num_items", "must be >= 1");
  check(c.slate_size >= 1, "slate_size", "must be >= 1");
  check(std::isfinite(c.cost_low) && c.cost_low >= 0, "cost_low", "must be finite and >= 0");
  check(std::isfinite(c.cost_high) && c.cost_high > c.cost_low, "cost_high",
        "must be finite and > cost_low");
  check(!c.user_budget.empty(), "user_budget", "must not be empty");
  for (double b : c.user_budget) {
    check(std::isfinite(b) && b > 0, "user_budget", "every location must be > 0");
  }
  check(std::isfinite(c.user_budget_scale) && c.user_budget_scale >= 0, "user_budget_scale",
        "must be >= 0");
  check(c.epsilon >= 0 && c.epsilon <= 1, "epsilon", "must lie in [0, 1]");
  check(!c.discount_factor.empty(), "discount_factor", "must not be empty");
  for (double g : c.discount_factor) {
    check(g >= 0 && g <= 1, "discount_factor", "every value must lie in [0, 1]");
  }
  check(!c.algorithms.empty(), "algorithms", "must not be empty");
  check(!c.seeds.empty(), "seeds", "must not be empty");
  {
    std::set<std::uint64_t> unique(c.seeds.begin(), c.seeds.end());
    check(unique.size() == c.seeds.size(), "seeds", "must be unique");
  }
  if (c.no_choice_weight) {
    check(std::isfinite(*c.no_choice_weight) && *c.no_choice_weight >= 0, "no_choice_weight",
          "must be >= 0");
  }
  check(c.relevance_alpha >= 0 && c.relevance_beta >= 0 &&
            (c.relevance_alpha > 0 || c.relevance_beta > 0),
        "relevance_alpha", "Beta parameters must be >= 0 and not both zero");
  check(std::isfinite(c.cost_floor) && c.cost_floor > 0, "cost_floor", "must be > 0");
  check(c.top_m >= 0, "top_m", "must be >= 0");
  check(c.random_r >= 0, "random_r", "must be >= 0");
  check(c.top_m + c.random_r >= 1, "top_m", "top_m + random_r must be >= 1");
  check(c.gbrt.rounds >= 1, "gbrt_rounds", "must be >= 1");
  check(c.gbrt.max_depth >= 1 && c.gbrt.max_depth <= 8, "gbrt_max_depth", "must lie in [1, 8]");
  check(c.gbrt.learning_rate > 0 && c.gbrt.learning_rate <= 1, "gbrt_learning_rate",
        "must lie in (0, 1]");
  check(c.gbrt.min_samples_leaf >= 1, "gbrt_min_samples_leaf", "must be >= 1");
  check(c.gbrt.max_bins >= 2 && c.gbrt.max_bins <= 256, "gbrt_max_bins", "must lie in [2, 256]");
  check(c.ridge_lambda >= 0, "ridge_lambda", "must be >= 0");
  check(c.iterations >= 1, "iterations", "must be >= 1");
  check(c.users_per_iteration >= 0, "users_per_iteration", "must be >= 0");
  check(c.episodes_per_user >= 1, "episodes_per_user", "must be >= 1");
  check(c.eval_episodes >= 1, "eval_episodes", "must be >= 1");
  check(c.diagnostic_eval_episodes >= 0, "diagnostic_eval_episodes", "must be >= 0");
  check(std::isfinite(c.resolution) && c.resolution > 0, "resolution", "must be > 0");
  check(c.dp_table_cap >= 1, "dp_table_cap", "must be >= 1");
}

RunConfig config_from_json(const json& doc) {
  if (doc.is_null()) return RunConfig{};
  if (!doc.is_object()) throw ConfigError("config document must be a key-value object");
  RunConfig cfg;
  for (const auto& [key, value] : doc.items()) {
    const KeySpec* spec = find_key(key);
    if (!spec) throw ConfigError("config key '" + key + "': unknown key");
    spec->read(cfg, value);
  }
  validate(cfg);
  return cfg;
}

json config_to_json(const RunConfig& cfg) {
  json doc = json::object();
  for (const auto& s : key_specs()) doc[s.name] = s.write(cfg);
  return doc;
}

void apply_override(RunConfig& cfg, std::string_view key, std::string_view value) {
  const KeySpec* spec = find_key(key);
  if (!spec) throw ConfigError("config key '" + std::string(key) + "': unknown key");
  spec->read(cfg, parse_value_text(value));
}

void apply_env_overrides(RunConfig& cfg, const char* prefix) {
  for (const auto& s : key_specs()) {
    std::string var = prefix;
    for (char ch : s.name) var.push_back(static_cast<char>(std::toupper(static_cast<unsigned char>(ch))));
    if (const char* v = std::getenv(var.c_str())) apply_override(cfg, s.name, v);
  }
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  const std::string text = buf.str();
  if (trim(text).empty()) return RunConfig{};
  json doc = json::parse(text, nullptr, /*allow_exceptions=*/false);
  if (doc.is_discarded()) doc = parse_key_value_lines(text);
  return config_from_json(doc);
}

void save_config(const RunConfig& cfg, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write config file " + path.string());
  out << config_to_json(cfg).dump(2) << '\n';
}

}  // namespace slatesim
