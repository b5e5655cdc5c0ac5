#include "slatesim/agents.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <ostream>
#include <sstream>
#include <string>

#include "slatesim/error.hpp"

namespace slatesim {

using nlohmann::json;

namespace {

bool contains(std::span<const ItemId> ids, ItemId id) {
  return std::find(ids.begin(), ids.end(), id) != ids.end();
}

void check_gamma(double gamma) {
  if (!(gamma >= 0.0 && gamma <= 1.0)) throw DomainError("gamma must lie in [0, 1]");
}

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  std::ostringstream os;
  os.precision(9);
  os << v;
  return os.str();
}

}  // namespace

std::vector<ItemId> candidate_actions(const SlateState& state, const ItemCatalog& catalog,
                                      int top_m, int random_r, RngStream& rng) {
  std::vector<ItemId> out;
  const double budget = state.budget_remaining;
  const std::size_t n_affordable = catalog.affordable_count(budget);
  if (n_affordable == 0) return out;

  std::size_t prefix_affordable = 0;
  for (ItemId id : state.prefix) {
    if (catalog.cost(id) <= budget) ++prefix_affordable;
  }
  if (prefix_affordable >= n_affordable) return out;

  const auto want_top = static_cast<std::size_t>(std::max(top_m, 0));
  for (ItemId id : catalog.by_ratio()) {
    if (out.size() >= want_top) break;
    if (catalog.cost(id) <= budget && !in_prefix(state, id)) out.push_back(id);
  }
  const std::size_t n_top = out.size();

  const auto want_random = static_cast<std::size_t>(std::max(random_r, 0));
  const std::size_t pool = n_affordable - prefix_affordable - n_top;
  if (want_random == 0 || pool == 0) return out;

  const auto by_cost = catalog.by_cost();
  auto excluded = [&](ItemId id) {
    return in_prefix(state, id) || contains(std::span<const ItemId>(out), id);
  };
  if (pool <= 4 * want_random) {
    std::vector<ItemId> rest;
    rest.reserve(pool);
    for (std::size_t i = 0; i < n_affordable; ++i) {
      if (!excluded(by_cost[i])) rest.push_back(by_cost[i]);
    }
    const std::size_t take = std::min(want_random, rest.size());
    for (std::size_t i = 0; i < take; ++i) {
      const std::size_t j = i + rng.below(rest.size() - i);
      std::swap(rest[i], rest[j]);
      out.push_back(rest[i]);
    }
  } else {
    while (out.size() < n_top + want_random) {
      const ItemId id = by_cost[rng.below(n_affordable)];
      if (!excluded(id)) out.push_back(id);
    }
  }
  return out;
}

ItemId epsilon_greedy_select(std::span<const double> q_values, std::span<const ItemId> candidates,
                             double epsilon, RngStream& rng) {
  if (candidates.empty()) throw ContractViolation("epsilon_greedy_select: no candidates");
  if (q_values.size() != candidates.size()) {
    throw ContractViolation("epsilon_greedy_select: q_values and candidates differ in length");
  }
  if (!(epsilon >= 0.0 && epsilon <= 1.0)) throw DomainError("epsilon must lie in [0, 1]");
  if (rng.uniform() < epsilon) return candidates[rng.below(candidates.size())];
  std::size_t best = 0;
  for (std::size_t i = 1; i < candidates.size(); ++i) {
    if (q_values[i] > q_values[best] ||
        (q_values[i] == q_values[best] && candidates[i] < candidates[best])) {
      best = i;
    }
  }
  return candidates[best];
}

double sarsa_target(double reward, double gamma, double q_next_taken, bool terminal) {
  check_gamma(gamma);
  return terminal ? reward : reward + gamma * q_next_taken;
}

double qlearning_target(double reward, double gamma, double q_next_max, bool terminal) {
  check_gamma(gamma);
  return terminal ? reward : reward + gamma * q_next_max;
}

double qlearning_target(double reward, double gamma, std::span<const double> q_next) {
  if (q_next.empty()) return qlearning_target(reward, gamma, 0.0, true);
  return qlearning_target(reward, gamma, *std::max_element(q_next.begin(), q_next.end()), false);
}

std::vector<double> monte_carlo_returns(std::span<const double> rewards, double gamma) {
  check_gamma(gamma);
  std::vector<double> returns(rewards.size());
  double g = 0.0;
  for (std::size_t k = rewards.size(); k-- > 0;) {
    g = rewards[k] + gamma * g;
    returns[k] = g;
  }
  return returns;
}

// --- TrainedPolicy ----------------------------------------------------------

TrainedPolicy::TrainedPolicy(std::unique_ptr<QRegressor> regressor, Algorithm algorithm,
                             double gamma, double epsilon, CandidateParams candidates,
                             double cost_floor)
    : regressor_(std::move(regressor)),
      algorithm_(algorithm),
      gamma_(gamma),
      epsilon_(epsilon),
      candidates_(candidates),
      cost_floor_(cost_floor) {
  if (!regressor_) throw ContractViolation("TrainedPolicy requires a regressor");
  check_gamma(gamma);
  if (!(epsilon >= 0.0 && epsilon <= 1.0)) throw DomainError("epsilon must lie in [0, 1]");
}

TrainedPolicy::TrainedPolicy(const TrainedPolicy& other)
    : regressor_(other.regressor_->clone()),
      algorithm_(other.algorithm_),
      gamma_(other.gamma_),
      epsilon_(other.epsilon_),
      candidates_(other.candidates_),
      cost_floor_(other.cost_floor_) {}

TrainedPolicy& TrainedPolicy::operator=(const TrainedPolicy& other) {
  if (this != &other) *this = TrainedPolicy(other);
  return *this;
}

double TrainedPolicy::predict_q(const SlateState& state, const Item& item) const {
  if (!regressor_->fitted()) throw StateError("predict_q: policy regressor is not fitted");
  const double q = regressor_->predict(featurize(state, item, cost_floor_));
  if (!std::isfinite(q)) throw StateError("predict_q: non-finite prediction");
  return q;
}

void TrainedPolicy::q_values(const SlateState& state, const ItemCatalog& catalog,
                             std::span<const ItemId> candidates, std::vector<double>& out) const {
  if (!regressor_->fitted()) throw StateError("q_values: policy regressor is not fitted");
  FeatureMatrix x;
  x.reserve(candidates.size());
  for (ItemId id : candidates) x.append(featurize(state, catalog.item(id), cost_floor_));
  out.resize(candidates.size());
  regressor_->predict(x, out);
}

std::optional<ItemId> TrainedPolicy::act(const SlateState& state, const ItemCatalog& catalog,
                                         double epsilon, RngStream& rng) const {
  const auto cands =
      candidate_actions(state, catalog, candidates_.top_m, candidates_.random_r, rng);
  if (cands.empty()) return std::nullopt;
  std::vector<double> q;
  q_values(state, catalog, cands, q);
  return epsilon_greedy_select(q, cands, epsilon, rng);
}

SlatePolicy TrainedPolicy::as_slate_policy(const ItemCatalog& catalog, double epsilon,
                                           RngStream& rng) const {
  return [this, &catalog, epsilon, &rng](const SlateState& state) {
    return act(state, catalog, epsilon, rng);
  };
}

json TrainedPolicy::to_json() const {
  return json{{"format", "slatesim-policy"},
              {"version", 1},
              {"algorithm", std::string(to_string(algorithm_))},
              {"gamma", gamma_},
              {"epsilon", epsilon_},
              {"top_m", candidates_.top_m},
              {"random_r", candidates_.random_r},
              {"cost_floor", cost_floor_},
              {"feature_order",
               {"budget_remaining", "slot", "survival", "prefix_cost", "sigma", "cost",
                "conditional_beta", "utility_per_second"}},
              {"regressor", regressor_->to_json()}};
}

TrainedPolicy TrainedPolicy::from_json(const json& doc) {
  try {
    if (doc.at("format").get<std::string>() != "slatesim-policy") {
      throw ParseError("policy model: unexpected format tag");
    }
    if (doc.at("version").get<int>() != 1) throw ParseError("policy model: unsupported version");
    return TrainedPolicy(regressor_from_json(doc.at("regressor")),
                         parse_algorithm(doc.at("algorithm").get<std::string>()),
                         doc.at("gamma").get<double>(), doc.at("epsilon").get<double>(),
                         CandidateParams{doc.at("top_m").get<int>(), doc.at("random_r").get<int>()},
                         doc.at("cost_floor").get<double>());
  } catch (const json::exception& e) {
    throw ParseError(std::string("policy model: ") + e.what());
  }
}

void TrainedPolicy::save(const std::filesystem::path& path) const {
  std::ofstream out(path);
  if (!out) throw ParseError("cannot write model file " + path.string());
  out << to_json().dump() << '\n';
}

TrainedPolicy TrainedPolicy::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open model file " + path.string());
  const auto doc = json::parse(in, nullptr, false);
  if (doc.is_discarded()) throw ParseError("model file " + path.string() + " is not valid JSON");
  return from_json(doc);
}

// --- training ---------------------------------------------------------------

TrainConfig train_config(const RunConfig& cfg, Algorithm algorithm, double gamma) {
  TrainConfig t;
  t.algorithm = algorithm;
  t.gamma = gamma;
  t.epsilon = cfg.epsilon;
  t.iterations = cfg.iterations;
  t.num_users = cfg.num_users;
  t.users_per_iteration = cfg.users_per_iteration;
  t.episodes_per_user = cfg.episodes_per_user;
  t.carry_budget = cfg.carry_budget;
  t.env = env_options(cfg);
  t.candidates = CandidateParams{cfg.top_m, cfg.random_r};
  t.regressor = cfg.regressor;
  t.gbrt = cfg.gbrt;
  t.ridge_lambda = cfg.ridge_lambda;
  t.diagnostic_eval_episodes = cfg.diagnostic_eval_episodes;
  t.cost_floor = cfg.cost_floor;
  t.resample_costs_per_user = cfg.resample_costs_per_user;
  t.cost_dist = CostDistribution{cfg.cost_low, cfg.cost_high};
  return t;
}

ItemCatalog resample_catalog_costs(const ItemCatalog& catalog, const CostDistribution& cost_dist,
                                   double cost_floor, RngStream& rng) {
  return catalog.with_costs(sample_costs(catalog.size(), cost_dist, rng, cost_floor));
}

namespace {

std::unique_ptr<QRegressor> fresh_regressor(const TrainConfig& cfg) {
  switch (cfg.regressor) {
    case RegressorKind::kGradientBoostedTrees:
      return std::make_unique<GradientBoostedTrees>(cfg.gbrt);
    case RegressorKind::kRidge:
      return std::make_unique<RidgeRegressor>(cfg.ridge_lambda);
    case RegressorKind::kLookupTable:
      return std::make_unique<LookupTableRegressor>();
  }
  throw ConfigError("unknown regressor kind");
}

// Accumulated transitions. Row i describes (s_k, a_k) of some episode; the
// next-state candidate ids (for the Q-Learning max) live in a flat array.
struct TransitionBuffer {
  FeatureMatrix x;
  std::vector<double> reward;
  std::vector<double> mc_return;
  std::vector<char> terminal;  // no further step in the episode
  std::vector<std::size_t> next_begin;
  std::vector<std::size_t> next_end;
  std::vector<ItemId> next_candidates;
  std::vector<const ItemCatalog*> catalog;

  std::size_t size() const { return reward.size(); }
};

// Per-step record kept while an episode is running.
struct StepRecord {
  QFeatures features;
  std::vector<ItemId> candidates;
};

class EpisodeRecorder {
 public:
  EpisodeRecorder(const ItemCatalog& catalog, const TrainConfig& cfg, const QRegressor* model,
                  double epsilon, RngStream& rng)
      : catalog_(catalog), cfg_(cfg), model_(model), epsilon_(epsilon), rng_(rng) {}

  std::optional<ItemId> operator()(const SlateState& state) {
    auto cands = candidate_actions(state, catalog_, cfg_.candidates.top_m,
                                   cfg_.candidates.random_r, rng_);
    if (cands.empty()) return std::nullopt;
    scratch_.clear();
    for (ItemId id : cands) scratch_.append(featurize(state, catalog_.item(id), cfg_.cost_floor));
    q_.assign(cands.size(), 0.0);
    double eps = 1.0;
    if (model_ != nullptr) {
      model_->predict(scratch_, q_);
      eps = epsilon_;
    }
    const ItemId pick = epsilon_greedy_select(q_, cands, eps, rng_);
    const auto pos = static_cast<std::size_t>(
        std::find(cands.begin(), cands.end(), pick) - cands.begin());
    StepRecord rec;
    std::copy(scratch_.row(pos).begin(), scratch_.row(pos).end(), rec.features.begin());
    rec.candidates = std::move(cands);
    steps_.push_back(std::move(rec));
    return pick;
  }

  std::vector<StepRecord>& steps() { return steps_; }

 private:
  const ItemCatalog& catalog_;
  const TrainConfig& cfg_;
  const QRegressor* model_;
  double epsilon_;
  RngStream& rng_;
  FeatureMatrix scratch_;
  std::vector<double> q_;
  std::vector<StepRecord> steps_;
};

void append_episode(TransitionBuffer& buf, std::vector<StepRecord>& steps, const EpisodeLog& log,
                    double gamma, const ItemCatalog* catalog) {
  const std::size_t n = log.actions.size();
  std::vector<double> rewards(log.rewards.begin(), log.rewards.end());
  const auto returns = monte_carlo_returns(rewards, gamma);
  for (std::size_t k = 0; k < n; ++k) {
    buf.x.append(steps[k].features);
    buf.reward.push_back(rewards[k]);
    buf.mc_return.push_back(returns[k]);
    const bool last = (k + 1 == n);
    buf.terminal.push_back(last ? 1 : 0);
    buf.next_begin.push_back(buf.next_candidates.size());
    if (!last) {
      buf.next_candidates.insert(buf.next_candidates.end(), steps[k + 1].candidates.begin(),
                                 steps[k + 1].candidates.end());
    }
    buf.next_end.push_back(buf.next_candidates.size());
    buf.catalog.push_back(catalog);
  }
}

// max_a Q(s_{i+1}, a) over the stored next-state candidates, for every
// non-terminal row. Candidate rows are featurised and predicted in chunks.
std::vector<double> next_state_max(const TransitionBuffer& buf, const QRegressor& model,
                                   double cost_floor) {
  constexpr std::size_t kChunk = 8192;
  const std::size_t n = buf.size();
  std::vector<double> best(n, 0.0);
  FeatureMatrix x;
  x.reserve(kChunk + 64);
  std::vector<double> pred;
  std::vector<std::size_t> owner;
  auto flush = [&] {
    if (x.empty()) return;
    pred.resize(x.rows());
    model.predict(x, pred);
    for (std::size_t r = 0; r < x.rows(); ++r) {
      best[owner[r]] = std::max(best[owner[r]], pred[r]);
    }
    x.clear();
    owner.clear();
  };
  for (std::size_t i = 0; i < n; ++i) {
    if (buf.terminal[i]) continue;
    best[i] = -std::numeric_limits<double>::infinity();
    // The next row holds s_{i+1}'s state columns.
    const auto next = buf.x.row(i + 1);
    SlateState s;
    s.budget_remaining = next[0];
    s.slot = static_cast<int>(next[1]);
    s.survival = next[2];
    s.prefix_cost = next[3];
    for (std::size_t c = buf.next_begin[i]; c < buf.next_end[i]; ++c) {
      x.append(featurize(s, buf.catalog[i]->item(buf.next_candidates[c]), cost_floor));
      owner.push_back(i);
    }
    if (x.rows() >= kChunk) flush();
  }
  flush();
  return best;
}

double greedy_play_rate(const TrainedPolicy& policy, const ItemCatalog& catalog,
                        const BudgetDistribution& budget_dist, const TrainConfig& cfg,
                        int episodes, RngStream& rng) {
  const auto logs = rollout_episodes(policy, catalog, budget_dist, cfg.env, episodes, 0.0, rng,
                                     cfg.resample_costs_per_user, cfg.cost_dist);
  double clicks = 0.0;
  for (const auto& log : logs) clicks += log.total_reward();
  return clicks / static_cast<double>(episodes);
}

}  // namespace

TrainResult train(const ItemCatalog& catalog, const BudgetDistribution& budget_dist,
                  const TrainConfig& cfg, RngStream& rng) {
  if (cfg.iterations < 1) throw ConfigError("train: iterations must be >= 1");
  if (cfg.num_users < 1 || cfg.episodes_per_user < 1) {
    throw ConfigError("train: num_users and episodes_per_user must be >= 1");
  }
  if (cfg.users_per_iteration < 0) throw ConfigError("train: users_per_iteration must be >= 0");
  check_gamma(cfg.gamma);
  if (!(cfg.epsilon >= 0.0 && cfg.epsilon <= 1.0)) throw ConfigError("train: epsilon outside [0, 1]");
  if (catalog.empty()) throw TrainingError("train: empty catalog");
  validate(budget_dist);

  const auto n_users = static_cast<std::size_t>(cfg.num_users);
  RngStream user_rng = rng.split("users");
  std::vector<double> user_budget(n_users);
  for (auto& b : user_budget) b = sample_initial_budget(budget_dist, user_rng);
  std::vector<ItemCatalog> user_catalogs;
  if (cfg.resample_costs_per_user) {
    user_catalogs.reserve(n_users);
    for (std::size_t u = 0; u < n_users; ++u) {
      RngStream cost_rng = rng.split("user-costs", u);
      user_catalogs.push_back(resample_catalog_costs(catalog, cfg.cost_dist, cfg.cost_floor, cost_rng));
    }
  }
  auto catalog_for = [&](std::size_t user) -> const ItemCatalog& {
    return cfg.resample_costs_per_user ? user_catalogs[user] : catalog;
  };

  const std::size_t per_iteration =
      cfg.users_per_iteration == 0 ? n_users
                                   : std::min(n_users, static_cast<std::size_t>(cfg.users_per_iteration));

  TransitionBuffer buf;
  std::unique_ptr<QRegressor> model;
  std::vector<IterationDiagnostics> diagnostics;
  std::size_t next_user = 0;

  for (int it = 0; it < cfg.iterations; ++it) {
    RngStream it_rng = rng.split("iteration", static_cast<std::uint64_t>(it));
    for (std::size_t j = 0; j < per_iteration; ++j) {
      const std::size_t user = next_user;
      next_user = (next_user + 1) % n_users;
      const ItemCatalog& cat = catalog_for(user);
      double budget = user_budget[user];
      for (int t = 0; t < cfg.episodes_per_user; ++t) {
        RngStream ep_rng = it_rng.split("episode", j * static_cast<std::size_t>(cfg.episodes_per_user) +
                                                        static_cast<std::size_t>(t));
        RngStream policy_rng = ep_rng.split("policy");
        RngStream env_rng = ep_rng.split("env");
        if (!(budget > 0.0)) break;
        EpisodeRecorder recorder(cat, cfg, model.get(), cfg.epsilon, policy_rng);
        const EpisodeLog log =
            rollout_slate(std::ref(recorder), budget, cat, cfg.env, env_rng,
                          static_cast<std::int64_t>(user));
        append_episode(buf, recorder.steps(), log, cfg.gamma, &cat);
        if (cfg.carry_budget) budget = log.budget_path.back();
      }
    }
    if (buf.size() == 0) throw TrainingError("train: no transitions collected");

    const std::size_t n = buf.size();
    std::vector<double> current(n, 0.0);
    if (model) model->predict(buf.x, current);

    std::vector<double> targets(n);
    switch (cfg.algorithm) {
      case Algorithm::kMonteCarlo:
        targets = buf.mc_return;
        break;
      case Algorithm::kSarsa:
        for (std::size_t i = 0; i < n; ++i) {
          const bool term = buf.terminal[i] != 0;
          targets[i] = sarsa_target(buf.reward[i], cfg.gamma, term ? 0.0 : current[i + 1], term);
        }
        break;
      case Algorithm::kQLearning: {
        std::vector<double> best(n, 0.0);
        // With gamma 0 the bootstrap term vanishes, so the max is never needed.
        if (model && cfg.gamma > 0.0) best = next_state_max(buf, *model, cfg.cost_floor);
        for (std::size_t i = 0; i < n; ++i) {
          targets[i] = qlearning_target(buf.reward[i], cfg.gamma, best[i], buf.terminal[i] != 0);
        }
        break;
      }
    }

    IterationDiagnostics diag;
    diag.iteration = it;
    diag.samples = n;
    double sum_t = 0.0;
    double sum_sq = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      sum_t += targets[i];
      const double r = targets[i] - current[i];
      sum_sq += r * r;
    }
    diag.mean_target = sum_t / static_cast<double>(n);
    diag.td_mse = sum_sq / static_cast<double>(n);

    model = fresh_regressor(cfg);
    model->fit(buf.x, targets);

    if (cfg.diagnostic_eval_episodes > 0) {
      TrainedPolicy snapshot(model->clone(), cfg.algorithm, cfg.gamma, cfg.epsilon, cfg.candidates,
                             cfg.cost_floor);
      RngStream diag_rng = rng.split("diagnostic", static_cast<std::uint64_t>(it));
      diag.eval_play_rate = greedy_play_rate(snapshot, catalog, budget_dist, cfg,
                                             cfg.diagnostic_eval_episodes, diag_rng);
    } else {
      diag.eval_play_rate = std::numeric_limits<double>::quiet_NaN();
    }
    diagnostics.push_back(diag);
  }

  return TrainResult{TrainedPolicy(std::move(model), cfg.algorithm, cfg.gamma, cfg.epsilon,
                                   cfg.candidates, cfg.cost_floor),
                     std::move(diagnostics)};
}

std::vector<EpisodeLog> rollout_episodes(const TrainedPolicy& policy, const ItemCatalog& catalog,
                                         const BudgetDistribution& budget_dist,
                                         const EnvOptions& env, int episodes, double epsilon,
                                         RngStream& rng, bool resample_costs_per_user,
                                         const CostDistribution& cost_dist) {
  std::vector<EpisodeLog> logs;
  logs.reserve(static_cast<std::size_t>(std::max(episodes, 0)));
  for (int e = 0; e < episodes; ++e) {
    RngStream ep_rng = rng.split("episode", static_cast<std::uint64_t>(e));
    RngStream budget_rng = ep_rng.split("budget");
    RngStream policy_rng = ep_rng.split("policy");
    RngStream env_rng = ep_rng.split("env");
    const double u0 = sample_initial_budget(budget_dist, budget_rng);
    if (resample_costs_per_user) {
      RngStream cost_rng = ep_rng.split("costs");
      const ItemCatalog own = resample_catalog_costs(catalog, cost_dist, policy.cost_floor(), cost_rng);
      logs.push_back(rollout_slate(policy.as_slate_policy(own, epsilon, policy_rng), u0, own, env,
                                   env_rng, e));
    } else {
      logs.push_back(rollout_slate(policy.as_slate_policy(catalog, epsilon, policy_rng), u0,
                                   catalog, env, env_rng, e));
    }
  }
  return logs;
}

void write_diagnostics_csv(std::ostream& out, std::span<const IterationDiagnostics> diagnostics) {
  out << "iteration,mean_target,td_mse,eval_play_rate\n";
  for (const auto& d : diagnostics) {
    out << d.iteration << ',' << format_double(d.mean_target) << ',' << format_double(d.td_mse)
        << ',' << format_double(d.eval_play_rate) << '\n';
  }
}

}  // namespace slatesim
