#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <memory>
#include <optional>
#include <span>
#include <vector>

#include "json.hpp"
#include "slatesim/catalog.hpp"
#include "slatesim/config.hpp"
#include "slatesim/env.hpp"
#include "slatesim/features.hpp"
#include "slatesim/regressor.hpp"
#include "slatesim/rng.hpp"

namespace slatesim {

struct CandidateParams {
  int top_m = 50;
  int random_r = 10;
};

// Top `top_m` affordable items by sigma/cost followed by `random_r` affordable
// items drawn uniformly without replacement from the rest. The prefix is
// excluded. Empty when nothing is affordable.
std::vector<ItemId> candidate_actions(const SlateState& state, const ItemCatalog& catalog,
                                      int top_m, int random_r, RngStream& rng);

// Argmax with probability 1 - epsilon (ties to the lowest id), otherwise a
// uniform candidate. Always consumes exactly one uniform draw, plus one index
// draw when exploring.
ItemId epsilon_greedy_select(std::span<const double> q_values, std::span<const ItemId> candidates,
                             double epsilon, RngStream& rng);

double sarsa_target(double reward, double gamma, double q_next_taken, bool terminal);
double qlearning_target(double reward, double gamma, double q_next_max, bool terminal);
// Empty `q_next` means the next state has no candidates and is terminal.
double qlearning_target(double reward, double gamma, std::span<const double> q_next);

// G_k = r_k + gamma * G_{k+1}, G_n = 0.
std::vector<double> monte_carlo_returns(std::span<const double> rewards, double gamma);

// Fitted Q model plus the exploration settings it was trained with.
// Immutable after construction; safe to share between threads.
class TrainedPolicy {
 public:
  TrainedPolicy(std::unique_ptr<QRegressor> regressor, Algorithm algorithm, double gamma,
                double epsilon, CandidateParams candidates, double cost_floor = kDefaultCostFloor);
  TrainedPolicy(const TrainedPolicy& other);
  TrainedPolicy& operator=(const TrainedPolicy& other);
  TrainedPolicy(TrainedPolicy&&) noexcept = default;
  TrainedPolicy& operator=(TrainedPolicy&&) noexcept = default;

  Algorithm algorithm() const { return algorithm_; }
  double gamma() const { return gamma_; }
  double epsilon() const { return epsilon_; }
  const CandidateParams& candidate_params() const { return candidates_; }
  double cost_floor() const { return cost_floor_; }
  const QRegressor& regressor() const { return *regressor_; }

  // Throws StateError if the regressor is not fitted.
  double predict_q(const SlateState& state, const Item& item) const;
  void q_values(const SlateState& state, const ItemCatalog& catalog,
                std::span<const ItemId> candidates, std::vector<double>& out) const;

  // Candidate generation plus epsilon-greedy choice; nullopt when nothing
  // is affordable.
  std::optional<ItemId> act(const SlateState& state, const ItemCatalog& catalog, double epsilon,
                            RngStream& rng) const;

  // Wraps act() for rollout_slate. The policy and `rng` must outlive it.
  SlatePolicy as_slate_policy(const ItemCatalog& catalog, double epsilon, RngStream& rng) const;

  nlohmann::json to_json() const;
  static TrainedPolicy from_json(const nlohmann::json& doc);
  void save(const std::filesystem::path& path) const;
  static TrainedPolicy load(const std::filesystem::path& path);

 private:
  std::unique_ptr<QRegressor> regressor_;
  Algorithm algorithm_;
  double gamma_;
  double epsilon_;
  CandidateParams candidates_;
  double cost_floor_;
};

struct TrainConfig {
  Algorithm algorithm = Algorithm::kQLearning;
  double gamma = 0.8;
  double epsilon = 0.1;
  int iterations = 20;
  int num_users = 150;
  // Users simulated per iteration, taken round-robin from the population;
  // 0 means every user every iteration.
  int users_per_iteration = 20;
  int episodes_per_user = 1;
  bool carry_budget = false;
  EnvOptions env;
  CandidateParams candidates;
  RegressorKind regressor = RegressorKind::kGradientBoostedTrees;
  GbrtParams gbrt;
  double ridge_lambda = 1e-3;
  int diagnostic_eval_episodes = 20;
  double cost_floor = kDefaultCostFloor;
  // Open question switch: draw a private cost vector per user.
  bool resample_costs_per_user = false;
  CostDistribution cost_dist;
};

TrainConfig train_config(const RunConfig& cfg, Algorithm algorithm, double gamma);

struct IterationDiagnostics {
  int iteration = 0;
  double mean_target = 0.0;
  double td_mse = 0.0;
  double eval_play_rate = 0.0;  // NaN when diagnostic evaluation is disabled
  std::size_t samples = 0;

  friend bool operator==(const IterationDiagnostics&, const IterationDiagnostics&) = default;
};

struct TrainResult {
  TrainedPolicy policy;
  std::vector<IterationDiagnostics> diagnostics;
};

// Fitted value iteration. Iteration 0 explores uniformly over candidates;
// later iterations follow epsilon-greedy on the previous fit. Every
// iteration recomputes targets for all accumulated transitions with the
// current model and refits a fresh regressor on them.
TrainResult train(const ItemCatalog& catalog, const BudgetDistribution& budget_dist,
                  const TrainConfig& cfg, RngStream& rng);

// Runs `episodes` fresh users (budget drawn per episode) under `policy`.
// Episode e uses rng.split("episode", e).
std::vector<EpisodeLog> rollout_episodes(const TrainedPolicy& policy, const ItemCatalog& catalog,
                                         const BudgetDistribution& budget_dist,
                                         const EnvOptions& env, int episodes, double epsilon,
                                         RngStream& rng, bool resample_costs_per_user = false,
                                         const CostDistribution& cost_dist = {});

// Catalog with a cost vector private to the stream (same sigmas).
ItemCatalog resample_catalog_costs(const ItemCatalog& catalog, const CostDistribution& cost_dist,
                                   double cost_floor, RngStream& rng);

void write_diagnostics_csv(std::ostream& out, std::span<const IterationDiagnostics> diagnostics);

}  // namespace slatesim
