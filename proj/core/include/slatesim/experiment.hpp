#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "slatesim/config.hpp"
#include "slatesim/env.hpp"

namespace slatesim {

// Mean clicks per slate. Throws DomainError on an empty span.
double play_rate(std::span<const EpisodeLog> logs);

// Length of the longest prefix whose every slot was affordable against the
// budget remaining when it was examined.
int effective_slate_size(const EpisodeLog& log);
double mean_effective_slate_size(std::span<const EpisodeLog> logs);

// Fraction of episodes without a click. Throws DomainError on an empty span.
double abandon_rate(std::span<const EpisodeLog> logs);

struct SweepCell {
  Algorithm algorithm = Algorithm::kQLearning;
  double gamma = 0.0;
  double budget_loc = 0.0;
  std::uint64_t seed = 0;

  friend bool operator==(const SweepCell&, const SweepCell&) = default;
};

struct SweepConfig {
  RunConfig run;
  std::vector<Algorithm> algorithms;
  std::vector<double> gammas;
  std::vector<double> budget_locs;
  std::vector<std::uint64_t> seeds;
};

// Grids from a RunConfig: gamma 0 is prepended when include_bandit is set.
SweepConfig sweep_config(const RunConfig& cfg);
void validate(const SweepConfig& cfg);
// Cells in export order: (algorithm, gamma, budget_loc, seed) ascending.
std::vector<SweepCell> sweep_cells(const SweepConfig& cfg);

struct SweepRow {
  SweepCell cell;
  double play_rate = 0.0;
  double effective_slate_size = 0.0;
  double abandon_rate = 0.0;
  int episodes = 0;
  double wall_time_s = 0.0;
  std::string error;  // empty unless the cell failed; metrics are NaN then

  bool ok() const { return error.empty(); }
};

struct SweepResult {
  std::vector<SweepRow> rows;
};

// Trains a fresh policy for the cell and evaluates it greedily on
// `eval_episodes` fresh users. The catalog, training and evaluation streams
// depend only on the master seed and the cell seed, so cells that share a
// seed see the same catalog and users.
SweepRow run_cell(const RunConfig& cfg, const SweepCell& cell,
                  std::vector<EpisodeLog>* episodes = nullptr);

// Called once per successful cell with its evaluation episodes. Calls are
// serialised but arrive in completion order.
using EpisodeSink = std::function<void(const SweepCell&, std::span<const EpisodeLog>)>;

// Cells run on `workers` threads; failures become error rows. The result is
// identical for any worker count.
SweepResult run_sweep(const SweepConfig& cfg, int workers = 1, const EpisodeSink& sink = {});

void write_results_csv(std::ostream& out, const SweepResult& result);
SweepResult read_results_csv(std::istream& in);

struct DeltaRow {
  Algorithm algorithm = Algorithm::kQLearning;
  double budget_loc = 0.0;
  std::string metric;
  std::size_t pairs = 0;
  double delta = 0.0;     // mean over seeds of metric(gamma_b) - metric(gamma_a)
  double ci_lower = 0.0;  // paired-seed bootstrap, 95 %
  double ci_upper = 0.0;
  double sign_p = 0.0;    // NaN when fewer than 5 pairs or all pairs tie
};

// Per (algorithm, budget_loc) deltas for play_rate and effective_slate_size.
// Throws DomainError when either gamma is absent from the result.
std::vector<DeltaRow> delta_report(const SweepResult& result, double gamma_a, double gamma_b,
                                   std::uint64_t bootstrap_seed = 0);
void write_delta_csv(std::ostream& out, std::span<const DeltaRow> rows);

}  // namespace slatesim
