#include "slatesim/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <istream>
#include <limits>
#include <map>
#include <mutex>
#include <ostream>
#include <sstream>
#include <thread>
#include <tuple>

#include "slatesim/agents.hpp"
#include "slatesim/catalog.hpp"
#include "slatesim/error.hpp"
#include "slatesim/rng.hpp"
#include "slatesim/stats.hpp"

namespace slatesim {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

bool same_gamma(double a, double b) { return std::abs(a - b) <= 1e-9; }

std::string fmt9(double v) {
  if (std::isnan(v)) return "nan";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

auto cell_key(const SweepCell& c) {
  return std::make_tuple(static_cast<int>(c.algorithm), c.gamma, c.budget_loc, c.seed);
}

}  // namespace

double play_rate(std::span<const EpisodeLog> logs) {
  if (logs.empty()) throw DomainError("play_rate: no episodes");
  double total = 0.0;
  for (const auto& log : logs) total += log.total_reward();
  return total / static_cast<double>(logs.size());
}

int effective_slate_size(const EpisodeLog& log) {
  int count = 0;
  for (std::size_t j = 0; j < log.costs.size(); ++j) {
    if (j >= log.budget_path.size() || log.costs[j] > log.budget_path[j]) break;
    ++count;
  }
  return count;
}

double mean_effective_slate_size(std::span<const EpisodeLog> logs) {
  if (logs.empty()) throw DomainError("effective_slate_size: no episodes");
  double total = 0.0;
  for (const auto& log : logs) total += effective_slate_size(log);
  return total / static_cast<double>(logs.size());
}

double abandon_rate(std::span<const EpisodeLog> logs) {
  if (logs.empty()) throw DomainError("abandon_rate: no episodes");
  std::size_t abandoned = 0;
  for (const auto& log : logs) {
    if (log.total_reward() == 0) ++abandoned;
  }
  return static_cast<double>(abandoned) / static_cast<double>(logs.size());
}

SweepConfig sweep_config(const RunConfig& cfg) {
  SweepConfig s;
  s.run = cfg;
  s.algorithms = cfg.algorithms;
  if (cfg.include_bandit) s.gammas.push_back(0.0);
  for (double g : cfg.discount_factor) {
    if (!(cfg.include_bandit && same_gamma(g, 0.0))) s.gammas.push_back(g);
  }
  s.budget_locs = cfg.user_budget;
  s.seeds = cfg.seeds;
  return s;
}

void validate(const SweepConfig& cfg) {
  validate(cfg.run);
  if (cfg.algorithms.empty()) throw ConfigError("algorithms: grid is empty");
  if (cfg.gammas.empty()) throw ConfigError("discount_factor: grid is empty");
  if (cfg.budget_locs.empty()) throw ConfigError("user_budget: grid is empty");
  if (cfg.seeds.empty()) throw ConfigError("seeds: list is empty");
  for (double g : cfg.gammas) {
    if (!(g >= 0.0 && g <= 1.0)) throw ConfigError("discount_factor: values must lie in [0, 1]");
  }
  for (double b : cfg.budget_locs) {
    if (!(b > 0.0) || !std::isfinite(b)) throw ConfigError("user_budget: values must be > 0");
  }
  auto seeds = cfg.seeds;
  std::sort(seeds.begin(), seeds.end());
  if (std::adjacent_find(seeds.begin(), seeds.end()) != seeds.end()) {
    throw ConfigError("seeds: values must be unique");
  }
}

std::vector<SweepCell> sweep_cells(const SweepConfig& cfg) {
  std::vector<SweepCell> cells;
  cells.reserve(cfg.algorithms.size() * cfg.gammas.size() * cfg.budget_locs.size() *
                cfg.seeds.size());
  for (Algorithm a : cfg.algorithms) {
    for (double g : cfg.gammas) {
      for (double b : cfg.budget_locs) {
        for (std::uint64_t s : cfg.seeds) cells.push_back({a, g, b, s});
      }
    }
  }
  std::sort(cells.begin(), cells.end(),
            [](const SweepCell& x, const SweepCell& y) { return cell_key(x) < cell_key(y); });
  cells.erase(std::unique(cells.begin(), cells.end()), cells.end());
  return cells;
}

SweepRow run_cell(const RunConfig& cfg, const SweepCell& cell, std::vector<EpisodeLog>* episodes) {
  const auto start = std::chrono::steady_clock::now();
  SweepRow row;
  row.cell = cell;

  const CostDistribution cost_dist{cfg.cost_low, cfg.cost_high};
  const BudgetDistribution budget_dist{cell.budget_loc, cfg.user_budget_scale};
  validate(cost_dist);
  validate(budget_dist);

  RngStream catalog_rng = derive_stream(cfg.master_seed, "catalog", cell.seed);
  const ItemCatalog catalog = generate_synthetic_catalog(
      static_cast<std::size_t>(cfg.num_items), {cfg.relevance_alpha, cfg.relevance_beta},
      cost_dist, catalog_rng, cfg.cost_floor);

  RngStream train_rng = derive_stream(cfg.master_seed, "train", cell.seed);
  const TrainConfig tc = train_config(cfg, cell.algorithm, cell.gamma);
  TrainResult trained = train(catalog, budget_dist, tc, train_rng);

  RngStream eval_rng = derive_stream(cfg.master_seed, "eval", cell.seed);
  std::vector<EpisodeLog> logs =
      rollout_episodes(trained.policy, catalog, budget_dist, tc.env, cfg.eval_episodes, 0.0,
                       eval_rng, cfg.resample_costs_per_user, cost_dist);

  row.play_rate = play_rate(logs);
  row.effective_slate_size = mean_effective_slate_size(logs);
  row.abandon_rate = abandon_rate(logs);
  row.episodes = static_cast<int>(logs.size());
  if (cfg.record_timing) {
    row.wall_time_s =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  }
  if (episodes) *episodes = std::move(logs);
  return row;
}

SweepResult run_sweep(const SweepConfig& cfg, int workers, const EpisodeSink& sink) {
  validate(cfg);
  if (workers < 1) throw ConfigError("workers: must be >= 1");
  const std::vector<SweepCell> cells = sweep_cells(cfg);
  SweepResult result;
  result.rows.resize(cells.size());

  std::atomic<std::size_t> next{0};
  std::mutex sink_mutex;
  auto work = [&] {
    std::vector<EpisodeLog> logs;
    for (std::size_t i = next++; i < cells.size(); i = next++) {
      SweepRow& row = result.rows[i];
      try {
        row = run_cell(cfg.run, cells[i], sink ? &logs : nullptr);
        if (sink) {
          std::lock_guard lock(sink_mutex);
          sink(cells[i], logs);
        }
      } catch (const std::exception& e) {
        row = SweepRow{};
        row.cell = cells[i];
        row.play_rate = row.effective_slate_size = row.abandon_rate = kNaN;
        row.error = e.what();
      }
    }
  };

  const auto n_threads = std::min<std::size_t>(static_cast<std::size_t>(workers), cells.size());
  if (n_threads <= 1) {
    work();
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(n_threads);
    for (std::size_t t = 0; t < n_threads; ++t) pool.emplace_back(work);
  }
  return result;
}

void write_results_csv(std::ostream& out, const SweepResult& result) {
  out << "algorithm,gamma,budget_loc,seed,play_rate,effective_slate_size,abandon_rate,episodes,"
         "wall_time_s\n";
  for (const auto& r : result.rows) {
    out << to_string(r.cell.algorithm) << ',' << fmt9(r.cell.gamma) << ','
        << fmt9(r.cell.budget_loc) << ',' << r.cell.seed << ',' << fmt9(r.play_rate) << ','
        << fmt9(r.effective_slate_size) << ',' << fmt9(r.abandon_rate) << ',' << r.episodes << ','
        << fmt9(r.wall_time_s) << '\n';
  }
}

SweepResult read_results_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw ParseError("results csv: missing header");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line !=
      "algorithm,gamma,budget_loc,seed,play_rate,effective_slate_size,abandon_rate,episodes,"
      "wall_time_s") {
    throw ParseError("results csv: unexpected header '" + line + "'");
  }
  SweepResult result;
  std::size_t row_no = 0;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    ++row_no;
    std::vector<std::string> f;
    std::stringstream ss(line);
    for (std::string cell; std::getline(ss, cell, ',');) f.push_back(cell);
    if (f.size() != 9) {
      throw ParseError("results csv row " + std::to_string(row_no) + ": expected 9 fields");
    }
    try {
      SweepRow r;
      r.cell.algorithm = parse_algorithm(f[0]);
      r.cell.gamma = std::stod(f[1]);
      r.cell.budget_loc = std::stod(f[2]);
      r.cell.seed = std::stoull(f[3]);
      r.play_rate = std::stod(f[4]);
      r.effective_slate_size = std::stod(f[5]);
      r.abandon_rate = std::stod(f[6]);
      r.episodes = std::stoi(f[7]);
      r.wall_time_s = std::stod(f[8]);
      if (std::isnan(r.play_rate)) r.error = "failed cell";
      result.rows.push_back(std::move(r));
    } catch (const std::exception& e) {
      throw ParseError("results csv row " + std::to_string(row_no) + ": " + e.what());
    }
  }
  return result;
}

std::vector<DeltaRow> delta_report(const SweepResult& result, double gamma_a, double gamma_b,
                                   std::uint64_t bootstrap_seed) {
  auto has_gamma = [&](double g) {
    return std::any_of(result.rows.begin(), result.rows.end(),
                       [&](const SweepRow& r) { return same_gamma(r.cell.gamma, g); });
  };
  if (!has_gamma(gamma_a)) throw DomainError("delta_report: gamma " + fmt9(gamma_a) + " not in results");
  if (!has_gamma(gamma_b)) throw DomainError("delta_report: gamma " + fmt9(gamma_b) + " not in results");

  // (algorithm, budget) -> seed -> row, for each gamma.
  using Group = std::map<std::pair<int, double>, std::map<std::uint64_t, const SweepRow*>>;
  Group at_a;
  Group at_b;
  for (const auto& r : result.rows) {
    if (!r.ok()) continue;
    const auto key = std::make_pair(static_cast<int>(r.cell.algorithm), r.cell.budget_loc);
    if (same_gamma(r.cell.gamma, gamma_a)) at_a[key][r.cell.seed] = &r;
    if (same_gamma(r.cell.gamma, gamma_b)) at_b[key][r.cell.seed] = &r;
  }

  std::vector<DeltaRow> out;
  const std::pair<const char*, double SweepRow::*> metrics[] = {
      {"play_rate", &SweepRow::play_rate},
      {"effective_slate_size", &SweepRow::effective_slate_size}};
  for (const auto& [key, seeds_a] : at_a) {
    auto it = at_b.find(key);
    if (it == at_b.end()) continue;
    for (const auto& [name, field] : metrics) {
      std::vector<double> va;
      std::vector<double> vb;
      std::vector<double> diff;
      for (const auto& [seed, ra] : seeds_a) {
        auto rb = it->second.find(seed);
        if (rb == it->second.end()) continue;
        va.push_back(ra->*field);
        vb.push_back(rb->second->*field);
        diff.push_back(vb.back() - va.back());
      }
      if (diff.empty()) continue;
      DeltaRow d;
      d.algorithm = static_cast<Algorithm>(key.first);
      d.budget_loc = key.second;
      d.metric = name;
      d.pairs = diff.size();
      RngStream boot = derive_stream(bootstrap_seed, "bootstrap",
                                     static_cast<std::uint64_t>(key.first) * 1000003u +
                                         static_cast<std::uint64_t>(key.second * 1000.0));
      const ConfidenceInterval ci = bootstrap_mean_ci(diff, boot);
      d.delta = ci.mean;
      d.ci_lower = ci.lower;
      d.ci_upper = ci.upper;
      try {
        d.sign_p = sign_test(vb, va);
      } catch (const Error&) {
        d.sign_p = kNaN;
      }
      out.push_back(std::move(d));
    }
  }
  return out;
}

void write_delta_csv(std::ostream& out, std::span<const DeltaRow> rows) {
  out << "algorithm,budget_loc,metric,pairs,delta,ci_lower,ci_upper,sign_p\n";
  for (const auto& d : rows) {
    out << to_string(d.algorithm) << ',' << fmt9(d.budget_loc) << ',' << d.metric << ','
        << d.pairs << ',' << fmt9(d.delta) << ',' << fmt9(d.ci_lower) << ',' << fmt9(d.ci_upper)
        << ',' << fmt9(d.sign_p) << '\n';
  }
}

}  // namespace slatesim
