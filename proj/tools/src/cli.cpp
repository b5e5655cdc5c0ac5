#include "slatesim/cli.hpp"

#include <algorithm>
#include <charconv>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>

#include "CLI11.hpp"
#include "slatesim/agents.hpp"
#include "slatesim/catalog.hpp"
#include "slatesim/config.hpp"
#include "slatesim/error.hpp"
#include "slatesim/experiment.hpp"
#include "slatesim/knapsack.hpp"
#include "slatesim/rng.hpp"

namespace slatesim::cli {

namespace {

namespace fs = std::filesystem;

// Raised for bad flag values discovered after CLI11 has parsed.
struct UsageError : Error {
  using Error::Error;
};

struct Common {
  std::optional<std::uint64_t> seed;
  std::string config;
  std::string out;
  std::map<std::string, std::string> overrides;
  std::map<std::string, CLI::Option*> override_opts;
};

void add_common(CLI::App& sub, Common& c, bool out_required) {
  sub.add_option("--seed", c.seed, "Master seed (overrides master_seed)");
  sub.add_option("--config", c.config, "Config file (JSON or key: value lines)")
      ->check(CLI::ExistingFile);
  auto* out = sub.add_option("--out", c.out, "Output path");
  if (out_required) out->required();
  for (const auto& key : config_keys()) {
    c.override_opts[key] =
        sub.add_option("--" + key, c.overrides[key], "Config override")->group("Config keys");
  }
}

RunConfig build_config(const Common& c) {
  RunConfig cfg;
  try {
    if (!c.config.empty()) cfg = load_config(c.config);
    apply_env_overrides(cfg);
  } catch (const ConfigError& e) {
    throw UsageError(e.what());
  }
  for (const auto& [key, opt] : c.override_opts) {
    if (opt->count() == 0) continue;
    try {
      apply_override(cfg, key, c.overrides.at(key));
    } catch (const ConfigError& e) {
      throw UsageError(std::string("--") + key + ": " + e.what());
    }
  }
  if (c.seed) cfg.master_seed = *c.seed;
  try {
    validate(cfg);
  } catch (const ConfigError& e) {
    throw UsageError(e.what());
  }
  return cfg;
}

std::string shortest(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

std::ofstream open_out(const fs::path& path) {
  if (path.has_parent_path() && !fs::exists(path.parent_path())) {
    throw Error("output directory does not exist: " + path.parent_path().string());
  }
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error("cannot open for writing: " + path.string());
  return f;
}

std::ifstream open_in(const fs::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw Error("cannot open: " + path.string());
  return f;
}

ItemCatalog catalog_for(const RunConfig& cfg, const std::string& path) {
  if (!path.empty()) return load_catalog(fs::path(path));
  RngStream rng = derive_stream(cfg.master_seed, "catalog", 0);
  return generate_synthetic_catalog(static_cast<std::size_t>(cfg.num_items),
                                    {cfg.relevance_alpha, cfg.relevance_beta},
                                    {cfg.cost_low, cfg.cost_high}, rng, cfg.cost_floor);
}

std::string cell_filename(const SweepCell& c) {
  std::ostringstream name;
  name << to_string(c.algorithm) << "_g" << shortest(c.gamma) << "_b" << shortest(c.budget_loc)
       << "_s" << c.seed << ".jsonl";
  return name.str();
}

}  // namespace

int run_command(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Budget-constrained slate recommendation simulator", "slatesim"};
  app.require_subcommand(1, 1);
  app.set_help_all_flag("--help-all", "Show help for every subcommand");

  Common gen_c;
  auto* gen = app.add_subcommand("gen-catalog", "Write a synthetic item catalog CSV");
  add_common(*gen, gen_c, true);

  Common train_c;
  std::string train_alg = "QLearning";
  double train_gamma = 0.8;
  std::optional<double> train_budget;
  std::string train_catalog;
  std::string train_diag;
  auto* train_cmd = app.add_subcommand("train", "Fit one policy and write the model JSON");
  add_common(*train_cmd, train_c, true);
  train_cmd->add_option("--algorithm", train_alg, "SARSA, QLearning or MonteCarlo")
      ->capture_default_str();
  train_cmd->add_option("--gamma", train_gamma, "Discount factor")->capture_default_str();
  train_cmd->add_option("--budget-loc", train_budget,
                        "Median user budget in seconds (default: first user_budget value)");
  train_cmd->add_option("--catalog", train_catalog, "Catalog CSV (default: synthetic)")
      ->check(CLI::ExistingFile);
  train_cmd->add_option("--diagnostics", train_diag,
                        "Diagnostics CSV path (default: printed to stdout)");

  Common sweep_c;
  int workers = 1;
  std::string episodes_dir;
  auto* sweep = app.add_subcommand("sweep", "Run the algorithm x gamma x budget x seed grid");
  add_common(*sweep, sweep_c, true);
  sweep->add_option("--workers", workers, "Parallel cells")->check(CLI::Range(1, 1024))
      ->capture_default_str();
  sweep->add_option("--episodes-dir", episodes_dir,
                    "Directory for per-cell JSON-lines evaluation episodes (created if absent)");

  Common oracle_c;
  std::string instance_path;
  std::string method = "auto";
  auto* oracle = app.add_subcommand("oracle", "Solve a knapsack instance JSON exactly");
  add_common(*oracle, oracle_c, false);
  oracle->add_option("--instance", instance_path, "Instance JSON")->required()
      ->check(CLI::ExistingFile);
  oracle->add_option("--method", method, "auto, bruteforce or dp")
      ->check(CLI::IsMember({"auto", "bruteforce", "dp"}))->capture_default_str();

  Common report_c;
  std::string results_path;
  double gamma_a = 0.2;
  double gamma_b = 0.8;
  auto* report = app.add_subcommand("report", "Delta table with bootstrap CIs and sign tests");
  add_common(*report, report_c, false);
  report->add_option("--results", results_path, "Results CSV from sweep")->required()
      ->check(CLI::ExistingFile);
  report->add_option("--gamma-a", gamma_a, "Baseline gamma")->capture_default_str();
  report->add_option("--gamma-b", gamma_b, "Compared gamma")->capture_default_str();

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n" << app.help();
    return kExitUsage;
  }

  try {
    if (gen->parsed()) {
      const RunConfig cfg = build_config(gen_c);
      const ItemCatalog catalog = catalog_for(cfg, "");
      auto f = open_out(gen_c.out);
      save_catalog(catalog, f);
      out << "wrote " << catalog.size() << " items to " << gen_c.out << '\n';
    } else if (train_cmd->parsed()) {
      const RunConfig cfg = build_config(train_c);
      Algorithm alg;
      try {
        alg = parse_algorithm(train_alg);
      } catch (const Error& e) {
        throw UsageError(std::string("--algorithm: ") + e.what());
      }
      if (!(train_gamma >= 0.0 && train_gamma <= 1.0)) throw UsageError("--gamma: must lie in [0, 1]");
      const ItemCatalog catalog = catalog_for(cfg, train_catalog);
      const BudgetDistribution budget{train_budget.value_or(cfg.user_budget.front()),
                                      cfg.user_budget_scale};
      RngStream rng = derive_stream(cfg.master_seed, "train", 0);
      const TrainResult result = train(catalog, budget, train_config(cfg, alg, train_gamma), rng);
      result.policy.save(train_c.out);
      if (train_diag.empty()) {
        write_diagnostics_csv(out, result.diagnostics);
      } else {
        auto f = open_out(train_diag);
        write_diagnostics_csv(f, result.diagnostics);
      }
    } else if (sweep->parsed()) {
      const RunConfig cfg = build_config(sweep_c);
      const SweepConfig sc = sweep_config(cfg);
      EpisodeSink sink;
      if (!episodes_dir.empty()) {
        fs::create_directories(episodes_dir);
        sink = [&](const SweepCell& cell, std::span<const EpisodeLog> logs) {
          auto f = open_out(fs::path(episodes_dir) / cell_filename(cell));
          for (const auto& log : logs) write_episode_jsonl(f, log);
        };
      }
      const SweepResult result = run_sweep(sc, workers, sink);
      auto f = open_out(sweep_c.out);
      write_results_csv(f, result);
      std::size_t failed = 0;
      for (const auto& row : result.rows) {
        if (row.ok()) continue;
        ++failed;
        err << "cell " << to_string(row.cell.algorithm) << " gamma=" << shortest(row.cell.gamma)
            << " budget=" << shortest(row.cell.budget_loc) << " seed=" << row.cell.seed
            << " failed: " << row.error << '\n';
      }
      out << "wrote " << result.rows.size() << " rows to " << sweep_c.out;
      if (failed) out << " (" << failed << " failed)";
      out << '\n';
    } else if (oracle->parsed()) {
      const RunConfig cfg = build_config(oracle_c);
      auto in = open_in(instance_path);
      nlohmann::json doc;
      try {
        doc = nlohmann::json::parse(in);
      } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("instance: ") + e.what());
      }
      const KnapsackInstance inst = knapsack_instance_from_json(doc);
      const bool brute = method == "bruteforce" ||
                         (method == "auto" && inst.utilities.size() <= kBruteForceMaxItems);
      const KnapsackSolution sol =
          brute ? solve_bruteforce(inst)
                : solve_dp(inst, cfg.resolution, cfg.dp_table_cap);
      out << "S={";
      for (std::size_t i = 0; i < sol.selected.size(); ++i) {
        out << (i ? "," : "") << sol.selected[i];
      }
      out << "}, utility " << shortest(sol.total_utility) << ", cost " << shortest(sol.total_cost)
          << '\n';
      if (!oracle_c.out.empty()) {
        auto f = open_out(oracle_c.out);
        f << to_json(sol).dump(2) << '\n';
      }
    } else if (report->parsed()) {
      const RunConfig cfg = build_config(report_c);
      auto in = open_in(results_path);
      const SweepResult result = read_results_csv(in);
      const auto rows = delta_report(result, gamma_a, gamma_b, cfg.master_seed);
      if (report_c.out.empty()) {
        write_delta_csv(out, rows);
      } else {
        auto f = open_out(report_c.out);
        write_delta_csv(f, rows);
      }
    }
  } catch (const UsageError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitFailure;
  }
  return kExitOk;
}

}  // namespace slatesim::cli
