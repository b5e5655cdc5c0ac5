#include <benchmark/benchmark.h>

#include <vector>

#include "slatesim/agents.hpp"
#include "slatesim/catalog.hpp"
#include "slatesim/choice.hpp"
#include "slatesim/experiment.hpp"
#include "slatesim/features.hpp"
#include "slatesim/knapsack.hpp"
#include "slatesim/regressor.hpp"
#include "slatesim/rng.hpp"

namespace {

using namespace slatesim;

void BM_SelectionProbabilities(benchmark::State& state) {
  RngStream rng(1);
  std::vector<double> sigma(static_cast<std::size_t>(state.range(0)));
  for (auto& s : sigma) s = rng.uniform();
  for (auto _ : state) benchmark::DoNotOptimize(selection_probabilities(sigma));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_SelectionProbabilities)->Arg(30)->Arg(1000);

void BM_KnapsackDp(benchmark::State& state) {
  RngStream rng(2);
  KnapsackInstance inst;
  for (int i = 0; i < state.range(0); ++i) {
    inst.utilities.push_back(rng.uniform());
    inst.costs.push_back(1.0 + rng.uniform() * 99.0);
  }
  inst.budget = 500.0;
  for (auto _ : state) benchmark::DoNotOptimize(solve_dp(inst, 0.1));
}
BENCHMARK(BM_KnapsackDp)->Arg(30)->Arg(300);

FeatureMatrix random_features(std::size_t rows, std::vector<double>& y) {
  RngStream rng(3);
  FeatureMatrix x;
  x.reserve(rows);
  y.clear();
  for (std::size_t r = 0; r < rows; ++r) {
    QFeatures f{};
    for (auto& v : f) v = rng.uniform() * 100.0;
    x.append(f);
    y.push_back(f[4] / 100.0 + (f[0] > 50.0 ? 0.3 : 0.0));
  }
  return x;
}

void BM_GbrtFit(benchmark::State& state) {
  std::vector<double> y;
  const FeatureMatrix x = random_features(static_cast<std::size_t>(state.range(0)), y);
  for (auto _ : state) {
    GradientBoostedTrees m;
    m.fit(x, y);
    benchmark::DoNotOptimize(m.base_score());
  }
}
BENCHMARK(BM_GbrtFit)->Arg(10000)->Unit(benchmark::kMillisecond);

void BM_GbrtPredictBatch(benchmark::State& state) {
  std::vector<double> y;
  const FeatureMatrix x = random_features(static_cast<std::size_t>(state.range(0)), y);
  GradientBoostedTrees m;
  m.fit(x, y);
  std::vector<double> out(x.rows());
  for (auto _ : state) {
    m.predict(x, out);
    benchmark::DoNotOptimize(out.data());
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_GbrtPredictBatch)->Arg(10000);

void BM_SweepCell(benchmark::State& state) {
  RunConfig cfg;
  cfg.num_items = 5000;
  cfg.charge_mode = ChargeMode::kOnExamination;
  const SweepCell cell{state.range(0) ? Algorithm::kQLearning : Algorithm::kSarsa, 0.8, 100.0, 0};
  for (auto _ : state) benchmark::DoNotOptimize(run_cell(cfg, cell).play_rate);
}
BENCHMARK(BM_SweepCell)->Arg(0)->Arg(1)->Unit(benchmark::kSecond)->Iterations(1);

}  // namespace

BENCHMARK_MAIN();
