#include <benchmark/benchmark.h>

#include <cmath>
#include <vector>

#include "dropwarn/dataset.hpp"
#include "dropwarn/evaluation.hpp"
#include "dropwarn/features.hpp"
#include "dropwarn/gbdt.hpp"
#include "dropwarn/rng.hpp"
#include "dropwarn/synthgen.hpp"

namespace {

using namespace dropwarn;

Dataset RandomData(std::size_t n, std::size_t width) {
  Rng rng(1);
  Dataset d;
  d.x = Matrix(n, width);
  for (std::size_t j = 0; j < width; ++j) d.feature_names.push_back("f" + std::to_string(j));
  for (std::size_t i = 0; i < n; ++i) {
    double z = -0.5;
    for (std::size_t j = 0; j < width; ++j) {
      d.x(i, j) = rng.Normal();
      z += (j < 4 ? 0.7 : 0.05) * d.x(i, j);
    }
    d.y.push_back(rng.Bernoulli(Sigmoid(z)) ? 1 : 0);
    d.w.push_back(1.0);
  }
  return d;
}

void BM_GbdtFit(benchmark::State& state) {
  const auto data = RandomData(static_cast<std::size_t>(state.range(0)), 40);
  GbdtConfig cfg;
  cfg.n_trees = 20;
  for (auto _ : state) benchmark::DoNotOptimize(FitGbdt(data, cfg));
  state.SetItemsProcessed(state.iterations() * state.range(0) * cfg.n_trees);
}
BENCHMARK(BM_GbdtFit)->Arg(2000)->Arg(10000)->Unit(benchmark::kMillisecond);

void BM_FeatureAssemble(benchmark::State& state) {
  SimConfig sc;
  sc.n_students = 200;
  const auto sim = Simulate(sc);
  const auto pipe = FeaturePipeline::Fit(sim.cohort, FeatureConfig{});
  std::vector<std::pair<const StudentRecord*, int>> queries;
  for (const auto& [id, s] : sim.cohort.students)
    for (int d = s.first_day(); d <= s.last_day(); d += 5) queries.emplace_back(&s, d);
  for (auto _ : state) {
    for (const auto& [s, d] : queries) benchmark::DoNotOptimize(pipe.AssembleValues(*s, d));
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(queries.size()));
}
BENCHMARK(BM_FeatureAssemble)->Unit(benchmark::kMillisecond);

void BM_Auc(benchmark::State& state) {
  Rng rng(2);
  const auto n = static_cast<std::size_t>(state.range(0));
  std::vector<double> s(n);
  std::vector<int> y(n);
  for (std::size_t i = 0; i < n; ++i) {
    s[i] = std::round(rng.Normal() * 50.0);
    y[i] = rng.Bernoulli(0.2) ? 1 : 0;
  }
  for (auto _ : state) benchmark::DoNotOptimize(Auc(s, y));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_Auc)->Arg(1000)->Arg(100000);

}  // namespace

BENCHMARK_MAIN();
