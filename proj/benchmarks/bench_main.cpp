#include <benchmark/benchmark.h>

#include "vertiplan/initializer.hpp"
#include "vertiplan/matching.hpp"
#include "vertiplan/optimizer.hpp"
#include "vertiplan/scoring.hpp"
#include "vertiplan/synthetic.hpp"

using namespace vertiplan;

namespace {

const SyntheticCity& city() {
  static const SyntheticCity c = generate_synthetic_city();
  return c;
}

const SupplyMatrix& layout() {
  static const SupplyMatrix s = displaced_kmeans_supply(city());
  return s;
}

void BM_Match(benchmark::State& state) {
  const auto& c = city();
  layout();
  for (auto _ : state) {
    benchmark::DoNotOptimize(match(c.demand, layout(), c.spec, c.policy.service_radius));
  }
}
BENCHMARK(BM_Match)->Unit(benchmark::kMillisecond);

void BM_OptimizerStep(benchmark::State& state) {
  const auto& c = city();
  const auto config = OptimizerConfig::defaults_for(c.spec, c.policy);
  const auto initial = make_initial_state(c.demand, layout(), c.spec, c.policy);
  for (auto _ : state) {
    benchmark::DoNotOptimize(step(initial, c.demand, c.spec, c.policy, config));
  }
}
BENCHMARK(BM_OptimizerStep)->Unit(benchmark::kMillisecond);

void BM_Cluster(benchmark::State& state) {
  const auto algorithm = static_cast<ClusterAlgorithm>(state.range(0));
  const auto& c = city();
  // HAC is quadratic, so every algorithm gets the same 4000-point prefix.
  const std::span<const PlanarPoint> points(c.points.data(), std::min<std::size_t>(c.points.size(), 4000));
  for (auto _ : state) {
    benchmark::DoNotOptimize(cluster(points, 80, algorithm, 7));
  }
  state.SetLabel(to_string(algorithm));
}
BENCHMARK(BM_Cluster)
    ->Arg(static_cast<int>(ClusterAlgorithm::kmeans))
    ->Arg(static_cast<int>(ClusterAlgorithm::gmm))
    ->Arg(static_cast<int>(ClusterAlgorithm::hac))
    ->Unit(benchmark::kMillisecond);

void BM_Coverage(benchmark::State& state) {
  const auto& c = city();
  for (auto _ : state) {
    benchmark::DoNotOptimize(score_coverage(layout(), c.spec, c.policy.service_radius));
  }
}
BENCHMARK(BM_Coverage)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
