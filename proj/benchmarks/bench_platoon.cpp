#include <benchmark/benchmark.h>

#include "platoon/connectivity.hpp"
#include "platoon/coverage.hpp"
#include "platoon/load.hpp"
#include "platoon/montecarlo.hpp"

using namespace platoon;

namespace {

const NetworkParams kFig2 = NetworkParams::from_per_km(2.0, 1.0, 5.0, 100.0);
const NetworkParams kFig8 = NetworkParams::from_per_km(2.0, 1.0, 5.0, 150.0);

void BM_PmfTypicalPts(benchmark::State& state) {
  for (auto _ : state) benchmark::DoNotOptimize(pmf_typical_pts(kFig2));
}
BENCHMARK(BM_PmfTypicalPts)->Unit(benchmark::kMillisecond);

void BM_PmfTaggedPts(benchmark::State& state) {
  for (auto _ : state) benchmark::DoNotOptimize(pmf_tagged_pts(kFig2));
}
BENCHMARK(BM_PmfTaggedPts)->Unit(benchmark::kMillisecond);

void BM_PmfDegreePts(benchmark::State& state) {
  const V2VParams v2v{200.0, kFig2};
  for (auto _ : state) benchmark::DoNotOptimize(pmf_degree_pts(v2v));
}
BENCHMARK(BM_PmfDegreePts)->Unit(benchmark::kMillisecond);

void BM_CoverageProb(benchmark::State& state) {
  const RadioParams radio;
  for (auto _ : state) benchmark::DoNotOptimize(coverage_prob(0.9, Traffic::PTS, kFig8, radio));
}
BENCHMARK(BM_CoverageProb)->Unit(benchmark::kMicrosecond);

void BM_MdCoverage(benchmark::State& state) {
  const RadioParams radio;
  for (auto _ : state) benchmark::DoNotOptimize(md_coverage(0.9, 0.8, Traffic::PTS, kFig8, radio));
}
BENCHMARK(BM_MdCoverage)->Unit(benchmark::kMillisecond);

void BM_RateCoverage(benchmark::State& state) {
  RadioParams radio;
  radio.alpha = 4.0;
  for (auto _ : state) benchmark::DoNotOptimize(rate_coverage(9e6, Traffic::PTS, kFig8, radio));
}
BENCHMARK(BM_RateCoverage)->Unit(benchmark::kMillisecond);

void BM_SimLoadTagged(benchmark::State& state) {
  const SimConfig cfg{static_cast<int>(state.range(0)), 1, 0.0, 1};
  for (auto _ : state)
    benchmark::DoNotOptimize(sim_load(LoadKind::Tagged, Traffic::PTS, kFig2, cfg));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_SimLoadTagged)->Arg(10000)->Unit(benchmark::kMillisecond);

void BM_SimCoverage(benchmark::State& state) {
  const RadioParams radio;
  const SimConfig cfg{static_cast<int>(state.range(0)), 1, 0.0, 100};
  for (auto _ : state) benchmark::DoNotOptimize(sim_coverage(0.9, Traffic::PTS, kFig8, radio, cfg));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_SimCoverage)->Arg(500)->Unit(benchmark::kMillisecond);

}  // namespace
BENCHMARK_MAIN();
