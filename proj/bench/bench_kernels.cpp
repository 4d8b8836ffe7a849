// Serial reference vs OpenMP kernels on the three data-parallel hot spots:
// pairwise polychoric estimation, per-unit index scoring, and the scenario
// sweep. Run with --benchmark_min_time=... as usual.

#include <benchmark/benchmark.h>

#include "stratkit/composite.hpp"
#include "stratkit/polychoric.hpp"
#include "stratkit/scenario.hpp"
#include "stratkit/synthcopula.hpp"

using namespace stratkit;

namespace {

OrdinalDataset make_dataset(std::int64_t records) {
  CopulaSpec spec;
  const int k = 7;
  spec.correlation = Eigen::MatrixXd::Identity(k, k);
  for (int i = 0; i < k; ++i) {
    for (int j = 0; j < k; ++j) {
      if (i != j) spec.correlation(i, j) = 0.5 / (1 + std::abs(i - j));
    }
  }
  spec.thresholds = {{-0.8, 0.0, 0.8}, {-0.4, 0.4},      {-0.6, 0.3},
                     {-1.0, -0.2, 0.7}, {-0.5, 0.5},     {-0.9, 0.1},
                     {-0.7, 0.0, 0.9}};
  spec.records = records;
  spec.seed = 7;
  return sample_ordinal(spec);
}

CensusBlockFrame make_frame(std::int64_t blocks) {
  FrameSpec spec;
  spec.blocks = blocks;
  spec.seed = 7;
  return sample_frame(spec).frame;
}

void BM_polychoric(benchmark::State& state, Exec exec) {
  const OrdinalDataset data = make_dataset(20000);
  for (auto _ : state) {
    const PolychoricResult r = polychoric_matrix(data, exec);
    benchmark::DoNotOptimize(r.matrix.values);
  }
}

void BM_index(benchmark::State& state, Exec exec) {
  const OrdinalDataset data = make_dataset(200000);
  const PolychoricResult pc = polychoric_matrix(data);
  const WeightTable weights = derive_weights(pc.matrix, pc.thresholds);
  for (auto _ : state) {
    const std::vector<double> idx = compute_index(data, weights, exec);
    benchmark::DoNotOptimize(idx.data());
  }
}

void BM_grid(benchmark::State& state, Exec exec) {
  const CensusBlockFrame frame = make_frame(5000);
  GridOptions options;
  options.exec = exec;
  for (auto _ : state) {
    const ScenarioGrid grid = run_grid(frame, options);
    benchmark::DoNotOptimize(grid.scenarios.data());
  }
}

}  // namespace

BENCHMARK_CAPTURE(BM_polychoric, serial, Exec::Serial)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(BM_polychoric, parallel, Exec::Parallel)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(BM_index, serial, Exec::Serial)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(BM_index, parallel, Exec::Parallel)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(BM_grid, serial, Exec::Serial)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(BM_grid, parallel, Exec::Parallel)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
