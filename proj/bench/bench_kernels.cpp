// Serial reference vs OpenMP kernels. Run with OMP_NUM_THREADS set to the
// number of cores to compare; the Arg is the row count.

#include <benchmark/benchmark.h>

#include <numeric>

#include "aquagauge/gbm.hpp"
#include "aquagauge/split_kernels.hpp"
#include "aquagauge/wqi.hpp"
#include "fixtures.hpp"

using namespace aquagauge;

namespace {

// Wide task so the per-feature split scan has work to share.
testing::Regression wide_task(std::size_t n, std::size_t cols) {
  testing::Rng rng(77);
  std::vector<double> v(n * cols);
  for (double& d : v) d = rng.uniform(-1, 1);
  std::vector<double> y(n);
  for (std::size_t i = 0; i < n; ++i) y[i] = v[i * cols] * v[i * cols + 1] + 0.1 * rng.normal();
  return {gbm::FeatureMatrix(n, cols, std::move(v)), std::move(y)};
}

gbm::Hyperparams bench_hp() {
  gbm::Hyperparams hp;
  hp.n_trees = 20;
  hp.max_depth = 4;
  hp.min_samples_split = 20;
  hp.min_samples_leaf = 5;
  return hp;
}

template <bool Parallel>
void BM_BestSplit(benchmark::State& state) {
  const auto task = wide_task(static_cast<std::size_t>(state.range(0)), 16);
  std::vector<std::size_t> rows(task.y.size());
  std::iota(rows.begin(), rows.end(), std::size_t{0});
  for (auto _ : state) {
    auto s = Parallel ? gbm::kernels::best_split_parallel(task.x, rows, task.y, 5)
                      : gbm::kernels::best_split_serial(task.x, rows, task.y, 5);
    benchmark::DoNotOptimize(s);
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

template <Execution Exec>
void BM_Fit(benchmark::State& state) {
  const auto task = wide_task(static_cast<std::size_t>(state.range(0)), 16);
  for (auto _ : state) {
    auto model = gbm::gbm_fit(task.x, task.y, bench_hp(), Exec);
    benchmark::DoNotOptimize(model);
  }
}

template <bool Parallel>
void BM_PredictBatch(benchmark::State& state) {
  const auto train = wide_task(2000, 16);
  gbm::Hyperparams hp = bench_hp();
  hp.n_trees = 100;
  const auto model = gbm::gbm_fit(train.x, train.y, hp);
  const auto x = wide_task(static_cast<std::size_t>(state.range(0)), 16).x;
  std::vector<double> out(x.n_rows());
  for (auto _ : state) {
    if (Parallel) {
      gbm::kernels::predict_batch_parallel(model, x, out);
    } else {
      gbm::kernels::predict_batch_serial(model, x, out);
    }
    benchmark::DoNotOptimize(out.data());
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

template <Execution Exec>
void BM_WqiBatch(benchmark::State& state) {
  testing::Rng rng(78);
  std::vector<ingest::WaterSample> samples(static_cast<std::size_t>(state.range(0)));
  for (auto& s : samples) {
    s.ph = rng.uniform(0, 14);
    s.dissolved_oxygen = rng.uniform(0, 12);
    s.bod = rng.uniform(0, 150);
    s.conductivity = rng.uniform(0, 400);
    s.nitrate = rng.uniform(0, 250);
    s.total_coliform = rng.uniform(0, 20000);
  }
  for (auto _ : state) {
    auto r = wqi::compute_wqi_batch(samples, wqi::Mode::normative, Exec);
    benchmark::DoNotOptimize(r);
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

}  // namespace

BENCHMARK(BM_BestSplit<false>)->Name("best_split/serial")->Arg(2000)->Arg(20000);
BENCHMARK(BM_BestSplit<true>)->Name("best_split/parallel")->Arg(2000)->Arg(20000);
BENCHMARK(BM_Fit<Execution::serial>)->Name("gbm_fit/serial")->Arg(2000)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Fit<Execution::parallel>)->Name("gbm_fit/parallel")->Arg(2000)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_PredictBatch<false>)->Name("predict_batch/serial")->Arg(10000);
BENCHMARK(BM_PredictBatch<true>)->Name("predict_batch/parallel")->Arg(10000);
BENCHMARK(BM_WqiBatch<Execution::serial>)->Name("wqi_batch/serial")->Arg(100000);
BENCHMARK(BM_WqiBatch<Execution::parallel>)->Name("wqi_batch/parallel")->Arg(100000);

BENCHMARK_MAIN();
