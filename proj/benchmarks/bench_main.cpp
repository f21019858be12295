#include <benchmark/benchmark.h>

#include "transboost/bins.hpp"
#include "transboost/dataset.hpp"
#include "transboost/kmm.hpp"
#include "transboost/model.hpp"
#include "transboost/transboost.hpp"

namespace tb = transboost;

namespace {

tb::Dataset synthetic(std::size_t rows) {
  tb::SyntheticSpec spec;
  spec.n_source = rows * 4 / 5;
  spec.n_target = rows - spec.n_source;
  return tb::make_synthetic(spec, 1);
}

void BM_Train(benchmark::State& state) {
  const tb::Dataset ds = synthetic(static_cast<std::size_t>(state.range(0)));
  tb::BoostConfig cfg;
  cfg.rounds = 10;
  for (auto _ : state) benchmark::DoNotOptimize(tb::train(ds, cfg));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_Train)->RangeMultiplier(2)->Range(2500, 40000)->Unit(benchmark::kMillisecond);

void BM_TrainSparse(benchmark::State& state) {
  const tb::Dataset ds = tb::simulate_sparsity(synthetic(10000), static_cast<double>(state.range(0)) / 100.0, 2);
  tb::BoostConfig cfg;
  cfg.rounds = 10;
  for (auto _ : state) benchmark::DoNotOptimize(tb::train(ds, cfg));
}
BENCHMARK(BM_TrainSparse)->Arg(1)->Arg(25)->Arg(100)->Unit(benchmark::kMillisecond);

void BM_BuildBins(benchmark::State& state) {
  const tb::Dataset ds = synthetic(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(tb::build_bins(ds));
}
BENCHMARK(BM_BuildBins)->Arg(10000)->Arg(40000)->Unit(benchmark::kMicrosecond);

void BM_Predict(benchmark::State& state) {
  const tb::Dataset ds = synthetic(10000);
  const tb::TransBoostModel model = tb::train(ds, tb::BoostConfig{});
  for (auto _ : state) benchmark::DoNotOptimize(tb::predict(model, ds));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(ds.n_rows()));
}
BENCHMARK(BM_Predict)->Unit(benchmark::kMillisecond);

void BM_KmmQp(benchmark::State& state) {
  const auto inst = tb::kmm::random_instance(static_cast<std::uint64_t>(state.range(0)));
  const auto sys = tb::kmm::build_tree_kernel(inst.tree, inst.source, inst.target, state.range(1) != 0);
  for (auto _ : state) benchmark::DoNotOptimize(tb::kmm::solve_kmm_qp(sys));
}
BENCHMARK(BM_KmmQp)->Args({1, 0})->Args({1, 1})->Args({7, 0})->Unit(benchmark::kMicrosecond);

void BM_ClosedForm(benchmark::State& state) {
  const auto inst = tb::kmm::random_instance(1);
  for (auto _ : state) {
    benchmark::DoNotOptimize(tb::kmm::closed_form_weights(inst.tree, inst.source, inst.target, false));
  }
}
BENCHMARK(BM_ClosedForm)->Unit(benchmark::kMicrosecond);

}  // namespace

BENCHMARK_MAIN();
