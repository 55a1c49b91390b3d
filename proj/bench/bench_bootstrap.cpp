// Serial reference against the OpenMP kernels for the two replicate loops.

#include <benchmark/benchmark.h>

#include "savvy/bootstrap.hpp"
#include "savvy/simulate.hpp"

namespace {

using namespace savvy;

SimConfig bench_config(std::size_t n) {
  SimConfig c;
  c.group_a = {n, 0.2, 0.1, 0.05};
  c.group_b = {n, 0.1, 0.1, 0.05};
  c.censoring = {CensoringKind::Mixed, 8.0, 0.05};
  c.seed = 42;
  return c;
}

void bootstrap(benchmark::State& state, Execution execution) {
  const auto data =
      apply_event_scheme(simulate_trial(bench_config(state.range(0))), 1, Scheme::AllEvents);
  BootstrapSpec spec;
  spec.replicates = 500;
  const Statistic stat{Statistic::Kind::LogRatio, Method::OneMinusKM, Method::AalenJohansen,
                       Target::Event, Group::A};
  for (auto _ : state) {
    benchmark::DoNotOptimize(bootstrap_variance(data, spec, stat, "tau", execution).variance);
  }
  state.SetItemsProcessed(state.iterations() * spec.replicates);
}

void bias(benchmark::State& state, Execution execution) {
  const auto config = bench_config(state.range(0));
  for (auto _ : state) {
    benchmark::DoNotOptimize(bias_benchmark(config, 100, Scheme::AllEvents, execution));
  }
  state.SetItemsProcessed(state.iterations() * 100);
}

void BM_BootstrapSerial(benchmark::State& s) { bootstrap(s, Execution::Serial); }
void BM_BootstrapParallel(benchmark::State& s) { bootstrap(s, Execution::Parallel); }
void BM_BiasSerial(benchmark::State& s) { bias(s, Execution::Serial); }
void BM_BiasParallel(benchmark::State& s) { bias(s, Execution::Parallel); }

}  // namespace

BENCHMARK(BM_BootstrapSerial)->Arg(100)->Arg(1000)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_BootstrapParallel)->Arg(100)->Arg(1000)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_BiasSerial)->Arg(100)->Arg(1000)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_BiasParallel)->Arg(100)->Arg(1000)->Unit(benchmark::kMillisecond)->UseRealTime();

BENCHMARK_MAIN();
