// Serial reference vs OpenMP trial loop on the n = 500, k = 10 experiment.

#include <benchmark/benchmark.h>

#include "ngt/harness.hpp"

namespace {

ngt::ExperimentConfig experiment(std::uint64_t trials) {
    ngt::ExperimentConfig c;
    c.n = 500;
    c.k = 10;
    c.rho = 0.05;
    c.trials = trials;
    c.master_seed = 7;
    c.strategy.kind = ngt::StrategyKind::approach1;
    c.strategy.approach1.delta = 0.2;
    c.strategy.approach1.fixed_r = 5;
    c.strategy.approach1.nbs_rule = ngt::Approach1Params::NbsRule::delta_over_3k;
    c.strategy.approach1.allow_none = false;
    return c;
}

void BM_TrialsSerial(benchmark::State& state) {
    const auto c = experiment(static_cast<std::uint64_t>(state.range(0)));
    for (auto _ : state) {
        benchmark::DoNotOptimize(ngt::run_trials_serial(c));
    }
    state.SetItemsProcessed(state.iterations() * state.range(0));
}

void BM_TrialsParallel(benchmark::State& state) {
    const auto c = experiment(static_cast<std::uint64_t>(state.range(0)));
    const int threads = static_cast<int>(state.range(1));
    for (auto _ : state) {
        benchmark::DoNotOptimize(ngt::run_trials_parallel(c, threads));
    }
    state.SetItemsProcessed(state.iterations() * state.range(0));
}

}  // namespace

BENCHMARK(BM_TrialsSerial)->Arg(2000)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_TrialsParallel)->Args({2000, 2})->Args({2000, 4})->Args({2000, 8})
    ->Unit(benchmark::kMillisecond)->UseRealTime();

BENCHMARK_MAIN();
