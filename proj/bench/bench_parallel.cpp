#include <benchmark/benchmark.h>

#include "fsfbmc/sim_harness.hpp"

using namespace fsfbmc;

namespace {

SimConfig bench_config() {
    SimConfig cfg;
    cfg.scheme = "tone-ortho";
    cfg.qamOrder = 64;
    cfg.coded = false;
    cfg.channelModel = "D";
    cfg.snrGridDb = {30.0};
    cfg.framesPerPoint = 40;
    cfg.stopErrors = 1L << 60;
    cfg.minFrames = 1;
    cfg.masterSeed = 5;
    return cfg;
}

void BM_sweep_serial(benchmark::State& state) {
    const SimConfig cfg = bench_config();
    for (auto _ : state) {
        const auto records = run_ber_sweep_serial(cfg);
        benchmark::DoNotOptimize(records);
    }
    state.SetItemsProcessed(state.iterations() * cfg.framesPerPoint);
}

void BM_sweep_parallel(benchmark::State& state) {
    SimConfig cfg = bench_config();
    cfg.threads = static_cast<int>(state.range(0));
    for (auto _ : state) {
        const auto records = run_ber_sweep(cfg);
        benchmark::DoNotOptimize(records);
    }
    state.SetItemsProcessed(state.iterations() * cfg.framesPerPoint);
}

}  // namespace

BENCHMARK(BM_sweep_serial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_sweep_parallel)->Arg(1)->Arg(2)->Arg(4)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
