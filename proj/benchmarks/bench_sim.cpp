#include "securelat/sim.hpp"

#include <benchmark/benchmark.h>

namespace {

using namespace securelat;

void BM_Scenario(benchmark::State& state) {
    const auto cfg = sim::reference_scenario(static_cast<sim::CaseId>(state.range(0)));
    for (auto _ : state) benchmark::DoNotOptimize(sim::run_scenario(cfg));
}
BENCHMARK(BM_Scenario)->DenseRange(0, 2)->Unit(benchmark::kMillisecond);

}  // namespace
