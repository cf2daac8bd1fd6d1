#include "securelat/plant.hpp"
#include "securelat/sysid.hpp"

#include <benchmark/benchmark.h>

namespace {

using namespace securelat;

sysid::DatasetMatrices make_data(std::size_t samples) {
    const auto u = sysid::random_excitation(samples, 0.05, 7);
    const auto states = plant::generate_trajectory(plant::continuous_matrices(plant::VehicleParams{}),
                                                   plant::StateVector::Zero(), u, 0.01, {});
    return sysid::build_matrices(std::vector<plant::StateVector>(states.begin(), states.end() - 1), u, 0.01);
}

void BM_DmdIdentify(benchmark::State& state) {
    const auto data = make_data(static_cast<std::size_t>(state.range(0)));
    for (auto _ : state) benchmark::DoNotOptimize(sysid::dmd_identify(data, 5));
    state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_DmdIdentify)->RangeMultiplier(4)->Range(256, 16384)->Complexity(benchmark::oN);

void BM_Persistency(benchmark::State& state) {
    const auto data = make_data(static_cast<std::size_t>(state.range(0)));
    for (auto _ : state) benchmark::DoNotOptimize(sysid::persistency_check(data, 4, 4));
}
BENCHMARK(BM_Persistency)->Arg(1000)->Arg(5000);

}  // namespace
