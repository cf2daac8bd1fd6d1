#include "securelat/control.hpp"
#include "securelat/sysid.hpp"

#include <benchmark/benchmark.h>

namespace {

using namespace securelat;

void BM_GlDerivative(benchmark::State& state) {
    const auto len = static_cast<std::size_t>(state.range(0));
    std::vector<double> hist(len);
    for (std::size_t i = 0; i < len; ++i) hist[i] = 0.001 * static_cast<double>(i % 97);
    for (auto _ : state) benchmark::DoNotOptimize(control::gl_derivative(hist, 0.5, 0.01, len));
}
BENCHMARK(BM_GlDerivative)->Arg(50)->Arg(500)->Arg(5000);

void BM_SlidingStep(benchmark::State& state) {
    const auto model = sysid::reference_model();
    control::SlidingConfig base;
    base.memory_len_L = static_cast<int>(state.range(0));
    const auto cfg = control::make_sliding_config(model.mat_A, model.mat_B, base);
    RowVec K(4);
    K << -0.5, -0.6, -0.5, -0.4;
    Vec x(4);
    x << 0.5, 0.0, 0.5, 0.0;
    control::SlidingState s(cfg, x);
    for (auto _ : state) benchmark::DoNotOptimize(s.step(cfg, x, model.mat_A, model.mat_B, K));
}
BENCHMARK(BM_SlidingStep)->Arg(50)->Arg(500);

void BM_Riccati(benchmark::State& state) {
    const auto model = sysid::reference_model();
    const Mat Q = Vec::Ones(4).asDiagonal();
    const Mat R = Mat::Identity(1, 1);
    for (auto _ : state) benchmark::DoNotOptimize(control::riccati_solve(model.mat_A, model.mat_B, Q, R));
}
BENCHMARK(BM_Riccati);

}  // namespace
