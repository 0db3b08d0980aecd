// Serial reference versus the OpenMP allocation kernel on the common-shock
// compound Poisson generator, and batch inversion on its own.

#include <benchmark/benchmark.h>

#include <vector>

#include "cmrs/allocation.hpp"
#include "cmrs/config.hpp"
#include "cmrs/inversion.hpp"
#include "cmrs/models.hpp"

namespace {

cmrs::AllocationRequest make_request(std::size_t n, double theta) {
    cmrs::AllocationRequest r;
    r.model = cmrs::build_common_shock_cp(cmrs::bench_cscp_spec(n));
    for (int k = 1; k <= 100; ++k) r.s_grid.push_back(0.5 * k);
    r.scheme = cmrs::EulerScheme{18.4, 25, 15, theta};
    return r;
}

void BM_AllocateSerial(benchmark::State& state) {
    const auto r = make_request(static_cast<std::size_t>(state.range(0)), 0.0);
    for (auto _ : state) benchmark::DoNotOptimize(cmrs::allocate_serial(r));
    state.SetComplexityN(state.range(0));
}

void BM_AllocateParallel(benchmark::State& state) {
    const auto r = make_request(static_cast<std::size_t>(state.range(0)), 0.0);
    for (auto _ : state) benchmark::DoNotOptimize(cmrs::allocate(r));
    state.SetComplexityN(state.range(0));
}

void BM_AllocateParallelTilted(benchmark::State& state) {
    const auto r = make_request(static_cast<std::size_t>(state.range(0)), 0.2);
    for (auto _ : state) benchmark::DoNotOptimize(cmrs::allocate(r));
    state.SetComplexityN(state.range(0));
}

void BM_AllocateGs(benchmark::State& state) {
    auto r = make_request(static_cast<std::size_t>(state.range(0)), 0.0);
    r.scheme = cmrs::GsScheme(10);
    for (auto _ : state) benchmark::DoNotOptimize(cmrs::allocate(r));
    state.SetComplexityN(state.range(0));
}

void BM_InvertBatch(benchmark::State& state, bool parallel) {
    const auto model = cmrs::build_common_shock_cp(cmrs::bench_cscp_spec(static_cast<std::size_t>(state.range(0))));
    const std::size_t cols = model->size() + 1;
    const cmrs::VectorTransform transform = [&](cmrs::Complex z, std::span<cmrs::Complex> out) {
        out[0] = model->evaluate(z, out.subspan(1));
    };
    std::vector<double> grid;
    for (int k = 1; k <= 100; ++k) grid.push_back(0.5 * k);
    const cmrs::InversionScheme scheme = cmrs::EulerScheme{};
    for (auto _ : state) {
        if (parallel) {
            benchmark::DoNotOptimize(cmrs::invert_batch(transform, cols, grid, scheme));
        } else {
            benchmark::DoNotOptimize(cmrs::invert_batch_serial(transform, cols, grid, scheme));
        }
    }
}

}  // namespace

BENCHMARK(BM_AllocateSerial)->RangeMultiplier(10)->Range(10, 10000)->Unit(benchmark::kMillisecond)->Complexity();
BENCHMARK(BM_AllocateParallel)->RangeMultiplier(10)->Range(10, 10000)->Unit(benchmark::kMillisecond)->Complexity();
BENCHMARK(BM_AllocateParallelTilted)->RangeMultiplier(10)->Range(10, 10000)->Unit(benchmark::kMillisecond)->Complexity();
BENCHMARK(BM_AllocateGs)->RangeMultiplier(10)->Range(10, 10000)->Unit(benchmark::kMillisecond)->Complexity();
BENCHMARK_CAPTURE(BM_InvertBatch, serial, false)->Arg(100)->Arg(1000)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(BM_InvertBatch, parallel, true)->Arg(100)->Arg(1000)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
