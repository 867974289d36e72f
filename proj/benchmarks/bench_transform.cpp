#include <benchmark/benchmark.h>

#include <random>

#include "crn/transform.hpp"

using namespace crn;

namespace {

std::vector<cxd> random_values(int n) {
    std::mt19937_64 rng(7);
    std::normal_distribution<double> unit(0.0, 1.0);
    std::vector<cxd> v(static_cast<std::size_t>(n));
    for (auto& x : v) x = cxd(unit(rng), unit(rng));
    return v;
}

void BM_FullTransform(benchmark::State& state) {
    const auto input = random_values(static_cast<int>(state.range(0)));
    for (auto _ : state) {
        MultCounter mc;
        benchmark::DoNotOptimize(dft::full(input, dft::Direction::forward, mc));
    }
    state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_FullTransform)->RangeMultiplier(2)->Range(64, 1024)->Complexity();

void BM_PrunedFromTaps(benchmark::State& state) {
    const auto taps = random_values(4);
    const int n = static_cast<int>(state.range(0));
    for (auto _ : state) {
        MultCounter mc;
        benchmark::DoNotOptimize(dft::from_leading_taps(taps, n, dft::Direction::forward, mc));
    }
    state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_PrunedFromTaps)->RangeMultiplier(2)->Range(64, 1024)->Complexity();

void BM_PrunedBins(benchmark::State& state) {
    const auto input = random_values(static_cast<int>(state.range(0)));
    for (auto _ : state) {
        MultCounter mc;
        benchmark::DoNotOptimize(dft::leading_bins(input, 4, dft::Direction::inverse, mc));
    }
    state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_PrunedBins)->RangeMultiplier(2)->Range(64, 1024)->Complexity();

} // namespace

BENCHMARK_MAIN();
