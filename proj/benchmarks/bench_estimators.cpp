#include <benchmark/benchmark.h>

#include "crn/ddce.hpp"
#include "crn/estimators.hpp"

using namespace crn;

namespace {

struct Fixture {
    bb::SymbolGrid x;
    bb::SymbolGrid y;
    est::EstimatorParams params;
    int K;

    explicit Fixture(int k, int taps = 4) : K(k) {
        bb::Rng rng(99);
        const auto profile = bb::exponential_profile(taps);
        const bb::Cir cir = bb::generate_cir(profile, rng);
        MultCounter mc;
        const bb::Ctf ctf = bb::cir_to_ctf(cir, k, mc);
        std::uniform_int_distribution<int> bit(0, 1);
        std::vector<std::uint8_t> bits(static_cast<std::size_t>(k));
        for (auto& b : bits) b = static_cast<std::uint8_t>(bit(rng));
        x = bb::modulate(bits, bb::Modulation::bpsk);
        y = bb::apply_channel(x, ctf, {0.1}, rng);
        params = est::make_params(0.1, profile, taps);
    }
};

void BM_Ls(benchmark::State& state) {
    Fixture f(static_cast<int>(state.range(0)));
    for (auto _ : state) {
        MultCounter mc;
        benchmark::DoNotOptimize(est::ls_ctf(f.y, f.x, mc));
    }
}
BENCHMARK(BM_Ls)->Arg(64)->Arg(256);

void BM_CrMmse(benchmark::State& state) {
    Fixture f(static_cast<int>(state.range(0)));
    for (auto _ : state) {
        MultCounter mc;
        const bb::Ctf shrunk = est::scalar_mmse_ctf(f.y, f.x, f.params, mc);
        benchmark::DoNotOptimize(est::cr_mmse_cir(shrunk, f.params, f.K, mc));
    }
}
BENCHMARK(BM_CrMmse)->Arg(64)->Arg(256);

void BM_MmseDirect(benchmark::State& state) {
    Fixture f(static_cast<int>(state.range(0)));
    for (auto _ : state) {
        MultCounter mc;
        benchmark::DoNotOptimize(est::mmse_cir_direct(f.y, f.x, f.params, mc));
    }
}
BENCHMARK(BM_MmseDirect)->Arg(64)->Arg(256);

void BM_MlCls(benchmark::State& state) {
    Fixture f(static_cast<int>(state.range(0)));
    MultCounter mc;
    const bb::Ctf ls = est::ls_ctf(f.y, f.x, mc);
    for (auto _ : state) {
        MultCounter c;
        benchmark::DoNotOptimize(
            est::ml_cir_cls(ls.coeffs, est::PilotPattern::all_carriers(), 4, c));
    }
}
BENCHMARK(BM_MlCls)->Arg(64)->Arg(256);

void BM_CrMl(benchmark::State& state) {
    Fixture f(static_cast<int>(state.range(0)));
    MultCounter mc;
    const bb::Ctf ls = est::ls_ctf(f.y, f.x, mc);
    for (auto _ : state) {
        MultCounter c;
        benchmark::DoNotOptimize(est::cr_ml_cir(ls.coeffs, est::PilotPattern::comb(1), 4, c));
    }
}
BENCHMARK(BM_CrMl)->Arg(64)->Arg(256);

void BM_DdceSymbol(benchmark::State& state) {
    ddce::TrialConfig trial;
    trial.ddce.kind = static_cast<est::EstimatorKind>(state.range(0));
    trial.ddce.params = est::make_params(0.1, bb::exponential_profile(4), 4);
    trial.n_data_symbols = 32;
    std::uint64_t seed = 1;
    for (auto _ : state) {
        benchmark::DoNotOptimize(ddce::run_ser_trial(trial, seed++));
    }
    state.SetItemsProcessed(state.iterations() * trial.n_data_symbols);
}
BENCHMARK(BM_DdceSymbol)
    ->Arg(static_cast<int>(est::EstimatorKind::ls))
    ->Arg(static_cast<int>(est::EstimatorKind::cr_mmse))
    ->Arg(static_cast<int>(est::EstimatorKind::mmse_direct));

} // namespace

BENCHMARK_MAIN();
