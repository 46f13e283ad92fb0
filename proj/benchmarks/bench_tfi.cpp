#include <benchmark/benchmark.h>

#include <random>

#include "tfi/fft.hpp"
#include "tfi/harness.hpp"
#include "tfi/receiver.hpp"
#include "tfi/transmitter.hpp"

namespace {

tfi::Samples noise(std::size_t n, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> d;
    tfi::Samples x(n);
    for (auto& v : x) v = {d(rng), d(rng)};
    return x;
}

void BM_Fft(benchmark::State& state) {
    const auto n = static_cast<std::size_t>(state.range(0));
    const tfi::Samples x = noise(n, 1);
    tfi::Samples y;
    for (auto _ : state) {
        y = x;
        tfi::fft_inplace(y);
        benchmark::DoNotOptimize(y.data());
    }
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(n));
}
BENCHMARK(BM_Fft)->Arg(64)->Arg(512);

void BM_Upsample(benchmark::State& state) {
    const int g = static_cast<int>(state.range(0));
    const tfi::Samples x = noise(2048, 2);
    for (auto _ : state) benchmark::DoNotOptimize(tfi::upsample_bandlimited(x, g));
}
BENCHMARK(BM_Upsample)->Arg(2)->Arg(8);

void BM_ReceiveFrame(benchmark::State& state) {
    tfi::TrialPoint p;
    p.snr_db = 15.0;
    p.overclock = static_cast<int>(state.range(0));
    p.scheme = tfi::Scheme::kQam16;
    const auto setup = tfi::prepare_trial(p, 42);
    const auto cap = tfi::apply_scenario(setup.frame, setup.scenario, setup.rx.ofdm);
    tfi::RxConfig rx = setup.rx;
    rx.detector.noise_floor = cap.noise_variance;
    for (auto _ : state) benchmark::DoNotOptimize(tfi::receive_frame(cap.stream, rx));
}
BENCHMARK(BM_ReceiveFrame)->Arg(1)->Arg(2)->Arg(4)->Arg(8)->Unit(benchmark::kMicrosecond);

void BM_Trial(benchmark::State& state) {
    tfi::TrialPoint p;
    p.snr_db = 9.0;
    p.overclock = static_cast<int>(state.range(0));
    p.scheme = tfi::Scheme::kQam16;
    std::uint64_t t = 0;
    for (auto _ : state) {
        const auto setup = tfi::prepare_trial(p, tfi::trial_seed(1, p.scheme, p.snr_db, t++));
        benchmark::DoNotOptimize(tfi::run_trial(setup.frame, setup.scenario, setup.rx));
    }
}
BENCHMARK(BM_Trial)->Arg(1)->Arg(8)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
