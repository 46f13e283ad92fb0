#include <gtest/gtest.h>

#include <cstdlib>
#include <set>

#include "oracles.hpp"
#include "tfi/harness.hpp"
#include "tfi/results_io.hpp"

using tfi::Complex;
using tfi::ReceiverKind;
using tfi::Scheme;
using tfi::SweepSpec;

namespace {

/// Restores TFI_THREADS on scope exit.
class ThreadsEnv {
public:
    ThreadsEnv() {
        if (const char* v = std::getenv("TFI_THREADS")) saved_ = v, had_ = true;
    }
    ~ThreadsEnv() {
        if (had_)
            setenv("TFI_THREADS", saved_.c_str(), 1);
        else
            unsetenv("TFI_THREADS");
    }
    void set(const char* v) { setenv("TFI_THREADS", v, 1); }

private:
    std::string saved_;
    bool had_ = false;
};

SweepSpec small_spec() {
    SweepSpec spec;
    spec.snr_grid_db = {6.0, 14.0};
    spec.g_grid = {1, 4};
    spec.schemes = {Scheme::kQpsk, Scheme::kQam16};
    spec.packets_per_point = 6;
    spec.payload_symbols = 2;
    spec.base_seed = 77;
    return spec;
}

}  // namespace

TEST(Taps, PresetsNormalisedAndScaledWithG) {
    for (const auto& name : tfi::taps_preset_names()) {
        const auto base = tfi::taps_preset(name, 1);
        EXPECT_EQ(base[0], Complex(1.0)) << name;
        tfi::ChannelScenario sc;
        sc.set_taps(base);
        EXPECT_NEAR(oracle::energy(sc.taps), 1.0, 1e-12) << name;
        for (int g : {2, 4, 8}) {
            const auto t = tfi::taps_preset(name, g);
            ASSERT_EQ(t.size(), (base.size() - 1) * static_cast<std::size_t>(g) + 1) << name;
            for (std::size_t k = 0; k < t.size(); ++k) {
                if (k % static_cast<std::size_t>(g) == 0)
                    EXPECT_EQ(t[k], base[k / static_cast<std::size_t>(g)]);
                else
                    EXPECT_EQ(t[k], Complex{});
            }
        }
    }
    EXPECT_EQ(tfi::taps_preset("flat", 8), (tfi::Samples{Complex(1.0)}));
    EXPECT_THROW(tfi::taps_preset("canyon", 1), std::invalid_argument);
}

TEST(Seeds, IndependentOfOverclockAndDistinctPerTrial) {
    std::set<std::uint64_t> seen;
    for (std::uint64_t t = 0; t < 1000; ++t) seen.insert(tfi::trial_seed(1, Scheme::kQpsk, 9.0, t));
    EXPECT_EQ(seen.size(), 1000u);
    EXPECT_NE(tfi::trial_seed(1, Scheme::kQpsk, 9.0, 0), tfi::trial_seed(2, Scheme::kQpsk, 9.0, 0));
    EXPECT_NE(tfi::trial_seed(1, Scheme::kQpsk, 9.0, 0), tfi::trial_seed(1, Scheme::kQam16, 9.0, 0));
    EXPECT_NE(tfi::trial_seed(1, Scheme::kQpsk, 9.0, 0), tfi::trial_seed(1, Scheme::kQpsk, 11.0, 0));
    EXPECT_EQ(tfi::trial_seed(1, Scheme::kQpsk, 0.0, 3), tfi::trial_seed(1, Scheme::kQpsk, -0.0, 3));
}

TEST(PrepareTrial, DeterministicAndMatchedAcrossG) {
    tfi::TrialPoint p;
    p.snr_db = 9.0;
    p.scheme = Scheme::kQam16;
    p.payload_symbols = 3;
    p.cfo_hz_max = 5000.0;
    const std::uint64_t seed = tfi::trial_seed(5, p.scheme, p.snr_db, 12);
    p.overclock = 1;
    const auto a1 = tfi::prepare_trial(p, seed);
    const auto a2 = tfi::prepare_trial(p, seed);
    EXPECT_EQ(a1.frame.payload_bits, a2.frame.payload_bits);
    EXPECT_EQ(a1.scenario.timing_offset, a2.scenario.timing_offset);
    EXPECT_EQ(a1.scenario.seed, a2.scenario.seed);
    p.overclock = 8;
    const auto b = tfi::prepare_trial(p, seed);
    EXPECT_EQ(a1.frame.payload_bits, b.frame.payload_bits);
    EXPECT_EQ(a1.scenario.cfo_hz, b.scenario.cfo_hz);
    EXPECT_LE(std::abs(a1.scenario.cfo_hz), 5000.0);
    const double t1 = static_cast<double>(a1.scenario.timing_offset) + a1.scenario.fractional_delay;
    const double t8 = (static_cast<double>(b.scenario.timing_offset) + b.scenario.fractional_delay) / 8.0;
    EXPECT_NEAR(t1, t8, 1e-9);
    EXPECT_GE(t1, 64.0);
    EXPECT_LT(t1, 80.0);
    EXPECT_GE(b.scenario.fractional_delay, 0.0);
    EXPECT_LT(b.scenario.fractional_delay, 1.0);
    EXPECT_EQ(b.rx.ofdm.overclock, 8);
    EXPECT_EQ(b.rx.scheme, Scheme::kQam16);
    EXPECT_EQ(b.rx.payload_symbols, 3u);
}

TEST(RunTrial, InfiniteSnrIsPerfect) {
    tfi::TrialPoint p;
    p.snr_db = tfi::kNoiselessSnr;
    p.overclock = 4;
    p.scheme = Scheme::kQam64;
    p.payload_symbols = 2;
    auto setup = tfi::prepare_trial(p, 3);
    // Whole-sample timing: the sync error is then exactly zero.
    setup.scenario.fractional_delay = 0.0;
    setup.scenario.timing_offset -= setup.scenario.timing_offset % 4;
    const auto out = tfi::run_trial(setup.frame, setup.scenario, setup.rx);
    EXPECT_FALSE(out.tfi_failed);
    EXPECT_FALSE(out.baseline_failed);
    EXPECT_EQ(out.tfi.ber, 0.0);
    EXPECT_EQ(out.baseline.ber, 0.0);
    EXPECT_EQ(out.tfi.sync_error, 0.0);
    EXPECT_EQ(out.baseline.sync_error, 0.0);
}

TEST(RunTrial, FractionalTimingBoundsSyncError) {
    tfi::TrialPoint p;
    p.snr_db = tfi::kNoiselessSnr;
    p.overclock = 8;
    p.payload_symbols = 1;
    for (std::uint64_t s = 0; s < 10; ++s) {
        const auto setup = tfi::prepare_trial(p, s);
        const auto out = tfi::run_trial(setup.frame, setup.scenario, setup.rx);
        EXPECT_LE(std::abs(out.tfi.sync_error), 0.5 / 8 + 1e-12);
        EXPECT_LE(std::abs(out.baseline.sync_error), 0.5 + 1e-12);
    }
}

TEST(RunTrial, SameSeedSameDiagnostics) {
    tfi::TrialPoint p;
    p.snr_db = 7.0;
    p.overclock = 2;
    p.scheme = Scheme::kQpsk;
    p.payload_symbols = 3;
    const auto setup = tfi::prepare_trial(p, 99);
    const auto a = tfi::run_trial(setup.frame, setup.scenario, setup.rx, true);
    const auto b = tfi::run_trial(setup.frame, setup.scenario, setup.rx, true);
    EXPECT_EQ(tfi::capture_checksum(a.stream), tfi::capture_checksum(b.stream));
    EXPECT_EQ(a.tfi.decoded_bits, b.tfi.decoded_bits);
    EXPECT_EQ(a.tfi.sync_lag, b.tfi.sync_lag);
    EXPECT_EQ(a.tfi.cfo_fine_hz, b.tfi.cfo_fine_hz);
    EXPECT_EQ(a.baseline.decoded_bits, b.baseline.decoded_bits);
    EXPECT_EQ(a.tfi.per_copy_evm, b.tfi.per_copy_evm);
}

TEST(RunTrial, ReceiverFailureBecomesMissRecord) {
    tfi::TrialPoint p;
    p.snr_db = 20.0;
    p.payload_symbols = 1;
    auto setup = tfi::prepare_trial(p, 4);
    setup.rx.payload_symbols = 400;  // the capture is far shorter
    const auto out = tfi::run_trial(setup.frame, setup.scenario, setup.rx);
    EXPECT_TRUE(out.tfi_failed);
    EXPECT_TRUE(out.tfi.missed);
    EXPECT_EQ(out.tfi.ber, 1.0);
    EXPECT_FALSE(out.tfi_error.empty());
}

TEST(Checksum, SensitiveToEverySample) {
    tfi::Samples x = oracle::random_samples(32, 1);
    const auto h = tfi::capture_checksum(x);
    x[31] = Complex(x[31].real(), std::nextafter(x[31].imag(), 10.0));
    EXPECT_NE(tfi::capture_checksum(x), h);
}

TEST(SweepSpec, DefaultsAndValidation) {
    const SweepSpec d = SweepSpec::defaults();
    ASSERT_EQ(d.snr_grid_db.size(), 14u);
    EXPECT_EQ(d.snr_grid_db.front(), 9.0);
    EXPECT_EQ(d.snr_grid_db.back(), 35.0);
    EXPECT_EQ(d.g_grid, (std::vector<int>{1, 2, 4, 8}));
    EXPECT_EQ(d.schemes.size(), 4u);
    EXPECT_EQ(d.packets_per_point, 3000u);
    EXPECT_EQ(d.payload_symbols, 20u);
    EXPECT_NO_THROW(d.validate());

    SweepSpec empty = small_spec();
    empty.snr_grid_db.clear();
    EXPECT_THROW(empty.validate(), std::invalid_argument);
    SweepSpec zero = small_spec();
    zero.packets_per_point = 0;
    EXPECT_THROW(zero.validate(), std::invalid_argument);
    SweepSpec bad_g = small_spec();
    bad_g.g_grid = {3};
    EXPECT_THROW(bad_g.validate(), std::invalid_argument);
    SweepSpec bad_taps = small_spec();
    bad_taps.taps = "canyon";
    EXPECT_THROW(bad_taps.validate(), std::invalid_argument);
    EXPECT_THROW(SweepSpec::snr_range(5.0, 1.0, 1.0), std::invalid_argument);
    EXPECT_EQ(SweepSpec::snr_range(10.0, 22.0, 1.0).size(), 13u);
}

TEST(Sweep, OnePointTenPackets) {
    SweepSpec spec;
    spec.snr_grid_db = {12.0};
    spec.g_grid = {2};
    spec.schemes = {Scheme::kBpsk};
    spec.packets_per_point = 10;
    spec.payload_symbols = 1;
    const auto rows = tfi::run_sweep(spec);
    ASSERT_EQ(rows.size(), 2u);  // one per receiver
    for (const auto& r : rows) {
        EXPECT_EQ(r.trials, 10u);
        EXPECT_EQ(r.g, 2);
        EXPECT_EQ(r.snr_db, 12.0);
        EXPECT_EQ(r.wall_time_s, 0.0);
    }
    EXPECT_EQ(rows[0].receiver, ReceiverKind::kTfi);
    EXPECT_EQ(rows[1].receiver, ReceiverKind::kBaseline);
}

TEST(Sweep, RowsSortedBySchemeGSnrReceiver) {
    const auto rows = tfi::run_sweep(small_spec());
    ASSERT_EQ(rows.size(), 2u * 2u * 2u * 2u);
    for (std::size_t i = 1; i < rows.size(); ++i) {
        const auto& a = rows[i - 1];
        const auto& b = rows[i];
        const auto ka = std::make_tuple(a.scheme, a.g, a.snr_db, a.receiver);
        const auto kb = std::make_tuple(b.scheme, b.g, b.snr_db, b.receiver);
        EXPECT_LT(ka, kb);
    }
}

TEST(Sweep, IdenticalAcrossRunsAndThreadCounts) {
    ThreadsEnv env;
    env.set("1");
    const auto a = tfi::run_sweep(small_spec());
    env.set("3");
    const auto b = tfi::run_sweep(small_spec());
    EXPECT_EQ(a, b);
    EXPECT_EQ(tfi::to_csv(a), tfi::to_csv(b));
}

TEST(Sweep, StderrRecomputedFromTrialLog) {
    std::vector<tfi::TrialRecord> log;
    const auto rows = tfi::run_sweep(small_spec(), &log);
    ASSERT_EQ(log.size(), 2u * 8u * 6u);
    for (const auto& row : rows) {
        std::vector<double> bers;
        std::size_t missed = 0;
        for (const auto& r : log) {
            if (r.scheme == row.scheme && r.g == row.g && r.snr_db == row.snr_db && r.receiver == row.receiver) {
                bers.push_back(r.ber);
                missed += r.missed ? 1 : 0;
            }
        }
        ASSERT_EQ(bers.size(), row.trials);
        double mean = 0.0;
        for (double b : bers) mean += b;
        mean /= static_cast<double>(bers.size());
        double ss = 0.0;
        for (double b : bers) ss += (b - mean) * (b - mean);
        const double n = static_cast<double>(bers.size());
        const double se = std::sqrt(ss / (n - 1.0)) / std::sqrt(n);
        EXPECT_NEAR(row.ber_mean, mean, 1e-12);
        EXPECT_NEAR(row.ber_stderr, se, 1e-12);
        EXPECT_NEAR(row.miss_rate, static_cast<double>(missed) / n, 1e-12);
        EXPECT_GE(row.ber_mean, 0.0);
        EXPECT_LE(row.ber_mean, 1.0);
    }
}

TEST(Aggregate, MissesExcludedFromSyncStatistics) {
    std::vector<tfi::TrialRecord> recs(4);
    for (std::size_t i = 0; i < recs.size(); ++i) {
        recs[i].trial = i;
        recs[i].ber = 0.1 * static_cast<double>(i);
        recs[i].sync_error = i % 2 ? -0.5 : 0.25;
        recs[i].cfo_error_hz = 3.0;
    }
    recs[3].missed = true;
    recs[3].ber = 1.0;
    const auto row = tfi::aggregate(recs, tfi::NoiseModel::kWideband);
    EXPECT_EQ(row.trials, 4u);
    EXPECT_DOUBLE_EQ(row.miss_rate, 0.25);
    EXPECT_DOUBLE_EQ(row.ber_mean, (0.0 + 0.1 + 0.2 + 1.0) / 4.0);
    EXPECT_DOUBLE_EQ(row.mean_abs_sync_error, (0.25 + 0.5 + 0.25) / 3.0);
    EXPECT_DOUBLE_EQ(row.cfo_rmse_hz, 3.0);

    for (auto& r : recs) r.missed = true;
    const auto none = tfi::aggregate(recs, tfi::NoiseModel::kWideband);
    EXPECT_TRUE(std::isnan(none.mean_abs_sync_error));
    EXPECT_TRUE(std::isnan(none.cfo_rmse_hz));
    EXPECT_EQ(none.miss_rate, 1.0);
}

TEST(Sweep, TimingRecordedOnlyOnRequest) {
    SweepSpec spec = small_spec();
    spec.snr_grid_db = {14.0};
    spec.g_grid = {1};
    spec.schemes = {Scheme::kBpsk};
    spec.record_timing = true;
    const auto rows = tfi::run_sweep(spec);
    for (const auto& r : rows) EXPECT_GT(r.wall_time_s, 0.0);
}

TEST(Sweep, ProgressReachesTotal) {
    SweepSpec spec = small_spec();
    std::size_t last_done = 0;
    std::size_t last_total = 0;
    tfi::run_sweep(spec, nullptr, [&](std::size_t done, std::size_t total) {
        last_done = done;
        last_total = total;
    });
    EXPECT_EQ(last_total, 8u * 6u);
    EXPECT_EQ(last_done, last_total);
}

TEST(Calibration, FalseAlarmMatchesQuantile) {
    const double t = tfi::calibrate_energy_threshold(400, 10000, 32, 5, 0.9);
    tfi::DetectorConfig cfg;
    cfg.energy_threshold = t;
    // The full detector also requires the plateau, so it fires no more often
    // than the energy gate alone.
    EXPECT_LE(tfi::detector_false_alarm_rate(cfg, 400, 10000, 5), 0.1 + 1e-12);
    EXPECT_THROW(tfi::calibrate_energy_threshold(0, 100, 32, 1), std::invalid_argument);
}
