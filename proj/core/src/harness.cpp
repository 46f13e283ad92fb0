#include "tfi/harness.hpp"

#include <algorithm>
#include <atomic>
#include <bit>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <mutex>
#include <random>
#include <stdexcept>
#include <thread>
#include <utility>

namespace tfi {

std::string_view to_string(ReceiverKind kind) { return kind == ReceiverKind::kTfi ? "tfi" : "baseline"; }

namespace {

struct TapSpec {
    int delay;  // base samples
    Complex amplitude;
};

struct Preset {
    std::string_view name;
    std::vector<TapSpec> taps;
};

const std::vector<Preset>& presets() {
    static const std::vector<Preset> table = {
        {"flat", {{0, {1.0, 0.0}}}},
        {"lab", {{0, {1.0, 0.0}}, {1, {0.35, -0.2}}, {2, {0.0, 0.15}}}},
        {"hallway", {{0, {1.0, 0.0}}, {2, {0.0, 0.5}}, {4, {0.3, 0.0}}, {6, {0.0, -0.2}}}},
        {"corridor", {{0, {1.0, 0.0}}, {3, {0.6, 0.0}}, {6, {0.0, 0.4}}, {9, {0.25, 0.0}}}},
    };
    return table;
}

// Uniform double in [0, 1) from the top 53 bits.
double unit_uniform(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

}  // namespace

Samples taps_preset(std::string_view name, int overclock) {
    for (const auto& preset : presets()) {
        if (preset.name != name) continue;
        int max_delay = 0;
        for (const auto& t : preset.taps) max_delay = std::max(max_delay, t.delay);
        Samples taps(static_cast<std::size_t>(max_delay * overclock + 1));
        for (const auto& t : preset.taps) taps[static_cast<std::size_t>(t.delay * overclock)] = t.amplitude;
        return taps;
    }
    throw std::invalid_argument("unknown taps preset: " + std::string(name));
}

std::vector<std::string> taps_preset_names() {
    std::vector<std::string> names;
    for (const auto& preset : presets()) names.emplace_back(preset.name);
    return names;
}

std::uint64_t mix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

std::uint64_t trial_seed(std::uint64_t base_seed, Scheme scheme, double snr_db, std::uint64_t trial) {
    std::uint64_t h = mix64(base_seed);
    h = mix64(h ^ static_cast<std::uint64_t>(scheme));
    h = mix64(h ^ std::bit_cast<std::uint64_t>(snr_db + 0.0));
    return mix64(h ^ trial);
}

TrialSetup prepare_trial(const TrialPoint& point, std::uint64_t seed, const RxConfig& rx_template) {
    std::mt19937_64 rng(seed);
    const OfdmConfig cfg = OfdmConfig::standard(point.overclock);
    const std::size_t nbits =
        point.payload_symbols * cfg.data_subcarriers.size() * static_cast<std::size_t>(bits_per_symbol(point.scheme));

    Bits bits(nbits);
    for (std::size_t i = 0; i < nbits; i += 64) {
        const std::uint64_t word = rng();
        for (std::size_t b = 0; b < 64 && i + b < nbits; ++b) bits[i + b] = static_cast<std::uint8_t>((word >> b) & 1U);
    }
    const double k = 64.0 + static_cast<double>(rng() >> 60);
    const double u = unit_uniform(rng);
    const double cfo_u = unit_uniform(rng);
    const std::uint64_t noise_seed = mix64(rng());

    TrialSetup setup;
    setup.frame = build_frame(bits, point.scheme, cfg);
    setup.scenario.set_taps(taps_preset(point.taps, point.overclock));
    setup.scenario.cfo_hz = (2.0 * cfo_u - 1.0) * point.cfo_hz_max;
    const double offset = (k + u) * point.overclock;
    setup.scenario.timing_offset = static_cast<std::size_t>(std::floor(offset));
    setup.scenario.fractional_delay = offset - std::floor(offset);
    setup.scenario.snr_db = point.snr_db;
    setup.scenario.noise_model = point.noise_model;
    setup.scenario.seed = noise_seed;

    setup.rx = rx_template;
    setup.rx.ofdm = cfg;
    setup.rx.scheme = point.scheme;
    setup.rx.payload_symbols = setup.frame.num_payload_symbols();
    return setup;
}

namespace {

RxDiagnostics failure_diagnostics(const GroundTruth& truth, int overclock) {
    RxDiagnostics d;
    d.missed = true;
    d.per_copy_evm.assign(static_cast<std::size_t>(overclock), 0.0);
    d.scored_bits = truth.bits.size();
    d.bit_errors = d.scored_bits;
    d.ber = 1.0;
    return d;
}

}  // namespace

TrialOutcome run_trial(const FrameBlueprint& frame, const ChannelScenario& scenario, const RxConfig& rx,
                       bool keep_stream) {
    Capture capture = apply_scenario(frame, scenario, rx.ofdm);
    RxConfig cfg = rx;
    cfg.detector.noise_floor = capture.noise_variance;

    GroundTruth truth;
    truth.ltf_start = capture.true_ltf_start();
    truth.cfo_hz = capture.cfo_hz;
    truth.bits = std::span<const std::uint8_t>(frame.payload_bits).first(frame.scored_bits());
    truth.tx_symbols = &frame.tx_symbols;

    TrialOutcome out;
    out.ltf_start = capture.true_ltf_start();
    out.cfo_hz = capture.cfo_hz;
    out.noise_variance = capture.noise_variance;
    try {
        out.tfi = receive_frame(capture.stream, cfg, &truth);
    } catch (const std::exception& e) {
        out.tfi_failed = true;
        out.tfi_error = e.what();
        out.tfi = failure_diagnostics(truth, cfg.ofdm.overclock);
    }
    try {
        out.baseline = receive_frame_baseline(capture.stream, cfg, &truth);
    } catch (const std::exception& e) {
        out.baseline_failed = true;
        out.baseline_error = e.what();
        out.baseline = failure_diagnostics(truth, 1);
    }
    if (keep_stream) out.stream = std::move(capture.stream);
    return out;
}

std::uint64_t capture_checksum(std::span<const Complex> stream) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (const Complex& v : stream) {
        for (double part : {v.real(), v.imag()}) {
            std::uint64_t bits = std::bit_cast<std::uint64_t>(part);
            for (int i = 0; i < 8; ++i) {
                h ^= bits & 0xffU;
                h *= 0x100000001b3ULL;
                bits >>= 8;
            }
        }
    }
    return h;
}

std::vector<double> SweepSpec::snr_range(double min_db, double max_db, double step_db) {
    if (!(step_db > 0.0) || max_db < min_db) throw std::invalid_argument("invalid SNR range");
    std::vector<double> grid;
    const auto count = static_cast<long long>(std::floor((max_db - min_db) / step_db + 1e-9));
    for (long long i = 0; i <= count; ++i) grid.push_back(min_db + static_cast<double>(i) * step_db);
    return grid;
}

SweepSpec SweepSpec::defaults() {
    SweepSpec spec;
    spec.snr_grid_db = snr_range(9.0, 35.0, 2.0);
    return spec;
}

void SweepSpec::validate() const {
    if (snr_grid_db.empty() || g_grid.empty() || schemes.empty())
        throw std::invalid_argument("sweep grids must be nonempty");
    if (packets_per_point < 1) throw std::invalid_argument("packets_per_point must be at least 1");
    if (payload_symbols < 1) throw std::invalid_argument("payload_symbols must be at least 1");
    for (int g : g_grid)
        if (!is_supported_overclock(g)) throw std::invalid_argument("unsupported overclock factor " + std::to_string(g));
    for (double snr : snr_grid_db)
        if (std::isnan(snr)) throw std::invalid_argument("SNR grid contains NaN");
    if (!(cfo_hz_max >= 0.0)) throw std::invalid_argument("cfo_hz_max must be nonnegative");
    (void)taps_preset(taps, 1);
}

SweepResultRow aggregate(std::span<const TrialRecord> records, NoiseModel noise_model) {
    SweepResultRow row;
    row.noise_model = noise_model;
    row.trials = records.size();
    if (records.empty()) return row;
    row.snr_db = records[0].snr_db;
    row.g = records[0].g;
    row.scheme = records[0].scheme;
    row.receiver = records[0].receiver;

    const double n = static_cast<double>(records.size());
    double ber_sum = 0.0;
    std::size_t missed = 0;
    for (const auto& r : records) {
        ber_sum += r.ber;
        missed += r.missed ? 1 : 0;
    }
    row.ber_mean = ber_sum / n;
    double ss = 0.0;
    for (const auto& r : records) ss += (r.ber - row.ber_mean) * (r.ber - row.ber_mean);
    row.ber_stderr = records.size() > 1 ? std::sqrt(ss / (n - 1.0)) / std::sqrt(n) : 0.0;
    row.miss_rate = static_cast<double>(missed) / n;

    const std::size_t detected = records.size() - missed;
    if (detected == 0) {
        const double nan = std::numeric_limits<double>::quiet_NaN();
        row.mean_abs_sync_error = row.sync_error_std = row.cfo_rmse_hz = nan;
        return row;
    }
    const double m = static_cast<double>(detected);
    double abs_sum = 0.0;
    double err_sum = 0.0;
    double cfo_sq = 0.0;
    for (const auto& r : records) {
        if (r.missed) continue;
        abs_sum += std::abs(r.sync_error);
        err_sum += r.sync_error;
        cfo_sq += r.cfo_error_hz * r.cfo_error_hz;
    }
    row.mean_abs_sync_error = abs_sum / m;
    row.cfo_rmse_hz = std::sqrt(cfo_sq / m);
    const double err_mean = err_sum / m;
    double var = 0.0;
    for (const auto& r : records)
        if (!r.missed) var += (r.sync_error - err_mean) * (r.sync_error - err_mean);
    row.sync_error_std = detected > 1 ? std::sqrt(var / (m - 1.0)) : 0.0;
    return row;
}

unsigned worker_threads() {
    if (const char* env = std::getenv("TFI_THREADS")) {
        char* end = nullptr;
        const long v = std::strtol(env, &end, 10);
        if (end != env && v > 0) return static_cast<unsigned>(v);
    }
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : hw;
}

namespace {

TrialRecord make_record(const TrialPoint& point, ReceiverKind kind, std::uint64_t trial, const RxDiagnostics& d,
                        bool failed, double true_cfo) {
    TrialRecord r;
    r.snr_db = point.snr_db;
    r.g = point.overclock;
    r.scheme = point.scheme;
    r.receiver = kind;
    r.trial = trial;
    r.missed = d.missed || failed;
    r.ber = d.ber;
    if (!r.missed) {
        r.sync_error = d.sync_error;
        r.cfo_error_hz = d.cfo_applied_hz - true_cfo;
    }
    return r;
}

}  // namespace

std::vector<SweepResultRow> run_sweep(const SweepSpec& spec, std::vector<TrialRecord>* records,
                                      const ProgressFn& progress) {
    spec.validate();

    std::vector<TrialPoint> points;
    for (Scheme scheme : spec.schemes) {
        for (int g : spec.g_grid) {
            for (double snr : spec.snr_grid_db) {
                TrialPoint p;
                p.snr_db = snr;
                p.overclock = g;
                p.scheme = scheme;
                p.noise_model = spec.noise_model;
                p.taps = spec.taps;
                p.payload_symbols = spec.payload_symbols;
                p.cfo_hz_max = spec.cfo_hz_max;
                points.push_back(std::move(p));
            }
        }
    }

    const std::size_t per_point = spec.packets_per_point;
    const std::size_t total = points.size() * per_point;
    std::vector<TrialRecord> log(2 * total);
    std::vector<double> seconds(total, 0.0);

    std::atomic<std::size_t> next{0};
    std::atomic<std::size_t> done{0};
    std::mutex progress_mutex;
    std::exception_ptr fatal;
    std::mutex fatal_mutex;

    auto worker = [&] {
        for (;;) {
            const std::size_t task = next.fetch_add(1);
            if (task >= total) return;
            const TrialPoint& point = points[task / per_point];
            const std::uint64_t trial = task % per_point;
            try {
                const auto t0 = std::chrono::steady_clock::now();
                const TrialSetup setup =
                    prepare_trial(point, trial_seed(spec.base_seed, point.scheme, point.snr_db, trial), spec.rx_template);
                const TrialOutcome out = run_trial(setup.frame, setup.scenario, setup.rx);
                if (spec.record_timing)
                    seconds[task] = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
                log[2 * task] = make_record(point, ReceiverKind::kTfi, trial, out.tfi, out.tfi_failed, out.cfo_hz);
                log[2 * task + 1] =
                    make_record(point, ReceiverKind::kBaseline, trial, out.baseline, out.baseline_failed, out.cfo_hz);
            } catch (...) {
                std::lock_guard lock(fatal_mutex);
                if (!fatal) fatal = std::current_exception();
                next.store(total);
                return;
            }
            const std::size_t finished = done.fetch_add(1) + 1;
            if (progress && (finished % 256 == 0 || finished == total)) {
                std::lock_guard lock(progress_mutex);
                progress(finished, total);
            }
        }
    };

    const unsigned threads = std::max(1U, std::min<unsigned>(worker_threads(), static_cast<unsigned>(total)));
    if (threads == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (unsigned i = 0; i < threads; ++i) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }
    if (fatal) std::rethrow_exception(fatal);

    std::vector<SweepResultRow> rows;
    std::vector<TrialRecord> subset;
    subset.reserve(per_point);
    for (std::size_t p = 0; p < points.size(); ++p) {
        double wall = 0.0;
        for (std::size_t t = 0; t < per_point; ++t) wall += seconds[p * per_point + t];
        for (int kind = 0; kind < 2; ++kind) {
            subset.clear();
            for (std::size_t t = 0; t < per_point; ++t) subset.push_back(log[2 * (p * per_point + t) + kind]);
            SweepResultRow row = aggregate(subset, spec.noise_model);
            row.wall_time_s = wall;
            rows.push_back(row);
        }
    }
    std::stable_sort(rows.begin(), rows.end(), [](const SweepResultRow& a, const SweepResultRow& b) {
        if (a.scheme != b.scheme) return a.scheme < b.scheme;
        if (a.g != b.g) return a.g < b.g;
        if (a.snr_db != b.snr_db) return a.snr_db < b.snr_db;
        return a.receiver < b.receiver;
    });
    if (records) *records = std::move(log);
    return rows;
}

namespace {

Samples unit_noise(std::mt19937_64& rng, std::size_t length) {
    std::normal_distribution<double> normal(0.0, std::sqrt(0.5));
    Samples x(length);
    for (auto& v : x) {
        const double re = normal(rng);
        const double im = normal(rng);
        v = Complex(re, im);
    }
    return x;
}

}  // namespace

double calibrate_energy_threshold(std::size_t streams, std::size_t length, int window, std::uint64_t seed,
                                  double quantile) {
    const std::size_t w = static_cast<std::size_t>(window);
    if (streams == 0 || w == 0 || length < w || !(quantile > 0.0 && quantile < 1.0))
        throw std::invalid_argument("invalid calibration parameters");
    std::vector<double> maxima(streams);
    for (std::size_t s = 0; s < streams; ++s) {
        std::mt19937_64 rng(mix64(seed + s));
        const Samples x = unit_noise(rng, length);
        double e = 0.0;
        for (std::size_t k = 0; k < w; ++k) e += std::norm(x[k]);
        double best = e;
        for (std::size_t n = w; n < length; ++n) {
            e += std::norm(x[n]) - std::norm(x[n - w]);
            best = std::max(best, e);
        }
        maxima[s] = best;
    }
    std::sort(maxima.begin(), maxima.end());
    const auto idx = static_cast<std::size_t>(std::ceil(quantile * static_cast<double>(streams))) - 1;
    return maxima[std::min(idx, streams - 1)];
}

double detector_false_alarm_rate(const DetectorConfig& cfg, std::size_t streams, std::size_t length,
                                 std::uint64_t seed) {
    if (streams == 0) throw std::invalid_argument("need at least one stream");
    std::size_t alarms = 0;
    for (std::size_t s = 0; s < streams; ++s) {
        std::mt19937_64 rng(mix64(seed + s));
        const Samples x = unit_noise(rng, length);
        if (detect_packet(x, cfg)) ++alarms;
    }
    return static_cast<double>(alarms) / static_cast<double>(streams);
}

}  // namespace tfi
