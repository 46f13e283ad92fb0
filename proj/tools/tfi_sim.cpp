// tfi_sim: Monte Carlo sweeps, single trials, capture replay and detector
// calibration for the overclocked OFDM receiver.
//
// Exit codes: 0 success, 1 argument error, 2 I/O error.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "tfi/harness.hpp"
#include "tfi/iq_capture.hpp"
#include "tfi/preamble.hpp"
#include "tfi/results_io.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitArgs = 1;
constexpr int kExitIo = 2;

struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ReceiverOptions {
    std::string combine = "uniform";
    std::string fine_cfo = "report";

    tfi::RxConfig rx() const {
        tfi::RxConfig cfg;
        cfg.combine = combine == "inverse-variance" ? tfi::CombineWeights::kInverseVariance
                                                    : tfi::CombineWeights::kUniform;
        cfg.fine_cfo = fine_cfo == "apply" ? tfi::FineCfoMode::kApply : tfi::FineCfoMode::kReportOnly;
        return cfg;
    }
};

void add_receiver_options(CLI::App* cmd, ReceiverOptions& opts) {
    cmd->add_option("--combine", opts.combine, "Copy combining weights")
        ->check(CLI::IsMember({"uniform", "inverse-variance"}))
        ->capture_default_str();
    cmd->add_option("--fine-cfo", opts.fine_cfo, "Use of the fine CFO estimate")
        ->check(CLI::IsMember({"report", "apply"}))
        ->capture_default_str();
}

std::vector<std::string> all_scheme_names() {
    std::vector<std::string> names;
    for (tfi::Scheme s : tfi::kAllSchemes) names.emplace_back(tfi::to_string(s));
    return names;
}

void print_diag(const char* label, const tfi::RxDiagnostics& d, bool failed, const std::string& error) {
    std::printf("[%s]\n", label);
    if (failed) std::printf("  failure           %s\n", error.c_str());
    std::printf("  missed            %s\n", d.missed ? "yes" : "no");
    if (!d.missed) {
        std::printf("  detect_index      %zu (complete %zu)\n", d.detect_index, d.detect_complete);
        std::printf("  sync_lag          %zu (base index %zu, residue %+.4f)\n", d.sync_lag, d.sync_index,
                    d.sync_residue);
        std::printf("  sync_peak_ratio   %.4f\n", d.sync_peak_ratio);
        std::printf("  sync_error        %s\n", tfi::format_real(d.sync_error).c_str());
        std::printf("  cfo_coarse_hz     %.3f\n", d.cfo_coarse_hz);
        std::printf("  cfo_fine_hz       %.3f\n", d.cfo_fine_hz);
        std::printf("  cfo_applied_hz    %.3f\n", d.cfo_applied_hz);
        std::printf("  noise_var_est     %.6g\n", d.noise_var_estimate);
        std::printf("  per_copy_evm     ");
        for (double e : d.per_copy_evm) std::printf(" %.4f", e);
        std::printf("\n");
    }
    if (d.scored_bits) std::printf("  ber               %.6g (%zu / %zu)\n", d.ber, d.bit_errors, d.scored_bits);
}

/// Noise-floor estimate for captures without ground truth: the smallest
/// 32-sample mean power on the base-rate copy, hop 16.
double estimate_noise_floor(std::span<const tfi::Complex> stream, int overclock) {
    const std::size_t g = static_cast<std::size_t>(overclock);
    const std::size_t n = stream.size() / g;
    double floor = 0.0;
    bool seen = false;
    for (std::size_t start = 0; start + 32 <= n; start += 16) {
        double e = 0.0;
        for (std::size_t k = 0; k < 32; ++k) e += std::norm(stream[(start + k) * g]);
        e /= 32.0;
        if (!seen || e < floor) floor = e;
        seen = true;
    }
    return floor;
}

int run_sweep_cmd(double snr_min, double snr_max, double snr_step, const std::vector<int>& gs,
                  const std::vector<std::string>& schemes, const std::string& noise, const std::string& taps,
                  std::size_t packets, std::size_t symbols, std::uint64_t seed, double cfo_max, bool timing,
                  bool progress, const std::string& out, const std::string& format, const ReceiverOptions& ropts) {
    tfi::SweepSpec spec;
    spec.snr_grid_db = tfi::SweepSpec::snr_range(snr_min, snr_max, snr_step);
    spec.g_grid = gs;
    spec.schemes.clear();
    for (const auto& s : schemes) spec.schemes.push_back(tfi::parse_scheme(s));
    spec.noise_model = tfi::parse_noise_model(noise);
    spec.taps = taps;
    spec.packets_per_point = packets;
    spec.payload_symbols = symbols;
    spec.base_seed = seed;
    spec.cfo_hz_max = cfo_max;
    spec.record_timing = timing;
    spec.rx_template = ropts.rx();
    spec.validate();
    const auto fmt = tfi::parse_result_format(format);

    tfi::ProgressFn report;
    if (progress)
        report = [](std::size_t done, std::size_t total) {
            std::fprintf(stderr, "\r%zu / %zu trials", done, total);
            if (done == total) std::fprintf(stderr, "\n");
        };
    const auto rows = tfi::run_sweep(spec, nullptr, report);

    if (out == "-") {
        std::cout << (fmt == tfi::ResultFormat::kCsv ? tfi::to_csv(rows) : tfi::to_json(rows));
        std::cout.flush();
        if (!std::cout) throw IoError("write to stdout failed");
        return kExitOk;
    }
    try {
        tfi::emit_results(rows, fmt, out);
    } catch (const std::runtime_error& e) {
        throw IoError(e.what());
    }
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Overclocked OFDM receiver simulator"};
    app.require_subcommand(1);

    // sweep
    auto* sweep = app.add_subcommand("sweep", "Monte Carlo sweep over SNR, G and modulation");
    double snr_min = 9.0, snr_max = 35.0, snr_step = 2.0;
    std::vector<int> gs{1, 2, 4, 8};
    std::vector<std::string> schemes = all_scheme_names();
    std::string noise = "wideband";
    std::string taps = "flat";
    std::size_t packets = 3000;
    std::size_t symbols = 20;
    std::uint64_t seed = 1;
    double cfo_max = 0.0;
    bool timing = false;
    bool progress = false;
    std::string out = "-";
    std::string format = "csv";
    ReceiverOptions sweep_rx;
    sweep->add_option("--snr-min", snr_min, "Lowest SNR, dB")->capture_default_str();
    sweep->add_option("--snr-max", snr_max, "Highest SNR, dB")->capture_default_str();
    sweep->add_option("--snr-step", snr_step, "SNR step, dB")->check(CLI::PositiveNumber)->capture_default_str();
    sweep->add_option("--g", gs, "Overclock factors")->check(CLI::IsMember({1, 2, 4, 8}))->delimiter(',');
    sweep->add_option("--scheme", schemes, "Modulations")->delimiter(',');
    sweep->add_option("--noise-model", noise, "Receiver noise model")
        ->check(CLI::IsMember({"wideband", "brickwall"}))
        ->capture_default_str();
    sweep->add_option("--taps", taps, "Multipath preset")
        ->check(CLI::IsMember(tfi::taps_preset_names()))
        ->capture_default_str();
    sweep->add_option("--packets", packets, "Packets per grid point")->check(CLI::PositiveNumber)->capture_default_str();
    sweep->add_option("--payload-symbols", symbols, "OFDM symbols per packet")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    sweep->add_option("--seed", seed, "Base seed")->capture_default_str();
    sweep->add_option("--cfo-max", cfo_max, "Per-trial CFO drawn uniformly in +-Hz")
        ->check(CLI::NonNegativeNumber)
        ->capture_default_str();
    sweep->add_flag("--timing", timing, "Record wall_time_s (output is then not byte-reproducible)");
    sweep->add_flag("--progress", progress, "Report progress on stderr");
    sweep->add_option("--out", out, "Output path, '-' for stdout")->capture_default_str();
    sweep->add_option("--format", format, "Output format")->check(CLI::IsMember({"csv", "json"}))->capture_default_str();
    add_receiver_options(sweep, sweep_rx);

    // trial
    auto* trial = app.add_subcommand("trial", "One capture through both receivers, verbose");
    double t_snr = 9.0;
    int t_g = 8;
    std::string t_scheme = "16QAM";
    std::string t_noise = "wideband";
    std::string t_taps = "flat";
    std::size_t t_symbols = 20;
    std::uint64_t t_seed = 1;
    std::uint64_t t_index = 0;
    double t_cfo = 0.0;
    std::string dump_iq;
    ReceiverOptions trial_rx;
    trial->add_option("--snr", t_snr, "SNR, dB (inf for noiseless)")->capture_default_str();
    trial->add_option("--g", t_g, "Overclock factor")->check(CLI::IsMember({1, 2, 4, 8}))->capture_default_str();
    trial->add_option("--scheme", t_scheme, "Modulation")->capture_default_str();
    trial->add_option("--noise-model", t_noise, "Receiver noise model")
        ->check(CLI::IsMember({"wideband", "brickwall"}))
        ->capture_default_str();
    trial->add_option("--taps", t_taps, "Multipath preset")
        ->check(CLI::IsMember(tfi::taps_preset_names()))
        ->capture_default_str();
    trial->add_option("--payload-symbols", t_symbols, "OFDM symbols")->check(CLI::PositiveNumber)->capture_default_str();
    trial->add_option("--seed", t_seed, "Base seed")->capture_default_str();
    trial->add_option("--trial", t_index, "Trial index within the grid point")->capture_default_str();
    trial->add_option("--cfo-max", t_cfo, "CFO drawn uniformly in +-Hz")->check(CLI::NonNegativeNumber)->capture_default_str();
    trial->add_option("--dump-iq", dump_iq, "Write the capture to this IQ file");
    add_receiver_options(trial, trial_rx);

    // replay
    auto* replay = app.add_subcommand("replay", "Run both receivers on a stored capture");
    std::string r_iq;
    std::optional<int> r_g;
    std::string r_scheme = "16QAM";
    std::size_t r_symbols = 20;
    std::optional<std::uint64_t> r_seed;
    double r_snr = 9.0;
    std::uint64_t r_index = 0;
    std::optional<double> r_noise_floor;
    ReceiverOptions replay_rx;
    replay->add_option("--iq", r_iq, "Capture file")->required();
    replay->add_option("--g", r_g, "Expected overclock factor (checked against the header)")
        ->check(CLI::IsMember({1, 2, 4, 8}));
    replay->add_option("--scheme", r_scheme, "Modulation")->capture_default_str();
    replay->add_option("--payload-symbols", r_symbols, "OFDM symbols")->check(CLI::PositiveNumber)->capture_default_str();
    replay->add_option("--seed", r_seed, "Base seed of the generating trial; enables scoring");
    replay->add_option("--snr", r_snr, "SNR of the generating trial, dB")->capture_default_str();
    replay->add_option("--trial", r_index, "Trial index of the generating trial")->capture_default_str();
    replay->add_option("--noise-floor", r_noise_floor, "Per-sample noise power for the detector");
    add_receiver_options(replay, replay_rx);

    // calibrate-detector
    auto* calib = app.add_subcommand("calibrate-detector", "Regenerate the detector energy threshold");
    std::size_t c_streams = 10000;
    std::size_t c_length = 10000;
    int c_window = tfi::DetectorConfig{}.energy_window;
    std::uint64_t c_seed = 2024;
    double c_quantile = 0.99;
    calib->add_option("--streams", c_streams, "Noise streams")->check(CLI::PositiveNumber)->capture_default_str();
    calib->add_option("--length", c_length, "Samples per stream")->check(CLI::PositiveNumber)->capture_default_str();
    calib->add_option("--window", c_window, "Energy window")->check(CLI::PositiveNumber)->capture_default_str();
    calib->add_option("--seed", c_seed, "Seed")->capture_default_str();
    calib->add_option("--quantile", c_quantile, "Quantile of the per-stream maxima")
        ->check(CLI::Range(0.5, 0.9999))
        ->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitArgs;
    }

    try {
        if (*sweep) {
            return run_sweep_cmd(snr_min, snr_max, snr_step, gs, schemes, noise, taps, packets, symbols, seed,
                                 cfo_max, timing, progress, out, format, sweep_rx);
        }

        if (*trial) {
            tfi::TrialPoint point;
            point.snr_db = t_snr;
            point.overclock = t_g;
            point.scheme = tfi::parse_scheme(t_scheme);
            point.noise_model = tfi::parse_noise_model(t_noise);
            point.taps = t_taps;
            point.payload_symbols = t_symbols;
            point.cfo_hz_max = t_cfo;
            const std::uint64_t s = tfi::trial_seed(t_seed, point.scheme, point.snr_db, t_index);
            const tfi::TrialSetup setup = tfi::prepare_trial(point, s, trial_rx.rx());
            const tfi::TrialOutcome outcome = tfi::run_trial(setup.frame, setup.scenario, setup.rx, true);

            std::printf("scheme %s  G %d  snr %s dB  noise %s  taps %s  seed %llu  trial %llu\n",
                        std::string(tfi::to_string(point.scheme)).c_str(), t_g, tfi::format_real(t_snr).c_str(),
                        t_noise.c_str(), t_taps.c_str(), static_cast<unsigned long long>(t_seed),
                        static_cast<unsigned long long>(t_index));
            std::printf("truth: ltf_start %.4f (oversampled)  cfo %.3f Hz  noise_var %.6g\n", outcome.ltf_start,
                        outcome.cfo_hz, outcome.noise_variance);
            std::printf("capture: %zu samples, checksum %016llx\n", outcome.stream.size(),
                        static_cast<unsigned long long>(tfi::capture_checksum(outcome.stream)));
            print_diag("tfi", outcome.tfi, outcome.tfi_failed, outcome.tfi_error);
            print_diag("baseline", outcome.baseline, outcome.baseline_failed, outcome.baseline_error);
            if (!dump_iq.empty()) {
                tfi::write_iq_capture(dump_iq, outcome.stream, {setup.rx.ofdm.oversampled_rate_hz(), t_g});
                std::printf("wrote %s\n", dump_iq.c_str());
            }
            return kExitOk;
        }

        if (*replay) {
            const tfi::IqCapture cap = tfi::read_iq_capture(r_iq);
            if (!tfi::is_supported_overclock(cap.meta.overclock))
                throw std::invalid_argument("capture has unsupported overclock factor " +
                                            std::to_string(cap.meta.overclock));
            if (r_g && *r_g != cap.meta.overclock)
                throw std::invalid_argument("--g " + std::to_string(*r_g) + " does not match the capture's G=" +
                                            std::to_string(cap.meta.overclock));
            const int g = cap.meta.overclock;
            tfi::Samples stream = cap.stream;
            stream.resize(stream.size() - stream.size() % static_cast<std::size_t>(g));

            tfi::RxConfig rx = replay_rx.rx();
            rx.ofdm = tfi::OfdmConfig::standard(g);
            rx.scheme = tfi::parse_scheme(r_scheme);
            rx.payload_symbols = r_symbols;
            rx.detector.noise_floor = r_noise_floor ? *r_noise_floor : estimate_noise_floor(stream, g);

            std::optional<tfi::TrialSetup> setup;
            tfi::GroundTruth truth;
            if (r_seed) {
                tfi::TrialPoint point;
                point.snr_db = r_snr;
                point.overclock = g;
                point.scheme = rx.scheme;
                point.payload_symbols = r_symbols;
                setup = tfi::prepare_trial(point, tfi::trial_seed(*r_seed, point.scheme, r_snr, r_index), rx);
                truth.ltf_start = static_cast<double>(setup->scenario.timing_offset) +
                                  setup->scenario.fractional_delay +
                                  static_cast<double>(tfi::kStfLength * g);
                truth.cfo_hz = setup->scenario.cfo_hz;
                truth.bits = std::span<const std::uint8_t>(setup->frame.payload_bits).first(setup->frame.scored_bits());
                truth.tx_symbols = &setup->frame.tx_symbols;
            }
            const tfi::GroundTruth* tp = setup ? &truth : nullptr;

            std::printf("capture %s: %zu samples, rate %.0f Hz, G %d, checksum %016llx, noise floor %.6g\n",
                        r_iq.c_str(), cap.stream.size(), cap.meta.rate_hz, g,
                        static_cast<unsigned long long>(tfi::capture_checksum(cap.stream)), rx.detector.noise_floor);
            for (int which = 0; which < 2; ++which) {
                tfi::RxDiagnostics d;
                bool failed = false;
                std::string error;
                try {
                    d = which == 0 ? tfi::receive_frame(stream, rx, tp) : tfi::receive_frame_baseline(stream, rx, tp);
                } catch (const std::exception& e) {
                    failed = true;
                    error = e.what();
                    d.missed = true;
                }
                print_diag(which == 0 ? "tfi" : "baseline", d, failed, error);
            }
            return kExitOk;
        }

        if (*calib) {
            const double threshold = tfi::calibrate_energy_threshold(c_streams, c_length, c_window, c_seed, c_quantile);
            tfi::DetectorConfig cfg;
            cfg.energy_window = c_window;
            cfg.energy_threshold = threshold;
            const double fa = tfi::detector_false_alarm_rate(cfg, std::min<std::size_t>(c_streams, 2000), c_length,
                                                             c_seed + 1);
            std::printf("window %d, %zu streams x %zu samples, quantile %.4f\n", c_window, c_streams, c_length,
                        c_quantile);
            std::printf("energy threshold (noise-floor units): %.4f\n", threshold);
            std::printf("compiled constant kDetectorEnergyThreshold: %.4f\n", tfi::kDetectorEnergyThreshold);
            std::printf("full-detector false alarm rate at this threshold: %.4f\n", fa);
            return kExitOk;
        }
    } catch (const IoError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitIo;
    } catch (const tfi::IqFormatError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitIo;
    } catch (const std::invalid_argument& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitArgs;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitIo;
    }
    return kExitOk;
}
