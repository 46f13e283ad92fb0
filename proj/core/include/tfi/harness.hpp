#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <string_view>
#include <vector>

#include "tfi/channel.hpp"
#include "tfi/constellation.hpp"
#include "tfi/receiver.hpp"
#include "tfi/transmitter.hpp"

namespace tfi {

enum class ReceiverKind { kTfi, kBaseline };
std::string_view to_string(ReceiverKind kind);

/// Multipath profiles given as (base-sample delay, amplitude) pairs and
/// placed at delay k*G on the oversampled stream, so every G sees the same
/// base-rate channel. Names: flat, lab, hallway, corridor.
Samples taps_preset(std::string_view name, int overclock);
std::vector<std::string> taps_preset_names();

/// splitmix64 finaliser.
std::uint64_t mix64(std::uint64_t x);
/// Trial seed from (base seed, scheme, SNR, trial). The overclock factor is
/// deliberately absent so every G replays the same payloads and offsets.
std::uint64_t trial_seed(std::uint64_t base_seed, Scheme scheme, double snr_db, std::uint64_t trial);

/// One grid point of a sweep.
struct TrialPoint {
    double snr_db = 9.0;
    int overclock = 1;
    Scheme scheme = Scheme::kBpsk;
    NoiseModel noise_model = NoiseModel::kWideband;
    std::string taps = "flat";
    std::size_t payload_symbols = 20;
    double cfo_hz_max = 0.0;   // per-trial CFO drawn uniformly in +-cfo_hz_max
};

/// Everything needed to replay one trial.
struct TrialSetup {
    FrameBlueprint frame;
    ChannelScenario scenario;
    RxConfig rx;
};

/// Random payload, timing offset (k + u) base samples with k in [64, 80) and
/// u in [0, 1) (integer part of (k + u) G as lead-in, the rest as fractional
/// delay), CFO and noise seed, all derived from `seed`.
TrialSetup prepare_trial(const TrialPoint& point, std::uint64_t seed, const RxConfig& rx_template = {});

struct TrialOutcome {
    RxDiagnostics tfi;
    RxDiagnostics baseline;
    bool tfi_failed = false;        // receiver threw; diagnostics hold the miss convention
    bool baseline_failed = false;
    std::string tfi_error;
    std::string baseline_error;
    double ltf_start = 0.0;   // oversampled, fractional
    double cfo_hz = 0.0;
    double noise_variance = 0.0;
    Samples stream;                 // kept only when requested
};

/// One capture, both receivers on it. Receiver exceptions become failure
/// records scored as missed packets; they never propagate.
TrialOutcome run_trial(const FrameBlueprint& frame, const ChannelScenario& scenario, const RxConfig& rx,
                       bool keep_stream = false);

/// FNV-1a over the raw sample bytes.
std::uint64_t capture_checksum(std::span<const Complex> stream);

struct SweepSpec {
    std::vector<double> snr_grid_db;
    std::vector<int> g_grid{1, 2, 4, 8};
    std::vector<Scheme> schemes{kAllSchemes[0], kAllSchemes[1], kAllSchemes[2], kAllSchemes[3]};
    NoiseModel noise_model = NoiseModel::kWideband;
    std::string taps = "flat";
    std::size_t packets_per_point = 3000;
    std::size_t payload_symbols = 20;
    std::uint64_t base_seed = 1;
    double cfo_hz_max = 0.0;
    bool record_timing = false;     // wall_time_s stays 0 otherwise, keeping output byte-stable
    RxConfig rx_template;

    /// SNR 9..35 dB in 2 dB steps, every G and scheme.
    static SweepSpec defaults();
    static std::vector<double> snr_range(double min_db, double max_db, double step_db);
    void validate() const;
};

struct SweepResultRow {
    double snr_db = 0.0;
    int g = 1;
    Scheme scheme = Scheme::kBpsk;
    NoiseModel noise_model = NoiseModel::kWideband;
    ReceiverKind receiver = ReceiverKind::kTfi;
    std::size_t trials = 0;
    double ber_mean = 0.0;
    double ber_stderr = 0.0;
    double mean_abs_sync_error = 0.0;  // detected packets only, base samples
    double sync_error_std = 0.0;
    double miss_rate = 0.0;            // missed detections and receiver failures
    double cfo_rmse_hz = 0.0;          // applied estimate vs truth, detected packets
    double wall_time_s = 0.0;

    bool operator==(const SweepResultRow&) const = default;
};

/// Compact per-trial log, enough to recompute every row statistic.
struct TrialRecord {
    double snr_db = 0.0;
    int g = 1;
    Scheme scheme = Scheme::kBpsk;
    ReceiverKind receiver = ReceiverKind::kTfi;
    std::uint64_t trial = 0;
    bool missed = false;
    double ber = 0.0;
    double sync_error = 0.0;
    double cfo_error_hz = 0.0;
};

/// Row statistics over the records of one (point, receiver).
SweepResultRow aggregate(std::span<const TrialRecord> records, NoiseModel noise_model);

/// Worker count: TFI_THREADS if set and positive, else hardware concurrency.
unsigned worker_threads();

using ProgressFn = std::function<void(std::size_t done, std::size_t total)>;

/// Cartesian product of the grids, trials spread over a thread pool. Output
/// is independent of the thread count; rows sorted by (scheme, g, snr, receiver).
std::vector<SweepResultRow> run_sweep(const SweepSpec& spec, std::vector<TrialRecord>* records = nullptr,
                                      const ProgressFn& progress = {});

/// Per-stream maxima of the detector window energy over unit-variance noise;
/// returns their `quantile`. This is the false-alarm calibration of
/// kDetectorEnergyThreshold.
double calibrate_energy_threshold(std::size_t streams, std::size_t length, int window,
                                  std::uint64_t seed, double quantile = 0.99);

/// Fraction of unit-variance noise streams on which detect_packet fires.
double detector_false_alarm_rate(const DetectorConfig& cfg, std::size_t streams, std::size_t length,
                                 std::uint64_t seed);

}  // namespace tfi
