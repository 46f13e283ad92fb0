#pragma once

#include <cstddef>
#include <limits>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "tfi/config.hpp"
#include "tfi/constellation.hpp"
#include "tfi/types.hpp"

namespace tfi {

// ---------------------------------------------------------------------------
// Packet detection (base rate)
// ---------------------------------------------------------------------------

/// Window-energy threshold, in units of the noise floor, giving a 1% false
/// alarm rate on 10^4-sample unit-variance noise streams with the default
/// 32-sample window. Regenerate with `tfi_sim calibrate-detector`.
inline constexpr double kDetectorEnergyThreshold = 64.1124;

struct DetectorConfig {
    int energy_window = 32;                 // L
    int autocorr_lag = 16;                  // d, one STF period
    double energy_threshold = kDetectorEnergyThreshold;
    double plateau_ratio_threshold = 0.4;
    int plateau_min_len = 32;
    int stf_reps_used = 9;
    double clock_switch_latency_s = 8e-6;
    double noise_floor = 1.0;               // per-sample noise power the threshold scales with

    /// Throws std::invalid_argument on a violated invariant.
    void validate(double base_rate_hz) const;
    /// Latency rounded up to whole base-rate samples.
    std::size_t latency_samples(double base_rate_hz) const;
};

struct Detection {
    std::size_t index = 0;     // first index of the qualifying run
    std::size_t complete = 0;  // index at which the run reached plateau_min_len
};

/// Window statistics at index n: energy E(n) = sum_{k<L} |y[n+k]|^2 and
/// plateau ratio R(n) = |sum_k y[n+k] conj(y[n+k-d])| / sum_k |y[n+k-d]|^2.
/// Returns the first run of plateau_min_len consecutive n at which both E(n)
/// and the lagged energy sum_k |y[n+k-d]|^2 exceed energy_threshold * noise_floor
/// and R(n) >= plateau_ratio_threshold.
std::optional<Detection> detect_packet(std::span<const Complex> stream_1x, const DetectorConfig& cfg);

// ---------------------------------------------------------------------------
// Polyphase structure
// ---------------------------------------------------------------------------

struct PolyphaseSet {
    std::vector<Samples> copies;  // copies[g][n] == stream[n*G + g]

    int overclock() const { return static_cast<int>(copies.size()); }
};

/// Throws std::invalid_argument if G < 1 or the length is not divisible by G.
PolyphaseSet polyphase_split(std::span<const Complex> stream, int overclock);
Samples interleave(const PolyphaseSet& set);

/// Copy g of a capture is sampled g/G of a base sample after copy 0, so on
/// bin l (signed index l~) Y_g = Y_0 e^{+j 2 pi g l~ / (F G)}. This multiplies
/// bin l by e^{-j 2 pi g l~ / (F G)}, mapping Y_g onto Y_0.
Samples compensate_overclock_phase(std::span<const Complex> spectrum, int g, int overclock);

// ---------------------------------------------------------------------------
// Timing synchronisation
// ---------------------------------------------------------------------------

class SyncError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct SyncWindow {
    std::size_t first_lag = 0;  // inclusive, oversampled samples
    std::size_t last_lag = 0;   // inclusive
};

struct SyncResult {
    std::size_t lag = 0;         // oversampled index of the LTF guard
    double peak = 0.0;           // |correlation| at lag
    double peak_ratio = 0.0;     // peak over the largest value outside +-G lags of it
};

/// Cross-correlates the stream against the oversampled LTF (160 G samples),
/// via FFT, and returns the lag of maximum magnitude. Throws SyncError when the window
/// is empty or the reference at its last lag runs past the stream.
SyncResult sync_timing(std::span<const Complex> stream_over, const SyncWindow& window,
                       const OfdmConfig& cfg);

// ---------------------------------------------------------------------------
// Carrier frequency offset
// ---------------------------------------------------------------------------

/// angle(sum_n y[n+F] conj(y[n])) Fs / (2 pi F) over the base-rate samples
/// starting at `first_body` (two consecutive F-sample LTF bodies). The
/// estimate wraps modulo Fs/F.
double estimate_cfo_coarse(std::span<const Complex> ltf_1x, std::size_t first_body, const OfdmConfig& cfg);

/// J(df) = sum_{g>=1} || FFT(P^H y_g) - e^{+j 2 pi df g / (Fs G)} O_g FFT(P^H y_0) ||^2,
/// P(df) the per-sample rotation e^{j 2 pi df n / Fs} on each base-rate copy and
/// O_g the overclock phase law. Zero at the true offset on noiseless input.
double cfo_objective(const PolyphaseSet& symbol_copies, double cfo_hz, const OfdmConfig& cfg);

struct FineCfoSearch {
    double radius_hz = 2000.0;
    double resolution_hz = 0.5;
};

/// Golden-section minimisation of cfo_objective over center +- radius.
/// Returns `center_hz` unchanged for a single copy. Throws std::runtime_error
/// "degenerate symbol" if J is not finite.
double estimate_cfo_fine(const PolyphaseSet& symbol_copies, double center_hz, const OfdmConfig& cfg,
                         const FineCfoSearch& search = {});

// ---------------------------------------------------------------------------
// Channel estimation, tracking, combining
// ---------------------------------------------------------------------------

struct ChannelEstimate {
    Samples h_hat;                         // F bins, zero off the occupied set
    std::vector<double> per_bin_noise_var; // F bins, sample variance over observations
    std::vector<double> per_copy_noise_var;// G values, pooled over occupied bins
};

/// `grids[s][g]` is the phase-compensated spectrum of LTF body s seen by copy g.
ChannelEstimate estimate_channel(const std::vector<std::vector<Samples>>& grids,
                                 std::span<const Complex> ltf_freq, const OfdmConfig& cfg);

struct PilotTracking {
    Samples spectrum;   // input rotated by e^{-j theta}
    double phase = 0.0; // theta
};

/// theta = angle(sum_p Y[p] conj(h[p] pilot[p])). Throws std::runtime_error
/// "pilot erasure" when the pilot bins carry less than 1e-12 energy.
PilotTracking track_pilot_phase(std::span<const Complex> spectrum, std::span<const Complex> h_hat,
                                const OfdmConfig& cfg, std::span<const Complex> pilots);

enum class CombineWeights { kUniform, kInverseVariance };

/// Per-bin weighted mean of the copies. Inverse-variance weights are taken
/// from `per_copy_noise_var` and normalised to sum 1.
Samples combine_copies(const std::vector<Samples>& grids, CombineWeights weights,
                       std::span<const double> per_copy_noise_var = {});

// ---------------------------------------------------------------------------
// Full pipeline
// ---------------------------------------------------------------------------

enum class FineCfoMode {
    kReportOnly,  // estimate and report, compensate with the coarse estimate
    kApply,       // re-compensate the stream with the fine estimate
};

struct RxConfig {
    OfdmConfig ofdm = OfdmConfig::standard();
    Scheme scheme = Scheme::kBpsk;
    std::size_t payload_symbols = 1;
    DetectorConfig detector;
    CombineWeights combine = CombineWeights::kUniform;
    FineCfoMode fine_cfo = FineCfoMode::kReportOnly;
    FineCfoSearch fine_search;
    int fft_backoff = 3;             // base samples the FFT window starts inside the CP
    int sync_search_first = 1;       // search lags, base samples after detection completes
    int sync_search_last = 160;
};

/// What the scorer knows about the transmitted frame.
struct GroundTruth {
    double ltf_start = 0.0;  // oversampled position of the LTF guard, may be fractional
    double cfo_hz = 0.0;
    std::span<const std::uint8_t> bits;          // scored payload bits
    const std::vector<Samples>* tx_symbols = nullptr;  // for EVM, optional
};

struct RxDiagnostics {
    bool missed = false;
    std::size_t detect_index = 0;
    std::size_t detect_complete = 0;
    std::size_t sync_lag = 0;        // oversampled
    std::size_t sync_index = 0;      // round(sync_lag / G)
    double sync_residue = 0.0;       // sync_lag / G - sync_index
    double sync_peak_ratio = 0.0;
    double sync_error = std::numeric_limits<double>::quiet_NaN();  // base samples, vs truth
    double cfo_coarse_hz = 0.0;
    double cfo_fine_hz = 0.0;
    double cfo_applied_hz = 0.0;
    Bits decoded_bits;
    std::size_t bit_errors = 0;
    std::size_t scored_bits = 0;
    double ber = std::numeric_limits<double>::quiet_NaN();
    std::vector<double> per_copy_evm;
    double noise_var_estimate = 0.0;  // mean per-bin variance over occupied bins
};

/// Detect at base rate on copy 0, withhold the high-rate stream for the clock
/// switch, sync on the oversampled LTF, correct CFO, then per symbol split,
/// FFT, phase-compensate, combine, track pilots, equalise and demap.
/// A missed detection yields missed = true and ber = 1 when truth is given.
/// Throws SyncError if the frame does not fit the capture.
RxDiagnostics receive_frame(std::span<const Complex> stream_over, const RxConfig& cfg,
                            const GroundTruth* truth = nullptr);

/// The standard receiver: the same pipeline on the base-rate copy with G = 1.
RxDiagnostics receive_frame_baseline(std::span<const Complex> stream_over, const RxConfig& cfg,
                                     const GroundTruth* truth = nullptr);

}  // namespace tfi
