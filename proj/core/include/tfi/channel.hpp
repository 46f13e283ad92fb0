#pragma once

#include <cstdint>
#include <limits>
#include <span>
#include <string_view>

#include "tfi/config.hpp"
#include "tfi/transmitter.hpp"
#include "tfi/types.hpp"

namespace tfi {

/// wideband: receiver noise white across the whole oversampled band, so the
/// polyphase copies see independent noise. brickwall: noise confined to the
/// base-rate band, so the copies carry interpolates of one realisation.
enum class NoiseModel { kWideband, kBrickwall };

std::string_view to_string(NoiseModel model);
NoiseModel parse_noise_model(std::string_view name);

inline constexpr double kNoiselessSnr = std::numeric_limits<double>::infinity();

struct ChannelScenario {
    /// FIR taps at the oversampled rate. Use set_taps() to keep them
    /// normalised to unit energy.
    Samples taps{Complex(1.0)};
    double cfo_hz = 0.0;
    std::size_t timing_offset = 0;  // oversampled samples of noise-only lead-in
    double fractional_delay = 0.0;  // further sub-sample delay, [0, 1) oversampled samples
    double snr_db = kNoiselessSnr;
    NoiseModel noise_model = NoiseModel::kWideband;
    std::uint64_t seed = 0;

    void set_taps(Samples raw);  // throws on empty or all-zero taps
};

/// Linear convolution truncated to the input length.
Samples apply_multipath(std::span<const Complex> x, std::span<const Complex> taps);

/// Sample n multiplied by e^{j 2 pi cfo n / rate}.
Samples apply_cfo(std::span<const Complex> x, double cfo_hz, double rate_hz);

/// Noise variance for a given reference signal power (per base-rate sample).
double noise_variance(double signal_power, double snr_db);

/// Adds circular complex Gaussian noise of per-sample variance `variance`
/// (deterministic in `seed`). `overclock` is the oversampling factor of `x`;
/// the brickwall model draws base-rate noise and band-limits it by that factor.
Samples add_noise(std::span<const Complex> x, NoiseModel model, double variance, int overclock,
                  std::uint64_t seed);

/// The oversampled stream a receiver captures, with its ground truth.
struct Capture {
    Samples stream;
    int overclock = 1;
    double rate_hz = 0.0;          // overclock * base rate
    std::size_t frame_start = 0;   // oversampled index of the first STF sample
    std::size_t ltf_start = 0;     // oversampled index of the LTF guard
    double fractional_delay = 0.0; // the frame sits this much after the indices above
    double signal_power = 0.0;     // mean |.|^2 of the base-rate frame samples
    double noise_variance = 0.0;   // 0 when noiseless
    double cfo_hz = 0.0;

    double true_ltf_start() const { return static_cast<double>(ltf_start) + fractional_delay; }
};

/// Noise-only lead-in of `timing_offset` samples, the frame (resampled when
/// fractional_delay is nonzero), one trailing symbol of silence; then
/// multipath, CFO, noise in that order. The SNR is
/// referenced to the per-sample power of the base-rate (polyphase-0) frame.
Capture apply_scenario(const FrameBlueprint& frame, const ChannelScenario& scenario,
                       const OfdmConfig& cfg);

}  // namespace tfi
