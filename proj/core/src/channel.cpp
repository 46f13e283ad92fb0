#include "tfi/channel.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>
#include <string>

namespace tfi {

std::string_view to_string(NoiseModel model) {
    return model == NoiseModel::kWideband ? "wideband" : "brickwall";
}

NoiseModel parse_noise_model(std::string_view name) {
    if (name == "wideband") return NoiseModel::kWideband;
    if (name == "brickwall") return NoiseModel::kBrickwall;
    throw std::invalid_argument("unknown noise model: " + std::string(name));
}

void ChannelScenario::set_taps(Samples raw) {
    double energy = 0.0;
    for (const auto& t : raw) energy += std::norm(t);
    if (raw.empty() || !(energy > 0.0)) throw std::invalid_argument("taps must have nonzero energy");
    const double scale = 1.0 / std::sqrt(energy);
    for (auto& t : raw) t *= scale;
    taps = std::move(raw);
}

Samples apply_multipath(std::span<const Complex> x, std::span<const Complex> taps) {
    if (taps.empty()) throw std::invalid_argument("taps must be nonempty");
    if (taps.size() == 1) {
        Samples out(x.begin(), x.end());
        for (auto& v : out) v *= taps[0];
        return out;
    }
    Samples out(x.size());
    for (std::size_t k = 0; k < taps.size() && k < x.size(); ++k) {
        if (taps[k] == Complex{}) continue;
        for (std::size_t n = k; n < x.size(); ++n) out[n] += taps[k] * x[n - k];
    }
    return out;
}

Samples apply_cfo(std::span<const Complex> x, double cfo_hz, double rate_hz) {
    Samples out(x.begin(), x.end());
    if (cfo_hz == 0.0) return out;
    const double step = kTwoPi * cfo_hz / rate_hz;
    for (std::size_t n = 0; n < out.size(); ++n) out[n] *= unit_phasor(step * static_cast<double>(n));
    return out;
}

double noise_variance(double signal_power, double snr_db) {
    if (std::isinf(snr_db) && snr_db > 0) return 0.0;
    if (!std::isfinite(snr_db)) throw std::invalid_argument("snr_db must be finite or +inf");
    return signal_power / std::pow(10.0, snr_db / 10.0);
}

Samples add_noise(std::span<const Complex> x, NoiseModel model, double variance, int overclock,
                  std::uint64_t seed) {
    Samples out(x.begin(), x.end());
    if (variance <= 0.0) return out;

    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, std::sqrt(variance / 2.0));
    auto draw = [&] {
        const double re = normal(rng);
        const double im = normal(rng);
        return Complex(re, im);
    };

    if (model == NoiseModel::kWideband || overclock == 1) {
        for (auto& v : out) v += draw();
        return out;
    }

    const std::size_t g = static_cast<std::size_t>(overclock);
    const std::size_t base_len = (out.size() + g - 1) / g;
    std::size_t padded = 1;
    while (padded < base_len) padded <<= 1;
    Samples base(padded);
    for (auto& v : base) v = draw();
    const Samples banded = upsample_bandlimited(base, overclock);
    for (std::size_t n = 0; n < out.size(); ++n) out[n] += banded[n];
    return out;
}

Capture apply_scenario(const FrameBlueprint& frame, const ChannelScenario& scenario,
                       const OfdmConfig& cfg) {
    const std::size_t g = static_cast<std::size_t>(frame.overclock);
    if (static_cast<int>(g) != cfg.overclock)
        throw std::invalid_argument("frame and config overclock factors differ");
    const double rate = cfg.base_rate_hz * static_cast<double>(g);
    if (!(std::abs(scenario.cfo_hz) < rate / 2.0))
        throw std::invalid_argument("|cfo| must be below half the oversampled rate");
    const Samples delayed = scenario.fractional_delay != 0.0
                                ? synthesize_oversampled(frame, cfg, scenario.fractional_delay)
                                : Samples{};
    const Samples& waveform = scenario.fractional_delay != 0.0 ? delayed : frame.oversampled_waveform;

    Capture cap;
    cap.overclock = static_cast<int>(g);
    cap.rate_hz = rate;
    cap.frame_start = scenario.timing_offset;
    cap.ltf_start = scenario.timing_offset + static_cast<std::size_t>(160) * g;
    cap.fractional_delay = scenario.fractional_delay;
    cap.cfo_hz = scenario.cfo_hz;

    const std::size_t trail = static_cast<std::size_t>(cfg.symbol_len()) * g;
    Samples stream(scenario.timing_offset + waveform.size() + trail);
    std::copy(waveform.begin(), waveform.end(),
              stream.begin() + static_cast<std::ptrdiff_t>(scenario.timing_offset));

    stream = apply_multipath(stream, scenario.taps);
    stream = apply_cfo(stream, scenario.cfo_hz, rate);

    // Power of the polyphase-0 samples that fall inside the frame.
    const std::size_t frame_end = cap.frame_start + waveform.size();
    double power = 0.0;
    std::size_t count = 0;
    for (std::size_t n = ((cap.frame_start + g - 1) / g) * g; n < frame_end; n += g) {
        power += std::norm(stream[n]);
        ++count;
    }
    cap.signal_power = count ? power / static_cast<double>(count) : 0.0;
    cap.noise_variance = noise_variance(cap.signal_power, scenario.snr_db);
    cap.stream = add_noise(stream, scenario.noise_model, cap.noise_variance, cap.overclock, scenario.seed);
    return cap;
}

}  // namespace tfi
