#include "tfi/transmitter.hpp"

#include <stdexcept>
#include <string>

#include "tfi/fft.hpp"
#include "tfi/ofdm.hpp"
#include "tfi/preamble.hpp"

namespace tfi {

Samples upsample_bandlimited(std::span<const Complex> x, int overclock) {
    if (!is_supported_overclock(overclock))
        throw std::invalid_argument("unsupported overclock factor " + std::to_string(overclock));
    if (overclock == 1) return Samples(x.begin(), x.end());

    const std::size_t n = x.size();
    const std::size_t g = static_cast<std::size_t>(overclock);
    const Samples spectrum = fft(x);

    Samples padded(n * g);
    if (n == 1) {
        padded[0] = spectrum[0];
    } else {
        const std::size_t half = n / 2;
        for (std::size_t k = 0; k < half; ++k) padded[k] = spectrum[k];
        for (std::size_t k = half + 1; k < n; ++k) padded[n * g - (n - k)] = spectrum[k];
        padded[half] = 0.5 * spectrum[half];
        padded[n * g - half] = 0.5 * spectrum[half];
    }
    ifft_inplace(padded);
    for (auto& v : padded) v *= static_cast<double>(g);
    return padded;
}

std::size_t frame_length(std::size_t payload_symbols, const OfdmConfig& cfg) {
    return static_cast<std::size_t>(kStfLength + kLtfLength) +
           payload_symbols * static_cast<std::size_t>(cfg.symbol_len());
}

FrameBlueprint build_frame(std::span<const std::uint8_t> bits, Scheme scheme, const OfdmConfig& cfg) {
    cfg.validate();
    if (bits.empty()) throw std::invalid_argument("build_frame needs a nonempty payload");

    const Constellation& constellation = Constellation::of(scheme);
    const std::size_t per_symbol =
        cfg.data_subcarriers.size() * static_cast<std::size_t>(constellation.bits_per_symbol());

    FrameBlueprint frame;
    frame.scheme = scheme;
    frame.overclock = cfg.overclock;
    frame.payload_bits.assign(bits.begin(), bits.end());
    const std::size_t rem = bits.size() % per_symbol;
    frame.pad_bits = rem == 0 ? 0 : per_symbol - rem;
    frame.payload_bits.resize(bits.size() + frame.pad_bits, 0);

    const auto pilots = pilot_symbols();
    const std::size_t num_symbols = frame.payload_bits.size() / per_symbol;
    const std::size_t g = static_cast<std::size_t>(cfg.overclock);

    frame.base_waveform = gen_stf(cfg);
    const Samples ltf = gen_ltf(cfg);
    frame.base_waveform.insert(frame.base_waveform.end(), ltf.begin(), ltf.end());
    frame.base_waveform.reserve(frame_length(num_symbols, cfg));

    for (std::size_t s = 0; s < num_symbols; ++s) {
        const auto chunk = std::span<const std::uint8_t>(frame.payload_bits).subspan(s * per_symbol, per_symbol);
        const Samples data = map_bits(chunk, constellation);
        Samples grid = make_grid(data, pilots, cfg);

        const Samples base = synthesize_symbol(grid, cfg, 1);
        frame.base_waveform.insert(frame.base_waveform.end(), base.begin(), base.end());
        frame.tx_symbols.push_back(std::move(grid));
    }
    frame.oversampled_waveform = g == 1 ? frame.base_waveform : synthesize_oversampled(frame, cfg, 0.0);
    return frame;
}

Samples synthesize_oversampled(const FrameBlueprint& frame, const OfdmConfig& cfg, double delay) {
    if (!(delay >= 0.0 && delay < 1.0)) throw std::invalid_argument("delay must lie in [0, 1)");
    const int g = cfg.overclock;
    Samples out = gen_stf_oversampled(cfg, g, delay);
    const Samples ltf = gen_ltf_oversampled(cfg, g, delay);
    out.insert(out.end(), ltf.begin(), ltf.end());
    out.reserve(frame_length(frame.tx_symbols.size(), cfg) * static_cast<std::size_t>(g));
    for (const Samples& grid : frame.tx_symbols) {
        const Samples sym = synthesize_symbol(grid, cfg, g, delay);
        out.insert(out.end(), sym.begin(), sym.end());
    }
    return out;
}

}  // namespace tfi
