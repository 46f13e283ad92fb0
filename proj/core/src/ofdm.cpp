#include "tfi/ofdm.hpp"

#include <stdexcept>
#include <string>

#include "tfi/fft.hpp"
#include "tfi/transmitter.hpp"

namespace tfi {

std::array<Complex, 4> pilot_symbols() {
    return {Complex(kPilotValues[0]), Complex(kPilotValues[1]), Complex(kPilotValues[2]),
            Complex(kPilotValues[3])};
}

Samples make_grid(std::span<const Complex> data, std::span<const Complex> pilots,
                  const OfdmConfig& cfg) {
    if (data.size() != cfg.data_subcarriers.size() || pilots.size() != cfg.pilot_subcarriers.size())
        throw std::invalid_argument("assemble_symbol expects " +
                                    std::to_string(cfg.data_subcarriers.size()) + " data and " +
                                    std::to_string(cfg.pilot_subcarriers.size()) + " pilot values");
    Samples grid(static_cast<std::size_t>(cfg.num_subcarriers));
    for (std::size_t i = 0; i < data.size(); ++i) grid[cfg.data_subcarriers[i]] = data[i];
    for (std::size_t i = 0; i < pilots.size(); ++i) grid[cfg.pilot_subcarriers[i]] = pilots[i];
    return grid;
}

Samples assemble_symbol(std::span<const Complex> data, std::span<const Complex> pilots,
                        const OfdmConfig& cfg) {
    return synthesize_symbol(make_grid(data, pilots, cfg), cfg, 1);
}

Samples delay_grid(std::span<const Complex> grid, double delay) {
    Samples out(grid.begin(), grid.end());
    if (delay == 0.0) return out;
    const std::size_t n = out.size();
    const double step = -kTwoPi * delay / static_cast<double>(n);
    for (std::size_t l = 0; l < n; ++l) {
        const double signed_l = l < n / 2 ? static_cast<double>(l) : static_cast<double>(l) - static_cast<double>(n);
        out[l] *= unit_phasor(step * signed_l);
    }
    return out;
}

Samples synthesize_symbol(std::span<const Complex> grid, const OfdmConfig& cfg, int overclock, double delay) {
    if (grid.size() != static_cast<std::size_t>(cfg.num_subcarriers))
        throw std::invalid_argument("grid length must equal num_subcarriers");
    const Samples body = upsample_bandlimited(ifft(delay_grid(grid, delay / overclock)), overclock);
    const std::size_t cp = static_cast<std::size_t>(cfg.cp_len * overclock);
    Samples out;
    out.reserve(body.size() + cp);
    out.insert(out.end(), body.end() - static_cast<std::ptrdiff_t>(cp), body.end());
    out.insert(out.end(), body.begin(), body.end());
    return out;
}

}  // namespace tfi
