#pragma once

#include <array>
#include <span>

#include "tfi/config.hpp"
#include "tfi/types.hpp"

namespace tfi {

/// Pilot values on bins -21, -7, +7, +21, identical in every data symbol.
inline constexpr std::array<double, 4> kPilotValues = {1.0, 1.0, 1.0, -1.0};

/// Frequency grid of length F with data and pilots placed per the config's
/// index maps; DC and guard bins are zero.
Samples make_grid(std::span<const Complex> data, std::span<const Complex> pilots,
                  const OfdmConfig& cfg);

/// IFFT of the grid with the last cp_len samples prepended; length F + cp_len.
Samples assemble_symbol(std::span<const Complex> data, std::span<const Complex> pilots,
                        const OfdmConfig& cfg);

/// The same symbol sampled `overclock` times per base sample: the tone sum of
/// the grid evaluated on the fine grid, CP included. Length (F + cp_len) * G.
/// With delay 0 every G-th sample equals the base-rate symbol; otherwise
/// sample j is taken at time (j - delay) / G base samples.
Samples synthesize_symbol(std::span<const Complex> grid, const OfdmConfig& cfg, int overclock,
                          double delay = 0.0);

/// Bin l (signed index l~) times e^{-j 2 pi l~ delay / F}: the grid of the
/// periodic signal delayed by `delay` base samples.
Samples delay_grid(std::span<const Complex> grid, double delay);

std::array<Complex, 4> pilot_symbols();

}  // namespace tfi
