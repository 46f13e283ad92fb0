#pragma once

#include <complex>
#include <cstdint>
#include <numbers>
#include <vector>

namespace tfi {

using Complex = std::complex<double>;
using Samples = std::vector<Complex>;
using Bits = std::vector<std::uint8_t>;

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

inline Complex unit_phasor(double radians) { return std::polar(1.0, radians); }

}  // namespace tfi
