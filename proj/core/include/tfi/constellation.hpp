#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "tfi/types.hpp"

namespace tfi {

enum class Scheme { kBpsk, kQpsk, kQam16, kQam64 };

inline constexpr Scheme kAllSchemes[] = {Scheme::kBpsk, Scheme::kQpsk, Scheme::kQam16,
                                         Scheme::kQam64};

int bits_per_symbol(Scheme scheme);
std::string_view to_string(Scheme scheme);
/// Accepts "BPSK", "QPSK", "16QAM", "64QAM" (case-insensitive; "QAM16"/"QAM64" too).
Scheme parse_scheme(std::string_view name);

/// Gray-labelled, unit-average-energy constellation. A label is the bit group
/// read MSB first: bits {b0, b1, ...} -> b0 << (k-1) | b1 << (k-2) | ...
/// Square QAM labels split into an I half (high bits) and a Q half (low bits).
class Constellation {
public:
    explicit Constellation(Scheme scheme);

    /// Shared immutable tables, one per scheme.
    static const Constellation& of(Scheme scheme);

    Scheme scheme() const { return scheme_; }
    int bits_per_symbol() const { return bits_; }
    std::span<const Complex> points() const { return points_; }
    Complex point(unsigned label) const { return points_.at(label); }

    /// Euclidean-nearest label; ties resolve to the lowest label.
    unsigned nearest_label(Complex sample) const;

private:
    unsigned nearest_label_exhaustive(Complex sample) const;

    Scheme scheme_;
    int bits_;
    Samples points_;               // indexed by label
    std::vector<double> levels_;   // per-axis amplitudes, ascending (QAM/QPSK)
    std::vector<unsigned> level_labels_;  // Gray label of each level
};

/// Errors with "partial symbol" if bits.size() is not a multiple of
/// bits_per_symbol().
Samples map_bits(std::span<const std::uint8_t> bits, const Constellation& constellation);

Bits demap_nearest(Complex sample, const Constellation& constellation);

/// Appends the bits of `label` to `out`, MSB first.
void append_label_bits(unsigned label, int bits, Bits& out);

}  // namespace tfi
