#pragma once

#include <span>
#include <vector>

#include "tfi/config.hpp"
#include "tfi/constellation.hpp"
#include "tfi/types.hpp"

namespace tfi {

/// A transmitted frame with its ground truth.
struct FrameBlueprint {
    Bits payload_bits;             // zero-padded to whole OFDM symbols
    std::size_t pad_bits = 0;      // trailing pad, excluded from BER scoring
    Scheme scheme = Scheme::kBpsk;
    std::vector<Samples> tx_symbols;  // per payload symbol, full F-bin grid
    Samples base_waveform;            // STF | LTF | payload, at Fs
    Samples oversampled_waveform;     // the same frame at G * Fs
    int overclock = 1;

    std::size_t scored_bits() const { return payload_bits.size() - pad_bits; }
    std::size_t num_payload_symbols() const { return tx_symbols.size(); }
};

/// Band-limited interpolation by spectral zero padding: N-point FFT, (G-1)N
/// zeros inserted at the spectral midpoint (the Nyquist bin split evenly),
/// GN-point inverse, scaled by G. output[k*G] == x[k].
/// N must be a power of two; G one of 1, 2, 4, 8.
Samples upsample_bandlimited(std::span<const Complex> x, int overclock);

/// STF | LTF | payload symbols. The oversampled waveform is synthesised
/// segment by segment (each training period and OFDM symbol is interpolated
/// over its own period), which is the exact G-fold sampling of the
/// continuous OFDM signal.
FrameBlueprint build_frame(std::span<const std::uint8_t> bits, Scheme scheme, const OfdmConfig& cfg);

/// The frame's oversampled waveform with sample j taken at time
/// (j - delay) / G base samples, delay in [0, 1) oversampled samples. Each
/// segment is its own tone sum, so a segment's first sample uses that
/// segment's periodic extension.
Samples synthesize_oversampled(const FrameBlueprint& frame, const OfdmConfig& cfg, double delay);

/// Number of base-rate samples in a frame with `payload_symbols` symbols.
std::size_t frame_length(std::size_t payload_symbols, const OfdmConfig& cfg);

}  // namespace tfi
