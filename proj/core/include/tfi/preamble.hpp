#pragma once

#include "tfi/config.hpp"
#include "tfi/types.hpp"

namespace tfi {

/// Training-field frequency sequences (length F, FFT-bin order).
///
/// STF: the legacy short training sequence, 12 populated bins at +-4, +-8, ...,
/// +-24 with values +-(1+j) sqrt(13/6); its 64-point IFFT repeats every 16
/// samples. LTF: +-1 on every occupied bin (the legacy long training sequence
/// on +-1..+-26, extended to +-27, +-28 as in the 56-bin HT/S1G layout).
struct PreambleSpec {
    Samples stf_freq;
    Samples ltf_freq;
    int stf_repetitions = 10;
    int ltf_symbols = 2;

    static const PreambleSpec& standard();
};

inline constexpr int kStfLength = 160;
inline constexpr int kLtfLength = 160;
inline constexpr int kLtfGuardLength = 32;
inline constexpr int kStfPeriod = 16;

/// Ten 16-sample repetitions, 160 base-rate samples.
Samples gen_stf(const OfdmConfig& cfg);
/// 32-sample guard followed by two identical 64-sample symbols.
Samples gen_ltf(const OfdmConfig& cfg);

/// The same fields sampled `overclock` times per base sample (exact tone
/// sums); sample j is taken at time (j - delay) / G base samples.
Samples gen_stf_oversampled(const OfdmConfig& cfg, int overclock, double delay = 0.0);
Samples gen_ltf_oversampled(const OfdmConfig& cfg, int overclock, double delay = 0.0);

}  // namespace tfi
