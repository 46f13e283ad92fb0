#pragma once

#include <vector>

namespace tfi {

/// Numerology of the OFDM link and the receiver's overclock factor.
///
/// Subcarrier indices are FFT-bin numbers in [0, F). The default layout is the
/// 56-bin 802.11ah/11n 2 MHz grid: occupied bins at signed frequencies
/// +-1..+-28, pilots at +-7 and +-21, DC and guard bins empty.
struct OfdmConfig {
    int num_subcarriers = 64;
    int cp_len = 16;
    std::vector<int> data_subcarriers;
    std::vector<int> pilot_subcarriers;  // ordered -21, -7, +7, +21
    double base_rate_hz = 2e6;
    int overclock = 1;

    static OfdmConfig standard(int overclock = 1);

    /// Throws std::invalid_argument on a violated invariant.
    void validate() const;

    int symbol_len() const { return num_subcarriers + cp_len; }
    double symbol_duration_s() const { return symbol_len() / base_rate_hz; }
    double oversampled_rate_hz() const { return base_rate_hz * overclock; }

    /// Signed frequency index in [-F/2, F/2) of an FFT bin.
    int signed_index(int bin) const;
    int bin_of(int signed_index) const;

    /// Data and pilot bins, ascending by signed frequency.
    std::vector<int> occupied_bins() const;
};

bool is_power_of_two(long long n);
bool is_supported_overclock(int g);

}  // namespace tfi
