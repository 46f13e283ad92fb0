#include "tfi/preamble.hpp"

#include <cmath>
#include <stdexcept>

#include "tfi/fft.hpp"
#include "tfi/ofdm.hpp"
#include "tfi/transmitter.hpp"

namespace tfi {
namespace {

constexpr int kGridSize = 64;

int bin(int signed_index) { return signed_index >= 0 ? signed_index : signed_index + kGridSize; }

PreambleSpec make_standard() {
    PreambleSpec spec;
    spec.stf_freq.assign(kGridSize, Complex{});
    spec.ltf_freq.assign(kGridSize, Complex{});

    const double a = std::sqrt(13.0 / 6.0);
    const Complex p(a, a);
    const int stf_bins[] = {-24, -20, -16, -12, -8, -4, 4, 8, 12, 16, 20, 24};
    const int stf_sign[] = {+1, -1, +1, -1, -1, +1, -1, -1, +1, +1, +1, +1};
    for (int i = 0; i < 12; ++i) spec.stf_freq[bin(stf_bins[i])] = static_cast<double>(stf_sign[i]) * p;

    // Signed indices -28..28; zero at DC.
    const int ltf[] = {1,  1,  1, 1,  -1, -1, 1,  1,  -1, 1,  -1, 1,  1,  1,  1,  1,  1, -1, -1,
                       1,  1,  -1, 1, -1, 1,  1,  1,  1,  0,  1,  -1, -1, 1,  1,  -1, 1, -1, 1,
                       -1, -1, -1, -1, -1, 1, 1,  -1, -1, 1,  -1, 1,  -1, 1,  1,  1,  1,  -1, -1};
    for (int k = -28; k <= 28; ++k) spec.ltf_freq[bin(k)] = Complex(ltf[k + 28]);
    return spec;
}

void require_standard_grid(const OfdmConfig& cfg) {
    if (cfg.num_subcarriers != kGridSize || cfg.cp_len != 16)
        throw std::invalid_argument("training fields are defined for the 64-point, 16-sample-CP grid");
}

Samples tile(const Samples& period_source, std::size_t length) {
    Samples out(length);
    for (std::size_t n = 0; n < length; ++n) out[n] = period_source[n % period_source.size()];
    return out;
}

Samples ltf_from_body(const Samples& body, int overclock) {
    const std::size_t guard = static_cast<std::size_t>(kLtfGuardLength * overclock);
    Samples out;
    out.reserve(guard + 2 * body.size());
    out.insert(out.end(), body.end() - static_cast<std::ptrdiff_t>(guard), body.end());
    out.insert(out.end(), body.begin(), body.end());
    out.insert(out.end(), body.begin(), body.end());
    return out;
}

}  // namespace

const PreambleSpec& PreambleSpec::standard() {
    static const PreambleSpec spec = make_standard();
    return spec;
}

Samples gen_stf(const OfdmConfig& cfg) { return gen_stf_oversampled(cfg, 1); }

Samples gen_ltf(const OfdmConfig& cfg) { return gen_ltf_oversampled(cfg, 1); }

Samples gen_stf_oversampled(const OfdmConfig& cfg, int overclock, double delay) {
    require_standard_grid(cfg);
    const Samples grid = delay_grid(PreambleSpec::standard().stf_freq, delay / overclock);
    const Samples body = upsample_bandlimited(ifft(grid), overclock);
    return tile(body, static_cast<std::size_t>(kStfLength * overclock));
}

Samples gen_ltf_oversampled(const OfdmConfig& cfg, int overclock, double delay) {
    require_standard_grid(cfg);
    const Samples grid = delay_grid(PreambleSpec::standard().ltf_freq, delay / overclock);
    const Samples body = upsample_bandlimited(ifft(grid), overclock);
    return ltf_from_body(body, overclock);
}

}  // namespace tfi
