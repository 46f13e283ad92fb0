#include "tfi/receiver.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <utility>

#include "tfi/channel.hpp"
#include "tfi/fft.hpp"
#include "tfi/ofdm.hpp"
#include "tfi/preamble.hpp"

namespace tfi {

void DetectorConfig::validate(double base_rate_hz) const {
    if (energy_window < 1 || autocorr_lag < 1 || plateau_min_len < 1)
        throw std::invalid_argument("detector window lengths must be positive");
    if (!(plateau_ratio_threshold > 0.0 && plateau_ratio_threshold < 1.0))
        throw std::invalid_argument("plateau ratio threshold must lie in (0, 1)");
    if (stf_reps_used < 1 || stf_reps_used > 9)
        throw std::invalid_argument("stf_reps_used must be in [1, 9]");
    if (clock_switch_latency_s < 0.0 || clock_switch_latency_s > kStfPeriod / base_rate_hz + 1e-15)
        throw std::invalid_argument("clock switch latency exceeds one STF repetition");
    if (!(noise_floor >= 0.0) || !(energy_threshold >= 0.0))
        throw std::invalid_argument("noise floor and energy threshold must be nonnegative");
}

std::size_t DetectorConfig::latency_samples(double base_rate_hz) const {
    return static_cast<std::size_t>(std::ceil(clock_switch_latency_s * base_rate_hz - 1e-9));
}

std::optional<Detection> detect_packet(std::span<const Complex> y, const DetectorConfig& cfg) {
    const std::size_t L = static_cast<std::size_t>(cfg.energy_window);
    const std::size_t d = static_cast<std::size_t>(cfg.autocorr_lag);
    if (y.size() < L + d) return std::nullopt;

    const double energy_gate = cfg.energy_threshold * cfg.noise_floor;
    const std::size_t min_len = static_cast<std::size_t>(cfg.plateau_min_len);

    // Window sums at n = d, then slid one sample at a time.
    double energy = 0.0;
    double lagged = 0.0;
    Complex corr{};
    for (std::size_t k = 0; k < L; ++k) {
        energy += std::norm(y[d + k]);
        lagged += std::norm(y[k]);
        corr += y[d + k] * std::conj(y[k]);
    }

    std::size_t run_start = 0;
    std::size_t run_len = 0;
    for (std::size_t n = d;; ++n) {
        const bool hit = energy > energy_gate && lagged > energy_gate && lagged > 0.0 &&
                         std::abs(corr) >= cfg.plateau_ratio_threshold * lagged;
        if (hit) {
            if (run_len == 0) run_start = n;
            if (++run_len == min_len) return Detection{run_start, n};
        } else {
            run_len = 0;
        }
        if (n + L >= y.size()) break;
        const Complex out_new = y[n + L];
        const Complex out_old = y[n];
        const Complex lag_new = y[n + L - d];
        const Complex lag_old = y[n - d];
        energy += std::norm(out_new) - std::norm(out_old);
        lagged += std::norm(lag_new) - std::norm(lag_old);
        corr += out_new * std::conj(lag_new) - out_old * std::conj(lag_old);
    }
    return std::nullopt;
}

PolyphaseSet polyphase_split(std::span<const Complex> stream, int overclock) {
    if (overclock < 1) throw std::invalid_argument("overclock must be positive");
    const std::size_t g_count = static_cast<std::size_t>(overclock);
    if (stream.size() % g_count != 0)
        throw std::invalid_argument("stream length not divisible by the overclock factor");
    const std::size_t n = stream.size() / g_count;
    PolyphaseSet set;
    set.copies.assign(g_count, Samples(n));
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t g = 0; g < g_count; ++g) set.copies[g][i] = stream[i * g_count + g];
    return set;
}

Samples interleave(const PolyphaseSet& set) {
    const std::size_t g_count = set.copies.size();
    if (g_count == 0) return {};
    const std::size_t n = set.copies[0].size();
    Samples out(n * g_count);
    for (std::size_t g = 0; g < g_count; ++g) {
        if (set.copies[g].size() != n) throw std::invalid_argument("polyphase copies differ in length");
        for (std::size_t i = 0; i < n; ++i) out[i * g_count + g] = set.copies[g][i];
    }
    return out;
}

namespace {

double signed_bin(std::size_t bin, std::size_t size) {
    return bin < size / 2 ? static_cast<double>(bin) : static_cast<double>(bin) - static_cast<double>(size);
}

}  // namespace

Samples compensate_overclock_phase(std::span<const Complex> spectrum, int g, int overclock) {
    Samples out(spectrum.begin(), spectrum.end());
    if (g == 0) return out;
    const double size = static_cast<double>(spectrum.size());
    const double step = -kTwoPi * g / (size * overclock);
    for (std::size_t l = 0; l < out.size(); ++l) out[l] *= unit_phasor(step * signed_bin(l, out.size()));
    return out;
}

SyncResult sync_timing(std::span<const Complex> stream, const SyncWindow& window, const OfdmConfig& cfg) {
    const Samples ref = gen_ltf_oversampled(cfg, cfg.overclock);
    if (window.last_lag < window.first_lag) throw SyncError("empty sync search window");
    if (window.last_lag + ref.size() > stream.size())
        throw SyncError("sync search window runs past the end of the capture");

    const std::size_t lags = window.last_lag - window.first_lag + 1;
    std::size_t nfft = 1;
    while (nfft < lags + ref.size() - 1) nfft <<= 1;
    Samples seg(nfft);
    std::copy_n(stream.begin() + static_cast<std::ptrdiff_t>(window.first_lag), lags + ref.size() - 1, seg.begin());
    Samples tmpl(nfft);
    std::copy(ref.begin(), ref.end(), tmpl.begin());
    fft_inplace(seg);
    fft_inplace(tmpl);
    for (std::size_t i = 0; i < nfft; ++i) seg[i] *= std::conj(tmpl[i]);
    ifft_inplace(seg);
    std::vector<double> mag(lags);
    for (std::size_t i = 0; i < lags; ++i) mag[i] = std::abs(seg[i]);

    const std::size_t best = static_cast<std::size_t>(std::max_element(mag.begin(), mag.end()) - mag.begin());
    const std::size_t guard = static_cast<std::size_t>(cfg.overclock);
    double second = 0.0;
    for (std::size_t i = 0; i < lags; ++i) {
        const std::size_t dist = i > best ? i - best : best - i;
        if (dist > guard) second = std::max(second, mag[i]);
    }

    SyncResult result;
    result.lag = window.first_lag + best;
    result.peak = mag[best];
    result.peak_ratio = second > 0.0 ? mag[best] / second : std::numeric_limits<double>::infinity();
    return result;
}

double estimate_cfo_coarse(std::span<const Complex> y, std::size_t first_body, const OfdmConfig& cfg) {
    const std::size_t f = static_cast<std::size_t>(cfg.num_subcarriers);
    if (first_body + 2 * f > y.size()) throw std::invalid_argument("LTF region runs past the input");
    Complex acc{};
    for (std::size_t n = 0; n < f; ++n) acc += y[first_body + n + f] * std::conj(y[first_body + n]);
    return std::arg(acc) * cfg.base_rate_hz / (kTwoPi * static_cast<double>(f));
}

namespace {

Samples derotated_spectrum(const Samples& copy, double cfo_hz, double base_rate_hz) {
    Samples x(copy);
    const double step = -kTwoPi * cfo_hz / base_rate_hz;
    for (std::size_t n = 0; n < x.size(); ++n) x[n] *= unit_phasor(step * static_cast<double>(n));
    fft_inplace(x);
    return x;
}

}  // namespace

double cfo_objective(const PolyphaseSet& set, double cfo_hz, const OfdmConfig& cfg) {
    const int big_g = set.overclock();
    if (big_g < 2) return 0.0;
    const Samples ref = derotated_spectrum(set.copies[0], cfo_hz, cfg.base_rate_hz);
    const std::size_t size = ref.size();
    double total = 0.0;
    for (int g = 1; g < big_g; ++g) {
        const Samples yg = derotated_spectrum(set.copies[static_cast<std::size_t>(g)], cfo_hz, cfg.base_rate_hz);
        const double common = kTwoPi * cfo_hz * g / (cfg.base_rate_hz * big_g);
        const double ramp = kTwoPi * g / (static_cast<double>(size) * big_g);
        for (std::size_t l = 0; l < size; ++l) {
            const Complex predicted = ref[l] * unit_phasor(common + ramp * signed_bin(l, size));
            total += std::norm(yg[l] - predicted);
        }
    }
    return total;
}

double estimate_cfo_fine(const PolyphaseSet& set, double center_hz, const OfdmConfig& cfg,
                         const FineCfoSearch& search) {
    if (set.overclock() < 2) return center_hz;
    auto cost = [&](double f) {
        const double j = cfo_objective(set, f, cfg);
        if (!std::isfinite(j)) throw std::runtime_error("degenerate symbol");
        return j;
    };

    const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
    double a = center_hz - search.radius_hz;
    double b = center_hz + search.radius_hz;
    double c = b - inv_phi * (b - a);
    double d = a + inv_phi * (b - a);
    double fc = cost(c);
    double fd = cost(d);
    while (b - a > search.resolution_hz) {
        if (fc <= fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = cost(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = cost(d);
        }
    }
    return 0.5 * (a + b);
}

ChannelEstimate estimate_channel(const std::vector<std::vector<Samples>>& grids,
                                 std::span<const Complex> ltf_freq, const OfdmConfig& cfg) {
    const std::size_t f = static_cast<std::size_t>(cfg.num_subcarriers);
    if (grids.empty() || grids[0].empty()) throw std::invalid_argument("no LTF observations");
    const std::size_t copies = grids[0].size();
    for (const auto& sym : grids) {
        if (sym.size() != copies) throw std::invalid_argument("LTF symbols differ in copy count");
        for (const auto& grid : sym)
            if (grid.size() != f) throw std::invalid_argument("LTF grid has the wrong length");
    }
    if (ltf_freq.size() != f) throw std::invalid_argument("LTF reference has the wrong length");

    const double n_obs = static_cast<double>(grids.size() * copies);
    const double bessel = n_obs > 1.0 ? n_obs / (n_obs - 1.0) : 0.0;

    ChannelEstimate est;
    est.h_hat.assign(f, Complex{});
    est.per_bin_noise_var.assign(f, 0.0);
    est.per_copy_noise_var.assign(copies, 0.0);

    const auto occupied = cfg.occupied_bins();
    for (int bin : occupied) {
        const std::size_t l = static_cast<std::size_t>(bin);
        Complex sum{};
        for (const auto& sym : grids)
            for (const auto& grid : sym) sum += grid[l] / ltf_freq[l];
        const Complex h = sum / n_obs;
        est.h_hat[l] = h;

        double resid = 0.0;
        for (const auto& sym : grids) {
            for (std::size_t g = 0; g < copies; ++g) {
                const double r = std::norm(sym[g][l] - h * ltf_freq[l]);
                resid += r;
                est.per_copy_noise_var[g] += r;
            }
        }
        est.per_bin_noise_var[l] = n_obs > 1.0 ? resid / (n_obs - 1.0) : 0.0;
    }
    const double per_copy_count = static_cast<double>(grids.size() * occupied.size());
    for (auto& v : est.per_copy_noise_var) v = v / per_copy_count * bessel;
    return est;
}

PilotTracking track_pilot_phase(std::span<const Complex> spectrum, std::span<const Complex> h_hat,
                                const OfdmConfig& cfg, std::span<const Complex> pilots) {
    if (pilots.size() != cfg.pilot_subcarriers.size())
        throw std::invalid_argument("pilot value count does not match the pilot map");
    Complex corr{};
    double energy = 0.0;
    for (std::size_t i = 0; i < pilots.size(); ++i) {
        const std::size_t p = static_cast<std::size_t>(cfg.pilot_subcarriers[i]);
        corr += spectrum[p] * std::conj(h_hat[p] * pilots[i]);
        energy += std::norm(spectrum[p]);
    }
    if (energy < 1e-12) throw std::runtime_error("pilot erasure");

    PilotTracking out;
    out.phase = std::arg(corr);
    const Complex rot = unit_phasor(-out.phase);
    out.spectrum.assign(spectrum.begin(), spectrum.end());
    for (auto& v : out.spectrum) v *= rot;
    return out;
}

Samples combine_copies(const std::vector<Samples>& grids, CombineWeights weights,
                       std::span<const double> per_copy_noise_var) {
    if (grids.empty()) throw std::invalid_argument("no copies to combine");
    const std::size_t size = grids[0].size();
    for (const auto& g : grids)
        if (g.size() != size) throw std::invalid_argument("copies differ in length");
    if (grids.size() == 1) return grids[0];

    std::vector<double> w(grids.size(), 1.0 / static_cast<double>(grids.size()));
    if (weights == CombineWeights::kInverseVariance) {
        if (per_copy_noise_var.size() != grids.size())
            throw std::invalid_argument("one noise variance per copy is required");
        const bool usable = std::all_of(per_copy_noise_var.begin(), per_copy_noise_var.end(),
                                        [](double v) { return v > 0.0; });
        if (usable) {
            double total = 0.0;
            for (std::size_t g = 0; g < grids.size(); ++g) total += w[g] = 1.0 / per_copy_noise_var[g];
            for (auto& v : w) v /= total;
        }
    }

    Samples out(size);
    for (std::size_t g = 0; g < grids.size(); ++g)
        for (std::size_t l = 0; l < size; ++l) out[l] += w[g] * grids[g][l];
    return out;
}

namespace {

/// G compensated spectra of the F-sample window starting at oversampled index w.
std::vector<Samples> window_spectra(const Samples& stream, std::size_t w, const OfdmConfig& cfg) {
    const std::size_t f = static_cast<std::size_t>(cfg.num_subcarriers);
    const std::size_t big_g = static_cast<std::size_t>(cfg.overclock);
    if (w + f * big_g > stream.size()) throw SyncError("frame runs past the end of the capture");
    std::vector<Samples> out(big_g, Samples(f));
    for (std::size_t g = 0; g < big_g; ++g) {
        for (std::size_t n = 0; n < f; ++n) out[g][n] = stream[w + n * big_g + g];
        fft_inplace(out[g]);
        if (g > 0) out[g] = compensate_overclock_phase(out[g], static_cast<int>(g), cfg.overclock);
    }
    return out;
}

PolyphaseSet window_copies(const Samples& stream, std::size_t w, const OfdmConfig& cfg) {
    const std::size_t f = static_cast<std::size_t>(cfg.num_subcarriers);
    const std::size_t big_g = static_cast<std::size_t>(cfg.overclock);
    if (w + f * big_g > stream.size()) throw SyncError("frame runs past the end of the capture");
    return polyphase_split(std::span<const Complex>(stream).subspan(w, f * big_g), cfg.overclock);
}

void score(RxDiagnostics& diag, const GroundTruth* truth) {
    if (!truth) return;
    diag.scored_bits = truth->bits.size();
    std::size_t errors = 0;
    for (std::size_t i = 0; i < truth->bits.size(); ++i)
        if (i >= diag.decoded_bits.size() || diag.decoded_bits[i] != truth->bits[i]) ++errors;
    diag.bit_errors = errors;
    diag.ber = diag.scored_bits ? static_cast<double>(errors) / static_cast<double>(diag.scored_bits) : 0.0;
}

/// Shared pipeline. `truth_overclock` converts ground-truth indices, which are
/// always in capture samples, to this stream's rate.
RxDiagnostics run_pipeline(Samples stream, const RxConfig& cfg, const GroundTruth* truth,
                           int truth_overclock) {
    const OfdmConfig& ofdm = cfg.ofdm;
    ofdm.validate();
    cfg.detector.validate(ofdm.base_rate_hz);
    const std::size_t big_g = static_cast<std::size_t>(ofdm.overclock);
    const std::size_t f = static_cast<std::size_t>(ofdm.num_subcarriers);
    const std::size_t sym_len = static_cast<std::size_t>(ofdm.symbol_len());

    RxDiagnostics diag;
    diag.per_copy_evm.assign(big_g, 0.0);

    // Idle listening at base rate.
    Samples base(stream.size() / big_g);
    for (std::size_t n = 0; n < base.size(); ++n) base[n] = stream[n * big_g];
    const auto detection = detect_packet(base, cfg.detector);
    if (!detection) {
        diag.missed = true;
        score(diag, truth);
        return diag;
    }
    diag.detect_index = detection->index;
    diag.detect_complete = detection->complete;

    // Nothing is captured at the high rate until the clock has switched.
    if (big_g > 1) {
        const std::size_t ready =
            (detection->complete + 1 + cfg.detector.latency_samples(ofdm.base_rate_hz)) * big_g;
        std::fill(stream.begin(), stream.begin() + static_cast<std::ptrdiff_t>(std::min(ready, stream.size())),
                  Complex{});
    }

    const std::size_t ref_len = static_cast<std::size_t>(kLtfLength) * big_g;
    SyncWindow window;
    window.first_lag = (detection->complete + static_cast<std::size_t>(cfg.sync_search_first)) * big_g;
    window.last_lag = (detection->complete + static_cast<std::size_t>(cfg.sync_search_last)) * big_g;
    if (stream.size() >= ref_len) window.last_lag = std::min(window.last_lag, stream.size() - ref_len);
    if (stream.size() < ref_len || window.last_lag < window.first_lag)
        throw SyncError("capture too short for the sync search window");
    const SyncResult sync = sync_timing(stream, window, ofdm);

    diag.sync_lag = sync.lag;
    diag.sync_peak_ratio = sync.peak_ratio;
    diag.sync_index = static_cast<std::size_t>(std::llround(static_cast<double>(sync.lag) / static_cast<double>(big_g)));
    diag.sync_residue = static_cast<double>(sync.lag) / static_cast<double>(big_g) - static_cast<double>(diag.sync_index);
    if (truth)
        diag.sync_error = static_cast<double>(sync.lag) / static_cast<double>(big_g) -
                          truth->ltf_start / static_cast<double>(truth_overclock);

    const std::size_t backoff = static_cast<std::size_t>(cfg.fft_backoff) * big_g;
    const std::size_t body1 = sync.lag + static_cast<std::size_t>(kLtfGuardLength) * big_g - backoff;
    const std::size_t body2 = body1 + f * big_g;
    auto data_window = [&](std::size_t s) {
        return sync.lag + ref_len + s * sym_len * big_g + static_cast<std::size_t>(ofdm.cp_len) * big_g - backoff;
    };

    // Coarse CFO on copy 0 of the two LTF bodies.
    Samples ltf_1x(2 * f);
    for (std::size_t n = 0; n < 2 * f; ++n) ltf_1x[n] = stream[body1 + n * big_g];
    diag.cfo_coarse_hz = estimate_cfo_coarse(ltf_1x, 0, ofdm);
    stream = apply_cfo(stream, -diag.cfo_coarse_hz, ofdm.oversampled_rate_hz());

    // Fine CFO on the first data symbol's copies, as a residual about zero.
    diag.cfo_applied_hz = diag.cfo_coarse_hz;
    diag.cfo_fine_hz = diag.cfo_coarse_hz;
    if (cfg.payload_symbols > 0 && big_g > 1) {
        const PolyphaseSet first = window_copies(stream, data_window(0), ofdm);
        const double residual = estimate_cfo_fine(first, 0.0, ofdm, cfg.fine_search);
        diag.cfo_fine_hz = diag.cfo_coarse_hz + residual;
        if (cfg.fine_cfo == FineCfoMode::kApply) {
            stream = apply_cfo(stream, -residual, ofdm.oversampled_rate_hz());
            diag.cfo_applied_hz = diag.cfo_fine_hz;
        }
    }

    const std::vector<std::vector<Samples>> ltf_grids = {window_spectra(stream, body1, ofdm),
                                                         window_spectra(stream, body2, ofdm)};
    const ChannelEstimate est = estimate_channel(ltf_grids, PreambleSpec::standard().ltf_freq, ofdm);
    {
        double total = 0.0;
        const auto occupied = ofdm.occupied_bins();
        for (int bin : occupied) total += est.per_bin_noise_var[static_cast<std::size_t>(bin)];
        diag.noise_var_estimate = total / static_cast<double>(occupied.size());
    }

    const Constellation& constellation = Constellation::of(cfg.scheme);
    const auto pilots = pilot_symbols();
    const int bps = constellation.bits_per_symbol();
    diag.decoded_bits.reserve(cfg.payload_symbols * ofdm.data_subcarriers.size() * static_cast<std::size_t>(bps));
    std::vector<double> evm_acc(big_g, 0.0);
    std::size_t evm_count = 0;

    for (std::size_t s = 0; s < cfg.payload_symbols; ++s) {
        const std::vector<Samples> spectra = window_spectra(stream, data_window(s), ofdm);
        const Samples combined = combine_copies(spectra, cfg.combine, est.per_copy_noise_var);
        const PilotTracking tracked = track_pilot_phase(combined, est.h_hat, ofdm, pilots);
        const Complex derotate = unit_phasor(-tracked.phase);

        const Samples* tx = truth && truth->tx_symbols && s < truth->tx_symbols->size()
                                ? &(*truth->tx_symbols)[s]
                                : nullptr;
        for (int bin : ofdm.data_subcarriers) {
            const std::size_t l = static_cast<std::size_t>(bin);
            const Complex eq = tracked.spectrum[l] / est.h_hat[l];
            const unsigned label = constellation.nearest_label(eq);
            append_label_bits(label, bps, diag.decoded_bits);

            const Complex ideal = tx ? (*tx)[l] : constellation.point(label);
            for (std::size_t g = 0; g < big_g; ++g)
                evm_acc[g] += std::norm(spectra[g][l] * derotate / est.h_hat[l] - ideal);
            ++evm_count;
        }
    }
    for (std::size_t g = 0; g < big_g; ++g)
        diag.per_copy_evm[g] = evm_count ? std::sqrt(evm_acc[g] / static_cast<double>(evm_count)) : 0.0;

    score(diag, truth);
    return diag;
}

}  // namespace

RxDiagnostics receive_frame(std::span<const Complex> stream_over, const RxConfig& cfg, const GroundTruth* truth) {
    return run_pipeline(Samples(stream_over.begin(), stream_over.end()), cfg, truth, cfg.ofdm.overclock);
}

RxDiagnostics receive_frame_baseline(std::span<const Complex> stream_over, const RxConfig& cfg,
                                     const GroundTruth* truth) {
    const std::size_t big_g = static_cast<std::size_t>(cfg.ofdm.overclock);
    Samples base(stream_over.size() / big_g);
    for (std::size_t n = 0; n < base.size(); ++n) base[n] = stream_over[n * big_g];
    RxConfig base_cfg = cfg;
    base_cfg.ofdm.overclock = 1;
    return run_pipeline(std::move(base), base_cfg, truth, cfg.ofdm.overclock);
}

}  // namespace tfi
