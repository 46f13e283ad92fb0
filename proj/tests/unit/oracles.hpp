#pragma once

// Reference computations written directly from their definitions. They share
// no code with the library beyond the Complex typedef.

#include <cmath>
#include <complex>
#include <cstdint>
#include <random>
#include <span>
#include <vector>

namespace oracle {

using Complex = std::complex<double>;
using Samples = std::vector<Complex>;

inline constexpr double kPi = 3.14159265358979323846;

/// O(N^2) forward DFT, X[l] = sum_n x[n] e^{-j 2 pi n l / N}.
inline Samples naive_dft(std::span<const Complex> x) {
    const std::size_t n = x.size();
    Samples out(n);
    for (std::size_t l = 0; l < n; ++l) {
        Complex acc{};
        for (std::size_t k = 0; k < n; ++k) {
            const double angle = -2.0 * kPi * static_cast<double>((k * l) % n) / static_cast<double>(n);
            acc += x[k] * Complex(std::cos(angle), std::sin(angle));
        }
        out[l] = acc;
    }
    return out;
}

/// Signed frequency of FFT bin l of an n-point grid, in [-n/2, n/2).
inline int signed_bin(std::size_t l, std::size_t n) {
    return l < n / 2 ? static_cast<int>(l) : static_cast<int>(l) - static_cast<int>(n);
}

/// Continuous-time OFDM tone sum x(t) = (1/F) sum_l X[l] e^{j 2 pi l~ t / F},
/// t in base-rate samples.
inline Complex tone_sum(std::span<const Complex> grid, double t) {
    const std::size_t f = grid.size();
    Complex acc{};
    for (std::size_t l = 0; l < f; ++l) {
        if (grid[l] == Complex{}) continue;
        const double angle = 2.0 * kPi * signed_bin(l, f) * t / static_cast<double>(f);
        acc += grid[l] * Complex(std::cos(angle), std::sin(angle));
    }
    return acc / static_cast<double>(f);
}

/// Gaussian tail Q(x).
inline double q_function(double x) { return 0.5 * std::erfc(x / std::sqrt(2.0)); }

/// Uncoded BPSK bit error rate at a per-bit SNR Eb/N0 (linear).
inline double bpsk_ber(double ebn0) { return q_function(std::sqrt(2.0 * ebn0)); }

/// Two-sided exact binomial sign-test p-value for `wins` successes out of n
/// non-tied pairs under p = 1/2.
inline double sign_test_p(std::size_t wins, std::size_t n) {
    if (n == 0) return 1.0;
    const std::size_t k = std::min(wins, n - wins);
    double tail = 0.0;
    for (std::size_t i = 0; i <= k; ++i) {
        const double log_term = std::lgamma(static_cast<double>(n) + 1.0) - std::lgamma(static_cast<double>(i) + 1.0) -
                                std::lgamma(static_cast<double>(n - i) + 1.0) - static_cast<double>(n) * std::log(2.0);
        tail += std::exp(log_term);
    }
    return std::min(1.0, 2.0 * tail);
}

inline Samples random_samples(std::size_t n, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    Samples out(n);
    for (auto& v : out) v = Complex(normal(rng), normal(rng));
    return out;
}

inline std::vector<std::uint8_t> random_bits(std::size_t n, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::vector<std::uint8_t> out(n);
    for (auto& b : out) b = static_cast<std::uint8_t>(rng() & 1U);
    return out;
}

inline double max_abs_diff(std::span<const Complex> a, std::span<const Complex> b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.size() && i < b.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
    return m;
}

inline double energy(std::span<const Complex> x) {
    double e = 0.0;
    for (const auto& v : x) e += std::norm(v);
    return e;
}

/// Wrap an angle to (-pi, pi].
inline double wrap(double a) {
    a = std::fmod(a + kPi, 2.0 * kPi);
    if (a <= 0.0) a += 2.0 * kPi;
    return a - kPi;
}

}  // namespace oracle
