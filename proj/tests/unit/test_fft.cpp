#include <gtest/gtest.h>

#include "oracles.hpp"
#include "tfi/fft.hpp"

using tfi::Complex;
using tfi::Samples;

TEST(Fft, AllOnesIsDcImpulse) {
    const Samples x(64, Complex(1.0, 0.0));
    const Samples y = tfi::fft(x);
    EXPECT_NEAR(std::abs(y[0] - Complex(64.0, 0.0)), 0.0, 1e-10);
    for (std::size_t l = 1; l < y.size(); ++l) EXPECT_LT(std::abs(y[l]), 1e-10) << "bin " << l;
}

TEST(Fft, InverseUndoesForward) {
    for (std::size_t n : {64u, 128u, 256u, 512u}) {
        const Samples x = oracle::random_samples(n, n);
        EXPECT_LT(oracle::max_abs_diff(tfi::ifft(tfi::fft(x)), x), 1e-10) << "N=" << n;
    }
}

TEST(Fft, MatchesNaiveDft) {
    for (std::size_t n : {1u, 2u, 8u, 64u, 256u}) {
        const Samples x = oracle::random_samples(n, 100 + n);
        EXPECT_LT(oracle::max_abs_diff(tfi::fft(x), oracle::naive_dft(x)), 1e-8) << "N=" << n;
    }
}

TEST(Fft, InverseCarriesOneOverN) {
    Samples x(64);
    x[3] = Complex(64.0, 0.0);
    const Samples t = tfi::ifft(x);
    for (std::size_t n = 0; n < t.size(); ++n) {
        const double angle = 2.0 * oracle::kPi * 3.0 * static_cast<double>(n) / 64.0;
        EXPECT_LT(std::abs(t[n] - Complex(std::cos(angle), std::sin(angle))), 1e-12);
    }
}

TEST(Fft, Parseval) {
    for (std::size_t n : {64u, 512u}) {
        const Samples x = oracle::random_samples(n, 7 * n);
        const double time_energy = oracle::energy(x);
        const double freq_energy = oracle::energy(tfi::fft(x)) / static_cast<double>(n);
        EXPECT_NEAR(time_energy / freq_energy, 1.0, 1e-9);
    }
}

TEST(Fft, RejectsNonPowerOfTwo) {
    const Samples x(48);
    EXPECT_THROW(tfi::fft(x), std::invalid_argument);
    EXPECT_THROW(tfi::ifft(x), std::invalid_argument);
    Samples empty;
    EXPECT_THROW(tfi::fft_inplace(empty), std::invalid_argument);
}

TEST(Fft, InplaceAgreesWithCopying) {
    const Samples x = oracle::random_samples(128, 3);
    Samples y = x;
    tfi::fft_inplace(y);
    EXPECT_EQ(y, tfi::fft(x));
}
