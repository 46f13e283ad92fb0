#include <gtest/gtest.h>

#include "oracles.hpp"
#include "tfi/fft.hpp"
#include "tfi/ofdm.hpp"
#include "tfi/preamble.hpp"
#include "tfi/receiver.hpp"
#include "tfi/transmitter.hpp"

using tfi::Bits;
using tfi::Complex;
using tfi::OfdmConfig;
using tfi::Samples;
using tfi::Scheme;

TEST(Upsample, UnitFactorIsIdentity) {
    const Samples x = oracle::random_samples(64, 1);
    EXPECT_EQ(tfi::upsample_bandlimited(x, 1), x);
}

TEST(Upsample, PassesThroughInputSamples) {
    for (int g : {2, 4, 8}) {
        const Samples x = oracle::random_samples(128, 2 + g);
        const Samples y = tfi::upsample_bandlimited(x, g);
        ASSERT_EQ(y.size(), x.size() * static_cast<std::size_t>(g));
        for (std::size_t k = 0; k < x.size(); ++k)
            ASSERT_LT(std::abs(y[k * static_cast<std::size_t>(g)] - x[k]), 1e-9) << "G=" << g << " k=" << k;
    }
}

TEST(Upsample, SpectrumIsZeroPaddedInput) {
    const Samples x = oracle::random_samples(64, 3);
    const Samples y = tfi::upsample_bandlimited(x, 4);
    const Samples xs = oracle::naive_dft(x);
    const Samples ys = oracle::naive_dft(y);
    for (std::size_t l = 0; l < 256; ++l) {
        const int k = oracle::signed_bin(l, 256);
        Complex expected{};
        if (k > -32 && k < 32) expected = 4.0 * xs[static_cast<std::size_t>(k < 0 ? k + 64 : k)];
        if (k == 32 || k == -32) expected = 2.0 * xs[32];
        EXPECT_LT(std::abs(ys[l] - expected), 1e-8) << k;
    }
}

TEST(Upsample, SingleToneCopiesCarryTimeShiftPhase) {
    const std::size_t n = 64;
    for (int f0 : {1, 5, -9, 26}) {
        Samples grid(n);
        grid[static_cast<std::size_t>(f0 < 0 ? f0 + 64 : f0)] = Complex(64.0, 0.0);
        const Samples base = tfi::ifft(grid);
        const int g_total = 8;
        const Samples up = tfi::upsample_bandlimited(base, g_total);
        for (int g = 0; g < g_total; ++g) {
            const double angle = 2.0 * oracle::kPi * f0 * g / (64.0 * g_total);
            const Complex rot(std::cos(angle), std::sin(angle));
            for (std::size_t k = 0; k < n; ++k)
                ASSERT_LT(std::abs(up[k * g_total + static_cast<std::size_t>(g)] - base[k] * rot), 1e-9)
                    << "f0=" << f0 << " g=" << g;
        }
    }
}

TEST(Upsample, RejectsUnsupportedFactor) {
    const Samples x(64);
    EXPECT_THROW(tfi::upsample_bandlimited(x, 3), std::invalid_argument);
    EXPECT_THROW(tfi::upsample_bandlimited(x, 16), std::invalid_argument);
}

TEST(BuildFrame, QpskSingleSymbolLayout) {
    const OfdmConfig cfg = OfdmConfig::standard();
    const Bits bits = oracle::random_bits(104, 4);
    const auto frame = tfi::build_frame(bits, Scheme::kQpsk, cfg);
    EXPECT_EQ(frame.base_waveform.size(), 400u);
    EXPECT_EQ(frame.num_payload_symbols(), 1u);
    EXPECT_EQ(frame.pad_bits, 0u);
    EXPECT_EQ(tfi::frame_length(1, cfg), 400u);
    const Samples stf = tfi::gen_stf(cfg);
    const Samples ltf = tfi::gen_ltf(cfg);
    for (std::size_t n = 0; n < 160; ++n) {
        EXPECT_EQ(frame.base_waveform[n], stf[n]);
        EXPECT_EQ(frame.base_waveform[160 + n], ltf[n]);
    }
}

TEST(BuildFrame, PadsToWholeSymbols) {
    const OfdmConfig cfg = OfdmConfig::standard();
    const Bits bits = oracle::random_bits(100, 5);
    const auto frame = tfi::build_frame(bits, Scheme::kQam16, cfg);
    EXPECT_EQ(frame.payload_bits.size() % (52 * 4), 0u);
    EXPECT_EQ(frame.pad_bits, 208u - 100u);
    EXPECT_EQ(frame.scored_bits(), 100u);
    for (std::size_t i = 100; i < frame.payload_bits.size(); ++i) EXPECT_EQ(frame.payload_bits[i], 0);
}

TEST(BuildFrame, ZeroBitsGiveZeroLabelOnEveryDataBin) {
    const OfdmConfig cfg = OfdmConfig::standard();
    for (Scheme s : tfi::kAllSchemes) {
        const Bits bits(52 * static_cast<std::size_t>(tfi::bits_per_symbol(s)) * 2, 0);
        const auto frame = tfi::build_frame(bits, s, cfg);
        const Complex zero_point = tfi::Constellation::of(s).point(0);
        for (const auto& grid : frame.tx_symbols) {
            for (int b : cfg.data_subcarriers) EXPECT_EQ(grid[static_cast<std::size_t>(b)], zero_point);
            const auto pilots = tfi::pilot_symbols();
            for (std::size_t i = 0; i < 4; ++i)
                EXPECT_EQ(grid[static_cast<std::size_t>(cfg.pilot_subcarriers[i])], pilots[i]);
        }
    }
}

TEST(BuildFrame, RejectsEmptyPayload) {
    EXPECT_THROW(tfi::build_frame(Bits{}, Scheme::kBpsk, OfdmConfig::standard()), std::invalid_argument);
}

TEST(BuildFrame, OversampledCopyZeroIsBaseWaveform) {
    for (int g : {1, 2, 4, 8}) {
        const OfdmConfig cfg = OfdmConfig::standard(g);
        const auto frame = tfi::build_frame(oracle::random_bits(52 * 6 * 3, 6), Scheme::kQam64, cfg);
        ASSERT_EQ(frame.oversampled_waveform.size(), frame.base_waveform.size() * static_cast<std::size_t>(g));
        const auto set = tfi::polyphase_split(frame.oversampled_waveform, g);
        EXPECT_LT(oracle::max_abs_diff(set.copies[0], frame.base_waveform), 1e-9) << "G=" << g;
    }
}

TEST(BuildFrame, OversampledTrainingFieldsKeepStructure) {
    const int g = 4;
    const std::size_t gg = 4;
    const auto frame = tfi::build_frame(oracle::random_bits(52, 7), Scheme::kBpsk, OfdmConfig::standard(g));
    const auto& w = frame.oversampled_waveform;
    for (std::size_t n = 0; n < 144 * gg; ++n) ASSERT_LT(std::abs(w[n] - w[n + 16 * gg]), 1e-12) << n;
    const std::size_t body = 160 * gg + 32 * gg;
    for (std::size_t n = 0; n < 64 * gg; ++n) ASSERT_LT(std::abs(w[body + n] - w[body + 64 * gg + n]), 1e-12) << n;
}

TEST(BuildFrame, DelayedSynthesisSamplesEachSegment) {
    const int g = 2;
    const OfdmConfig cfg = OfdmConfig::standard(g);
    const auto frame = tfi::build_frame(oracle::random_bits(52 * 2 * 2, 8), Scheme::kQpsk, cfg);
    const double delay = 0.6;
    const Samples w = tfi::synthesize_oversampled(frame, cfg, delay);
    ASSERT_EQ(w.size(), frame.oversampled_waveform.size());
    // Payload symbol s occupies base samples [320 + 80 s, 400 + 80 s); its body
    // starts 16 samples in.
    for (std::size_t s = 0; s < frame.tx_symbols.size(); ++s) {
        const std::size_t start = (320 + 80 * s) * g;
        for (std::size_t j = 0; j < 80u * g; ++j) {
            const double t = (static_cast<double>(j) - delay) / g - 16.0;
            ASSERT_LT(std::abs(w[start + j] - oracle::tone_sum(frame.tx_symbols[s], t)), 1e-12) << s << "," << j;
        }
    }
    EXPECT_THROW(tfi::synthesize_oversampled(frame, cfg, 1.0), std::invalid_argument);
    EXPECT_THROW(tfi::synthesize_oversampled(frame, cfg, -0.1), std::invalid_argument);
}
