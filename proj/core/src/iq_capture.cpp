#include "tfi/iq_capture.hpp"

#include <array>
#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>
#include <string>
#include <vector>

namespace tfi {
namespace {

constexpr std::array<char, 4> kMagic = {'T', 'F', 'I', 'Q'};

template <typename U>
void put_le(std::vector<unsigned char>& out, U value) {
    for (std::size_t i = 0; i < sizeof(U); ++i) out.push_back(static_cast<unsigned char>(value >> (8 * i)));
}

template <typename U>
U get_le(const unsigned char* p) {
    U value = 0;
    for (std::size_t i = 0; i < sizeof(U); ++i) value |= static_cast<U>(p[i]) << (8 * i);
    return value;
}

}  // namespace

void write_iq_capture(const std::filesystem::path& path, std::span<const Complex> stream, const IqMeta& meta) {
    std::vector<unsigned char> bytes;
    bytes.reserve(kIqHeaderSize + stream.size() * 8);
    bytes.insert(bytes.end(), kMagic.begin(), kMagic.end());
    put_le<std::uint16_t>(bytes, kIqFormatVersion);
    put_le<std::uint64_t>(bytes, std::bit_cast<std::uint64_t>(meta.rate_hz));
    put_le<std::uint16_t>(bytes, static_cast<std::uint16_t>(meta.overclock));
    bytes.insert(bytes.end(), 16, 0);
    put_le<std::uint64_t>(bytes, static_cast<std::uint64_t>(stream.size()));
    for (const Complex& v : stream) {
        put_le<std::uint32_t>(bytes, std::bit_cast<std::uint32_t>(static_cast<float>(v.real())));
        put_le<std::uint32_t>(bytes, std::bit_cast<std::uint32_t>(static_cast<float>(v.imag())));
    }

    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IqFormatError(IqFormatError::Kind::kIo, "cannot open " + path.string() + " for writing");
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw IqFormatError(IqFormatError::Kind::kIo, "write failed: " + path.string());
}

IqCapture read_iq_capture(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IqFormatError(IqFormatError::Kind::kIo, "cannot open " + path.string());
    const std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());

    if (bytes.size() < kMagic.size() || std::memcmp(bytes.data(), kMagic.data(), kMagic.size()) != 0)
        throw IqFormatError(IqFormatError::Kind::kBadMagic, "not an IQ capture");
    if (bytes.size() < 6) throw IqFormatError(IqFormatError::Kind::kTruncated, "truncated IQ capture header");
    const auto version = get_le<std::uint16_t>(bytes.data() + 4);
    if (version != kIqFormatVersion)
        throw IqFormatError(IqFormatError::Kind::kBadVersion,
                            "unsupported IQ capture version " + std::to_string(version));
    if (bytes.size() < kIqHeaderSize) throw IqFormatError(IqFormatError::Kind::kTruncated, "truncated IQ capture header");

    IqCapture cap;
    cap.meta.rate_hz = std::bit_cast<double>(get_le<std::uint64_t>(bytes.data() + 6));
    cap.meta.overclock = get_le<std::uint16_t>(bytes.data() + 14);
    const auto count = get_le<std::uint64_t>(bytes.data() + 32);
    if (count > (bytes.size() - kIqHeaderSize) / 8)
        throw IqFormatError(IqFormatError::Kind::kTruncated, "truncated IQ capture body");

    cap.stream.resize(static_cast<std::size_t>(count));
    const unsigned char* p = bytes.data() + kIqHeaderSize;
    for (auto& v : cap.stream) {
        const float re = std::bit_cast<float>(get_le<std::uint32_t>(p));
        const float im = std::bit_cast<float>(get_le<std::uint32_t>(p + 4));
        v = Complex(re, im);
        p += 8;
    }
    return cap;
}

}  // namespace tfi
