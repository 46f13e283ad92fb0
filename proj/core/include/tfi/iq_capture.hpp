#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <stdexcept>

#include "tfi/types.hpp"

namespace tfi {

// Little-endian layout:
//   "TFIQ" | u16 version (1) | f64 sample rate Hz | u16 overclock | 16 reserved
//   bytes | u64 sample count | count x (f32 I, f32 Q)

inline constexpr std::uint16_t kIqFormatVersion = 1;
inline constexpr std::size_t kIqHeaderSize = 40;

struct IqMeta {
    double rate_hz = 0.0;
    int overclock = 1;
};

struct IqCapture {
    IqMeta meta;
    Samples stream;  // float32 precision
};

class IqFormatError : public std::runtime_error {
public:
    enum class Kind { kBadMagic, kBadVersion, kTruncated, kIo };
    IqFormatError(Kind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
    Kind kind() const { return kind_; }

private:
    Kind kind_;
};

/// Throws IqFormatError(kIo) if the file cannot be written.
void write_iq_capture(const std::filesystem::path& path, std::span<const Complex> stream, const IqMeta& meta);

/// Throws IqFormatError: kBadMagic ("not an IQ capture"), kBadVersion,
/// kTruncated, or kIo when the file cannot be opened.
IqCapture read_iq_capture(const std::filesystem::path& path);

}  // namespace tfi
