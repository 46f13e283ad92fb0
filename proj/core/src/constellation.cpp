#include "tfi/constellation.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace tfi {
namespace {

struct AxisTable {
    std::vector<double> levels;
    std::vector<unsigned> labels;
};

AxisTable axis_table(int axis_bits) {
    switch (axis_bits) {
        case 1: return {{-1, 1}, {0, 1}};
        case 2: return {{-3, -1, 1, 3}, {0b00, 0b01, 0b11, 0b10}};
        case 3:
            return {{-7, -5, -3, -1, 1, 3, 5, 7},
                    {0b000, 0b001, 0b011, 0b010, 0b110, 0b111, 0b101, 0b100}};
        default: throw std::logic_error("unsupported axis width");
    }
}

}  // namespace

int bits_per_symbol(Scheme scheme) {
    switch (scheme) {
        case Scheme::kBpsk: return 1;
        case Scheme::kQpsk: return 2;
        case Scheme::kQam16: return 4;
        case Scheme::kQam64: return 6;
    }
    throw std::invalid_argument("unknown scheme");
}

std::string_view to_string(Scheme scheme) {
    switch (scheme) {
        case Scheme::kBpsk: return "BPSK";
        case Scheme::kQpsk: return "QPSK";
        case Scheme::kQam16: return "16QAM";
        case Scheme::kQam64: return "64QAM";
    }
    return "?";
}

Scheme parse_scheme(std::string_view name) {
    std::string upper(name);
    std::transform(upper.begin(), upper.end(), upper.begin(),
                   [](unsigned char c) { return static_cast<char>(std::toupper(c)); });
    if (upper == "BPSK") return Scheme::kBpsk;
    if (upper == "QPSK") return Scheme::kQpsk;
    if (upper == "16QAM" || upper == "QAM16") return Scheme::kQam16;
    if (upper == "64QAM" || upper == "QAM64") return Scheme::kQam64;
    throw std::invalid_argument("unknown modulation scheme: " + std::string(name));
}

Constellation::Constellation(Scheme scheme) : scheme_(scheme), bits_(tfi::bits_per_symbol(scheme)) {
    points_.resize(std::size_t{1} << bits_);
    if (scheme == Scheme::kBpsk) {
        points_[0] = {-1.0, 0.0};
        points_[1] = {1.0, 0.0};
        return;
    }

    const int half = bits_ / 2;
    const AxisTable axis = axis_table(half);
    // Mean energy of a square grid with per-axis levels L: 2 * mean(L^2).
    double axis_energy = 0.0;
    for (double l : axis.levels) axis_energy += l * l;
    const double scale = 1.0 / std::sqrt(2.0 * axis_energy / static_cast<double>(axis.levels.size()));

    for (std::size_t i = 0; i < axis.levels.size(); ++i) {
        for (std::size_t q = 0; q < axis.levels.size(); ++q) {
            const unsigned label = (axis.labels[i] << half) | axis.labels[q];
            points_[label] = Complex(axis.levels[i] * scale, axis.levels[q] * scale);
        }
    }
    for (double l : axis.levels) levels_.push_back(l * scale);
    level_labels_ = axis.labels;
}

const Constellation& Constellation::of(Scheme scheme) {
    static const Constellation tables[] = {Constellation(Scheme::kBpsk), Constellation(Scheme::kQpsk),
                                           Constellation(Scheme::kQam16),
                                           Constellation(Scheme::kQam64)};
    return tables[static_cast<int>(scheme)];
}

unsigned Constellation::nearest_label_exhaustive(Complex sample) const {
    unsigned best = 0;
    double best_dist = std::numeric_limits<double>::infinity();
    for (unsigned label = 0; label < points_.size(); ++label) {
        const double dist = std::norm(sample - points_[label]);
        if (dist < best_dist) {
            best_dist = dist;
            best = label;
        }
    }
    return best;
}

unsigned Constellation::nearest_label(Complex sample) const {
    if (scheme_ == Scheme::kBpsk) return sample.real() > 0.0 ? 1u : 0u;

    // Separable slicing; an exact midpoint falls back to the exhaustive search
    // so the lowest-label tie rule holds.
    auto slice = [this](double x, bool& tie) {
        std::size_t idx = 0;
        while (idx + 1 < levels_.size()) {
            const double mid = 0.5 * (levels_[idx] + levels_[idx + 1]);
            if (x == mid) tie = true;
            if (x <= mid) break;
            ++idx;
        }
        return level_labels_[idx];
    };
    bool tie = false;
    const unsigned li = slice(sample.real(), tie);
    const unsigned lq = slice(sample.imag(), tie);
    if (tie) return nearest_label_exhaustive(sample);
    return (li << (bits_ / 2)) | lq;
}

void append_label_bits(unsigned label, int bits, Bits& out) {
    for (int b = bits - 1; b >= 0; --b) out.push_back(static_cast<std::uint8_t>((label >> b) & 1u));
}

Samples map_bits(std::span<const std::uint8_t> bits, const Constellation& constellation) {
    const auto k = static_cast<std::size_t>(constellation.bits_per_symbol());
    if (bits.size() % k != 0) throw std::invalid_argument("partial symbol");
    Samples out;
    out.reserve(bits.size() / k);
    for (std::size_t i = 0; i < bits.size(); i += k) {
        unsigned label = 0;
        for (std::size_t b = 0; b < k; ++b) label = (label << 1) | (bits[i + b] & 1u);
        out.push_back(constellation.point(label));
    }
    return out;
}

Bits demap_nearest(Complex sample, const Constellation& constellation) {
    Bits out;
    append_label_bits(constellation.nearest_label(sample), constellation.bits_per_symbol(), out);
    return out;
}

}  // namespace tfi
