#include "tfi/fft.hpp"

#include <cmath>
#include <memory>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <utility>

#include "tfi/config.hpp"

namespace tfi {
namespace {

struct Plan {
    std::vector<std::size_t> bitrev;
    Samples twiddles;  // e^{-j 2 pi k / N}, k < N/2
};

const Plan& plan_for(std::size_t n) {
    thread_local std::unordered_map<std::size_t, std::unique_ptr<Plan>> cache;
    auto& slot = cache[n];
    if (slot) return *slot;

    auto plan = std::make_unique<Plan>();
    plan->bitrev.resize(n);
    std::size_t bits = 0;
    while ((std::size_t{1} << bits) < n) ++bits;
    for (std::size_t i = 0; i < n; ++i) {
        std::size_t r = 0;
        for (std::size_t b = 0; b < bits; ++b)
            if (i & (std::size_t{1} << b)) r |= std::size_t{1} << (bits - 1 - b);
        plan->bitrev[i] = r;
    }
    plan->twiddles.resize(n / 2);
    for (std::size_t k = 0; k < n / 2; ++k)
        plan->twiddles[k] = unit_phasor(-kTwoPi * static_cast<double>(k) / static_cast<double>(n));
    slot = std::move(plan);
    return *slot;
}

void transform(std::span<Complex> x, bool inverse) {
    const std::size_t n = x.size();
    if (!is_power_of_two(static_cast<long long>(n)))
        throw std::invalid_argument("fft length must be a power of two, got " + std::to_string(n));
    if (n == 1) return;

    const Plan& plan = plan_for(n);
    for (std::size_t i = 0; i < n; ++i)
        if (i < plan.bitrev[i]) std::swap(x[i], x[plan.bitrev[i]]);

    for (std::size_t len = 2; len <= n; len <<= 1) {
        const std::size_t half = len / 2;
        const std::size_t stride = n / len;
        for (std::size_t start = 0; start < n; start += len) {
            for (std::size_t j = 0; j < half; ++j) {
                Complex w = plan.twiddles[j * stride];
                if (inverse) w = std::conj(w);
                const Complex u = x[start + j];
                const Complex v = x[start + j + half] * w;
                x[start + j] = u + v;
                x[start + j + half] = u - v;
            }
        }
    }

    if (inverse) {
        const double scale = 1.0 / static_cast<double>(n);
        for (auto& v : x) v *= scale;
    }
}

}  // namespace

void fft_inplace(std::span<Complex> x) { transform(x, false); }
void ifft_inplace(std::span<Complex> x) { transform(x, true); }

Samples fft(std::span<const Complex> x) {
    Samples out(x.begin(), x.end());
    fft_inplace(out);
    return out;
}

Samples ifft(std::span<const Complex> x) {
    Samples out(x.begin(), x.end());
    ifft_inplace(out);
    return out;
}

}  // namespace tfi
