#include "tfi/config.hpp"

#include <algorithm>
#include <set>
#include <stdexcept>
#include <string>

namespace tfi {

bool is_power_of_two(long long n) { return n > 0 && (n & (n - 1)) == 0; }

bool is_supported_overclock(int g) { return g == 1 || g == 2 || g == 4 || g == 8; }

OfdmConfig OfdmConfig::standard(int overclock) {
    OfdmConfig cfg;
    cfg.overclock = overclock;
    for (int k : {-21, -7, 7, 21}) cfg.pilot_subcarriers.push_back(cfg.bin_of(k));
    for (int k = -28; k <= 28; ++k) {
        if (k == 0 || k == -21 || k == -7 || k == 7 || k == 21) continue;
        cfg.data_subcarriers.push_back(cfg.bin_of(k));
    }
    return cfg;
}

void OfdmConfig::validate() const {
    if (!is_power_of_two(num_subcarriers))
        throw std::invalid_argument("num_subcarriers must be a power of two");
    if (cp_len < 0 || cp_len >= num_subcarriers)
        throw std::invalid_argument("cp_len must satisfy 0 <= cp_len < num_subcarriers");
    if (!is_supported_overclock(overclock))
        throw std::invalid_argument("overclock factor must be one of 1, 2, 4, 8");
    if (!(base_rate_hz > 0.0)) throw std::invalid_argument("base rate must be positive");

    std::set<int> seen;
    for (const auto* set : {&data_subcarriers, &pilot_subcarriers}) {
        for (int bin : *set) {
            if (bin <= 0 || bin >= num_subcarriers)
                throw std::invalid_argument("subcarrier index out of range or DC: " +
                                            std::to_string(bin));
            if (!seen.insert(bin).second)
                throw std::invalid_argument("data and pilot subcarriers overlap at bin " +
                                            std::to_string(bin));
        }
    }
    if (data_subcarriers.size() != 52 || pilot_subcarriers.size() != 4)
        throw std::invalid_argument("layout must have 52 data and 4 pilot subcarriers");
}

int OfdmConfig::signed_index(int bin) const {
    return bin < num_subcarriers / 2 ? bin : bin - num_subcarriers;
}

int OfdmConfig::bin_of(int signed_index) const {
    return signed_index >= 0 ? signed_index : signed_index + num_subcarriers;
}

std::vector<int> OfdmConfig::occupied_bins() const {
    std::vector<int> bins(data_subcarriers);
    bins.insert(bins.end(), pilot_subcarriers.begin(), pilot_subcarriers.end());
    std::sort(bins.begin(), bins.end(),
              [this](int a, int b) { return signed_index(a) < signed_index(b); });
    return bins;
}

}  // namespace tfi
