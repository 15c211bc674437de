#include "ldlab/rng.hpp"

#include <cmath>

namespace ldlab {

namespace {
constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;
}

std::uint64_t mix64(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

CounterRng::CounterRng(std::uint64_t seed, std::uint64_t sample_index)
    : key(mix64(mix64(seed + kGolden) ^ (sample_index * 0xD6E8FEB86659FD93ULL + 1))) {}

std::uint64_t CounterRng::word(std::uint64_t w) const {
    return mix64(key + w * kGolden);
}

double CounterRng::uniform(std::uint64_t w) const {
    // 53 high bits; offset keeps the value strictly inside (0,1).
    return static_cast<double>(word(w) >> 11) * 0x1.0p-53 + 0x1.0p-54;
}

double CounterRng::exponential(std::uint64_t w) const {
    return -std::log(uniform(w));
}

} // namespace ldlab
