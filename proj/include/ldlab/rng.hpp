#ifndef LDLAB_RNG_HPP
#define LDLAB_RNG_HPP

#include <cstdint>

namespace ldlab {

// Counter-based generator in the splitmix64 family (Steele/Lea/Flood mixing
// constants).  Every output word is a pure function of (seed, sample_index,
// counter), so streams can be evaluated in any order and partitioned across
// workers without changing a single bit.
struct CounterRng {
    std::uint64_t key;

    CounterRng(std::uint64_t seed, std::uint64_t sample_index);

    // Word `w` of the stream, independent of evaluation order.
    std::uint64_t word(std::uint64_t w) const;

    // Uniform double in (0,1), counter-indexed.
    double uniform(std::uint64_t w) const;

    // Exponential(1) draw, counter-indexed (the i.i.d. verification channel).
    double exponential(std::uint64_t w) const;
};

std::uint64_t mix64(std::uint64_t z);

} // namespace ldlab

#endif
