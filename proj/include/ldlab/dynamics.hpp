#ifndef LDLAB_DYNAMICS_HPP
#define LDLAB_DYNAMICS_HPP

#include <cstdint>
#include <stdexcept>
#include <vector>

#include "ldlab/rng.hpp"

namespace ldlab {

enum class MapKind { Doubling, Tent, PiecewiseLinear };

// An expanding interval map together with the periodic point and derivative
// bound used by the hit-detection and lower-bound machinery.
struct MapSpec {
    MapKind kind = MapKind::Doubling;
    // PiecewiseLinear only: branch cut points 0 = c_0 < c_1 < ... < c_m = 1
    // and per-branch slopes; every branch maps its interval onto [0,1].
    std::vector<double> breakpoints;
    std::vector<double> slopes;
    double periodic_point = 0.0;
    int period = 1;
    double deriv_bound = 2.0;

    static MapSpec doubling();
    static MapSpec tent();
    static MapSpec piecewise_linear(std::vector<double> interior_breaks,
                                    std::vector<double> slopes,
                                    double periodic_point, int period,
                                    double deriv_bound);
};

// One application of T.  Exact up to one rounding of the arithmetic.
double iterate(const MapSpec& map, double x);

struct precision_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Exact symbolic orbit of the doubling map: a lazy tape of i.i.d. fair bits
// b_1 b_2 ... determined by (seed, sample_index).  The real view at time n is
// x_n = sum_{k=1}^{window_bits} b_{n+k} 2^{-k}; the doubling map acts as the
// exact bit shift and the tent map is reached through the factor map
// s(x) = 1 - |2x - 1|.  Floating-point iteration of 2x mod 1 loses a bit of
// entropy per step and collapses after ~53 iterates; the tape does not.
class OrbitStream {
public:
    OrbitStream(std::uint64_t seed, std::uint64_t sample_index,
                int window_bits = 128);

    std::uint64_t seed() const { return seed_; }
    std::uint64_t sample_index() const { return sample_index_; }
    int window_bits() const { return window_bits_; }

    // Tape bit b_i, i >= 1.
    bool bit(std::uint64_t i) const;

    // x_n, random access.  Distribution over seeds is uniform on [0,1].
    double real_view(std::uint64_t n) const;

    // s(x_n), the tent orbit through the factor map.
    double tent_view(std::uint64_t n) const;

    const CounterRng& rng() const { return rng_; }

private:
    CounterRng rng_;
    std::uint64_t seed_, sample_index_;
    int window_bits_;
};

// Sequential walker over an OrbitStream's tape holding a sliding 128-bit
// window; used by the Monte Carlo inner loops.  Values agree with
// OrbitStream::real_view / tent_view at every position.
class OrbitCursor {
public:
    explicit OrbitCursor(const CounterRng& rng);

    std::uint64_t pos() const { return pos_; }

    void step() {
        hi_ = (hi_ << 1) | (lo_ >> 63);
        lo_ = (lo_ << 1) | (stage_ >> 63);
        stage_ <<= 1;
        if (--avail_ == 0) refill();
        ++pos_;
    }

    // x_n.  The window scaling is exact (powers of two), so this equals
    // OrbitStream::real_view(pos()).
    double doubling_value() const {
        if (hi_ != 0)
            return static_cast<double>(hi_) * 0x1.0p-64 +
                   static_cast<double>(lo_) * 0x1.0p-128;
        return extended_value(lo_, pos_);
    }

    // s(x_n), the tent orbit through the factor map.
    double tent_value() const {
        std::uint64_t shi = (hi_ << 1) | (lo_ >> 63);
        std::uint64_t slo = (lo_ << 1) | (stage_ >> 63);
        if (hi_ >> 63) {
            shi = ~shi;
            slo = ~slo;
            if (shi == 0 && slo == 0) return 0x1.0p-128;
        }
        if (shi != 0)
            return static_cast<double>(shi) * 0x1.0p-64 +
                   static_cast<double>(slo) * 0x1.0p-128;
        return extended_value(slo, pos_ + 1);
    }

    // Leading window bit b_{pos+1}; the first bit of the binary expansion of x_n.
    bool leading_bit() const { return (hi_ >> 63) != 0; }
    // Top d bits of x_n, i.e. the index of its depth-d dyadic cell.
    std::uint64_t leading_bits(int d) const { return hi_ >> (64 - d); }

private:
    void refill();
    // Value when the leading 64-bit limb is zero: scaled low limb, extending
    // along the tape if the whole 128-bit window vanishes.
    double extended_value(std::uint64_t lo, std::uint64_t bit_base) const;

    CounterRng rng_;
    std::uint64_t hi_, lo_;   // bits pos+1..pos+64, pos+65..pos+128
    std::uint64_t stage_;     // upcoming bits, msb first
    int avail_;
    std::uint64_t next_word_;
    std::uint64_t pos_;
};

// Orbit point for the doubling or tent map (factor-map construction).
double orbit_point(const OrbitStream& stream, MapKind kind, std::uint64_t n);

// All n in [1, n_max] with d(x_n, p) <= n^{-gamma}, increasing.
// Throws precision_error when n_max^{-gamma} < 2^{-window_bits+8}.
std::vector<std::uint64_t> hit_times(const OrbitStream& stream,
                                     const MapSpec& map, double gamma,
                                     std::uint64_t n_max);

} // namespace ldlab

#endif
