#include "ldlab/dynamics.hpp"

#include <algorithm>
#include <bit>
#include <cmath>

namespace ldlab {

MapSpec MapSpec::doubling() {
    MapSpec m;
    m.kind = MapKind::Doubling;
    m.periodic_point = 0.0;
    m.period = 1;
    m.deriv_bound = 2.0;
    return m;
}

MapSpec MapSpec::tent() {
    MapSpec m;
    m.kind = MapKind::Tent;
    m.periodic_point = 0.0;
    m.period = 1;
    m.deriv_bound = 2.0;
    return m;
}

MapSpec MapSpec::piecewise_linear(std::vector<double> interior_breaks,
                                  std::vector<double> slopes,
                                  double periodic_point, int period,
                                  double deriv_bound) {
    MapSpec m;
    m.kind = MapKind::PiecewiseLinear;
    m.breakpoints.push_back(0.0);
    for (double b : interior_breaks) m.breakpoints.push_back(b);
    m.breakpoints.push_back(1.0);
    m.slopes = std::move(slopes);
    m.periodic_point = periodic_point;
    m.period = period;
    m.deriv_bound = deriv_bound;

    if (m.slopes.size() + 1 != m.breakpoints.size())
        throw std::invalid_argument("piecewise_linear: need one slope per branch");
    double max_slope = 1.0;
    for (std::size_t i = 0; i + 1 < m.breakpoints.size(); ++i) {
        double w = m.breakpoints[i + 1] - m.breakpoints[i];
        if (w <= 0)
            throw std::invalid_argument("piecewise_linear: breakpoints not increasing");
        double s = std::abs(m.slopes[i]);
        if (s <= 1.0)
            throw std::invalid_argument("piecewise_linear: branches must be expanding");
        // full branch: |slope| * width = 1
        if (std::abs(s * w - 1.0) > 1e-9)
            throw std::invalid_argument("piecewise_linear: branch does not map onto [0,1]");
        max_slope = std::max(max_slope, s);
    }
    if (deriv_bound < max_slope - 1e-12)
        throw std::invalid_argument("piecewise_linear: deriv_bound below max slope");
    return m;
}

double iterate(const MapSpec& map, double x) {
    if (!(x >= 0.0 && x <= 1.0))
        throw std::domain_error("iterate: x outside [0,1]");
    switch (map.kind) {
    case MapKind::Doubling: {
        double y = 2.0 * x;
        return (y >= 1.0) ? y - 1.0 : y;
    }
    case MapKind::Tent:
        return 1.0 - std::abs(2.0 * x - 1.0);
    case MapKind::PiecewiseLinear: {
        const auto& bp = map.breakpoints;
        auto it = std::upper_bound(bp.begin(), bp.end(), x);
        std::size_t i = (it == bp.begin()) ? 0 : static_cast<std::size_t>(it - bp.begin()) - 1;
        if (i >= map.slopes.size()) i = map.slopes.size() - 1;  // x == 1
        double s = map.slopes[i];
        double y = (s > 0) ? (x - bp[i]) * s : (bp[i + 1] - x) * (-s);
        return std::clamp(y, 0.0, 1.0);
    }
    }
    throw std::logic_error("iterate: bad map kind");
}

namespace {

// Tape word w holds bits 64w+1 .. 64w+64, msb first.
inline std::uint64_t tape_word(const CounterRng& rng, std::uint64_t w) {
    return rng.word(w);
}

// Bits i+1 .. i+64 as one word (i is a 0-based offset into the tape).
std::uint64_t bits_at(const CounterRng& rng, std::uint64_t i) {
    std::uint64_t w = i / 64, s = i % 64;
    std::uint64_t v = tape_word(rng, w) << s;
    if (s) v |= tape_word(rng, w + 1) >> (64 - s);
    return v;
}

// Value of 0.b_{base+1} b_{base+2} ... from a 128-bit window, extending past
// the window only when it is entirely zero (so log evaluation never sees an
// exact 0 on a sample the tape can still resolve).
double window_value_impl(const CounterRng& rng, std::uint64_t hi, std::uint64_t lo,
                         std::uint64_t bit_base) {
    if (hi != 0)
        return static_cast<double>(hi) * 0x1.0p-64 +
               static_cast<double>(lo) * 0x1.0p-128;
    if (lo != 0)
        return static_cast<double>(lo) * 0x1.0p-128;
    // All-zero window: extend, 64 bits at a time.
    std::uint64_t off = bit_base + 128;
    for (int block = 0; block < 64; ++block) {
        std::uint64_t v = bits_at(rng, off);
        if (v != 0)
            return std::ldexp(static_cast<double>(v),
                              -64 * (block + 3));
        off += 64;
    }
    return std::ldexp(1.0, -64 * 67);  // unreachable in practice
}

} // namespace

OrbitStream::OrbitStream(std::uint64_t seed, std::uint64_t sample_index,
                         int window_bits)
    : rng_(seed, sample_index),
      seed_(seed),
      sample_index_(sample_index),
      window_bits_(window_bits) {
    if (window_bits < 16 || window_bits > 2048)
        throw std::invalid_argument("OrbitStream: window_bits out of range");
}

bool OrbitStream::bit(std::uint64_t i) const {
    std::uint64_t w = (i - 1) / 64, s = (i - 1) % 64;
    return (tape_word(rng_, w) >> (63 - s)) & 1u;
}

double OrbitStream::real_view(std::uint64_t n) const {
    if (window_bits_ == 128) {
        std::uint64_t hi = bits_at(rng_, n);
        std::uint64_t lo = bits_at(rng_, n + 64);
        return window_value_impl(rng_, hi, lo, n);
    }
    // General window width: assemble, msb first.
    double x = 0.0;
    int k = 0;
    std::uint64_t off = n;
    while (k < window_bits_) {
        std::uint64_t v = bits_at(rng_, off);
        int take = std::min(64, window_bits_ - k);
        if (take < 64) v &= ~0ULL << (64 - take);
        x += std::ldexp(static_cast<double>(v), -64 - k);
        k += take;
        off += 64;
    }
    return x;
}

double OrbitStream::tent_view(std::uint64_t n) const {
    if (!bit(n + 1)) return real_view(n + 1);
    // s(x_n) = 1 - x_{n+1}: complement of the shifted window.
    if (window_bits_ == 128) {
        std::uint64_t hi = ~bits_at(rng_, n + 1);
        std::uint64_t lo = ~bits_at(rng_, n + 1 + 64);
        if (hi == 0 && lo == 0) return std::ldexp(1.0, -128);
        return window_value_impl(rng_, hi, lo, n + 1);
    }
    return 1.0 - real_view(n + 1);
}

OrbitCursor::OrbitCursor(const CounterRng& rng) : rng_(rng), pos_(0) {
    hi_ = tape_word(rng_, 0);
    lo_ = tape_word(rng_, 1);
    stage_ = tape_word(rng_, 2);
    avail_ = 64;
    next_word_ = 3;
}

void OrbitCursor::refill() {
    stage_ = tape_word(rng_, next_word_++);
    avail_ = 64;
}

double OrbitCursor::extended_value(std::uint64_t lo, std::uint64_t bit_base) const {
    return window_value_impl(rng_, 0, lo, bit_base);
}

double orbit_point(const OrbitStream& stream, MapKind kind, std::uint64_t n) {
    switch (kind) {
    case MapKind::Doubling: return stream.real_view(n);
    case MapKind::Tent: return stream.tent_view(n);
    default:
        throw std::invalid_argument("orbit_point: symbolic orbits exist for Doubling and Tent only");
    }
}

std::vector<std::uint64_t> hit_times(const OrbitStream& stream,
                                     const MapSpec& map, double gamma,
                                     std::uint64_t n_max) {
    if (gamma <= 0)
        throw std::invalid_argument("hit_times: gamma must be positive");
    double min_radius = std::pow(static_cast<double>(n_max), -gamma);
    if (min_radius < std::ldexp(1.0, -stream.window_bits() + 8))
        throw precision_error("hit_times: window precision cannot resolve n_max^{-gamma}");

    const double p = map.periodic_point;
    std::vector<std::uint64_t> hits;

    if (map.kind == MapKind::PiecewiseLinear) {
        // Plain floating-point orbit; documented as approximate.
        double x = stream.real_view(0);
        for (std::uint64_t n = 1; n <= n_max; ++n) {
            x = iterate(map, x);
            if (std::abs(x - p) <= std::pow(static_cast<double>(n), -gamma))
                hits.push_back(n);
        }
        return hits;
    }

    const bool tent = (map.kind == MapKind::Tent);
    OrbitCursor cur(stream.rng());
    // n^{-gamma} is decreasing, so a stale value is a valid pre-filter; the
    // exact power is only evaluated on candidates.
    double loose = 1.0;
    std::uint64_t refresh = 1;
    for (std::uint64_t n = 1; n <= n_max; ++n) {
        cur.step();
        if (n >= refresh) {
            loose = std::pow(static_cast<double>(n), -gamma);
            refresh = n * 2;
        }
        double x = tent ? cur.tent_value() : cur.doubling_value();
        if (std::abs(x - p) <= loose &&
            std::abs(x - p) <= std::pow(static_cast<double>(n), -gamma))
            hits.push_back(n);
    }
    return hits;
}

} // namespace ldlab
