#include "ldlab/exact_kernels.hpp"

#include <cmath>
#include <cstring>
#include <stdexcept>

#include "ldlab/quadrature.hpp"
#include "ldlab/stats.hpp"

namespace ldlab {

namespace {

constexpr int kMaxTransferN = 26;

// 2^n-node sum with a fixed pairwise tree (binary-counter merge), so the
// result does not depend on how a caller might partition the node range.
template <class F>
double transfer_sum(F&& f, int n, double x) {
    const std::uint64_t count = std::uint64_t{1} << n;
    const double scale = std::ldexp(1.0, -n);
    double partial[28];
    for (std::uint64_t k = 0; k < count; ++k) {
        double v = f((x + static_cast<double>(k)) * scale);
        int lvl = 0;
        while ((k >> lvl) & 1u) {
            v += partial[lvl];
            ++lvl;
        }
        partial[lvl] = v;
    }
    // count is a power of two, so everything merges into level n
    return partial[n] * scale;
}

// P^n(-log x) in closed form: the node sum collapses to
//   n log 2 - 2^{-n} [lgamma(x + 2^n) - lgamma(x)]
// because sum_k log(x+k) = log(Gamma(x+2^n)/Gamma(x)).
double transfer_neglog(int n, double x) {
    const double K = std::ldexp(1.0, n);
    return n * 0.6931471805599453 - (std::lgamma(x + K) - std::lgamma(x)) / K;
}

// P^n(x^{-alpha}) = 2^{-n(1-alpha)} sum_{k=0}^{2^n-1} (x+k)^{-alpha}; the
// Hurwitz-type sum is taken directly for k < 64 and by Euler-Maclaurin
// (through the B_4 term, remainder ~ 64^{-alpha-5}) beyond.
double transfer_invpow(int n, double alpha, double x) {
    const double K = std::ldexp(1.0, n);
    const long m = std::min(64L, static_cast<long>(K));
    double s = 0.0;
    for (long k = 0; k < m; ++k) s += std::pow(x + static_cast<double>(k), -alpha);
    if (static_cast<double>(m) < K) {
        auto f = [alpha, x](double u) { return std::pow(x + u, -alpha); };
        auto f1 = [alpha, x](double u) { return -alpha * std::pow(x + u, -alpha - 1.0); };
        auto f3 = [alpha, x](double u) {
            return -alpha * (alpha + 1.0) * (alpha + 2.0) * std::pow(x + u, -alpha - 3.0);
        };
        const double a = static_cast<double>(m), b = K;
        double tail = (std::pow(x + b, 1.0 - alpha) - std::pow(x + a, 1.0 - alpha)) / (1.0 - alpha)
                    + 0.5 * (f(a) + f(b))
                    + (1.0 / 12.0) * (f1(b) - f1(a))
                    - (1.0 / 720.0) * (f3(b) - f3(a))
                    - f(b); // sum runs to K-1, not K
        s += tail;
    }
    return std::pow(K, alpha - 1.0) * s;
}

void check_transfer_n(int n) {
    if (n < 0 || n > kMaxTransferN)
        throw std::invalid_argument(
            "apply_transfer: n exceeds the 2^n-node cost budget (n <= 26)");
}

// Fast raw evaluation for the observable families that feed the kernels.
struct RawEval {
    ObsKind kind;
    double alpha;
    double pole;

    explicit RawEval(const ObservableSpec& obs)
        : kind(obs.kind), alpha(obs.alpha), pole(obs.pole) {
        if (obs.trunc || obs.kind == ObsKind::CylinderCoded)
            throw std::invalid_argument("kernel evaluation expects an untruncated analytic observable");
    }

    double operator()(double x) const {
        if (kind == ObsKind::InvPow)
            return (alpha == 0.5) ? 1.0 / std::sqrt(x) : std::pow(x, -alpha);
        double l = -std::log(std::abs(x - pole));
        if (kind == ObsKind::LogLog) return std::log1p(l);
        if (alpha == 1.0) return l;
        if (alpha == 2.0) return l * l;
        return std::pow(l, alpha);
    }
};

} // namespace

double apply_transfer(const std::function<double(double)>& f, int n, double x) {
    check_transfer_n(n);
    if (!(x >= 0.0 && x < 1.0))
        throw std::domain_error("apply_transfer: x must lie in [0,1)");
    auto safe = [&f](double u) {
        try {
            return f(u);
        } catch (const std::domain_error&) {
            return f(u + 0x1.0p-60);
        }
    };
    return transfer_sum(safe, n, x);
}

DecayCurve lp_decay_curve(const ObservableSpec& obs, double p, int n_max) {
    if (p < 1.0) throw std::invalid_argument("lp_decay_curve: p must be >= 1");
    if (n_max > 20) throw std::invalid_argument("lp_decay_curve: n_max <= 20");
    if (obs.kind == ObsKind::InvPow && p >= 1.0 / obs.alpha)
        throw std::invalid_argument("lp_decay_curve: L^p norm infinite for p >= 1/alpha");
    if (obs.kind == ObsKind::LogPow && obs.pole != 0.0)
        throw std::invalid_argument("lp_decay_curve: LogPow kernel requires pole at 0");
    if (obs.kind == ObsKind::LogLog || obs.kind == ObsKind::CylinderCoded)
        throw std::invalid_argument("lp_decay_curve: unsupported observable kind");

    RawEval phi(obs);
    ObservableSpec plain = obs;
    plain.centered = false;
    const double phi_mean = mean(plain);

    QuadOptions opt;
    opt.rel_tol = 1e-8;
    opt.abs_tol = 1e-16;

    const bool neglog = (obs.kind == ObsKind::LogPow && obs.alpha == 1.0);
    const bool invpow = (obs.kind == ObsKind::InvPow);
    const double alpha = obs.alpha;
    auto pn_phi = [&phi, neglog, invpow, alpha](int n, double x) {
        if (neglog) return transfer_neglog(n, x);
        if (invpow) return transfer_invpow(n, alpha, x);
        return transfer_sum(phi, n, x);
    };

    DecayCurve curve;
    for (int n = 0; n <= n_max; ++n) {
        std::function<double(double)> integrand = [&pn_phi, phi_mean, n, p](double x) {
            double v = pn_phi(n, x) - phi_mean;
            return (p == 1.0) ? std::abs(v)
                 : (p == 2.0) ? v * v
                              : std::pow(std::abs(v), p);
        };
        double I = integrate_singular(integrand, 0.0, 1.0, 0.0, opt);
        curve.points.push_back({n, std::pow(I, 1.0 / p)});
    }

    std::vector<double> xs, ys;
    for (const auto& pt : curve.points) {
        if (pt.n >= 1 && pt.norm > 0) {
            xs.push_back(pt.n);
            ys.push_back(std::log(pt.norm));
        }
    }
    curve.log_slope = (xs.size() >= 2) ? fit_line(xs, ys).slope : 0.0;
    return curve;
}

double autocorrelation(const ObservableSpec& obs, int n) {
    check_transfer_n(n);
    if (n > 20) throw std::invalid_argument("autocorrelation: n <= 20");
    RawEval phi(obs);
    ObservableSpec plain = obs;
    plain.centered = false;
    const double phi_mean = mean(plain);

    QuadOptions opt;
    opt.rel_tol = 1e-8;
    opt.abs_tol = 1e-15;
    const bool neglog = (obs.kind == ObsKind::LogPow && obs.alpha == 1.0 && obs.pole == 0.0);
    const bool invpow = (obs.kind == ObsKind::InvPow);
    const double alpha = obs.alpha;
    std::function<double(double)> integrand = [&phi, phi_mean, n, neglog, invpow,
                                               alpha](double x) {
        double pn = neglog   ? transfer_neglog(n, x)
                  : invpow   ? transfer_invpow(n, alpha, x)
                             : transfer_sum(phi, n, x);
        return (phi(x) - phi_mean) * (pn - phi_mean);
    };
    // duality: equals the autocovariance of phi at lag n
    return integrate_singular(integrand, 0.0, 1.0, obs.pole, opt);
}

double SumDistribution::tail_ge_lower(double s) const {
    long first = static_cast<long>(std::ceil(s / delta - 1e-9)) - offset;
    double acc = 0.0;
    for (std::size_t b = static_cast<std::size_t>(std::max(first, 0L)); b < lower.size(); ++b)
        acc += lower[b];
    return acc;
}

double SumDistribution::tail_ge_upper(double s) const {
    long first = static_cast<long>(std::ceil(s / delta - 1e-9)) - offset;
    double acc = 0.0;
    for (std::size_t b = static_cast<std::size_t>(std::max(first, 0L)); b < upper.size(); ++b)
        acc += upper[b];
    return acc;
}

double SumDistribution::total_lower() const {
    double acc = 0;
    for (double v : lower) acc += v;
    return acc;
}

double SumDistribution::total_upper() const {
    double acc = 0;
    for (double v : upper) acc += v;
    return acc;
}

SumDistribution cylinder_dp(const ObservableSpec& cyl, int n, double delta,
                            std::size_t memory_budget_bytes) {
    if (cyl.kind != ObsKind::CylinderCoded)
        throw std::invalid_argument("cylinder_dp: observable must be cylinder-coded");
    if (cyl.depth > 16) throw std::invalid_argument("cylinder_dp: depth <= 16");
    if (n < 1) throw std::invalid_argument("cylinder_dp: n >= 1");
    if (delta <= 0) throw std::invalid_argument("cylinder_dp: delta > 0");

    const int d = cyl.depth;
    const std::size_t cells = std::size_t{1} << d;
    const std::size_t states = std::size_t{1} << (d - 1);
    const std::size_t smask = states - 1;

    // directed per-step increments in units of delta
    std::vector<long> inc_lo(cells), inc_hi(cells);
    long imin = 0, imax = 0;
    for (std::size_t c = 0; c < cells; ++c) {
        double q = cyl.values[c] / delta;
        inc_lo[c] = static_cast<long>(std::floor(q));
        inc_hi[c] = static_cast<long>(std::ceil(q));
        imin = std::min(imin, inc_lo[c]);
        imax = std::max(imax, inc_hi[c]);
    }
    const long off = static_cast<long>(n) * imin; // imin <= 0 here
    const std::size_t buckets = static_cast<std::size_t>(static_cast<long>(n) * (imax - imin)) + 1;

    const std::size_t plane = states * buckets;
    if (4 * plane * sizeof(double) > memory_budget_bytes) {
        double feasible = delta * (4.0 * static_cast<double>(plane) * sizeof(double)) /
                          static_cast<double>(memory_budget_bytes);
        throw std::length_error("cylinder_dp: state x bucket table exceeds budget; "
                                "minimal feasible delta is about " + std::to_string(feasible));
    }

    std::vector<double> cur_lo(plane, 0.0), cur_hi(plane, 0.0);
    std::vector<double> nxt_lo(plane), nxt_hi(plane);

    const std::size_t b0 = static_cast<std::size_t>(-off);
    const double init = 1.0 / static_cast<double>(states);
    for (std::size_t s = 0; s < states; ++s) {
        cur_lo[s * buckets + b0] = init;
        cur_hi[s * buckets + b0] = init;
    }

    for (int t = 0; t < n; ++t) {
        std::memset(nxt_lo.data(), 0, plane * sizeof(double));
        std::memset(nxt_hi.data(), 0, plane * sizeof(double));
        for (std::size_t s = 0; s < states; ++s) {
            const double* row_lo = &cur_lo[s * buckets];
            const double* row_hi = &cur_hi[s * buckets];
            for (int bit = 0; bit <= 1; ++bit) {
                const std::size_t c = s * 2 + static_cast<std::size_t>(bit);
                const std::size_t s2 = c & smask;
                double* out_lo = &nxt_lo[s2 * buckets];
                double* out_hi = &nxt_hi[s2 * buckets];
                const long dlo = inc_lo[c], dhi = inc_hi[c];
                for (std::size_t b = 0; b < buckets; ++b) {
                    double ml = row_lo[b];
                    if (ml != 0.0) out_lo[static_cast<std::size_t>(static_cast<long>(b) + dlo)] += 0.5 * ml;
                    double mh = row_hi[b];
                    if (mh != 0.0) out_hi[static_cast<std::size_t>(static_cast<long>(b) + dhi)] += 0.5 * mh;
                }
            }
        }
        cur_lo.swap(nxt_lo);
        cur_hi.swap(nxt_hi);
    }

    SumDistribution dist;
    dist.n = n;
    dist.depth = d;
    dist.delta = delta;
    dist.offset = off;
    dist.lower.assign(buckets, 0.0);
    dist.upper.assign(buckets, 0.0);
    for (std::size_t s = 0; s < states; ++s)
        for (std::size_t b = 0; b < buckets; ++b) {
            dist.lower[b] += cur_lo[s * buckets + b];
            dist.upper[b] += cur_hi[s * buckets + b];
        }
    return dist;
}

MartingaleParts martingale_decompose(const ObservableSpec& obs, int n,
                                     double alpha, double theta) {
    if (alpha > 0.2 + 1e-12)
        throw std::invalid_argument("martingale_decompose: alpha must be <= 1/5");
    if (theta <= 0) throw std::invalid_argument("martingale_decompose: theta > 0");
    if (n < 1) throw std::invalid_argument("martingale_decompose: n >= 1");

    MartingaleParts parts;
    parts.n = n;
    parts.M_n = std::pow(static_cast<double>(n), (1.0 - alpha) / 4.0);
    parts.C_n = static_cast<int>(std::ceil(parts.M_n / theta));
    if (parts.C_n > 24)
        throw std::invalid_argument(
            "martingale_decompose: C_n exceeds the exact P^k budget; use a smaller n");

    auto info = truncate(obs, TruncationSchedule::level_cut(parts.M_n));
    parts.h = info.truncated;
    parts.mean_h = mean(parts.h);

    ObservableSpec h = parts.h;
    const double hbar = parts.mean_h;
    const int C_n = parts.C_n;
    auto h_eval = [h](double x) { return eval_raw(h, x); };

    auto w_fn = [h_eval, hbar, C_n](double x) {
        double acc = 0.0;
        for (int k = 1; k <= C_n; ++k)
            acc += transfer_sum([&](double u) { return h_eval(u) - hbar; }, k, x);
        return acc;
    };
    auto g_fn = [h_eval, hbar, w_fn](double x) {
        double tx = 2.0 * x;
        if (tx >= 1.0) tx -= 1.0;
        return h_eval(x) - hbar - w_fn(tx) + w_fn(x);
    };
    parts.w = w_fn;
    parts.g = g_fn;

    // ||h - mean||_BV <= 3 M_n; the discarded sum_{k > C_n} P^k terms are
    // geometric at rate e^{-theta}
    parts.tail_bound = std::exp(-theta * C_n) * info.bv_bound;

    for (int i = 0; i < (1 << 12); ++i) {
        double x = (i + 0.5) / 4096.0;
        parts.w_sup = std::fmax(parts.w_sup, std::abs(w_fn(x)));
    }
    for (int i = 0; i < (1 << 10); ++i) {
        double x = (i + 0.5) / 1024.0;
        double pg = transfer_sum(g_fn, 1, x);
        parts.max_residual = std::fmax(parts.max_residual, std::abs(pg));
    }
    return parts;
}

} // namespace ldlab
