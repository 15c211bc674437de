#include "ldlab/estimators.hpp"

#include <mpfr.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>
#include <thread>

namespace ldlab {

namespace {

constexpr double kLn2 = 0.6931471805599453;

// Integer hit counts per sample_index; the block partition cannot change the
// total, so worker-count invariance is exact.
template <class Hit>
std::uint64_t parallel_count(std::uint64_t N, int workers, Hit&& hit) {
    if (workers <= 1) {
        std::uint64_t c = 0;
        for (std::uint64_t i = 0; i < N; ++i)
            if (hit(i)) ++c;
        return c;
    }
    std::vector<std::uint64_t> counts(static_cast<std::size_t>(workers), 0);
    std::vector<std::thread> threads;
    for (int t = 0; t < workers; ++t) {
        std::uint64_t lo = N * static_cast<std::uint64_t>(t) / static_cast<std::uint64_t>(workers);
        std::uint64_t hi = N * static_cast<std::uint64_t>(t + 1) / static_cast<std::uint64_t>(workers);
        threads.emplace_back([lo, hi, &hit, &counts, t] {
            std::uint64_t c = 0;
            for (std::uint64_t i = lo; i < hi; ++i)
                if (hit(i)) ++c;
            counts[static_cast<std::size_t>(t)] = c;
        });
    }
    for (auto& th : threads) th.join();
    std::uint64_t total = 0;
    for (auto c : counts) total += c;
    return total;
}

// S_n of -log x along the exact doubling orbit; one log per ~720 steps via a
// renormalized running product.
double birkhoff_neglog(const CounterRng& rng, int n) {
    OrbitCursor cur(rng);
    double prod = 1.0;
    long shift = 0;
    for (int j = 0; j < n; ++j) {
        prod *= cur.doubling_value();
        if (prod < 0x1.0p-500) {
            prod *= 0x1.0p500;
            shift += 500;
        }
        cur.step();
    }
    return -std::log(prod) + static_cast<double>(shift) * kLn2;
}

// S_n of (-log x)^2: the log advances by log 2 while the leading bit is 0,
// so a fresh log is only needed after a 1-bit.
double birkhoff_neglog_sq(const CounterRng& rng, int n) {
    OrbitCursor cur(rng);
    double s = 0.0;
    double l = -std::log(cur.doubling_value());
    bool fresh = false;
    for (int j = 0; j < n; ++j) {
        if (fresh) l = -std::log(cur.doubling_value());
        s += l * l;
        fresh = cur.leading_bit();
        if (!fresh) l -= kLn2;
        cur.step();
    }
    return s;
}

double birkhoff_cylinder(const CounterRng& rng, int n, const double* values, int depth) {
    OrbitCursor cur(rng);
    double s = 0.0;
    for (int j = 0; j < n; ++j) {
        s += values[cur.leading_bits(depth)];
        cur.step();
    }
    return s;
}

double birkhoff_generic(const CounterRng& rng, MapKind kind,
                        const ObservableSpec& obs, int n) {
    OrbitCursor cur(rng);
    const bool tent = (kind == MapKind::Tent);
    double s = 0.0;
    for (int j = 0; j < n; ++j) {
        double x = tent ? cur.tent_value() : cur.doubling_value();
        double v;
        try {
            v = eval_raw(obs, x);
        } catch (const std::domain_error&) {
            // orbit point collides with the pole at double precision;
            // resolve by a one-ulp-scale nudge rather than dropping the sample
            v = eval_raw(obs, x + 0x1.0p-127);
        }
        s += v;
        cur.step();
    }
    return s;
}

double birkhoff_iid_exponential(const CounterRng& rng, int n) {
    double s = 0.0;
    for (int j = 0; j < n; ++j)
        s += rng.exponential(static_cast<std::uint64_t>(j));
    return s;
}

} // namespace

TailEstimate tail_mc(const TailQuery& q) {
    if (q.n < 1) throw std::invalid_argument("tail_mc: n >= 1");
    if (q.eps <= 0) throw std::invalid_argument("tail_mc: eps > 0");
    if (q.samples < 1) throw std::invalid_argument("tail_mc: empty sample budget");

    double shift; // centering constant
    if (q.source == SampleSource::IidExponential) {
        shift = 1.0;
    } else {
        ObservableSpec plain = q.obs;
        plain.centered = false;
        shift = mean(plain);
    }

    const double up = static_cast<double>(q.n) * (shift + q.eps);
    const double dn = static_cast<double>(q.n) * (shift - q.eps);
    const TailSide side = q.side;
    auto is_hit = [up, dn, side](double s) {
        switch (side) {
        case TailSide::Upper: return s >= up;
        case TailSide::Lower: return s <= dn;
        case TailSide::TwoSided: return s >= up || s <= dn;
        }
        return false;
    };

    const std::uint64_t seed = q.seed;
    const int n = q.n;
    std::uint64_t count;

    if (q.source == SampleSource::IidExponential) {
        count = parallel_count(q.samples, q.workers, [seed, n, &is_hit](std::uint64_t i) {
            return is_hit(birkhoff_iid_exponential(CounterRng(seed, i), n));
        });
    } else if (q.map.kind == MapKind::PiecewiseLinear) {
        throw std::invalid_argument("tail_mc: symbolic orbits exist for Doubling and Tent only");
    } else if (q.map.kind == MapKind::Doubling && q.obs.kind == ObsKind::CylinderCoded) {
        const double* values = q.obs.values.data();
        const int depth = q.obs.depth;
        if (q.obs.trunc && q.obs.trunc->kind == TruncationSchedule::Kind::LevelCut)
            throw std::invalid_argument("tail_mc: materialize cylinder truncations via truncate()");
        count = parallel_count(q.samples, q.workers, [seed, n, values, depth, &is_hit](std::uint64_t i) {
            return is_hit(birkhoff_cylinder(CounterRng(seed, i), n, values, depth));
        });
    } else if (q.map.kind == MapKind::Doubling && q.obs.kind == ObsKind::LogPow &&
               q.obs.pole == 0.0 && !q.obs.trunc && q.obs.alpha == 1.0) {
        count = parallel_count(q.samples, q.workers, [seed, n, &is_hit](std::uint64_t i) {
            return is_hit(birkhoff_neglog(CounterRng(seed, i), n));
        });
    } else if (q.map.kind == MapKind::Doubling && q.obs.kind == ObsKind::LogPow &&
               q.obs.pole == 0.0 && !q.obs.trunc && q.obs.alpha == 2.0) {
        count = parallel_count(q.samples, q.workers, [seed, n, &is_hit](std::uint64_t i) {
            return is_hit(birkhoff_neglog_sq(CounterRng(seed, i), n));
        });
    } else {
        const ObservableSpec obs = q.obs;
        const MapKind kind = q.map.kind;
        count = parallel_count(q.samples, q.workers, [seed, n, kind, &obs, &is_hit](std::uint64_t i) {
            return is_hit(birkhoff_generic(CounterRng(seed, i), kind, obs, n));
        });
    }

    TailEstimate e;
    e.n = q.n;
    e.eps = q.eps;
    e.samples = q.samples;
    e.count = count;
    e.phat = static_cast<double>(count) / static_cast<double>(q.samples);
    e.ci = wilson_interval(count, q.samples);
    e.unreliable = count < 10;
    e.obs_mean = shift;
    return e;
}

ExponentFit fit_exponent_pairs(const std::vector<std::pair<double, double>>& n_phat) {
    std::vector<double> xs, ys;
    double nmin = 0, nmax = 0;
    for (const auto& [n, p] : n_phat) {
        if (!(p > 0.0 && p < 1.0)) continue;
        xs.push_back(std::log(n));
        ys.push_back(std::log(-std::log(p)));
        nmin = (nmin == 0) ? n : std::min(nmin, n);
        nmax = std::max(nmax, n);
    }
    if (xs.size() < 4)
        throw std::invalid_argument("fit_exponent: need at least 4 reliable points");
    if (nmax < 8.0 * nmin)
        throw std::invalid_argument("fit_exponent: n-range must span a factor of 8");
    LinearFit f = fit_line(xs, ys);
    ExponentFit out;
    out.gamma_hat = f.slope;
    out.stderr_ = f.slope_stderr;
    out.points_used = static_cast<int>(xs.size());
    out.n_min = nmin;
    out.n_max = nmax;
    return out;
}

ExponentFit fit_exponent(std::span<const TailEstimate> estimates) {
    std::vector<std::pair<double, double>> pairs;
    for (const auto& e : estimates)
        if (!e.unreliable && e.phat > 0.0 && e.phat < 1.0)
            pairs.emplace_back(static_cast<double>(e.n), e.phat);
    return fit_exponent_pairs(pairs);
}

namespace {

struct MpfrReal {
    mpfr_t v;
    explicit MpfrReal(mpfr_prec_t prec) { mpfr_init2(v, prec); }
    ~MpfrReal() { mpfr_clear(v); }
    MpfrReal(const MpfrReal&) = delete;
    MpfrReal& operator=(const MpfrReal&) = delete;
};

} // namespace

LowerBoundCertificate lower_bound_construction(const MapSpec& map,
                                               const ObservableSpec& obs,
                                               int n, double eps,
                                               bool throw_on_failure) {
    if (obs.kind != ObsKind::LogPow || obs.trunc)
        throw std::invalid_argument("lower_bound_construction: needs an untruncated LogPow observable");
    if (map.kind == MapKind::PiecewiseLinear)
        throw std::invalid_argument("lower_bound_construction: exactness-critical; doubling/tent only");
    if (obs.pole != map.periodic_point || map.periodic_point != 0.0)
        throw std::invalid_argument("lower_bound_construction: p must be the fixed point 0");
    if (n < 1 || eps <= 0) throw std::invalid_argument("lower_bound_construction: bad n or eps");

    const double alpha = obs.alpha;
    const double mu = std::tgamma(1.0 + alpha);
    LowerBoundCertificate cert;
    cert.omega = 1.0 / (1.0 + alpha);
    // +0.01 slack over the strict inequality avoids boundary failures at finite n
    cert.r = std::pow(mu + eps, 1.0 / alpha) + std::log(map.deriv_bound) + 0.01;
    const double rnw = cert.r * std::pow(static_cast<double>(n), cert.omega);
    cert.interval_length = std::exp(-rnw);
    cert.prob_lower_bound = cert.interval_length; // density lower bound m = 1
    cert.points = 1000;
    cert.min_margin = std::numeric_limits<double>::infinity();

    const mpfr_prec_t prec = 4096;
    const bool tent = (map.kind == MapKind::Tent);
    const double target = static_cast<double>(n) * (mu + eps);

    MpfrReal len(prec), x(prec);
    mpfr_set_d(len.v, -rnw, MPFR_RNDN);
    mpfr_exp(len.v, len.v, MPFR_RNDN);

    for (int i = 1; i <= cert.points; ++i) {
        mpfr_mul_ui(x.v, len.v, static_cast<unsigned long>(i), MPFR_RNDN);
        mpfr_div_ui(x.v, x.v, 1000ul, MPFR_RNDN);
        double s = 0.0;
        for (int j = 0; j < n; ++j) {
            double xd = mpfr_get_d(x.v, MPFR_RNDN);
            double l = -std::log(xd);
            s += (alpha == 1.0) ? l : (alpha == 2.0) ? l * l : std::pow(l, alpha);
            // exact binary iterate: 2x (mod 1 / tent fold)
            mpfr_mul_2ui(x.v, x.v, 1, MPFR_RNDN);
            if (mpfr_cmp_ui(x.v, 1ul) >= 0) {
                if (tent) {
                    mpfr_ui_sub(x.v, 2ul, x.v, MPFR_RNDN);
                } else {
                    mpfr_sub_ui(x.v, x.v, 1ul, MPFR_RNDN);
                }
            }
        }
        double margin = s - target;
        cert.min_margin = std::fmin(cert.min_margin, margin);
        if (margin < 0) ++cert.failures;
    }
    cert.ok = (cert.failures == 0);
    if (!cert.ok && throw_on_failure)
        throw std::runtime_error("lower_bound_construction: certificate failed at n=" +
                                 std::to_string(n));
    return cert;
}

WindowStat erdos_renyi_windows(SampleSource source, const MapSpec& map,
                               const ObservableSpec& obs, long n,
                               double I_alpha, std::uint64_t seed,
                               std::uint64_t sample_index) {
    if (I_alpha <= 0) throw std::invalid_argument("erdos_renyi_windows: I_alpha > 0");
    long ell = static_cast<long>(std::floor(std::log(static_cast<double>(n)) / I_alpha));
    if (ell < 1) throw std::invalid_argument("erdos_renyi_windows: window length < 1");
    if (ell > n) throw std::invalid_argument("erdos_renyi_windows: window longer than n");

    CounterRng rng(seed, sample_index);
    double shift = 0.0;
    if (source == SampleSource::Orbit && obs.centered) {
        ObservableSpec plain = obs;
        plain.centered = false;
        shift = mean(plain);
    }

    OrbitCursor cur(rng);
    const bool tent = (map.kind == MapKind::Tent);
    auto next_value = [&](long j) -> double {
        if (source == SampleSource::IidExponential)
            return rng.exponential(static_cast<std::uint64_t>(j));
        double x = tent ? cur.tent_value() : cur.doubling_value();
        cur.step();
        return eval_raw(obs, x) - shift;
    };

    std::vector<double> ring(static_cast<std::size_t>(ell));
    double sum = 0.0;
    for (long j = 0; j < ell; ++j) {
        ring[static_cast<std::size_t>(j)] = next_value(j);
        sum += ring[static_cast<std::size_t>(j)];
    }
    WindowStat stat;
    stat.n = n;
    stat.ell = ell;
    stat.W = sum / static_cast<double>(ell);
    stat.argmax = 0;
    for (long j = 1; j + ell <= n; ++j) {
        std::size_t slot = static_cast<std::size_t>((j - 1) % ell);
        double incoming = next_value(j + ell - 1);
        sum += incoming - ring[slot];
        ring[slot] = incoming;
        double avg = sum / static_cast<double>(ell);
        if (avg > stat.W) {
            stat.W = avg;
            stat.argmax = j;
        }
    }
    return stat;
}

namespace {

// radius where the raw (uncentered) value first exceeds `level`
double exceedance_radius(const ObservableSpec& obs, double level) {
    switch (obs.kind) {
    case ObsKind::LogPow: return std::exp(-std::pow(level, 1.0 / obs.alpha));
    case ObsKind::InvPow: return std::pow(level, -1.0 / obs.alpha);
    case ObsKind::LogLog: return std::exp(1.0 - std::exp(level));
    default:
        throw std::invalid_argument("obstruction_check: observable must be unbounded at its pole");
    }
}

} // namespace

ObstructionReport obstruction_check(const MapSpec& map, const ObservableSpec& obs,
                                    double gamma, double alpha, double I_alpha,
                                    std::uint64_t n_max, std::uint64_t seed,
                                    std::uint64_t sample_index) {
    if (gamma <= 0 || I_alpha <= 0 || alpha <= 0)
        throw std::invalid_argument("obstruction_check: gamma, alpha, I_alpha must be positive");
    if (obs.pole != map.periodic_point)
        throw std::invalid_argument("obstruction_check: observable pole must sit at the periodic point");

    ObservableSpec plain = obs;
    plain.centered = false;
    const double shift = mean(plain);

    ObstructionReport rep;
    rep.rho = shift; // centered phi = raw - mean >= -mean
    const double K = map.deriv_bound;
    const double log_K = std::log(K);
    // proof threshold: M > [(alpha+rho)/I(alpha)] * 2 log K / gamma
    rep.M = ((alpha + rep.rho) / I_alpha) * (2.0 * log_K) / gamma * (1.0 + 1e-9) + 1e-12;
    // N0: phi > M on the ball of radius N0^{-gamma/2}
    double rstar = exceedance_radius(plain, rep.M + shift);
    rep.N0 = std::pow(rstar, -2.0 / gamma);

    OrbitStream stream(seed, sample_index);
    rep.hits = hit_times(stream, map, gamma, n_max);

    const bool tent = (map.kind == MapKind::Tent);
    for (std::uint64_t hn : rep.hits) {
        if (static_cast<double>(hn) <= rep.N0) continue;
        long L = static_cast<long>(std::ceil(gamma * std::log(static_cast<double>(hn)) / (2.0 * log_K)));
        if (L < 1) continue;
        double s = 0.0;
        for (long j = 1; j <= L; ++j) {
            double x = tent ? stream.tent_view(hn + static_cast<std::uint64_t>(j))
                            : stream.real_view(hn + static_cast<std::uint64_t>(j));
            s += eval_raw(plain, x) - shift;
        }
        double avg = s / static_cast<double>(L);
        if (avg > alpha)
            rep.exceedances.push_back({hn, L, avg});
    }
    rep.conclusive = !rep.exceedances.empty();
    return rep;
}

double azuma_bound(double A, std::span<const double> increments) {
    if (A <= 0) throw std::invalid_argument("azuma_bound: A > 0");
    double s2 = 0.0;
    for (double m : increments) {
        if (m <= 0) throw std::invalid_argument("azuma_bound: increments must be positive");
        s2 += m * m;
    }
    return std::exp(-A * A / (2.0 * s2));
}

double schindler_bound(double E_n, double f_n, double xi_n) {
    if (E_n < 0 || f_n <= 0 || xi_n < 0)
        throw std::invalid_argument("schindler_bound: arguments must be positive");
    return 2.0 * std::exp(-xi_n * E_n / f_n);
}

PressureReport pressure_diagnostics(const MapSpec& map, const ObservableSpec& obs,
                                    double t, std::span<const double> M_list,
                                    int n) {
    if (t <= 0) throw std::invalid_argument("pressure_diagnostics: t > 0");
    if (obs.kind != ObsKind::LogPow || obs.alpha != 1.0)
        throw std::invalid_argument("pressure_diagnostics: needs LogPow(alpha=1)");
    const double log_lambda = std::log(map.deriv_bound);

    PressureReport rep;
    rep.t = t;
    rep.n = n;
    // near p the integrand of E(e^{t S_n}) behaves like x^{-nt}
    rep.exponent_nt = static_cast<double>(n) * t;
    rep.integral_infinite = rep.exponent_nt >= 1.0;
    for (double M : M_list) {
        PressureBound b;
        b.M = M;
        b.slope = t * M - log_lambda;                      // t M - d log(lambda), d = 1
        b.bound_at_n = b.slope - M / static_cast<double>(n); // + log(c r(M)^d)/n, r = e^{-M}
        rep.bounds.push_back(b);
    }
    return rep;
}

} // namespace ldlab
