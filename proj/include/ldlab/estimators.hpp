#ifndef LDLAB_ESTIMATORS_HPP
#define LDLAB_ESTIMATORS_HPP

#include <cstdint>
#include <span>
#include <vector>

#include "ldlab/dynamics.hpp"
#include "ldlab/observables.hpp"
#include "ldlab/stats.hpp"

namespace ldlab {

enum class TailSide { Upper, Lower, TwoSided };

// Where the sample paths come from: exact symbolic orbits, or the i.i.d.
// exponential(1) channel that anchors the machinery against the closed-form
// rate I(1+eps) = eps - log(1+eps).
enum class SampleSource { Orbit, IidExponential };

struct TailQuery {
    MapSpec map = MapSpec::doubling();
    ObservableSpec obs = ObservableSpec::log_pow(1.0, 0.0);
    SampleSource source = SampleSource::Orbit;
    int n = 1;
    double eps = 0.1;
    TailSide side = TailSide::Upper;
    std::uint64_t samples = 10000; // N
    std::uint64_t seed = 0;
    int workers = 1;
};

struct TailEstimate {
    int n = 0;
    double eps = 0;
    std::uint64_t samples = 0;
    std::uint64_t count = 0;
    double phat = 0;
    Interval ci{0, 0}; // Wilson 95%
    bool unreliable = false;
    double obs_mean = 0; // centering constant actually used
};

// Unbiased binomial estimate of mu(S_n - n*mean >= n*eps) (resp. <=, |.| >=)
// over exact symbolic orbits.  Hit counts are integers accumulated per
// sample_index, so the result is identical for any worker count.
TailEstimate tail_mc(const TailQuery& q);

struct ExponentFit {
    double gamma_hat = 0;
    double stderr_ = 0;
    int points_used = 0;
    double n_min = 0, n_max = 0;
};

// Least-squares slope of log(-log phat) against log n over the reliable
// estimates; this is the stretched exponent.
ExponentFit fit_exponent(std::span<const TailEstimate> estimates);
ExponentFit fit_exponent_pairs(const std::vector<std::pair<double, double>>& n_phat);

struct LowerBoundCertificate {
    double omega = 0;       // 1/(1+alpha)
    double r = 0;           // (mean+eps)^{1/alpha} + log(lambda) + 0.01
    double interval_length = 0; // e^{-r n^omega}
    double prob_lower_bound = 0; // m * e^{-r n^omega}, m = density lower bound (1)
    int points = 0;
    int failures = 0;
    double min_margin = 0; // min over points of S_n - n(mean+eps)
    bool ok = false;
};

// Interval construction behind the stretched-exponential lower bound: checks
// S_n - n*mean >= n*eps at 10^3 points of [p, p + e^{-r n^omega}] by exact
// orbit evaluation with 4096-bit interval endpoints.  Throws on certificate
// failure.
LowerBoundCertificate lower_bound_construction(const MapSpec& map,
                                               const ObservableSpec& obs,
                                               int n, double eps,
                                               bool throw_on_failure = true);

struct WindowStat {
    long n = 0;
    long ell = 0;
    double W = 0;      // max over j of S_ell ∘ T^j / ell
    long argmax = 0;
};

// Max sliding-window average with window length ell = floor(log n / I_alpha);
// O(n) time, O(ell) memory.
WindowStat erdos_renyi_windows(SampleSource source, const MapSpec& map,
                               const ObservableSpec& obs, long n,
                               double I_alpha, std::uint64_t seed,
                               std::uint64_t sample_index = 0);

struct ObstructionReport {
    struct Exceedance {
        std::uint64_t hit_n = 0;
        long window_len = 0;
        double window_avg = 0;
    };
    double M = 0;
    double N0 = 0;
    double rho = 0;
    std::vector<std::uint64_t> hits;          // all hit times found
    std::vector<Exceedance> exceedances;       // verified window exceedances
    bool conclusive = false;                   // false = no usable hits
};

// The no-rate-function mechanism: each hit time n > N0 must force the window
// of length ceil(gamma log n / (2 log K)) after n to average above alpha,
// contradicting the upper Erdos-Renyi law at that level.
ObstructionReport obstruction_check(const MapSpec& map, const ObservableSpec& obs,
                                    double gamma, double alpha, double I_alpha,
                                    std::uint64_t n_max, std::uint64_t seed,
                                    std::uint64_t sample_index = 0);

// exp(-A^2 / (2 sum M_i^2))
double azuma_bound(double A, std::span<const double> increments);

// 2 exp(-xi_n E_n / f_n)
double schindler_bound(double E_n, double f_n, double xi_n);

struct PressureBound {
    double M = 0;
    double slope = 0;      // t M - d log(lambda)
    double bound_at_n = 0; // slope + log(c r(M)^d)/n
};

struct PressureReport {
    double t = 0;
    int n = 0;
    double exponent_nt = 0;     // local integrability exponent of e^{t S_n} at p
    bool integral_infinite = false; // nt >= 1
    std::vector<PressureBound> bounds;
};

// Divergence diagnostics for the logarithmic moment generating function of
// an observable unbounded at a fixed point.
PressureReport pressure_diagnostics(const MapSpec& map, const ObservableSpec& obs,
                                    double t, std::span<const double> M_list,
                                    int n);

} // namespace ldlab

#endif
