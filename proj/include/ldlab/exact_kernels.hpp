#ifndef LDLAB_EXACT_KERNELS_HPP
#define LDLAB_EXACT_KERNELS_HPP

#include <cstdint>
#include <functional>
#include <vector>

#include "ldlab/observables.hpp"

namespace ldlab {

// Exact transfer-operator iterate for the doubling map:
//   (P^n f)(x) = 2^{-n} sum_{k=0}^{2^n-1} f((x+k)/2^n)
// evaluated with a fixed pairwise summation tree (bit-stable regardless of
// how callers partition work).  n <= 26; a singular node is skipped by
// jittering x by 2^{-60}.
double apply_transfer(const std::function<double(double)>& f, int n, double x);

struct DecayPoint {
    int n;
    double norm;
};

struct DecayCurve {
    std::vector<DecayPoint> points;
    double log_slope; // least-squares slope of log(norm) vs n
};

// ||P^n(phi - mean)||_p for n = 0..n_max by singularity-aware quadrature.
// obs must be LogPow(alpha, pole=0) or InvPow(alpha) with p < 1/alpha.
DecayCurve lp_decay_curve(const ObservableSpec& obs, double p, int n_max);

// integral of phi * P^n(phi - mean) over Lebesgue; equals the autocovariance
// at lag n by transfer-operator duality.
double autocorrelation(const ObservableSpec& obs, int n);

// Two-sided exact law of S_n for a cylinder-coded observable: dynamic
// programming on the last d-1 binary digits with directed bucket rounding,
// so [lower, upper] is a rigorous sandwich of the true distribution.
struct SumDistribution {
    int n = 0;
    int depth = 0;
    double delta = 0;
    long offset = 0; // bucket index 0 corresponds to value offset*delta
    std::vector<double> lower;
    std::vector<double> upper;

    double tail_ge_lower(double s) const; // <= P(S_n >= s)
    double tail_ge_upper(double s) const; // >= P(S_n >= s)
    double total_lower() const;
    double total_upper() const;
};

SumDistribution cylinder_dp(const ObservableSpec& cyl, int n, double delta,
                            std::size_t memory_budget_bytes = std::size_t{2} << 30);

// Martingale-coboundary decomposition h - mean = g + w∘T - w with
// w = sum_{k=1}^{C_n} P^k(h - mean) and the discarded geometric tail bounded.
struct MartingaleParts {
    int n = 0;
    double M_n = 0;      // truncation level n^{(1-alpha)/4}
    int C_n = 0;         // ceil(M_n / theta)
    ObservableSpec h;    // min{phi, M_n}
    double mean_h = 0;
    double w_sup = 0;       // max |w| over a 2^12 grid
    double max_residual = 0; // max |P g| over a 2^10 grid
    double tail_bound = 0;   // C_T e^{-theta C_n} ||h - mean||_BV
    std::function<double(double)> w;
    std::function<double(double)> g;
};

MartingaleParts martingale_decompose(const ObservableSpec& obs, int n,
                                     double alpha, double theta);

} // namespace ldlab

#endif
