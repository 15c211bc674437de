#ifndef LDLAB_TOWER_HPP
#define LDLAB_TOWER_HPP

#include <cstdint>
#include <vector>

namespace ldlab {

// Countable-state tower truncated at column K.  Column k has height
// R(k) = 2 n(k) with n(k) = 12^k for k >= 1; the k = 0 column has height 1
// and carries the mass C e^{-1/4} (n(0) = 1/2).  The base masses are
// p_k = C e^{-n(k)/2}, normalized over the kept columns so the base is a
// probability space; the stationary measure is nu(k, j) = p_k / Z with
// Z = sum_k R(k) p_k.  Everything lives in log-space long doubles: p_2 is
// already e^{-72}-sized and e^{S_n} spans e^{+-n}.
struct TowerModel {
    int K = 0;
    std::vector<long> n_k;              // n(k)
    std::vector<long> R_k;              // R(k)
    std::vector<long double> log_p;     // log p_k (sums to 1 in linear space)
    long double log_C = 0;
    long double log_Z = 0;
    double Z = 0;
    double log10_tail_mass = 0;         // discarded measure in columns > K
    long total_states = 0;

    long state_index(int k, long j) const;

    // The +-1 step observable: +1 on the rising half of each column (k >= 1),
    // -1 on the falling half, 0 on the k = 0 column.
    int f(int k, long j) const;
    // Its transfer function: psi rises to n(k) at mid-column and falls back
    // to 1 at the top, so f = psi o F - psi.
    long psi(int k, long j) const;

    long double log_nu(int k) const { return log_p[static_cast<std::size_t>(k)] - log_Z; }
};

// Throws std::invalid_argument for K < 1 or K > 4 (R(4) = 41472 levels; the
// per-state-scalar MGF recursion handles K = 4, the distribution table does not).
TowerModel build_tower(int K);

struct CoboundaryReport {
    long states_checked = 0;
    long branches_checked = 0;   // return branches from column tops
    long state_violations = 0;
    int trajectories = 0;
    int trajectory_violations = 0;
};

// Exhaustive check of f(k,j) = psi(F(k,j)) - psi(k,j) over every state and
// every return destination, plus the telescoped identity
// S_n(f) = psi(end) - psi(start) on random length-1000 trajectories in
// integer arithmetic.
CoboundaryReport verify_coboundary(const TowerModel& model, std::uint64_t seed = 0);

struct SnDistribution {
    int n = 0;
    std::vector<double> pmf;   // pmf[i] = P(S_n = i - n), support [-n, n]
    double total = 0;
    double mean = 0;
    double variance = 0;

    double prob_abs_gt(double thr) const; // P(|S_n| > thr)
};

// Exact law of S_n(f) under nu by forward dynamic programming over
// (state, value).  Requires K <= 2 and n <= 300 (313 x (2n+1) table).
SnDistribution sn_distribution(const TowerModel& model, int n);

struct VariancePoint {
    int n = 0;
    double mean = 0;
    double variance = 0;
};

// E(S_n) and Var(S_n) for n = 1..n_max in one forward DP pass; same size
// limits as sn_distribution.
std::vector<VariancePoint> variance_curve(const TowerModel& model, int n_max);

struct MgfPoint {
    int n = 0;
    double value = 0;          // (1/n) log E(e^{t S_n})
};

struct MgfCurve {
    double t = 0;
    std::vector<MgfPoint> points;
    double max_value = 0;
    double min_value = 0;
    int argmax_n = 0;
    int argmin_n = 0;
};

// (1/n) log E_nu(e^{t S_n}) for n = 1..n_max by the per-state value recursion
// w_{m+1}(s) = t f(s) + log-sum-exp over successors, all in log space.
// Requires n_max <= 10^4; works up to K = 4.
MgfCurve log_mgf_curve(const TowerModel& model, double t, int n_max);

// max_s |(nu Kernel)(s) - nu(s)|: nu should be exactly stationary because the
// kept masses are renormalized to sum to 1.
double stationarity_defect(const TowerModel& model);

} // namespace ldlab

#endif
