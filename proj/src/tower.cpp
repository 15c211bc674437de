#include "ldlab/tower.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "ldlab/rng.hpp"

namespace ldlab {

namespace {

long double logsumexp2(long double a, long double b) {
    if (a < b) std::swap(a, b);
    if (b == -std::numeric_limits<long double>::infinity()) return a;
    return a + std::log1p(std::exp(b - a));
}

long double logsumexp(const std::vector<long double>& v) {
    long double m = -std::numeric_limits<long double>::infinity();
    for (long double x : v) m = std::max(m, x);
    if (m == -std::numeric_limits<long double>::infinity()) return m;
    long double s = 0;
    for (long double x : v) s += std::exp(x - m);
    return m + std::log(s);
}

} // namespace

long TowerModel::state_index(int k, long j) const {
    long idx = 0;
    for (int c = 0; c < k; ++c) idx += R_k[static_cast<std::size_t>(c)];
    return idx + j;
}

int TowerModel::f(int k, long j) const {
    if (k == 0) return 0;
    return j < n_k[static_cast<std::size_t>(k)] ? +1 : -1;
}

long TowerModel::psi(int k, long j) const {
    if (k == 0) return 0;
    long nk = n_k[static_cast<std::size_t>(k)];
    return j <= nk ? j : 2 * nk - j;
}

TowerModel build_tower(int K) {
    if (K < 1) throw std::invalid_argument("build_tower: K >= 1");
    if (K > 4)
        throw std::invalid_argument(
            "build_tower: K > 4 exceeds the state-count budget (R(5) = 497664 levels)");
    TowerModel m;
    m.K = K;
    m.n_k.resize(static_cast<std::size_t>(K) + 1);
    m.R_k.resize(static_cast<std::size_t>(K) + 1);
    m.log_p.resize(static_cast<std::size_t>(K) + 1);
    // n(0) = 1/2 enters only through the k = 0 mass e^{-1/4}; the column
    // itself has height 1.
    m.n_k[0] = 0;
    m.R_k[0] = 1;
    long nk = 1;
    for (int k = 1; k <= K; ++k) {
        nk *= 12;
        m.n_k[static_cast<std::size_t>(k)] = nk;
        m.R_k[static_cast<std::size_t>(k)] = 2 * nk;
    }

    // C^{-1} = sum_k e^{-n(k)/2}; the k = 0 term is e^{-1/4}
    std::vector<long double> le;
    le.push_back(-0.25L);
    for (int k = 1; k <= K; ++k)
        le.push_back(-static_cast<long double>(m.n_k[static_cast<std::size_t>(k)]) / 2.0L);
    m.log_C = -logsumexp(le);
    for (int k = 0; k <= K; ++k)
        m.log_p[static_cast<std::size_t>(k)] = m.log_C + le[static_cast<std::size_t>(k)];

    std::vector<long double> lz;
    for (int k = 0; k <= K; ++k)
        lz.push_back(std::log(static_cast<long double>(m.R_k[static_cast<std::size_t>(k)])) +
                     m.log_p[static_cast<std::size_t>(k)]);
    m.log_Z = logsumexp(lz);
    m.Z = static_cast<double>(std::exp(m.log_Z));

    // discarded stationary mass in columns > K, dominated by k = K+1
    long double tail = -std::numeric_limits<long double>::infinity();
    long nn = m.n_k[static_cast<std::size_t>(K)] == 0 ? 1 : m.n_k[static_cast<std::size_t>(K)];
    for (int k = K + 1; k <= K + 3; ++k) {
        nn *= 12;
        tail = logsumexp2(tail, std::log(2.0L * static_cast<long double>(nn)) -
                                    static_cast<long double>(nn) / 2.0L);
    }
    m.log10_tail_mass = static_cast<double>((m.log_C + tail - m.log_Z) / std::log(10.0L));

    m.total_states = 0;
    for (int k = 0; k <= K; ++k) m.total_states += m.R_k[static_cast<std::size_t>(k)];
    return m;
}

CoboundaryReport verify_coboundary(const TowerModel& model, std::uint64_t seed) {
    CoboundaryReport rep;
    for (int k = 0; k <= model.K; ++k) {
        long R = model.R_k[static_cast<std::size_t>(k)];
        for (long j = 0; j < R; ++j) {
            ++rep.states_checked;
            int fv = model.f(k, j);
            if (j + 1 < R) {
                if (fv != model.psi(k, j + 1) - model.psi(k, j)) ++rep.state_violations;
            } else {
                // column top: every return branch lands at some (k', 0)
                for (int kp = 0; kp <= model.K; ++kp) {
                    ++rep.branches_checked;
                    if (fv != model.psi(kp, 0) - model.psi(k, j)) ++rep.state_violations;
                }
            }
        }
    }

    // telescoped identity on random trajectories, all-integer bookkeeping
    auto pick_column = [&](long double u) {
        long double acc = 0;
        for (int k = 0; k <= model.K; ++k) {
            acc += std::exp(model.log_p[static_cast<std::size_t>(k)]);
            if (u <= acc || k == model.K) return k;
        }
        return model.K;
    };

    rep.trajectories = 1000;
    const int steps = 1000;
    for (int t = 0; t < rep.trajectories; ++t) {
        CounterRng rng(seed, static_cast<std::uint64_t>(t));
        std::uint64_t ctr = 0;
        // start from nu: column proportional to R(k) p_k, level uniform
        long double u = rng.uniform(ctr++) * static_cast<long double>(model.Z);
        int k = model.K;
        long double acc = 0;
        for (int c = 0; c <= model.K; ++c) {
            acc += static_cast<long double>(model.R_k[static_cast<std::size_t>(c)]) *
                   std::exp(model.log_p[static_cast<std::size_t>(c)]);
            if (u <= acc) { k = c; break; }
        }
        long j = static_cast<long>(rng.uniform(ctr++) *
                                   static_cast<double>(model.R_k[static_cast<std::size_t>(k)]));
        j = std::min(j, model.R_k[static_cast<std::size_t>(k)] - 1);

        long psi0 = model.psi(k, j);
        long s = 0;
        for (int i = 0; i < steps; ++i) {
            s += model.f(k, j);
            if (j + 1 < model.R_k[static_cast<std::size_t>(k)]) {
                ++j;
            } else {
                k = pick_column(rng.uniform(ctr++));
                j = 0;
            }
        }
        if (s != model.psi(k, j) - psi0) ++rep.trajectory_violations;
    }
    return rep;
}

namespace {

// forward DP over (state, value); one table row per state, 2n+1 value buckets
struct SnDp {
    const TowerModel& m;
    long S;                       // states
    int n;                        // value offset and bucket bound
    std::vector<long double> cur, nxt;
    std::vector<int> fval;
    std::vector<int> is_top;
    std::vector<long> next_state; // successor for non-top states
    std::vector<long> base_state; // state_index(k, 0)
    std::vector<long double> p;   // linear p_k

    SnDp(const TowerModel& model, int n_) : m(model), n(n_) {
        if (m.K > 2)
            throw std::invalid_argument("sn_distribution: distribution table needs K <= 2");
        if (n < 1 || n > 300)
            throw std::invalid_argument("sn_distribution: n must be in [1, 300]");
        S = m.total_states;
        std::size_t width = static_cast<std::size_t>(2 * n + 1);
        cur.assign(static_cast<std::size_t>(S) * width, 0.0L);
        nxt.assign(static_cast<std::size_t>(S) * width, 0.0L);
        fval.resize(static_cast<std::size_t>(S));
        is_top.resize(static_cast<std::size_t>(S));
        next_state.resize(static_cast<std::size_t>(S));
        base_state.resize(static_cast<std::size_t>(m.K) + 1);
        p.resize(static_cast<std::size_t>(m.K) + 1);
        for (int k = 0; k <= m.K; ++k) {
            base_state[static_cast<std::size_t>(k)] = m.state_index(k, 0);
            p[static_cast<std::size_t>(k)] = std::exp(m.log_p[static_cast<std::size_t>(k)]);
        }
        for (int k = 0; k <= m.K; ++k) {
            long R = m.R_k[static_cast<std::size_t>(k)];
            for (long j = 0; j < R; ++j) {
                long s = m.state_index(k, j);
                fval[static_cast<std::size_t>(s)] = m.f(k, j);
                is_top[static_cast<std::size_t>(s)] = (j + 1 == R);
                next_state[static_cast<std::size_t>(s)] = is_top[static_cast<std::size_t>(s)] ? -1 : s + 1;
                long double nu = std::exp(m.log_nu(k));
                cur[static_cast<std::size_t>(s) * width + static_cast<std::size_t>(n)] = nu;
            }
        }
    }

    void step() {
        std::size_t width = static_cast<std::size_t>(2 * n + 1);
        std::fill(nxt.begin(), nxt.end(), 0.0L);
        for (long s = 0; s < S; ++s) {
            int dv = fval[static_cast<std::size_t>(s)];
            const long double* row = &cur[static_cast<std::size_t>(s) * width];
            if (!is_top[static_cast<std::size_t>(s)]) {
                long double* out = &nxt[static_cast<std::size_t>(next_state[static_cast<std::size_t>(s)]) * width];
                for (std::size_t b = 0; b < width; ++b) {
                    long double mass = row[b];
                    if (mass == 0.0L) continue;
                    out[b + static_cast<std::size_t>(dv + 1) - 1] += mass; // |S_n| <= n keeps b+dv in range
                }
            } else {
                for (std::size_t b = 0; b < width; ++b) {
                    long double mass = row[b];
                    if (mass == 0.0L) continue;
                    std::size_t nb = b + static_cast<std::size_t>(dv + 1) - 1;
                    for (int kp = 0; kp <= m.K; ++kp)
                        nxt[static_cast<std::size_t>(base_state[static_cast<std::size_t>(kp)]) * width + nb] +=
                            mass * p[static_cast<std::size_t>(kp)];
                }
            }
        }
        cur.swap(nxt);
    }

    std::vector<long double> marginal() const {
        std::size_t width = static_cast<std::size_t>(2 * n + 1);
        std::vector<long double> out(width, 0.0L);
        for (long s = 0; s < S; ++s)
            for (std::size_t b = 0; b < width; ++b)
                out[b] += cur[static_cast<std::size_t>(s) * width + b];
        return out;
    }
};

SnDistribution summarize(const std::vector<long double>& pm, int n) {
    SnDistribution d;
    d.n = n;
    d.pmf.resize(pm.size());
    long double tot = 0, m1 = 0, m2 = 0;
    for (std::size_t i = 0; i < pm.size(); ++i) {
        long double v = static_cast<long double>(static_cast<long>(i) - n);
        tot += pm[i];
        m1 += v * pm[i];
        m2 += v * v * pm[i];
        d.pmf[i] = static_cast<double>(pm[i]);
    }
    d.total = static_cast<double>(tot);
    d.mean = static_cast<double>(m1);
    d.variance = static_cast<double>(m2 - m1 * m1);
    return d;
}

} // namespace

double SnDistribution::prob_abs_gt(double thr) const {
    double s = 0;
    for (std::size_t i = 0; i < pmf.size(); ++i) {
        double v = static_cast<double>(static_cast<long>(i) - n);
        if (std::fabs(v) > thr) s += pmf[i];
    }
    return s;
}

SnDistribution sn_distribution(const TowerModel& model, int n) {
    SnDp dp(model, n);
    for (int i = 0; i < n; ++i) dp.step();
    return summarize(dp.marginal(), n);
}

std::vector<VariancePoint> variance_curve(const TowerModel& model, int n_max) {
    SnDp dp(model, n_max);
    std::vector<VariancePoint> out;
    for (int i = 1; i <= n_max; ++i) {
        dp.step();
        auto pm = dp.marginal();
        // values are offset by n_max, not i; recenter when summarizing
        long double m1 = 0, m2 = 0;
        for (std::size_t b = 0; b < pm.size(); ++b) {
            long double v = static_cast<long double>(static_cast<long>(b) - n_max);
            m1 += v * pm[b];
            m2 += v * v * pm[b];
        }
        VariancePoint vp;
        vp.n = i;
        vp.mean = static_cast<double>(m1);
        vp.variance = static_cast<double>(m2 - m1 * m1);
        out.push_back(vp);
    }
    return out;
}

MgfCurve log_mgf_curve(const TowerModel& model, double t, int n_max) {
    if (n_max < 1 || n_max > 10000)
        throw std::invalid_argument("log_mgf_curve: n_max must be in [1, 10^4]");
    const long S = model.total_states;
    std::vector<long double> w(static_cast<std::size_t>(S), 0.0L), w2(static_cast<std::size_t>(S));
    std::vector<int> fval(static_cast<std::size_t>(S));
    std::vector<int> is_top(static_cast<std::size_t>(S));
    std::vector<long> base_state(static_cast<std::size_t>(model.K) + 1);
    std::vector<long double> log_nu_state(static_cast<std::size_t>(S));
    for (int k = 0; k <= model.K; ++k) {
        base_state[static_cast<std::size_t>(k)] = model.state_index(k, 0);
        long R = model.R_k[static_cast<std::size_t>(k)];
        for (long j = 0; j < R; ++j) {
            long s = model.state_index(k, j);
            fval[static_cast<std::size_t>(s)] = model.f(k, j);
            is_top[static_cast<std::size_t>(s)] = (j + 1 == R);
            log_nu_state[static_cast<std::size_t>(s)] = model.log_nu(k);
        }
    }

    MgfCurve curve;
    curve.t = t;
    curve.max_value = -std::numeric_limits<double>::infinity();
    curve.min_value = std::numeric_limits<double>::infinity();
    const long double lt = static_cast<long double>(t);

    for (int n = 1; n <= n_max; ++n) {
        // w_n(s) = t f(s) + log E(e^{t S_{n-1}} | successor of s)
        long double top_in = -std::numeric_limits<long double>::infinity();
        for (int kp = 0; kp <= model.K; ++kp)
            top_in = logsumexp2(top_in,
                                model.log_p[static_cast<std::size_t>(kp)] +
                                    w[static_cast<std::size_t>(base_state[static_cast<std::size_t>(kp)])]);
        for (long s = 0; s < S; ++s)
            w2[static_cast<std::size_t>(s)] =
                lt * fval[static_cast<std::size_t>(s)] +
                (is_top[static_cast<std::size_t>(s)] ? top_in : w[static_cast<std::size_t>(s) + 1]);
        w.swap(w2);

        long double lm = -std::numeric_limits<long double>::infinity();
        for (long s = 0; s < S; ++s)
            lm = std::max(lm, log_nu_state[static_cast<std::size_t>(s)] + w[static_cast<std::size_t>(s)]);
        long double acc = 0;
        for (long s = 0; s < S; ++s)
            acc += std::exp(log_nu_state[static_cast<std::size_t>(s)] + w[static_cast<std::size_t>(s)] - lm);
        long double log_e = lm + std::log(acc);

        MgfPoint pt;
        pt.n = n;
        pt.value = static_cast<double>(log_e / static_cast<long double>(n));
        curve.points.push_back(pt);
        if (pt.value > curve.max_value) { curve.max_value = pt.value; curve.argmax_n = n; }
        if (pt.value < curve.min_value) { curve.min_value = pt.value; curve.argmin_n = n; }
    }
    return curve;
}

double stationarity_defect(const TowerModel& model) {
    double worst = 0;
    // interior states (k, j > 0) receive exactly nu(k, j-1) = nu(k, j); only
    // the base states mix, via inflow = sum over tops of nu(top) * p_k
    long double top_mass = 0;
    for (int k = 0; k <= model.K; ++k)
        top_mass += std::exp(model.log_nu(k));
    for (int k = 0; k <= model.K; ++k) {
        long double inflow = top_mass * std::exp(model.log_p[static_cast<std::size_t>(k)]);
        long double nu = std::exp(model.log_nu(k));
        worst = std::max(worst, static_cast<double>(std::fabs(inflow - nu)));
    }
    return worst;
}

} // namespace ldlab
