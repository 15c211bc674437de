#include "doctest.h"

#include <cmath>
#include <utility>
#include <vector>

#include "ldlab/dynamics.hpp"
#include "ldlab/estimators.hpp"

using namespace ldlab;

namespace {

// Erlang(n) upper tail P(S_n >= t) for i.i.d. exponential(1) summands.
double erlang_tail(int n, double t) {
    double term = std::exp(-t);
    double acc = term;
    for (int k = 1; k < n; ++k) {
        term *= t / k;
        acc += term;
    }
    return acc;
}

TailQuery base_query() {
    TailQuery q;
    q.map = MapSpec::doubling();
    q.obs = ObservableSpec::log_pow(1.0, 0.0);
    q.n = 10;
    q.eps = 0.5;
    q.samples = 20000;
    q.seed = 99;
    q.workers = 1;
    return q;
}

} // namespace

TEST_CASE("tail_mc hit counts do not depend on the worker count") {
    auto check_invariant = [](TailQuery q) {
        q.workers = 1;
        auto a = tail_mc(q);
        q.workers = 3;
        auto b = tail_mc(q);
        q.workers = 8;
        auto c = tail_mc(q);
        CHECK(a.count == b.count);
        CHECK(a.count == c.count);
        return a;
    };

    TailQuery q = base_query();
    check_invariant(q); // product fast path

    q.obs = ObservableSpec::log_pow(2.0, 0.0);
    check_invariant(q); // incremental-log fast path

    q.obs = ObservableSpec::cylinder_coded(3, {0.1, 0.9, 0.3, 0.7, 0.2, 0.8, 0.4, 0.6});
    q.eps = 0.05;
    check_invariant(q); // cylinder fast path

    q = base_query();
    q.map = MapSpec::tent();
    check_invariant(q); // generic path

    q = base_query();
    q.source = SampleSource::IidExponential;
    check_invariant(q); // iid channel
}

TEST_CASE("tail_mc on the iid channel matches the Erlang law") {
    TailQuery q = base_query();
    q.source = SampleSource::IidExponential;
    q.samples = 200000;

    auto up = tail_mc(q);
    double p_up = erlang_tail(q.n, q.n * (1.0 + q.eps));
    CHECK(up.obs_mean == 1.0);
    CHECK(std::fabs(up.phat - p_up) <= 5.0 * std::sqrt(p_up * (1 - p_up) / q.samples));
    CHECK(up.ci.lo <= p_up);
    CHECK(up.ci.hi >= p_up);

    q.side = TailSide::Lower;
    auto lo = tail_mc(q);
    double p_lo = 1.0 - erlang_tail(q.n, q.n * (1.0 - q.eps));
    CHECK(std::fabs(lo.phat - p_lo) <= 5.0 * std::sqrt(p_lo * (1 - p_lo) / q.samples));

    // the two one-sided events are disjoint, so the counts add exactly
    q.side = TailSide::TwoSided;
    auto two = tail_mc(q);
    CHECK(two.count == up.count + lo.count);
}

TEST_CASE("tail_mc fast product path agrees with a direct orbit-sum oracle") {
    TailQuery q = base_query();
    q.samples = 2000;
    auto est = tail_mc(q);
    CHECK(est.obs_mean == doctest::Approx(1.0).epsilon(1e-12));

    std::uint64_t count = 0;
    const double up = q.n * (1.0 + q.eps);
    for (std::uint64_t i = 0; i < q.samples; ++i) {
        OrbitStream stream(q.seed, i);
        double s = 0.0;
        for (int j = 0; j < q.n; ++j)
            s += -std::log(stream.real_view(static_cast<std::uint64_t>(j)));
        if (s >= up) ++count;
    }
    CHECK(est.count == count);
}

TEST_CASE("tail_mc squared-log fast path agrees with a direct orbit-sum oracle") {
    TailQuery q = base_query();
    q.obs = ObservableSpec::log_pow(2.0, 0.0);
    q.samples = 2000;
    q.eps = 2.0;
    auto est = tail_mc(q);
    CHECK(est.obs_mean == doctest::Approx(2.0).epsilon(1e-12));

    std::uint64_t count = 0;
    const double up = q.n * (2.0 + q.eps);
    for (std::uint64_t i = 0; i < q.samples; ++i) {
        OrbitStream stream(q.seed, i);
        double s = 0.0;
        for (int j = 0; j < q.n; ++j) {
            double l = -std::log(stream.real_view(static_cast<std::uint64_t>(j)));
            s += l * l;
        }
        if (s >= up) ++count;
    }
    CHECK(est.count == count);
}

TEST_CASE("tail_mc is monotone in the deviation level") {
    TailQuery q = base_query();
    q.eps = 0.2;
    auto loose = tail_mc(q);
    q.eps = 0.4;
    auto tight = tail_mc(q);
    CHECK(tight.count <= loose.count);
}

TEST_CASE("tail_mc rejects bad queries") {
    TailQuery q = base_query();
    q.n = 0;
    CHECK_THROWS_AS(tail_mc(q), std::invalid_argument);
    q = base_query();
    q.eps = 0.0;
    CHECK_THROWS_AS(tail_mc(q), std::invalid_argument);
    q = base_query();
    q.map = MapSpec::piecewise_linear({0.5}, {2.0, 2.0}, 0.0, 1, 2.0);
    CHECK_THROWS_AS(tail_mc(q), std::invalid_argument);
}

TEST_CASE("fit_exponent recovers planted stretched exponents") {
    std::vector<std::pair<double, double>> sqrt_law, pure_exp;
    for (double n : {8.0, 16.0, 32.0, 64.0, 128.0, 256.0, 512.0, 1024.0}) {
        sqrt_law.emplace_back(n, std::exp(-2.0 * std::sqrt(n)));
        pure_exp.emplace_back(n, std::exp(-0.1 * n));
    }
    auto f1 = fit_exponent_pairs(sqrt_law);
    CHECK(f1.gamma_hat == doctest::Approx(0.5).epsilon(1e-9));
    CHECK(f1.n_min == 8.0);
    CHECK(f1.n_max == 1024.0);
    auto f2 = fit_exponent_pairs(pure_exp);
    CHECK(f2.gamma_hat == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("fit_exponent drops unusable points and enforces its range rules") {
    // p outside (0,1) is skipped, not propagated into the fit
    std::vector<std::pair<double, double>> pts;
    for (double n : {8.0, 32.0, 128.0, 512.0})
        pts.emplace_back(n, std::exp(-2.0 * std::sqrt(n)));
    pts.emplace_back(2048.0, 0.0);
    auto f = fit_exponent_pairs(pts);
    CHECK(f.points_used == 4);
    CHECK(f.gamma_hat == doctest::Approx(0.5).epsilon(1e-9));

    CHECK_THROWS_AS(fit_exponent_pairs({{8.0, 0.5}, {16.0, 0.4}, {64.0, 0.3}}),
                    std::invalid_argument);
    CHECK_THROWS_AS(fit_exponent_pairs({{8.0, 0.5}, {16.0, 0.4}, {32.0, 0.3}, {48.0, 0.2}}),
                    std::invalid_argument);

    std::vector<TailEstimate> ests(5);
    for (int i = 0; i < 5; ++i) {
        double n = 8.0 * (1 << (2 * i));
        ests[static_cast<std::size_t>(i)].n = static_cast<int>(n);
        ests[static_cast<std::size_t>(i)].phat = std::exp(-2.0 * std::sqrt(n));
    }
    ests[2].unreliable = true; // excluded but the fit still stands on 4 points
    auto fe = fit_exponent(ests);
    CHECK(fe.points_used == 4);
    CHECK(fe.gamma_hat == doctest::Approx(0.5).epsilon(1e-9));
}

TEST_CASE("lower bound certificate holds on doubling and tent at small n") {
    for (auto map : {MapSpec::doubling(), MapSpec::tent()}) {
        auto cert = lower_bound_construction(map, ObservableSpec::log_pow(1.0, 0.0), 16, 0.1);
        CHECK(cert.ok);
        CHECK(cert.failures == 0);
        CHECK(cert.omega == doctest::Approx(0.5));
        CHECK(cert.min_margin > 0.0);
        CHECK(cert.points == 1000);
        CHECK(cert.prob_lower_bound ==
              doctest::Approx(std::exp(-cert.r * std::sqrt(16.0))).epsilon(1e-12));
    }
}

TEST_CASE("lower bound construction rejects ineligible inputs") {
    auto d = MapSpec::doubling();
    CHECK_THROWS_AS(lower_bound_construction(d, ObservableSpec::log_pow(1.0, 0.3), 16, 0.1),
                    std::invalid_argument);
    CHECK_THROWS_AS(lower_bound_construction(d, ObservableSpec::inv_pow(0.5), 16, 0.1),
                    std::invalid_argument);
    CHECK_THROWS_AS(lower_bound_construction(
                        MapSpec::piecewise_linear({0.5}, {2.0, 2.0}, 0.0, 1, 2.0),
                        ObservableSpec::log_pow(1.0, 0.0), 16, 0.1),
                    std::invalid_argument);
    CHECK_THROWS_AS(lower_bound_construction(d, ObservableSpec::log_pow(1.0, 0.0), 0, 0.1),
                    std::invalid_argument);
}

TEST_CASE("window maximum of a constant observable is that constant") {
    auto obs = ObservableSpec::cylinder_coded(1, {0.7, 0.7});
    auto stat = erdos_renyi_windows(SampleSource::Orbit, MapSpec::doubling(), obs,
                                    2000, 1.0, 7);
    CHECK(stat.ell == 7); // floor(log 2000)
    CHECK(stat.W == doctest::Approx(0.7).epsilon(1e-15));
    CHECK(stat.argmax == 0);
}

TEST_CASE("window maximum matches a naive full scan") {
    const long n = 3000;
    const double I = std::log(static_cast<double>(n)) / 5.2; // ell = 5
    const std::uint64_t seed = 424242;

    auto obs = ObservableSpec::cylinder_coded(2, {0.05, 1.4, -0.3, 0.9});
    auto stat = erdos_renyi_windows(SampleSource::Orbit, MapSpec::doubling(), obs,
                                    n, I, seed, 3);
    REQUIRE(stat.ell == 5);

    OrbitStream stream(seed, 3);
    std::vector<double> vals(static_cast<std::size_t>(n));
    for (long j = 0; j < n; ++j)
        vals[static_cast<std::size_t>(j)] =
            eval_raw(obs, stream.real_view(static_cast<std::uint64_t>(j)));
    double best = -1e300;
    long barg = 0;
    for (long j = 0; j + stat.ell <= n; ++j) {
        double s = 0;
        for (long k = 0; k < stat.ell; ++k) s += vals[static_cast<std::size_t>(j + k)];
        double avg = s / static_cast<double>(stat.ell);
        if (avg > best) {
            best = avg;
            barg = j;
        }
    }
    CHECK(stat.W == doctest::Approx(best).epsilon(1e-12));
    CHECK(stat.argmax == barg);

    // and the iid channel against the same scan on exponential draws
    auto istat = erdos_renyi_windows(SampleSource::IidExponential, MapSpec::doubling(),
                                     obs, n, I, seed, 3);
    CounterRng rng(seed, 3);
    for (long j = 0; j < n; ++j)
        vals[static_cast<std::size_t>(j)] = rng.exponential(static_cast<std::uint64_t>(j));
    best = -1e300;
    for (long j = 0; j + istat.ell <= n; ++j) {
        double s = 0;
        for (long k = 0; k < istat.ell; ++k) s += vals[static_cast<std::size_t>(j + k)];
        best = std::max(best, s / static_cast<double>(istat.ell));
    }
    CHECK(istat.W == doctest::Approx(best).epsilon(1e-12));
}

TEST_CASE("window machinery rejects degenerate window lengths") {
    auto obs = ObservableSpec::log_pow(1.0, 0.0);
    auto d = MapSpec::doubling();
    CHECK_THROWS_AS(erdos_renyi_windows(SampleSource::Orbit, d, obs, 1000, 100.0, 1),
                    std::invalid_argument); // ell < 1
    CHECK_THROWS_AS(erdos_renyi_windows(SampleSource::Orbit, d, obs, 2, 0.05, 1),
                    std::invalid_argument); // ell > n
    CHECK_THROWS_AS(erdos_renyi_windows(SampleSource::Orbit, d, obs, 1000, -1.0, 1),
                    std::invalid_argument);
}

TEST_CASE("obstruction check computes its thresholds and validates input") {
    auto tent = MapSpec::tent();
    auto obs = ObservableSpec::log_log(0.0);
    auto rep = obstruction_check(tent, obs, 1.0, 1.0, 2.0, 50000, 11);
    // M just above (alpha + rho) / I * 2 log K / gamma
    double expect_M = (1.0 + rep.rho) / 2.0 * 2.0 * std::log(2.0);
    CHECK(rep.M == doctest::Approx(expect_M).epsilon(1e-6));
    // N0 = r*^{-2/gamma} with r* = exp(1 - e^{M + rho})
    double rstar = std::exp(1.0 - std::exp(rep.M + rep.rho));
    CHECK(rep.N0 == doctest::Approx(std::pow(rstar, -2.0)).epsilon(1e-9));
    for (std::size_t i = 1; i < rep.hits.size(); ++i)
        CHECK(rep.hits[i - 1] < rep.hits[i]);
    for (const auto& e : rep.exceedances) {
        CHECK(static_cast<double>(e.hit_n) > rep.N0);
        CHECK(e.window_avg > 1.0);
    }

    CHECK_THROWS_AS(obstruction_check(tent, obs, -1.0, 1.0, 2.0, 1000, 1),
                    std::invalid_argument);
    CHECK_THROWS_AS(obstruction_check(tent, ObservableSpec::log_log(0.25), 1.0, 1.0, 2.0, 1000, 1),
                    std::invalid_argument); // pole away from the periodic point
    CHECK_THROWS_AS(obstruction_check(tent, ObservableSpec::cylinder_coded(1, {0., 1.}),
                                      1.0, 1.0, 2.0, 1000, 1),
                    std::invalid_argument); // bounded observable has no exceedance radius
}

TEST_CASE("concentration bound arithmetic") {
    std::vector<double> incs{1.0, 1.0};
    CHECK(azuma_bound(1.0, incs) == doctest::Approx(std::exp(-0.25)).epsilon(1e-15));
    std::vector<double> incs2{0.5, 0.5, 0.5, 0.5};
    CHECK(azuma_bound(2.0, incs2) == doctest::Approx(std::exp(-2.0)).epsilon(1e-15));
    std::vector<double> bad{1.0, -1.0};
    CHECK_THROWS_AS(azuma_bound(1.0, bad), std::invalid_argument);
    CHECK_THROWS_AS(azuma_bound(0.0, incs), std::invalid_argument);

    CHECK(schindler_bound(2.0, 1.0, 3.0) == doctest::Approx(2.0 * std::exp(-6.0)).epsilon(1e-15));
    CHECK_THROWS_AS(schindler_bound(-1.0, 1.0, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(schindler_bound(1.0, 0.0, 1.0), std::invalid_argument);
}

TEST_CASE("pressure diagnostics flag divergence and report linear bounds") {
    auto obs = ObservableSpec::log_pow(1.0, 0.0);
    std::vector<double> Ms{5.0, 10.0};
    auto rep = pressure_diagnostics(MapSpec::doubling(), obs, 0.5, Ms, 4);
    CHECK(rep.exponent_nt == doctest::Approx(2.0));
    CHECK(rep.integral_infinite);
    REQUIRE(rep.bounds.size() == 2);
    CHECK(rep.bounds[0].slope == doctest::Approx(0.5 * 5.0 - std::log(2.0)).epsilon(1e-15));
    CHECK(rep.bounds[0].bound_at_n ==
          doctest::Approx(rep.bounds[0].slope - 5.0 / 4.0).epsilon(1e-15));
    CHECK(rep.bounds[1].slope > rep.bounds[0].slope);

    auto fin = pressure_diagnostics(MapSpec::doubling(), obs, 0.1, Ms, 4);
    CHECK_FALSE(fin.integral_infinite);

    CHECK_THROWS_AS(pressure_diagnostics(MapSpec::doubling(), obs, -0.5, Ms, 4),
                    std::invalid_argument);
    CHECK_THROWS_AS(pressure_diagnostics(MapSpec::doubling(), ObservableSpec::inv_pow(0.5),
                                         0.5, Ms, 4),
                    std::invalid_argument);
}
