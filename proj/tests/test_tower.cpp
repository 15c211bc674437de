#include "doctest.h"

#include <cmath>
#include <stdexcept>

#include "ldlab/tower.hpp"

using namespace ldlab;

TEST_CASE("tower construction gets the masses and sizes right") {
    auto t1 = build_tower(1);
    CHECK(t1.K == 1);
    CHECK(t1.n_k[0] == 0);    // k = 0 enters only through its mass; height R(0) = 1
    CHECK(t1.R_k[0] == 1);
    CHECK(t1.R_k[1] == 24);   // R(1) = 2 * 12
    CHECK(t1.total_states == 25);
    // C^{-1} = e^{-1/4} + e^{-6} when only columns 0 and 1 are kept
    long double inv_C = std::exp(-0.25L) + std::exp(-6.0L);
    CHECK(static_cast<double>(t1.log_C) ==
          doctest::Approx(static_cast<double>(-std::log(inv_C))).epsilon(1e-14));

    auto t2 = build_tower(2);
    CHECK(t2.n_k[2] == 144);
    CHECK(t2.R_k[2] == 288);
    CHECK(t2.total_states == 1 + 24 + 288);
    // Z = sum_k R(k) p_k
    long double Z = 0;
    for (int k = 0; k <= 2; ++k)
        Z += t2.R_k[static_cast<std::size_t>(k)] * std::exp(t2.log_p[static_cast<std::size_t>(k)]);
    CHECK(t2.Z == doctest::Approx(static_cast<double>(Z)).epsilon(1e-12));
    // base masses are a probability vector
    long double mass = 0;
    for (int k = 0; k <= 2; ++k) mass += std::exp(t2.log_p[static_cast<std::size_t>(k)]);
    CHECK(static_cast<double>(mass) == doctest::Approx(1.0).epsilon(1e-15));

    auto t3 = build_tower(3);
    CHECK(t3.total_states == 1 + 24 + 288 + 3456);
    // the first discarded column alone has log10 mass about -12^4/2 / ln 10
    CHECK(t3.log10_tail_mass < -1000.0);

    CHECK_THROWS_AS(build_tower(0), std::invalid_argument);
    CHECK_THROWS_AS(build_tower(5), std::invalid_argument);
}

TEST_CASE("step observable and transfer function on hand-picked states") {
    auto t = build_tower(2);
    CHECK(t.f(0, 0) == 0);
    CHECK(t.psi(0, 0) == 0);
    // rising half: f = +1 and psi climbs by one per level
    CHECK(t.f(1, 0) == 1);
    CHECK(t.psi(1, 1) - t.psi(1, 0) == 1);
    CHECK(t.psi(1, 12) == 12); // peak value n(1)
    // falling half: f = -1
    CHECK(t.f(1, 12) == -1);
    CHECK(t.f(1, 23) == -1);
    CHECK(t.psi(1, 23) == 1); // back to 1 at the column top
    CHECK(t.f(2, 143) == 1);
    CHECK(t.f(2, 144) == -1);
}

TEST_CASE("f is exactly the coboundary of psi, exhaustively") {
    for (int K = 1; K <= 3; ++K) {
        auto model = build_tower(K);
        auto rep = verify_coboundary(model, 123);
        CHECK(rep.state_violations == 0);
        CHECK(rep.trajectory_violations == 0);
        CHECK(rep.states_checked == model.total_states);
        CHECK(rep.trajectories == 1000);
        CHECK(rep.branches_checked > 0);
    }
}

TEST_CASE("the stationary measure really is stationary") {
    for (int K = 1; K <= 4; ++K)
        CHECK(stationarity_defect(build_tower(K)) <= 1e-15);
}

TEST_CASE("one-step law of S_n matches hand arithmetic") {
    auto t = build_tower(2);
    auto d = sn_distribution(t, 1);
    REQUIRE(d.pmf.size() == 3);
    // P(S_1 = +1) = nu(rising states) = sum_k n(k) p_k / Z, and the same mass
    // sits on the falling halves; the k=0 column contributes P(S_1 = 0)
    double up = 0, zero = 0;
    for (int k = 1; k <= 2; ++k)
        up += static_cast<double>(t.n_k[static_cast<std::size_t>(k)]) *
              std::exp(static_cast<double>(t.log_nu(k)));
    zero = std::exp(static_cast<double>(t.log_nu(0)));
    CHECK(d.pmf[2] == doctest::Approx(up).epsilon(1e-12));
    CHECK(d.pmf[0] == doctest::Approx(up).epsilon(1e-12));
    CHECK(d.pmf[1] == doctest::Approx(zero).epsilon(1e-12));
    CHECK(d.total == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(std::fabs(d.mean) <= 1e-14);
}

TEST_CASE("S_n stays inside its coboundary range and has zero mean") {
    auto t = build_tower(2);
    for (int n : {10, 50, 300}) {
        auto d = sn_distribution(t, n);
        CHECK(d.total == doctest::Approx(1.0).epsilon(1e-10));
        CHECK(std::fabs(d.mean) <= 1e-10);
        // |S_n| = |psi(end) - psi(start)| <= n(K) always, far below n for large n
        CHECK(d.prob_abs_gt(static_cast<double>(t.n_k[2])) == 0.0);
        CHECK(d.variance <= 4.0 * 144.0 * 144.0);
    }
    CHECK_THROWS_AS(sn_distribution(t, 301), std::invalid_argument);
    CHECK_THROWS_AS(sn_distribution(build_tower(3), 10), std::invalid_argument);
}

TEST_CASE("variance curve agrees with the full distribution") {
    auto t = build_tower(2);
    auto curve = variance_curve(t, 60);
    REQUIRE(curve.size() == 60);
    for (int n : {1, 7, 33, 60}) {
        auto d = sn_distribution(t, n);
        const auto& pt = curve[static_cast<std::size_t>(n - 1)];
        CHECK(pt.n == n);
        CHECK(pt.mean == doctest::Approx(d.mean).epsilon(1e-10));
        CHECK(pt.variance == doctest::Approx(d.variance).epsilon(1e-9));
    }
}

TEST_CASE("scaled log-MGF: zero at t = 0, bounded by |t| n(K), DP cross-check") {
    auto t = build_tower(2);
    auto flat = log_mgf_curve(t, 0.0, 50);
    for (const auto& pt : flat.points) CHECK(std::fabs(pt.value) <= 1e-15);

    auto curve = log_mgf_curve(t, 1.0, 100);
    REQUIRE(curve.points.size() == 100);
    for (const auto& pt : curve.points) {
        // |S_n| <= 2 n(K), so (1/n) log E e^{S_n} <= 2 n(K)/n
        CHECK(pt.value <= 2.0 * 144.0 / pt.n + 1e-12);
        CHECK(pt.value >= 0.0 - 1e-12); // Jensen: E S_n = 0
    }
    CHECK(curve.max_value >= curve.min_value);
    CHECK(curve.points[static_cast<std::size_t>(curve.argmax_n - 1)].value ==
          doctest::Approx(curve.max_value));

    // cross-check against the exact distribution at a few n
    for (int n : {5, 40, 100}) {
        auto d = sn_distribution(t, n);
        long double acc = 0;
        for (std::size_t i = 0; i < d.pmf.size(); ++i) {
            long double v = static_cast<long double>(i) - n;
            acc += d.pmf[i] * std::exp(v); // t = 1
        }
        double direct = static_cast<double>(std::log(acc)) / n;
        CHECK(curve.points[static_cast<std::size_t>(n - 1)].value ==
              doctest::Approx(direct).epsilon(1e-9));
    }

    CHECK_THROWS_AS(log_mgf_curve(t, 1.0, 20000), std::invalid_argument);
}
