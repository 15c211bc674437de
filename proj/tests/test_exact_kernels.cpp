#include "doctest.h"

#include <cmath>
#include <vector>

#include "ldlab/exact_kernels.hpp"
#include "ldlab/quadrature.hpp"
#include "ldlab/rng.hpp"

using namespace ldlab;

TEST_CASE("the transfer operator halves x - 1/2 exactly") {
    auto f = [](double x) { return x - 0.5; };
    for (int i = 0; i < 1000; ++i) {
        double x = (i + 0.5) / 1000.0;
        CHECK(std::fabs(apply_transfer(f, 1, x) - 0.5 * (x - 0.5)) <= 1e-14);
    }
    for (int n = 2; n <= 12; ++n) {
        double x = 0.8125;
        CHECK(std::fabs(apply_transfer(f, n, x) - std::ldexp(x - 0.5, -n)) <= 1e-12);
    }
}

TEST_CASE("duality: integral of (Pf) g equals integral of f (g o T)") {
    CounterRng rng(31337, 0);
    QuadOptions opt;
    std::uint64_t ctr = 0;
    for (int trial = 0; trial < 20; ++trial) {
        double a[4], b[4];
        for (int i = 0; i < 4; ++i) {
            a[i] = 2.0 * rng.uniform(ctr++) - 1.0;
            b[i] = 2.0 * rng.uniform(ctr++) - 1.0;
        }
        auto f = [&a](double x) { return a[0] + x * (a[1] + x * (a[2] + x * a[3])); };
        auto g = [&b](double x) { return b[0] + x * (b[1] + x * (b[2] + x * b[3])); };
        std::function<double(double)> ff = f;
        double lhs = integrate([&](double x) { return apply_transfer(ff, 1, x) * g(x); },
                               0, 1, opt);
        double rhs = integrate([&](double x) {
            double y = 2.0 * x;
            if (y >= 1.0) y -= 1.0;
            return f(x) * g(y);
        }, 0, 0.5, opt) + integrate([&](double x) {
            double y = 2.0 * x - 1.0;
            return f(x) * g(y);
        }, 0.5, 1, opt);
        CHECK(lhs == doctest::Approx(rhs).epsilon(1e-8));
    }
}

TEST_CASE("transfer iterates preserve mean zero") {
    QuadOptions opt;
    std::function<double(double)> f = [](double x) { return -std::log(x) - 1.0; };
    for (int n = 1; n <= 5; ++n) {
        double v = integrate_singular([&f, n](double x) { return apply_transfer(f, n, x); },
                                      0, 1, 0, opt);
        CHECK(std::fabs(v) < 1e-8);
    }
}

TEST_CASE("lp_decay_curve closed-form kernels match the literal node sums") {
    // the lgamma / Euler-Maclaurin fast paths are only trusted because they
    // reproduce the 2^n-node sum bit-for-bit-ish at small n
    auto lp = ObservableSpec::log_pow(1.0, 0.0);
    auto ip = ObservableSpec::inv_pow(0.5);
    std::function<double(double)> raw_l = [](double x) { return -std::log(x); };
    std::function<double(double)> raw_i = [](double x) { return 1.0 / std::sqrt(x); };
    auto curve_l = lp_decay_curve(lp, 2.0, 6);
    auto curve_i = lp_decay_curve(ip, 1.0, 6);
    QuadOptions opt;
    opt.rel_tol = 1e-8;
    for (int n = 1; n <= 6; ++n) {
        double nl = std::pow(integrate_singular([&raw_l, n](double x) {
            double v = apply_transfer(raw_l, n, x) - 1.0;
            return v * v;
        }, 0, 1, 0, opt), 0.5);
        CHECK(curve_l.points[static_cast<std::size_t>(n)].norm ==
              doctest::Approx(nl).epsilon(1e-6));
        double ni = integrate_singular([&raw_i, n](double x) {
            return std::fabs(apply_transfer(raw_i, n, x) - 2.0);
        }, 0, 1, 0, opt);
        CHECK(curve_i.points[static_cast<std::size_t>(n)].norm ==
              doctest::Approx(ni).epsilon(1e-6));
    }
}

TEST_CASE("autocorrelation at lag 1 matches a direct branch-wise integral") {
    auto obs = ObservableSpec::log_pow(1.0, 0.0);
    // Cov(phi, phi o T) = sum over branches of int phi(x) (phi(Tx) - 1) dx
    QuadOptions opt;
    double direct =
        integrate_singular([](double x) { return -std::log(x) * (-std::log(2 * x) - 1.0); },
                           0, 0.5, 0, opt) +
        integrate_singular([](double x) { return -std::log(x) * (-std::log(2 * x - 1.0) - 1.0); },
                           0.5, 1, 0.5, opt);
    CHECK(autocorrelation(obs, 1) == doctest::Approx(direct).epsilon(1e-6));
}

TEST_CASE("cylinder DP reproduces the binomial law exactly") {
    auto cyl = ObservableSpec::cylinder_coded(1, {0.0, 1.0});
    auto dist = cylinder_dp(cyl, 4, 1.0);
    REQUIRE(dist.offset == 0);
    for (int k = 0; k <= 4; ++k) {
        double binom = std::exp(std::lgamma(5.0) - std::lgamma(k + 1.0) -
                                std::lgamma(5.0 - k)) / 16.0;
        CHECK(dist.lower[static_cast<std::size_t>(k)] == doctest::Approx(binom).epsilon(1e-15));
        CHECK(dist.upper[static_cast<std::size_t>(k)] == doctest::Approx(binom).epsilon(1e-15));
    }
    CHECK(dist.tail_ge_lower(3.0) == doctest::Approx(5.0 / 16.0).epsilon(1e-15));
}

TEST_CASE("cylinder DP sandwich brackets and sums to one") {
    CounterRng rng(5150, 0);
    std::vector<double> vals(8);
    for (std::size_t i = 0; i < 8; ++i) vals[i] = 2.0 * rng.uniform(i) - 1.0;
    auto cyl = ObservableSpec::cylinder_coded(3, vals);
    auto dist = cylinder_dp(cyl, 12, 1e-3);
    CHECK(dist.total_lower() == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(dist.total_upper() == doctest::Approx(1.0).epsilon(1e-12));
    for (double s : {-2.0, -0.5, 0.0, 0.5, 2.0})
        CHECK(dist.tail_ge_lower(s) <= dist.tail_ge_upper(s) + 1e-15);
}

TEST_CASE("cylinder DP enforces its memory budget with a delta hint") {
    auto cyl = ObservableSpec::cylinder_coded(8, std::vector<double>(256, 0.123));
    CHECK_THROWS_AS(cylinder_dp(cyl, 32, 1e-9, std::size_t{1} << 20), std::length_error);
}

TEST_CASE("martingale decomposition telescopes and bounds its residual") {
    auto obs = ObservableSpec::log_pow(0.2, 0.0);
    auto parts = martingale_decompose(obs, 64, 0.2, std::log(2.0));
    CHECK(parts.C_n == static_cast<int>(std::ceil(parts.M_n / std::log(2.0))));
    for (int i = 0; i < 512; ++i) {
        double x = (i + 0.5) / 512.0;
        double tx = 2.0 * x;
        if (tx >= 1.0) tx -= 1.0;
        double lhs = parts.g(x) + parts.w(tx) - parts.w(x);
        double rhs = eval_raw(parts.h, x) - parts.mean_h;
        CHECK(std::fabs(lhs - rhs) <= 1e-10);
    }
    CHECK(parts.max_residual <= parts.tail_bound);
    CHECK(parts.w_sup <= parts.C_n * parts.M_n + parts.tail_bound);
    CHECK_THROWS_AS(martingale_decompose(obs, 64, 0.3, std::log(2.0)),
                    std::invalid_argument);
}
