#include "doctest.h"

#include <cmath>
#include <vector>

#include "ldlab/dynamics.hpp"
#include "ldlab/stats.hpp"

using namespace ldlab;

namespace {
double frac_double(double x) {
    double y = 2.0 * x;
    return (y >= 1.0) ? y - 1.0 : y;
}
} // namespace

TEST_CASE("iterate implements the three map families") {
    CHECK(iterate(MapSpec::doubling(), 0.3) == doctest::Approx(0.6).epsilon(1e-15));
    CHECK(iterate(MapSpec::doubling(), 0.8) == doctest::Approx(0.6).epsilon(1e-15));
    CHECK(iterate(MapSpec::tent(), 0.3) == doctest::Approx(0.6).epsilon(1e-15));
    CHECK(iterate(MapSpec::tent(), 0.8) == doctest::Approx(0.4).epsilon(1e-15));
    auto pwl = MapSpec::piecewise_linear({1.0 / 3.0}, {3.0, 1.5}, 0.0, 1, 3.0);
    CHECK(iterate(pwl, 1.0 / 6.0) == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(iterate(pwl, 2.0 / 3.0) == doctest::Approx(0.5).epsilon(1e-12));
    CHECK_THROWS_AS(iterate(MapSpec::doubling(), 1.5), std::domain_error);
}

TEST_CASE("piecewise_linear validates full expanding branches") {
    CHECK_THROWS_AS(MapSpec::piecewise_linear({0.5}, {2.0}, 0, 1, 2.0),
                    std::invalid_argument); // one slope missing
    CHECK_THROWS_AS(MapSpec::piecewise_linear({0.5}, {2.0, 1.0}, 0, 1, 2.0),
                    std::invalid_argument); // not expanding
    CHECK_THROWS_AS(MapSpec::piecewise_linear({0.5}, {3.0, 2.0}, 0, 1, 3.0),
                    std::invalid_argument); // branch not onto [0,1]
}

TEST_CASE("the doubling orbit is the exact bit shift") {
    OrbitStream s(2024, 5);
    for (std::uint64_t n = 0; n < 1000; ++n) {
        double x = s.real_view(n);
        CHECK(x > 0.0);
        CHECK(x < 1.0);
        // both sides are independently rounded to double, so the recursion
        // holds only up to a few ulps
        CHECK(std::fabs(frac_double(x) - s.real_view(n + 1)) <= 0x1.0p-51);
    }
}

TEST_CASE("leading tape bits agree with the real view") {
    OrbitStream s(77, 1);
    for (std::uint64_t n = 0; n < 300; ++n) {
        bool b = s.bit(n + 1);
        CHECK(b == (s.real_view(n) >= 0.5));
    }
}

TEST_CASE("tent orbit satisfies the tent recursion via the factor map") {
    OrbitStream s(11, 9);
    for (std::uint64_t n = 0; n < 1000; ++n) {
        double y = s.tent_view(n);
        double y_next = s.tent_view(n + 1);
        // y and y_next are independently rounded to double, so the recursion
        // holds only up to a few ulps of 1.0
        CHECK(std::fabs((1.0 - std::fabs(2.0 * y - 1.0)) - y_next) <= 0x1.0p-51);
    }
}

TEST_CASE("cursor values equal stream random access exactly") {
    OrbitStream s(314159, 2);
    OrbitCursor cur(s.rng());
    for (std::uint64_t n = 0; n < 2000; ++n) {
        CHECK(cur.doubling_value() == s.real_view(n));
        CHECK(cur.tent_value() == s.tent_view(n));
        CHECK(cur.leading_bit() == s.bit(n + 1));
        cur.step();
    }
}

TEST_CASE("orbit values are uniform across sample indices") {
    std::vector<double> sample;
    for (std::uint64_t i = 0; i < 4000; ++i)
        sample.push_back(OrbitStream(555, i).real_view(37));
    CHECK(ks_uniform(sample) < 1.63 / std::sqrt(4000.0));
}

TEST_CASE("hit_times matches a brute-force scan") {
    OrbitStream s(99, 4);
    MapSpec map = MapSpec::doubling();
    double gamma = 0.5;
    auto hits = hit_times(s, map, gamma, 2000);
    std::vector<std::uint64_t> brute;
    for (std::uint64_t n = 1; n <= 2000; ++n)
        if (s.real_view(n) <= std::pow(static_cast<double>(n), -gamma))
            brute.push_back(n);
    CHECK(hits == brute);
}

TEST_CASE("hit_times for the tent map matches a brute-force scan") {
    OrbitStream s(7, 21);
    auto hits = hit_times(s, MapSpec::tent(), 1.0, 50000);
    std::vector<std::uint64_t> brute;
    for (std::uint64_t n = 1; n <= 50000; ++n)
        if (s.tent_view(n) <= 1.0 / static_cast<double>(n)) brute.push_back(n);
    CHECK(hits == brute);
}

TEST_CASE("hit_times refuses resolutions beyond the window precision") {
    OrbitStream s(1, 1);
    CHECK_THROWS_AS(hit_times(s, MapSpec::doubling(), 8.0, 1u << 25), precision_error);
}

TEST_CASE("hit frequency matches the measure of the shrinking balls") {
    // E[#hits up to N at gamma=1] = sum 1/n = H_N
    const std::uint64_t N = 100000;
    double hn = 0;
    for (std::uint64_t n = 1; n <= N; ++n) hn += 1.0 / static_cast<double>(n);
    double total = 0;
    const int seeds = 200;
    for (int i = 0; i < seeds; ++i) {
        OrbitStream s(4242, static_cast<std::uint64_t>(i));
        total += static_cast<double>(hit_times(s, MapSpec::doubling(), 1.0, N).size());
    }
    double mean_hits = total / seeds;
    // sd of the count is ~sqrt(H_N) ~ 3.5, so the ensemble mean has sd ~ 0.25
    CHECK(std::fabs(mean_hits - hn) < 1.0);
}
