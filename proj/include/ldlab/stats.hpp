#ifndef LDLAB_STATS_HPP
#define LDLAB_STATS_HPP

#include <cstdint>
#include <vector>

namespace ldlab {

struct Interval {
    double lo;
    double hi;
};

// Wilson score interval (not Wald: the counts of interest are small).
Interval wilson_interval(std::uint64_t count, std::uint64_t n, double z = 1.959963984540054);

struct LinearFit {
    double slope;
    double intercept;
    double slope_stderr;
    int points;
};

LinearFit fit_line(const std::vector<double>& x, const std::vector<double>& y);

double median(std::vector<double> v);

// Kolmogorov-Smirnov statistic of a sample against the uniform law on [0,1].
double ks_uniform(std::vector<double> sample);

} // namespace ldlab

#endif
