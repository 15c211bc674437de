#include "ldlab/stats.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace ldlab {

Interval wilson_interval(std::uint64_t count, std::uint64_t n, double z) {
    if (n == 0) throw std::invalid_argument("wilson_interval: n must be positive");
    double p = static_cast<double>(count) / static_cast<double>(n);
    double nn = static_cast<double>(n);
    double z2 = z * z;
    double denom = 1.0 + z2 / nn;
    double center = (p + z2 / (2.0 * nn)) / denom;
    double half = z * std::sqrt(p * (1.0 - p) / nn + z2 / (4.0 * nn * nn)) / denom;
    return {std::fmax(0.0, center - half), std::fmin(1.0, center + half)};
}

LinearFit fit_line(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size() || x.size() < 2)
        throw std::invalid_argument("fit_line: need at least two points");
    auto n = static_cast<double>(x.size());
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < x.size(); ++i) { mx += x[i]; my += y[i]; }
    mx /= n; my /= n;
    double sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
    }
    if (sxx == 0) throw std::invalid_argument("fit_line: degenerate abscissae");
    LinearFit f;
    f.slope = sxy / sxx;
    f.intercept = my - f.slope * mx;
    f.points = static_cast<int>(x.size());
    double rss = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        double r = y[i] - (f.intercept + f.slope * x[i]);
        rss += r * r;
    }
    f.slope_stderr = (x.size() > 2) ? std::sqrt(rss / (n - 2.0) / sxx) : 0.0;
    return f;
}

double median(std::vector<double> v) {
    if (v.empty()) throw std::invalid_argument("median: empty");
    std::size_t m = v.size() / 2;
    std::nth_element(v.begin(), v.begin() + m, v.end());
    double hi = v[m];
    if (v.size() % 2 == 1) return hi;
    double lo = *std::max_element(v.begin(), v.begin() + m);
    return 0.5 * (lo + hi);
}

double ks_uniform(std::vector<double> sample) {
    std::sort(sample.begin(), sample.end());
    auto n = static_cast<double>(sample.size());
    double d = 0.0;
    for (std::size_t i = 0; i < sample.size(); ++i) {
        double cdf = sample[i];
        d = std::fmax(d, std::fmax(cdf - static_cast<double>(i) / n,
                                   static_cast<double>(i + 1) / n - cdf));
    }
    return d;
}

} // namespace ldlab
