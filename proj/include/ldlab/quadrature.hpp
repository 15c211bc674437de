#ifndef LDLAB_QUADRATURE_HPP
#define LDLAB_QUADRATURE_HPP

#include <functional>

namespace ldlab {

struct QuadOptions {
    double rel_tol = 1e-10;
    double abs_tol = 1e-14;
    int max_depth = 40;
    // dyadic ladder panels toward a singular endpoint stop at
    // scale 2^{-ladder_depth} of the interval length
    int ladder_depth = 200;
};

// Adaptive Gauss-Kronrod 15(7) on [a,b]; integrand must be finite on (a,b].
double integrate(const std::function<double(double)>& f, double a, double b,
                 const QuadOptions& opt = {});

// Integrate over [a,b] with an integrable singularity at `sing` (an endpoint
// or interior point): the interval is split at the singularity and approached
// through dyadic panels, each integrated adaptively.
double integrate_singular(const std::function<double(double)>& f, double a,
                          double b, double sing, const QuadOptions& opt = {});

} // namespace ldlab

#endif
