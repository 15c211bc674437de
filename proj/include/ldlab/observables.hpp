#ifndef LDLAB_OBSERVABLES_HPP
#define LDLAB_OBSERVABLES_HPP

#include <optional>
#include <stdexcept>
#include <vector>

namespace ldlab {

enum class ObsKind { LogPow, InvPow, LogLog, CylinderCoded };

struct TruncationSchedule {
    enum class Kind { RadiusCut, LevelCut };
    Kind kind = Kind::LevelCut;
    double beta = 0.5;  // RadiusCut: g_n = 0 on d(x,p) <= e^{-n^beta}
    double level = 1.0; // LevelCut: h = min{level, phi}
    long n = 1;         // RadiusCut schedule index

    static TruncationSchedule radius_cut(double beta, long n);
    static TruncationSchedule level_cut(double level);

    double radius() const; // e^{-n^beta} (RadiusCut only)
};

// A member of the paper-style observable families:
//   LogPow(alpha, p):   (-log d(x,p))^alpha
//   InvPow(alpha):      x^{-alpha}, 0 < alpha < 1
//   LogLog(p):          log(1 - log d(x,p))
//   CylinderCoded(d):   constant on dyadic cells [j 2^{-d}, (j+1) 2^{-d})
// Distances are plain absolute values on [0,1].  An optional truncation is
// applied before centering; `centered` subtracts the (truncated) mean.
struct ObservableSpec {
    ObsKind kind = ObsKind::LogPow;
    double alpha = 1.0;
    double pole = 0.0; // singularity location p
    int depth = 0;     // CylinderCoded
    std::vector<double> values;
    bool centered = false;
    std::optional<TruncationSchedule> trunc;

    static ObservableSpec log_pow(double alpha, double pole, bool centered = false);
    static ObservableSpec inv_pow(double alpha, bool centered = false);
    static ObservableSpec log_log(double pole, bool centered = false);
    static ObservableSpec cylinder_coded(int depth, std::vector<double> values,
                                         bool centered = false);

    bool is_singular() const { return kind != ObsKind::CylinderCoded; }
};

// Formula value (truncation applied, centered if requested).
// Throws std::domain_error at the singularity of an untruncated observable.
double eval(const ObservableSpec& obs, double x);

// Raw (uncentered) value with truncation applied; used internally and by the
// Monte Carlo loops, which center by an explicit mean shift.
double eval_raw(const ObservableSpec& obs, double x);

// Lebesgue mean of the (truncated, uncentered) observable: closed forms where
// they exist, otherwise singularity-aware adaptive quadrature (x = e^{-u}
// substitution near the pole), absolute tolerance 1e-10.
double mean(const ObservableSpec& obs);

struct TruncationInfo {
    ObservableSpec truncated;
    double sup_norm; // n^{beta*alpha} for RadiusCut on LogPow; M for LevelCut
    double bv_bound; // 3 * sup_norm
};

TruncationInfo truncate(const ObservableSpec& obs, const TruncationSchedule& sched);

// Midpoint discretization onto depth-d dyadic cells (feeds the exact DP
// oracle; a controlled approximation of obs, exact for the DP itself).
ObservableSpec discretize_to_cylinder(const ObservableSpec& obs, int depth);

} // namespace ldlab

#endif
