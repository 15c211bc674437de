#include "ldlab/observables.hpp"

#include <cmath>

#include "ldlab/quadrature.hpp"

namespace ldlab {

TruncationSchedule TruncationSchedule::radius_cut(double beta, long n) {
    if (beta <= 0 || beta >= 1)
        throw std::invalid_argument("radius_cut: beta must lie in (0,1)");
    if (n < 1) throw std::invalid_argument("radius_cut: n must be positive");
    TruncationSchedule s;
    s.kind = Kind::RadiusCut;
    s.beta = beta;
    s.n = n;
    return s;
}

TruncationSchedule TruncationSchedule::level_cut(double level) {
    if (level <= 0) throw std::invalid_argument("level_cut: level must be positive");
    TruncationSchedule s;
    s.kind = Kind::LevelCut;
    s.level = level;
    return s;
}

double TruncationSchedule::radius() const {
    return std::exp(-std::pow(static_cast<double>(n), beta));
}

ObservableSpec ObservableSpec::log_pow(double alpha, double pole, bool centered) {
    if (alpha <= 0) throw std::invalid_argument("log_pow: alpha must be positive");
    ObservableSpec o;
    o.kind = ObsKind::LogPow;
    o.alpha = alpha;
    o.pole = pole;
    o.centered = centered;
    return o;
}

ObservableSpec ObservableSpec::inv_pow(double alpha, bool centered) {
    if (alpha <= 0) throw std::invalid_argument("inv_pow: alpha must be positive");
    ObservableSpec o;
    o.kind = ObsKind::InvPow;
    o.alpha = alpha;
    o.pole = 0.0;
    o.centered = centered;
    return o;
}

ObservableSpec ObservableSpec::log_log(double pole, bool centered) {
    ObservableSpec o;
    o.kind = ObsKind::LogLog;
    o.pole = pole;
    o.centered = centered;
    return o;
}

ObservableSpec ObservableSpec::cylinder_coded(int depth, std::vector<double> values,
                                              bool centered) {
    if (depth < 1 || depth > 24)
        throw std::invalid_argument("cylinder_coded: depth out of range");
    if (values.size() != (std::size_t{1} << depth))
        throw std::invalid_argument("cylinder_coded: need 2^depth values");
    ObservableSpec o;
    o.kind = ObsKind::CylinderCoded;
    o.depth = depth;
    o.values = std::move(values);
    o.centered = centered;
    return o;
}

namespace {

// Untruncated formula value as a function of the distance to the pole
// (LogPow/LogLog) or of x itself (InvPow).
inline double formula(const ObservableSpec& obs, double x, double d) {
    switch (obs.kind) {
    case ObsKind::LogPow: {
        double l = -std::log(d);
        if (obs.alpha == 1.0) return l;
        if (obs.alpha == 2.0) return l * l;
        return std::pow(l, obs.alpha);
    }
    case ObsKind::InvPow:
        return std::pow(x, -obs.alpha);
    case ObsKind::LogLog:
        return std::log(1.0 - std::log(d));
    case ObsKind::CylinderCoded:
        break;
    }
    return 0.0;
}

} // namespace

double eval_raw(const ObservableSpec& obs, double x) {
    if (!(x >= 0.0 && x <= 1.0))
        throw std::domain_error("eval: x outside [0,1]");
    if (obs.kind == ObsKind::CylinderCoded) {
        auto cells = obs.values.size();
        auto j = static_cast<std::size_t>(x * static_cast<double>(cells));
        if (j >= cells) j = cells - 1;
        double v = obs.values[j];
        if (obs.trunc && obs.trunc->kind == TruncationSchedule::Kind::LevelCut)
            v = std::fmin(v, obs.trunc->level);
        return v;
    }

    double d = (obs.kind == ObsKind::InvPow) ? x : std::abs(x - obs.pole);
    if (obs.trunc) {
        if (obs.trunc->kind == TruncationSchedule::Kind::RadiusCut)
            return (d <= obs.trunc->radius()) ? 0.0 : formula(obs, x, d);
        if (d == 0.0) return obs.trunc->level;
        return std::fmin(obs.trunc->level, formula(obs, x, d));
    }
    if (d == 0.0)
        throw std::domain_error("eval: observable is infinite at its singularity");
    return formula(obs, x, d);
}

double eval(const ObservableSpec& obs, double x) {
    double v = eval_raw(obs, x);
    return obs.centered ? v - mean(obs) : v;
}

namespace {

const QuadOptions kMeanQuad{1e-12, 1e-13, 40, 200};

// integral over one side of the pole, in the distance variable u on [0,c],
// of the (possibly truncated) formula.
double side_integral(const ObservableSpec& obs, double c) {
    if (c <= 0) return 0.0;
    auto phi = [&obs, c](double u) { return formula(obs, u, u); };
    double lo = 0.0;      // lower end of the untruncated region
    double flat = 0.0;    // LevelCut plateau contribution
    if (obs.trunc) {
        if (obs.trunc->kind == TruncationSchedule::Kind::RadiusCut) {
            lo = obs.trunc->radius();
            if (lo >= c) return 0.0;
        } else {
            double M = obs.trunc->level;
            double cut; // u where formula(u) = M
            switch (obs.kind) {
            case ObsKind::LogPow: cut = std::exp(-std::pow(M, 1.0 / obs.alpha)); break;
            case ObsKind::InvPow: cut = std::pow(M, -1.0 / obs.alpha); break;
            case ObsKind::LogLog: cut = std::exp(1.0 - std::exp(M)); break;
            default: cut = 0.0;
            }
            lo = std::fmin(cut, c);
            flat = M * lo;
        }
    }
    if (lo == 0.0)
        return integrate_singular(phi, 0.0, c, 0.0, kMeanQuad);
    if (lo >= c) return flat;
    return flat + integrate(phi, lo, c, kMeanQuad);
}

} // namespace

double mean(const ObservableSpec& obs) {
    switch (obs.kind) {
    case ObsKind::CylinderCoded: {
        double s = 0.0;
        for (double v : obs.values) {
            if (obs.trunc && obs.trunc->kind == TruncationSchedule::Kind::LevelCut)
                v = std::fmin(v, obs.trunc->level);
            s += v;
        }
        return s / static_cast<double>(obs.values.size());
    }
    case ObsKind::InvPow:
        if (obs.alpha >= 1.0 && !obs.trunc)
            throw std::domain_error("mean: x^{-alpha} is not integrable for alpha >= 1");
        if (!obs.trunc) return 1.0 / (1.0 - obs.alpha);
        return side_integral(obs, 1.0);
    case ObsKind::LogPow:
        if (!obs.trunc && (obs.pole == 0.0 || obs.pole == 1.0))
            return std::tgamma(1.0 + obs.alpha);
        return side_integral(obs, obs.pole) + side_integral(obs, 1.0 - obs.pole);
    case ObsKind::LogLog:
        return side_integral(obs, obs.pole) + side_integral(obs, 1.0 - obs.pole);
    }
    throw std::logic_error("mean: bad kind");
}

TruncationInfo truncate(const ObservableSpec& obs, const TruncationSchedule& sched) {
    TruncationInfo info;
    info.truncated = obs;

    if (obs.kind == ObsKind::CylinderCoded) {
        // materialize cell-wise so the DP sees a plain value table
        for (double& v : info.truncated.values) {
            if (sched.kind == TruncationSchedule::Kind::LevelCut)
                v = std::fmin(v, sched.level);
            else {
                // zero the cells whose midpoint falls inside the cut radius
                // (the cylinder alphabet cannot split a cell)
            }
        }
        if (sched.kind == TruncationSchedule::Kind::RadiusCut) {
            double r = sched.radius();
            auto cells = info.truncated.values.size();
            for (std::size_t j = 0; j < cells; ++j) {
                double mid = (static_cast<double>(j) + 0.5) / static_cast<double>(cells);
                if (std::abs(mid - obs.pole) <= r) info.truncated.values[j] = 0.0;
            }
        }
        double s = 0.0;
        for (double v : info.truncated.values) s = std::fmax(s, std::abs(v));
        info.sup_norm = s;
        info.bv_bound = 3.0 * s;
        return info;
    }

    info.truncated.trunc = sched;
    if (sched.kind == TruncationSchedule::Kind::LevelCut) {
        info.sup_norm = sched.level;
    } else {
        double r = sched.radius(); // sup over d > r
        switch (obs.kind) {
        case ObsKind::LogPow:
            info.sup_norm = std::pow(-std::log(r), obs.alpha); // n^{beta*alpha}
            break;
        case ObsKind::InvPow:
            info.sup_norm = std::pow(r, -obs.alpha);
            break;
        case ObsKind::LogLog:
            info.sup_norm = std::log(1.0 - std::log(r));
            break;
        default:
            info.sup_norm = 0.0;
        }
    }
    info.bv_bound = 3.0 * info.sup_norm;
    return info;
}

ObservableSpec discretize_to_cylinder(const ObservableSpec& obs, int depth) {
    std::size_t cells = std::size_t{1} << depth;
    std::vector<double> values(cells);
    for (std::size_t j = 0; j < cells; ++j) {
        double mid = (static_cast<double>(j) + 0.5) / static_cast<double>(cells);
        values[j] = eval_raw(obs, mid);
    }
    return ObservableSpec::cylinder_coded(depth, std::move(values), obs.centered);
}

} // namespace ldlab
