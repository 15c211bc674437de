// ldlab: experiment presets for tail laws of Birkhoff sums on expanding
// interval maps, exact transfer-operator and tower diagnostics, and the
// supporting Monte Carlo machinery.  Every run writes a manifest with the
// fully resolved parameters; identical manifests byte-reproduce the
// csv/json payload values.

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"

#include "ldlab/dynamics.hpp"
#include "ldlab/estimators.hpp"
#include "ldlab/exact_kernels.hpp"
#include "ldlab/observables.hpp"
#include "ldlab/tower.hpp"
#include "output.hpp"

namespace fs = std::filesystem;
using ldlab::tools::json;
using ldlab::tools::fmt_num;
using ldlab::tools::put_num;

namespace {

constexpr const char* kVersion = "ldlab 1.0.0";

struct Common {
    std::string out_dir = "out";
    std::uint64_t seed = 0;
    int workers = 0; // 0 = available parallelism
    std::string formats = "csv,json";
    bool check = false;
};

void add_common(CLI::App* cmd, Common& c) {
    cmd->add_option("--out", c.out_dir, "output directory");
    cmd->add_option("--seed", c.seed, "rng seed")->envname("LDLAB_SEED");
    cmd->add_option("--workers", c.workers, "worker threads (0 = all cores)");
    cmd->add_option("--formats", c.formats, "subset of csv,json,svg");
    cmd->add_flag("--check", c.check, "run self-checks; exit 3 on failure");
}

bool wants(const Common& c, const std::string& fmt) {
    std::stringstream ss(c.formats);
    std::string tok;
    while (std::getline(ss, tok, ','))
        if (tok == fmt) return true;
    return false;
}

int resolved_workers(const Common& c) {
    if (c.workers > 0) return c.workers;
    unsigned hw = std::thread::hardware_concurrency();
    return hw ? static_cast<int>(hw) : 1;
}

ldlab::MapSpec parse_map(const std::string& s) {
    if (s == "doubling") return ldlab::MapSpec::doubling();
    if (s == "tent") return ldlab::MapSpec::tent();
    throw CLI::ValidationError("--map", "unknown map '" + s + "' (doubling|tent)");
}

// logpow:alpha:pole | invpow:alpha | loglog:pole
ldlab::ObservableSpec parse_obs(const std::string& s) {
    std::vector<std::string> parts;
    std::stringstream ss(s);
    std::string tok;
    while (std::getline(ss, tok, ':')) parts.push_back(tok);
    try {
        if (!parts.empty() && parts[0] == "logpow" && parts.size() <= 3) {
            double a = parts.size() > 1 ? std::stod(parts[1]) : 1.0;
            double p = parts.size() > 2 ? std::stod(parts[2]) : 0.0;
            return ldlab::ObservableSpec::log_pow(a, p);
        }
        if (!parts.empty() && parts[0] == "invpow" && parts.size() <= 2) {
            double a = parts.size() > 1 ? std::stod(parts[1]) : 0.5;
            return ldlab::ObservableSpec::inv_pow(a);
        }
        if (!parts.empty() && parts[0] == "loglog" && parts.size() <= 2) {
            double p = parts.size() > 1 ? std::stod(parts[1]) : 0.0;
            return ldlab::ObservableSpec::log_log(p);
        }
    } catch (const std::exception&) {
        // falls through to the ValidationError below
    }
    throw CLI::ValidationError(
        "--obs", "cannot parse '" + s + "' (logpow:a:p | invpow:a | loglog:p)");
}

std::vector<int> parse_int_list(const std::string& s) {
    std::vector<int> out;
    std::stringstream ss(s);
    std::string tok;
    while (std::getline(ss, tok, ','))
        out.push_back(static_cast<int>(std::llround(std::stod(tok))));
    if (out.empty()) throw CLI::ValidationError("--n", "empty list");
    return out;
}

std::vector<double> parse_double_list(const std::string& s) {
    std::vector<double> out;
    std::stringstream ss(s);
    std::string tok;
    while (std::getline(ss, tok, ',')) out.push_back(std::stod(tok));
    return out;
}

std::uint64_t as_count(double v, const char* flag) {
    if (!(v >= 1) || v > 9e15)
        throw CLI::ValidationError(flag, "sample budget out of range");
    return static_cast<std::uint64_t>(std::llround(v));
}

fs::path prepare_out(const Common& c, json manifest) {
    fs::path dir(c.out_dir);
    fs::create_directories(dir);
    manifest["artifact"] = kVersion;
    manifest["seed"] = c.seed;
    manifest["workers"] = resolved_workers(c);
    manifest["formats"] = c.formats;
    ldlab::tools::write_json(dir / "manifest.json", manifest);
    return dir;
}

int finish_check(const Common& c, bool ok, const std::string& what) {
    if (!c.check) return 0;
    if (ok) {
        std::cout << "check passed: " << what << "\n";
        return 0;
    }
    std::cerr << "check FAILED: " << what << "\n";
    return 3;
}

// ---------------------------------------------------------------- tail

struct TailArgs {
    Common common;
    std::string map = "doubling";
    std::string obs = "logpow:1:0";
    std::string source = "orbit";
    std::string n_list = "100";
    std::string side = "upper";
    double eps = 0.3;
    double N = 1e6;
};

int run_tail(const TailArgs& a) {
    ldlab::TailQuery q;
    q.map = parse_map(a.map);
    q.obs = parse_obs(a.obs);
    q.source = a.source == "iid" ? ldlab::SampleSource::IidExponential
                                 : ldlab::SampleSource::Orbit;
    q.eps = a.eps;
    q.samples = as_count(a.N, "--N");
    q.seed = a.common.seed;
    q.workers = resolved_workers(a.common);
    if (a.side == "upper") q.side = ldlab::TailSide::Upper;
    else if (a.side == "lower") q.side = ldlab::TailSide::Lower;
    else if (a.side == "two") q.side = ldlab::TailSide::TwoSided;
    else throw CLI::ValidationError("--side", "upper|lower|two");

    json manifest{{"subcommand", "tail"},
                  {"claim", "upper-tail probability of centered Birkhoff sums"},
                  {"map", a.map}, {"obs", a.obs}, {"source", a.source},
                  {"n", a.n_list}, {"eps", a.eps}, {"side", a.side},
                  {"N", fmt_num(a.N)}};
    fs::path dir = prepare_out(a.common, manifest);

    std::vector<ldlab::TailEstimate> results;
    for (int n : parse_int_list(a.n_list)) {
        q.n = n;
        results.push_back(ldlab::tail_mc(q));
    }

    if (wants(a.common, "csv")) {
        ldlab::tools::CsvWriter csv(dir / "results.csv",
                                    {"n", "eps", "count", "phat", "ci_lo", "ci_hi"});
        for (const auto& e : results)
            csv.row({std::to_string(e.n), fmt_num(e.eps), std::to_string(e.count),
                     fmt_num(e.phat), fmt_num(e.ci.lo), fmt_num(e.ci.hi)});
    }
    if (wants(a.common, "json")) {
        json records = json::array();
        for (const auto& e : results) {
            json r{{"n", e.n}, {"eps", e.eps}, {"samples", e.samples},
                   {"count", e.count}};
            put_num(r, "phat", e.phat);
            put_num(r, "ci_lo", e.ci.lo);
            put_num(r, "ci_hi", e.ci.hi);
            put_num(r, "obs_mean", e.obs_mean);
            if (e.unreliable) r["unreliable"] = true;
            records.push_back(std::move(r));
        }
        ldlab::tools::write_json(dir / "results.json", json{{"records", records}});
    }
    if (wants(a.common, "svg")) {
        std::vector<double> xs, ys;
        for (const auto& e : results) { xs.push_back(e.n); ys.push_back(e.phat); }
        ldlab::tools::svg_plot(dir / "plot.svg", "tail probability", "n", "phat",
                               xs, ys, true, true);
    }
    bool ok = true;
    for (const auto& e : results) ok = ok && !e.unreliable;
    return finish_check(a.common, ok, "all tail estimates reliable (count >= 10)");
}

// ------------------------------------------------------------- exponent

struct ExponentArgs {
    Common common;
    std::string preset = "stretched-tail";
    std::string n_list = "25,50,100,200,400";
    double alpha = 1.0;
    double eps = 0.3;
    double N = 1e6;
};

int run_exponent(const ExponentArgs& a) {
    if (a.preset != "stretched-tail" && a.preset != "thm32")
        throw CLI::ValidationError("--preset", "unknown preset '" + a.preset + "'");
    json manifest{{"subcommand", "exponent"},
                  {"claim", "stretched-exponential tail exponent ~ 1/(1+alpha)"},
                  {"preset", a.preset}, {"alpha", a.alpha}, {"eps", a.eps},
                  {"n", a.n_list}, {"N", fmt_num(a.N)}};
    fs::path dir = prepare_out(a.common, manifest);

    ldlab::TailQuery q;
    q.map = ldlab::MapSpec::doubling();
    q.obs = ldlab::ObservableSpec::log_pow(a.alpha, 0.0);
    q.eps = a.eps;
    q.samples = as_count(a.N, "--N");
    q.seed = a.common.seed;
    q.workers = resolved_workers(a.common);

    std::vector<ldlab::TailEstimate> results;
    for (int n : parse_int_list(a.n_list)) {
        q.n = n;
        results.push_back(ldlab::tail_mc(q));
    }
    const double target = 1.0 / (1.0 + a.alpha);
    json out{{"alpha", a.alpha}, {"target", target}};
    bool fit_ok = false;
    double gamma_hat = 0;
    try {
        ldlab::ExponentFit fit = ldlab::fit_exponent(results);
        gamma_hat = fit.gamma_hat;
        put_num(out, "gamma_hat", fit.gamma_hat);
        put_num(out, "stderr", fit.stderr_);
        out["points_used"] = fit.points_used;
        fit_ok = true;
    } catch (const std::invalid_argument& e) {
        out["unreliable"] = true;
        out["reason"] = e.what();
    }
    json records = json::array();
    for (const auto& e : results) {
        json r{{"n", e.n}, {"count", e.count}};
        put_num(r, "phat", e.phat);
        if (e.unreliable) r["unreliable"] = true;
        records.push_back(std::move(r));
    }
    out["records"] = records;
    if (wants(a.common, "json")) ldlab::tools::write_json(dir / "results.json", out);
    if (wants(a.common, "csv")) {
        ldlab::tools::CsvWriter csv(dir / "results.csv", {"n", "count", "phat"});
        for (const auto& e : results)
            csv.row({std::to_string(e.n), std::to_string(e.count), fmt_num(e.phat)});
    }
    if (wants(a.common, "svg")) {
        std::vector<double> xs, ys;
        for (const auto& e : results)
            if (e.phat > 0) { xs.push_back(std::log(e.n)); ys.push_back(std::log(-std::log(e.phat))); }
        ldlab::tools::svg_plot(dir / "plot.svg", "stretched exponent fit",
                               "log n", "log(-log phat)", xs, ys, false, false);
    }
    bool band = fit_ok && std::fabs(gamma_hat - target) <= 0.15 + 0.05 * a.alpha;
    return finish_check(a.common, band, "fitted exponent near 1/(1+alpha)");
}

// ------------------------------------------------------------ lowerbound

struct LowerBoundArgs {
    Common common;
    std::string map = "doubling";
    double alpha = 1.0;
    double eps = 0.1;
    int n = 400;
};

int run_lowerbound(const LowerBoundArgs& a) {
    json manifest{{"subcommand", "lowerbound"},
                  {"claim", "interval certificate for the stretched-exponential lower bound"},
                  {"map", a.map}, {"alpha", a.alpha}, {"eps", a.eps}, {"n", a.n}};
    fs::path dir = prepare_out(a.common, manifest);
    auto obs = ldlab::ObservableSpec::log_pow(a.alpha, 0.0);
    ldlab::LowerBoundCertificate cert =
        ldlab::lower_bound_construction(parse_map(a.map), obs, a.n, a.eps, false);
    json out{{"n", a.n}, {"alpha", a.alpha}, {"eps", a.eps},
             {"omega", cert.omega}, {"r", cert.r},
             {"points", cert.points}, {"failures", cert.failures},
             {"ok", cert.ok}};
    put_num(out, "interval_length", cert.interval_length);
    put_num(out, "prob_lower_bound", cert.prob_lower_bound);
    put_num(out, "min_margin", cert.min_margin);
    if (wants(a.common, "json")) ldlab::tools::write_json(dir / "results.json", out);
    if (wants(a.common, "csv")) {
        ldlab::tools::CsvWriter csv(dir / "results.csv",
                                    {"n", "omega", "r", "failures", "min_margin"});
        csv.row({std::to_string(a.n), fmt_num(cert.omega), fmt_num(cert.r),
                 std::to_string(cert.failures), fmt_num(cert.min_margin)});
    }
    return finish_check(a.common, cert.ok, "certificate holds at all sampled points");
}

// -------------------------------------------------------------- autocorr

struct AutocorrArgs {
    Common common;
    std::string obs = "logpow:1:0";
    int nmax = 18;
};

int run_autocorr(const AutocorrArgs& a) {
    json manifest{{"subcommand", "autocorr"},
                  {"claim", "exponential decay of autocorrelations"},
                  {"obs", a.obs}, {"nmax", a.nmax}};
    fs::path dir = prepare_out(a.common, manifest);
    auto obs = parse_obs(a.obs);
    std::vector<double> ns, vals;
    for (int n = 1; n <= a.nmax; ++n) {
        ns.push_back(n);
        vals.push_back(ldlab::autocorrelation(obs, n));
    }
    std::vector<double> lx, ly;
    for (std::size_t i = 0; i < ns.size(); ++i)
        if (std::fabs(vals[i]) > 1e-300) {
            lx.push_back(ns[i]);
            ly.push_back(std::log(std::fabs(vals[i])));
        }
    double slope = std::numeric_limits<double>::quiet_NaN();
    if (lx.size() >= 3) slope = ldlab::fit_line(lx, ly).slope;

    if (wants(a.common, "csv")) {
        ldlab::tools::CsvWriter csv(dir / "results.csv", {"n", "autocorr"});
        for (std::size_t i = 0; i < ns.size(); ++i)
            csv.row({fmt_num(ns[i]), fmt_num(vals[i])});
    }
    if (wants(a.common, "json")) {
        json out;
        put_num(out, "log_slope", slope);
        json records = json::array();
        for (std::size_t i = 0; i < ns.size(); ++i) {
            json r{{"n", static_cast<int>(ns[i])}};
            put_num(r, "autocorr", vals[i]);
            records.push_back(std::move(r));
        }
        out["records"] = records;
        ldlab::tools::write_json(dir / "results.json", out);
    }
    if (wants(a.common, "svg"))
        ldlab::tools::svg_plot(dir / "plot.svg", "autocorrelation decay", "n",
                               "|autocorr|", ns, vals, false, true);
    return finish_check(a.common, std::isfinite(slope) && slope <= -0.3,
                        "autocorrelation log-slope <= -0.3");
}

// --------------------------------------------------------------- lpdecay

struct LpDecayArgs {
    Common common;
    std::string obs = "invpow:0.5";
    double p = 1.0;
    int nmax = 20;
};

int run_lpdecay(const LpDecayArgs& a) {
    json manifest{{"subcommand", "lpdecay"},
                  {"claim", "exponential L^p decay under the transfer operator"},
                  {"obs", a.obs}, {"p", a.p}, {"nmax", a.nmax}};
    fs::path dir = prepare_out(a.common, manifest);
    ldlab::DecayCurve curve = ldlab::lp_decay_curve(parse_obs(a.obs), a.p, a.nmax);
    if (wants(a.common, "csv")) {
        ldlab::tools::CsvWriter csv(dir / "results.csv", {"n", "norm"});
        for (const auto& pt : curve.points)
            csv.row({std::to_string(pt.n), fmt_num(pt.norm)});
    }
    if (wants(a.common, "json")) {
        json out;
        put_num(out, "log_slope", curve.log_slope);
        json records = json::array();
        for (const auto& pt : curve.points) {
            json r{{"n", pt.n}};
            put_num(r, "norm", pt.norm);
            records.push_back(std::move(r));
        }
        out["records"] = records;
        ldlab::tools::write_json(dir / "results.json", out);
    }
    if (wants(a.common, "svg")) {
        std::vector<double> xs, ys;
        for (const auto& pt : curve.points) { xs.push_back(pt.n); ys.push_back(pt.norm); }
        ldlab::tools::svg_plot(dir / "plot.svg", "L^p transfer decay", "n", "norm",
                               xs, ys, false, true);
    }
    return finish_check(a.common, curve.log_slope < 0, "L^p norms decay");
}

// ------------------------------------------------------------ martingale

struct MartingaleArgs {
    Common common;
    int n = 256;
    double alpha = 0.2;
    double theta = std::log(2.0);
};

int run_martingale(const MartingaleArgs& a) {
    json manifest{{"subcommand", "martingale"},
                  {"claim", "martingale-coboundary decomposition of the truncated observable"},
                  {"n", a.n}, {"alpha", a.alpha}, {"theta", a.theta}};
    fs::path dir = prepare_out(a.common, manifest);
    auto obs = ldlab::ObservableSpec::log_pow(a.alpha, 0.0);
    ldlab::MartingaleParts parts =
        ldlab::martingale_decompose(obs, a.n, a.alpha, a.theta);
    json out{{"n", parts.n}, {"C_n", parts.C_n}};
    put_num(out, "M_n", parts.M_n);
    put_num(out, "mean_h", parts.mean_h);
    put_num(out, "w_sup", parts.w_sup);
    put_num(out, "max_residual", parts.max_residual);
    put_num(out, "tail_bound", parts.tail_bound);
    if (wants(a.common, "json")) ldlab::tools::write_json(dir / "results.json", out);
    if (wants(a.common, "csv")) {
        ldlab::tools::CsvWriter csv(
            dir / "results.csv",
            {"n", "M_n", "C_n", "w_sup", "max_residual", "tail_bound"});
        csv.row({std::to_string(parts.n), fmt_num(parts.M_n),
                 std::to_string(parts.C_n), fmt_num(parts.w_sup),
                 fmt_num(parts.max_residual), fmt_num(parts.tail_bound)});
    }
    bool ok = parts.max_residual <= parts.tail_bound &&
              parts.w_sup <= parts.C_n * parts.M_n + parts.tail_bound;
    return finish_check(a.common, ok, "residual and w within the reported bounds");
}

// ------------------------------------------------------------------ erdos

struct ErdosArgs {
    Common common;
    std::string source = "iid";
    std::string map = "doubling";
    std::string obs = "logpow:1:0";
    double n = 1e6;
    double I = 0.0945;
    int seeds = 50;
};

int run_erdos(const ErdosArgs& a) {
    json manifest{{"subcommand", "erdos"},
                  {"claim", "maximal window averages at length log n / I"},
                  {"source", a.source}, {"map", a.map}, {"obs", a.obs},
                  {"n", fmt_num(a.n)}, {"I", a.I}, {"seeds", a.seeds}};
    fs::path dir = prepare_out(a.common, manifest);
    auto source = a.source == "iid" ? ldlab::SampleSource::IidExponential
                                    : ldlab::SampleSource::Orbit;
    auto map = parse_map(a.map);
    auto obs = parse_obs(a.obs);
    obs.centered = (source == ldlab::SampleSource::Orbit);
    long n = static_cast<long>(as_count(a.n, "--n"));

    std::vector<ldlab::WindowStat> stats;
    std::vector<double> ws;
    for (int k = 0; k < a.seeds; ++k) {
        stats.push_back(ldlab::erdos_renyi_windows(source, map, obs, n, a.I,
                                                   a.common.seed,
                                                   static_cast<std::uint64_t>(k)));
        ws.push_back(stats.back().W);
    }
    double med = ldlab::median(ws);
    if (wants(a.common, "csv")) {
        ldlab::tools::CsvWriter csv(dir / "results.csv",
                                    {"sample_index", "ell", "W", "argmax"});
        for (int k = 0; k < a.seeds; ++k)
            csv.row({std::to_string(k), std::to_string(stats[static_cast<std::size_t>(k)].ell),
                     fmt_num(stats[static_cast<std::size_t>(k)].W),
                     std::to_string(stats[static_cast<std::size_t>(k)].argmax)});
    }
    if (wants(a.common, "json")) {
        json out{{"n", n}, {"ell", stats.empty() ? 0 : stats[0].ell},
                 {"seeds", a.seeds}};
        put_num(out, "median_W", med);
        ldlab::tools::write_json(dir / "results.json", out);
    }
    if (wants(a.common, "svg")) {
        std::vector<double> xs, ys;
        for (int k = 0; k < a.seeds; ++k) {
            xs.push_back(k);
            ys.push_back(ws[static_cast<std::size_t>(k)]);
        }
        ldlab::tools::svg_plot(dir / "plot.svg", "window maxima by seed",
                               "sample index", "W", xs, ys, false, false);
    }
    return finish_check(a.common, std::isfinite(med), "median window maximum computed");
}

// --------------------------------------------------------------- obstruct

struct ObstructArgs {
    Common common;
    std::string map = "tent";
    std::string obs = "loglog:0";
    double gamma = 1.0;
    double alpha = 1.0;
    double I = 2.0;
    double nmax = 1e7;
};

int run_obstruct(const ObstructArgs& a) {
    json manifest{{"subcommand", "obstruct"},
                  {"claim", "neighborhood hits force window exceedances (no exponential rate)"},
                  {"map", a.map}, {"obs", a.obs}, {"gamma", a.gamma},
                  {"alpha", a.alpha}, {"I", a.I}, {"nmax", fmt_num(a.nmax)}};
    fs::path dir = prepare_out(a.common, manifest);
    auto obs = parse_obs(a.obs);
    obs.centered = true;
    ldlab::ObstructionReport rep = ldlab::obstruction_check(
        parse_map(a.map), obs, a.gamma, a.alpha, a.I,
        as_count(a.nmax, "--nmax"), a.common.seed);
    json out{{"hits", rep.hits.size()}, {"exceedances", rep.exceedances.size()},
             {"conclusive", rep.conclusive}};
    put_num(out, "M", rep.M);
    put_num(out, "N0", rep.N0);
    put_num(out, "rho", rep.rho);
    json exs = json::array();
    for (const auto& e : rep.exceedances) {
        json r{{"hit_n", e.hit_n}, {"window_len", e.window_len}};
        put_num(r, "window_avg", e.window_avg);
        exs.push_back(std::move(r));
    }
    out["records"] = exs;
    if (wants(a.common, "json")) ldlab::tools::write_json(dir / "results.json", out);
    if (wants(a.common, "csv")) {
        ldlab::tools::CsvWriter csv(dir / "results.csv",
                                    {"hit_n", "window_len", "window_avg"});
        for (const auto& e : rep.exceedances)
            csv.row({std::to_string(e.hit_n), std::to_string(e.window_len),
                     fmt_num(e.window_avg)});
    }
    return finish_check(a.common, rep.conclusive,
                        "at least one verified window exceedance");
}

// --------------------------------------------------------------- pressure

struct PressureArgs {
    Common common;
    double t = 0.5;
    int n = 2;
    std::string M_list = "5,10,20,40";
};

int run_pressure(const PressureArgs& a) {
    json manifest{{"subcommand", "pressure"},
                  {"claim", "log-MGF divergence at observables unbounded at a fixed point"},
                  {"t", a.t}, {"n", a.n}, {"M", a.M_list}};
    fs::path dir = prepare_out(a.common, manifest);
    auto obs = ldlab::ObservableSpec::log_pow(1.0, 0.0);
    std::vector<double> Ms = parse_double_list(a.M_list);
    ldlab::PressureReport rep = ldlab::pressure_diagnostics(
        ldlab::MapSpec::doubling(), obs, a.t, Ms, a.n);
    json out{{"t", rep.t}, {"n", rep.n},
             {"integral_infinite", rep.integral_infinite}};
    put_num(out, "exponent_nt", rep.exponent_nt);
    json records = json::array();
    for (const auto& b : rep.bounds) {
        json r;
        put_num(r, "M", b.M);
        put_num(r, "slope", b.slope);
        put_num(r, "bound_at_n", b.bound_at_n);
        records.push_back(std::move(r));
    }
    out["records"] = records;
    if (wants(a.common, "json")) ldlab::tools::write_json(dir / "results.json", out);
    if (wants(a.common, "csv")) {
        ldlab::tools::CsvWriter csv(dir / "results.csv", {"M", "slope", "bound_at_n"});
        for (const auto& b : rep.bounds)
            csv.row({fmt_num(b.M), fmt_num(b.slope), fmt_num(b.bound_at_n)});
    }
    bool increasing = true;
    for (std::size_t i = 1; i < rep.bounds.size(); ++i)
        increasing = increasing && rep.bounds[i].slope > rep.bounds[i - 1].slope;
    bool ok = increasing && (rep.exponent_nt < 1.0 || rep.integral_infinite);
    return finish_check(a.common, ok, "slopes increase and divergence is flagged");
}

// ------------------------------------------------------------------ tower

struct TowerArgs {
    Common common;
    int K = 3;
    double t = 1.0;
    int nmax = 2000;
};

int run_tower(const TowerArgs& a) {
    json manifest{{"subcommand", "tower"},
                  {"claim", "log-MGF of the coboundary tower has no limit"},
                  {"K", a.K}, {"t", a.t}, {"nmax", a.nmax}};
    fs::path dir = prepare_out(a.common, manifest);
    ldlab::TowerModel model = ldlab::build_tower(a.K);
    ldlab::CoboundaryReport cob = ldlab::verify_coboundary(model, a.common.seed);
    double defect = ldlab::stationarity_defect(model);
    ldlab::MgfCurve curve = ldlab::log_mgf_curve(model, a.t, a.nmax);

    double early_max = std::numeric_limits<double>::quiet_NaN();
    double late_min = std::numeric_limits<double>::quiet_NaN();
    for (const auto& pt : curve.points) {
        if (pt.n <= 200) early_max = std::isnan(early_max) ? pt.value : std::max(early_max, pt.value);
        if (pt.n > 200) late_min = std::isnan(late_min) ? pt.value : std::min(late_min, pt.value);
    }

    json out{{"K", a.K}, {"t", a.t},
             {"states", model.total_states},
             {"coboundary_violations", cob.state_violations + cob.trajectory_violations},
             {"argmax_n", curve.argmax_n}, {"argmin_n", curve.argmin_n}};
    put_num(out, "log10_tail_mass", model.log10_tail_mass);
    put_num(out, "stationarity_defect", defect);
    put_num(out, "mgf_max", curve.max_value);
    put_num(out, "mgf_min", curve.min_value);
    put_num(out, "limsup_proxy", early_max);
    put_num(out, "liminf_proxy", late_min);
    json mgf = json::array();
    for (const auto& pt : curve.points) mgf.push_back(json::array({pt.n, pt.value}));
    out["mgf"] = mgf;
    if (wants(a.common, "json")) ldlab::tools::write_json(dir / "results.json", out);
    if (wants(a.common, "csv")) {
        ldlab::tools::CsvWriter csv(dir / "results.csv", {"n", "mgf_value"});
        for (const auto& pt : curve.points)
            csv.row({std::to_string(pt.n), fmt_num(pt.value)});
    }
    if (wants(a.common, "svg")) {
        std::vector<double> xs, ys;
        for (const auto& pt : curve.points) { xs.push_back(pt.n); ys.push_back(pt.value); }
        ldlab::tools::svg_plot(dir / "plot.svg", "(1/n) log E exp(t S_n)", "n",
                               "value", xs, ys, false, false);
    }
    bool ok = cob.state_violations == 0 && cob.trajectory_violations == 0 &&
              defect <= 1e-12;
    if (a.nmax >= 200) ok = ok && early_max >= 0.2;
    if (a.nmax >= 2000) ok = ok && late_min <= 0.05;
    return finish_check(a.common, ok, "coboundary, stationarity, and non-convergence witness");
}

// ----------------------------------------------------------------- oracle

struct OracleArgs {
    Common common;
    int depth = 4;
    int n = 16;
    double delta = 1e-3;
    double eps = 0.2;
    double N = 1e6;
};

int run_oracle(const OracleArgs& a) {
    json manifest{{"subcommand", "oracle"},
                  {"claim", "Monte Carlo tail inside the exact DP sandwich"},
                  {"depth", a.depth}, {"n", a.n}, {"delta", a.delta},
                  {"eps", a.eps}, {"N", fmt_num(a.N)}};
    fs::path dir = prepare_out(a.common, manifest);
    if (a.depth < 1 || a.depth > 20)
        throw CLI::ValidationError("--depth", "depth must be in [1, 20]");

    // random cell values in [-1, 1], reproducible from the run seed
    ldlab::CounterRng vals_rng(a.common.seed, 0xC11);
    std::vector<double> values(std::size_t{1} << a.depth);
    for (std::size_t i = 0; i < values.size(); ++i)
        values[i] = 2.0 * vals_rng.uniform(i) - 1.0;
    auto cyl = ldlab::ObservableSpec::cylinder_coded(a.depth, values);
    double mu = ldlab::mean(cyl);

    ldlab::SumDistribution dp = ldlab::cylinder_dp(cyl, a.n, a.delta);
    ldlab::TailQuery q;
    q.obs = cyl;
    q.n = a.n;
    q.eps = a.eps;
    q.samples = as_count(a.N, "--N");
    q.seed = a.common.seed;
    q.workers = resolved_workers(a.common);
    ldlab::TailEstimate mc = ldlab::tail_mc(q);

    double threshold = a.n * (mu + a.eps);
    double lo = dp.tail_ge_lower(threshold);
    double hi = dp.tail_ge_upper(threshold);
    double mid = 0.5 * (lo + hi);
    double se = std::sqrt(std::max(mid * (1 - mid), 1e-12) / static_cast<double>(q.samples));
    bool within = mc.phat >= lo - 4 * se && mc.phat <= hi + 4 * se;

    json out{{"depth", a.depth}, {"n", a.n}, {"count", mc.count},
             {"within_sandwich", within}};
    put_num(out, "dp_lower", lo);
    put_num(out, "dp_upper", hi);
    put_num(out, "phat", mc.phat);
    put_num(out, "binomial_se", se);
    put_num(out, "obs_mean", mu);
    if (wants(a.common, "json")) ldlab::tools::write_json(dir / "results.json", out);
    if (wants(a.common, "csv")) {
        ldlab::tools::CsvWriter csv(dir / "results.csv",
                                    {"depth", "n", "dp_lower", "dp_upper", "phat"});
        csv.row({std::to_string(a.depth), std::to_string(a.n), fmt_num(lo),
                 fmt_num(hi), fmt_num(mc.phat)});
    }
    return finish_check(a.common, within, "Monte Carlo inside the DP sandwich");
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"numerical lab for tail laws of Birkhoff sums on expanding interval maps"};
    app.set_version_flag("--version", kVersion);
    app.set_config("--config", "", "key = value file; '#' comments; flags override")
        ->transform(CLI::FileOnDefaultPath("."));
    app.allow_config_extras(CLI::config_extras_mode::error);
    app.require_subcommand(1);

    TailArgs tail;
    auto* c_tail = app.add_subcommand("tail", "Monte Carlo tail probability of S_n");
    c_tail->add_option("--map", tail.map, "doubling|tent");
    c_tail->add_option("--obs", tail.obs, "logpow:a:p | invpow:a | loglog:p");
    c_tail->add_option("--source", tail.source, "orbit|iid");
    c_tail->add_option("--n", tail.n_list, "comma list of n");
    c_tail->add_option("--eps", tail.eps, "deviation level");
    c_tail->add_option("--N", tail.N, "sample budget (1e8 accepted)");
    c_tail->add_option("--side", tail.side, "upper|lower|two");
    add_common(c_tail, tail.common);

    ExponentArgs expo;
    auto* c_expo = app.add_subcommand("exponent", "fit the stretched tail exponent");
    c_expo->add_option("--preset", expo.preset, "experiment preset");
    c_expo->add_option("--alpha", expo.alpha, "observable exponent");
    c_expo->add_option("--eps", expo.eps, "deviation level");
    c_expo->add_option("--n", expo.n_list, "comma list of n");
    c_expo->add_option("--N", expo.N, "sample budget per n");
    add_common(c_expo, expo.common);

    LowerBoundArgs lb;
    auto* c_lb = app.add_subcommand("lowerbound", "exact interval certificate");
    c_lb->add_option("--map", lb.map, "doubling|tent");
    c_lb->add_option("--alpha", lb.alpha, "observable exponent");
    c_lb->add_option("--eps", lb.eps, "deviation level");
    c_lb->add_option("--n", lb.n, "time horizon");
    add_common(c_lb, lb.common);

    AutocorrArgs ac;
    auto* c_ac = app.add_subcommand("autocorr", "exact autocorrelation decay");
    c_ac->add_option("--obs", ac.obs, "observable");
    c_ac->add_option("--nmax", ac.nmax, "max lag");
    add_common(c_ac, ac.common);

    LpDecayArgs lp;
    auto* c_lp = app.add_subcommand("lpdecay", "L^p transfer-operator decay");
    c_lp->add_option("--obs", lp.obs, "observable");
    c_lp->add_option("--p", lp.p, "L^p index");
    c_lp->add_option("--nmax", lp.nmax, "max iterate");
    add_common(c_lp, lp.common);

    MartingaleArgs mg;
    auto* c_mg = app.add_subcommand("martingale", "martingale-coboundary decomposition");
    c_mg->add_option("--n", mg.n, "schedule index");
    c_mg->add_option("--alpha", mg.alpha, "observable exponent (<= 1/5)");
    c_mg->add_option("--theta", mg.theta, "spectral decay rate");
    add_common(c_mg, mg.common);

    ErdosArgs er;
    auto* c_er = app.add_subcommand("erdos", "maximal window averages");
    c_er->add_option("--source", er.source, "iid|orbit");
    c_er->add_option("--map", er.map, "doubling|tent");
    c_er->add_option("--obs", er.obs, "observable (orbit source)");
    c_er->add_option("--n", er.n, "trajectory length");
    c_er->add_option("--I", er.I, "rate value fixing the window length");
    c_er->add_option("--seeds", er.seeds, "independent trajectories");
    add_common(c_er, er.common);

    ObstructArgs ob;
    auto* c_ob = app.add_subcommand("obstruct", "hit-forced window exceedances");
    c_ob->add_option("--map", ob.map, "doubling|tent");
    c_ob->add_option("--obs", ob.obs, "observable");
    c_ob->add_option("--gamma", ob.gamma, "hit radius exponent");
    c_ob->add_option("--alpha", ob.alpha, "window level");
    c_ob->add_option("--I", ob.I, "rate value at the window level");
    c_ob->add_option("--nmax", ob.nmax, "orbit length");
    add_common(c_ob, ob.common);

    PressureArgs pr;
    auto* c_pr = app.add_subcommand("pressure", "log-MGF divergence diagnostics");
    c_pr->add_option("--t", pr.t, "tilt");
    c_pr->add_option("--n", pr.n, "time horizon");
    c_pr->add_option("--M", pr.M_list, "comma list of truncation levels");
    add_common(c_pr, pr.common);

    TowerArgs tw;
    auto* c_tw = app.add_subcommand("tower", "coboundary tower diagnostics");
    c_tw->add_option("--K", tw.K, "column truncation (<= 4)");
    c_tw->add_option("--t", tw.t, "tilt");
    c_tw->add_option("--nmax", tw.nmax, "curve length");
    add_common(c_tw, tw.common);

    OracleArgs orc;
    auto* c_orc = app.add_subcommand("oracle", "Monte Carlo vs exact DP cross-check");
    c_orc->add_option("--depth", orc.depth, "cylinder depth");
    c_orc->add_option("--n", orc.n, "time horizon");
    c_orc->add_option("--delta", orc.delta, "DP bucket width");
    c_orc->add_option("--eps", orc.eps, "deviation level");
    c_orc->add_option("--N", orc.N, "sample budget");
    add_common(c_orc, orc.common);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        if (c_tail->parsed()) return run_tail(tail);
        if (c_expo->parsed()) return run_exponent(expo);
        if (c_lb->parsed()) return run_lowerbound(lb);
        if (c_ac->parsed()) return run_autocorr(ac);
        if (c_lp->parsed()) return run_lpdecay(lp);
        if (c_mg->parsed()) return run_martingale(mg);
        if (c_er->parsed()) return run_erdos(er);
        if (c_ob->parsed()) return run_obstruct(ob);
        if (c_pr->parsed()) return run_pressure(pr);
        if (c_tw->parsed()) return run_tower(tw);
        if (c_orc->parsed()) return run_oracle(orc);
    } catch (const CLI::ValidationError& e) {
        std::cerr << e.what() << "\n";
        return 2;
    } catch (const std::invalid_argument& e) {
        std::cerr << "parameter error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 2;
}
