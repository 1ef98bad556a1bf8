#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <boost/version.hpp>
#include <fftw3.h>
#include <nlohmann/json.hpp>

#include "constructions.hpp"
#include "coulomb.hpp"
#include "energy.hpp"
#include "error.hpp"
#include "grid.hpp"
#include "inequalities.hpp"
#include "minimize.hpp"
#include "parallel.hpp"

namespace spslab {

using Json = nlohmann::ordered_json;

inline std::vector<std::string> const& scenario_names()
{
    static std::vector<std::string> const names{
        "energy",           "minimize-radial",   "minimize-3d",   "tent-sweep",    "bump-sweep",
        "dilated-bump-sweep", "lower-bound-sweep", "dyadic-lemma",  "hls-check",     "sweep-lambda",
        "threshold-lambda0", "ball-symmetry",     "lambda-positivity"};
    return names;
}

struct ScenarioConfig {
    std::string scenario;
    Json params = Json::object();
    std::string out_dir; ///< empty: keep everything in memory
    std::uint64_t seed = 0;
    std::size_t workers = 1;

    /// Reads "seed", "workers" and "out" from the document when present; the
    /// rest of the document is passed to the scenario as parameters.
    static ScenarioConfig from_json(std::string scenario, Json const& doc)
    {
        require(doc.is_object(), "config must be a JSON object");
        ScenarioConfig c;
        c.scenario = std::move(scenario);
        c.params = doc;
        if (doc.contains("seed")) c.seed = doc.at("seed").get<std::uint64_t>();
        if (doc.contains("workers")) c.workers = doc.at("workers").get<std::size_t>();
        if (doc.contains("out")) c.out_dir = doc.at("out").get<std::string>();
        require(c.workers >= 1, "workers must be at least 1");
        return c;
    }
};

struct Verdict {
    std::string name;
    std::string status; ///< "pass", "fail" or "inconclusive"
    std::string detail;
};

struct ScenarioReport {
    std::string scenario;
    std::vector<Json> rows;       ///< written to rows.csv
    std::vector<Json> run_info;   ///< per-row runtimes and solver status, report.json only
    std::vector<Verdict> verdicts;
    std::vector<std::string> field_files;
    Json summary = Json::object();
    Json environment = Json::object();

    void add(std::string name, bool ok, std::string detail)
    {
        verdicts.push_back({std::move(name), ok ? "pass" : "fail", std::move(detail)});
    }

    bool any(std::string const& status) const
    {
        return std::any_of(verdicts.begin(), verdicts.end(), [&](Verdict const& v) { return v.status == status; });
    }

    int exit_code() const
    {
        if (any("fail")) return 2;
        if (any("inconclusive")) return 3;
        return 0;
    }

    Json to_json() const
    {
        Json j;
        j["scenario"] = scenario;
        j["exit_code"] = exit_code();
        Json vs = Json::array();
        for (auto const& v : verdicts) vs.push_back({{"name", v.name}, {"status", v.status}, {"detail", v.detail}});
        j["verdicts"] = vs;
        j["summary"] = summary;
        j["rows"] = rows;
        j["runs"] = run_info;
        j["field_files"] = field_files;
        j["environment"] = environment;
        return j;
    }
};

// ---------------------------------------------------------------------------
// Output helpers
// ---------------------------------------------------------------------------

inline std::string csv_cell(Json const& v)
{
    if (v.is_null()) return "";
    if (v.is_string()) {
        auto s = v.get<std::string>();
        if (s.find_first_of(",\"\n") == std::string::npos) return s;
        std::string q = "\"";
        for (char c : s) q += c == '"' ? std::string("\"\"") : std::string(1, c);
        return q + "\"";
    }
    if (v.is_number_float()) {
        std::ostringstream os;
        os.precision(17);
        os << v.get<double>();
        return os.str();
    }
    return v.dump();
}

/// Columns are the union of row keys in order of first appearance.
inline void write_rows_csv(std::vector<Json> const& rows, std::ostream& os)
{
    std::vector<std::string> cols;
    for (auto const& r : rows)
        for (auto it = r.begin(); it != r.end(); ++it)
            if (std::find(cols.begin(), cols.end(), it.key()) == cols.end()) cols.push_back(it.key());
    for (std::size_t c = 0; c < cols.size(); ++c) os << (c ? "," : "") << cols[c];
    os << '\n';
    for (auto const& r : rows) {
        for (std::size_t c = 0; c < cols.size(); ++c) {
            if (c) os << ',';
            if (r.contains(cols[c])) os << csv_cell(r.at(cols[c]));
        }
        os << '\n';
    }
}

inline Json environment_fingerprint(ScenarioConfig const& cfg)
{
    Json e;
#if defined(__clang__)
    e["compiler"] = std::string("clang ") + __clang_version__;
#elif defined(__GNUC__)
    e["compiler"] = std::string("gcc ") + __VERSION__;
#else
    e["compiler"] = "unknown";
#endif
    e["cxx_standard"] = static_cast<long>(__cplusplus);
    e["fftw"] = std::string(fftw_version);
    e["boost"] = BOOST_LIB_VERSION;
    e["nlohmann_json"] = std::to_string(NLOHMANN_JSON_VERSION_MAJOR) + "." +
                         std::to_string(NLOHMANN_JSON_VERSION_MINOR) + "." +
                         std::to_string(NLOHMANN_JSON_VERSION_PATCH);
    e["hardware_threads"] = std::thread::hardware_concurrency();
    e["workers"] = cfg.workers;
    e["seed"] = cfg.seed;
    e["config"] = cfg.params;
    auto const now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
    e["timestamp_utc"] = buf;
    return e;
}

// ---------------------------------------------------------------------------
// Config access
// ---------------------------------------------------------------------------

namespace detail {

inline std::vector<double> get_list(Json const& j, std::string const& key, std::vector<double> def)
{
    if (!j.contains(key)) return def;
    auto const& v = j.at(key);
    std::vector<double> out;
    if (v.is_array()) {
        for (auto const& x : v) out.push_back(x.get<double>());
    } else {
        out.push_back(v.get<double>());
    }
    require(!out.empty(), "empty parameter grid: '" + key + "'");
    return out;
}

inline std::vector<std::size_t> get_counts(Json const& j, std::string const& key, std::vector<std::size_t> def)
{
    std::vector<double> d(def.begin(), def.end());
    std::vector<std::size_t> out;
    for (double x : get_list(j, key, d)) {
        require(x >= 0.0 && x == std::floor(x), "'" + key + "' must hold nonnegative integers");
        out.push_back(static_cast<std::size_t>(x));
    }
    return out;
}

template <class T>
T get(Json const& j, std::string const& key, T def)
{
    return j.contains(key) ? j.at(key).get<T>() : def;
}

inline Json section(Json const& j, std::string const& key)
{
    if (!j.contains(key)) return Json::object();
    require(j.at(key).is_object(), "'" + key + "' must be an object");
    return j.at(key);
}

inline SolverConfig solver_config(Json const& j, SolverConfig c)
{
    auto const s = section(j, "solver");
    c.max_iters = get<std::size_t>(s, "max_iters", c.max_iters);
    c.grad_tol = get<double>(s, "grad_tol", c.grad_tol);
    c.armijo_c = get<double>(s, "armijo_c", c.armijo_c);
    c.backtrack = get<double>(s, "backtrack", c.backtrack);
    c.init_step = get<double>(s, "init_step", c.init_step);
    c.validate();
    return c;
}

inline RadialGrid radial_grid(Json const& j, std::size_t n, double r_max)
{
    auto const s = section(j, "radial");
    return RadialGrid(get<std::size_t>(s, "n", n), get<double>(s, "r_max", r_max));
}

inline double infinity_or(Json const& j, std::string const& key)
{
    if (!j.contains(key) || j.at(key).is_null()) return std::numeric_limits<double>::infinity();
    if (j.at(key).is_string()) {
        require(j.at(key).get<std::string>() == "inf", "'" + key + "' must be a number or \"inf\"");
        return std::numeric_limits<double>::infinity();
    }
    return j.at(key).get<double>();
}

inline Json breakdown_json(EnergyBreakdown const& e)
{
    return {{"kinetic", e.kinetic}, {"mass", e.mass}, {"coulomb", e.coulomb}, {"power", e.power}, {"total", e.total}};
}

inline void merge(Json& row, Json const& extra)
{
    for (auto it = extra.begin(); it != extra.end(); ++it) row[it.key()] = it.value();
}

inline double seconds_since(std::chrono::steady_clock::time_point t0)
{
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

inline std::string fmt(double x)
{
    std::ostringstream os;
    os.precision(6);
    os << x;
    return os.str();
}

/// A radial profile described in the config.
inline std::function<double(double)> profile_from(Json const& desc)
{
    auto const type = get<std::string>(desc, "type", "gaussian");
    if (type == "gaussian") {
        double const a = get<double>(desc, "amplitude", 1.0), w = get<double>(desc, "width", 1.0);
        return [a, w](double r) { return a * std::exp(-0.5 * r * r / (w * w)); };
    }
    if (type == "ball") {
        double const R = get<double>(desc, "radius", 1.0), a = get<double>(desc, "amplitude", 1.0);
        return [a, R](double r) { return r < R ? a : (r == R ? a * std::sqrt(0.5) : 0.0); };
    }
    if (type == "bump") {
        double const a = get<double>(desc, "amplitude", 1.0), R = get<double>(desc, "radius", 1.0);
        return [a, R](double r) { return cos2_bump(a, R, r); };
    }
    if (type == "tent") {
        double const eps = get<double>(desc, "eps", 0.1);
        return [eps](double r) { return tent_value(eps, r); };
    }
    throw Error("unknown profile type '" + type + "' (gaussian, ball, bump, tent, csv)");
}

inline RadialField radial_input(Json const& j, RadialGrid const& g)
{
    auto const desc = section(j, "profile");
    if (get<std::string>(desc, "type", "gaussian") == "csv") {
        std::ifstream is(get<std::string>(desc, "path", ""));
        require(bool(is), "cannot open profile csv '" + get<std::string>(desc, "path", "") + "'");
        return read_radial_csv(is);
    }
    return sample_radial(profile_from(desc), g);
}

inline RadialField with_zero_end(RadialField const& f)
{
    auto v = f.values();
    v.back() = 0.0;
    return RadialField(f.grid(), std::move(v), true);
}

/// Linear interpolation of a radial field, zero beyond r_max.
inline double interpolate(RadialField const& f, double r)
{
    double const x = r / f.grid().spacing();
    if (x >= static_cast<double>(f.size() - 1)) return 0.0;
    auto const i = static_cast<std::size_t>(x);
    double const t = x - static_cast<double>(i);
    return (1.0 - t) * f[i] + t * f[i + 1];
}

inline double l2_distance(RadialModel const& m, RadialField const& a, RadialField const& b)
{
    std::vector<double> d(a.size());
    for (std::size_t i = 0; i < d.size(); ++i) d[i] = a[i] - b[i];
    return std::sqrt(m.inner(d, d));
}

struct Output {
    std::string dir;
    ScenarioReport* report;

    std::string fields_dir() const
    {
        auto p = std::filesystem::path(dir) / "fields";
        std::filesystem::create_directories(p);
        return p.string();
    }

    void radial(std::string const& name, RadialField const& f) const
    {
        if (dir.empty()) return;
        auto const path = (std::filesystem::path(fields_dir()) / (name + ".csv")).string();
        write_csv(f, path);
        report->field_files.push_back(std::filesystem::relative(path, dir).string());
    }

    void box(std::string const& name, Field3D const& f) const
    {
        if (dir.empty()) return;
        auto const stem = (std::filesystem::path(fields_dir()) / name).string();
        write_field(f, stem);
        report->field_files.push_back(std::filesystem::relative(stem + ".bin", dir).string());
    }
};

inline void require_p_window(double p, double lo, double hi, std::string const& what)
{
    require(p > lo && p < hi, what + ": p = " + fmt(p) + " outside the valid range (" + fmt(lo) + ", " + fmt(hi) + ")");
}

} // namespace detail

// ---------------------------------------------------------------------------
// Scenarios
// ---------------------------------------------------------------------------

inline void scenario_energy(ScenarioConfig const& cfg, ScenarioReport& rep, detail::Output const& out)
{
    using namespace detail;
    auto const& j = cfg.params;
    auto const g = radial_grid(j, 2049, 16.0);
    auto const u = radial_input(j, g);
    bool const lift = j.contains("box");
    std::optional<Field3D> u3;
    if (lift) {
        auto const b = section(j, "box");
        BoxGrid const bg(get<std::size_t>(b, "n", 64), get<double>(b, "L", 8.0));
        u3 = sample_box_radial([&](double r) { return interpolate(u, r); }, bg);
    }
    out.radial("input", u);
    for (double p : get_list(j, "p", {2.8}))
        for (double lam : get_list(j, "lambda", {1.0}))
            for (double om : get_list(j, "omega", {1.0})) {
                Params const prm{p, lam, om, infinity_or(j, "R")};
                prm.validate();
                auto const e = eval_I(u, prm);
                Json row = {{"p", p}, {"lambda", lam}, {"omega", om}, {"grid", "radial"}};
                merge(row, breakdown_json(e));
                row["residual_l2"] = std::sqrt(RadialModel(g, prm).inner(residual(u, prm).values(), residual(u, prm).values()));
                rep.rows.push_back(row);
                double const sum = e.kinetic + e.mass + e.coulomb + e.power;
                rep.add("breakdown consistent (p=" + fmt(p) + ", lambda=" + fmt(lam) + ", omega=" + fmt(om) + ")",
                        e.kinetic >= 0 && e.mass >= 0 && e.coulomb >= 0 && e.power <= 0 &&
                            std::abs(e.total - sum) <= 1e-14 * std::max(1.0, std::abs(sum)) * 4,
                        "signs of the four terms and total = sum");
                if (lift) {
                    auto const e3 = eval_I(*u3, prm);
                    Json r3 = {{"p", p}, {"lambda", lam}, {"omega", om}, {"grid", "box"}};
                    merge(r3, breakdown_json(e3));
                    rep.rows.push_back(r3);
                }
            }
}

inline void scenario_minimize_radial(ScenarioConfig const& cfg, ScenarioReport& rep, detail::Output const& out)
{
    using namespace detail;
    auto const& j = cfg.params;
    auto const g = radial_grid(j, 2049, 40.0);
    auto const solver = solver_config(j, SolverConfig::radial_defaults());
    auto const init = with_zero_end(radial_input(j, g));
    struct Job {
        Params prm;
    };
    std::vector<Job> jobs;
    for (double p : get_list(j, "p", {2.8}))
        for (double lam : get_list(j, "lambda", {1e-3}))
            for (double om : get_list(j, "omega", {1.0})) {
                Params prm{p, lam, om, infinity_or(j, "R")};
                prm.validate();
                jobs.push_back({prm});
            }
    auto results = parallel_map(jobs.size(), cfg.workers, [&](std::size_t k) {
        auto const t0 = std::chrono::steady_clock::now();
        auto r = minimize_radial(jobs[k].prm, init, solver);
        return std::make_pair(std::move(r), seconds_since(t0));
    });
    for (std::size_t k = 0; k < jobs.size(); ++k) {
        auto const& [r, secs] = results[k];
        auto const& prm = jobs[k].prm;
        Json row = {{"run", k}, {"p", prm.p}, {"lambda", prm.lambda}, {"omega", prm.omega}, {"R", prm.R},
                    {"n", g.size()}, {"r_max", g.r_max()}};
        merge(row, breakdown_json(r.breakdown));
        row["residual_norm"] = r.residual_norm;
        row["relative_residual"] = r.relative_residual;
        row["iters"] = r.iters;
        row["converged"] = r.converged;
        rep.rows.push_back(row);
        rep.run_info.push_back({{"run", k}, {"seconds", secs}, {"status", r.status}});
        out.radial("minimizer-" + std::to_string(k), r.field);
        rep.add("run " + std::to_string(k) + " converged", r.converged, r.status);
    }
}

inline void scenario_minimize_3d(ScenarioConfig const& cfg, ScenarioReport& rep, detail::Output const& out)
{
    using namespace detail;
    auto const& j = cfg.params;
    auto const b = section(j, "box");
    BoxGrid const bg(get<std::size_t>(b, "n", 32), get<double>(b, "L", 8.0));
    auto const solver = solver_config(j, SolverConfig::box_defaults());
    double const R = infinity_or(j, "R");
    std::optional<double> mask;
    if (std::isfinite(R)) mask = R;
    std::vector<Bump3D> bumps;
    if (j.contains("bumps")) {
        for (auto const& x : j.at("bumps")) {
            Bump3D bb;
            if (x.contains("centre")) bb.centre = x.at("centre").get<std::array<double, 3>>();
            bb.amplitude = get<double>(x, "amplitude", 1.0);
            bb.width = get<double>(x, "width", 1.0);
            bumps.push_back(bb);
        }
    } else {
        bumps.push_back(Bump3D{});
    }
    auto const init = gaussian_bumps(bg, bumps, mask);
    std::vector<Params> jobs;
    for (double p : get_list(j, "p", {2.8}))
        for (double lam : get_list(j, "lambda", {1e-3}))
            for (double om : get_list(j, "omega", {1.0})) {
                Params prm{p, lam, om, R};
                prm.validate();
                jobs.push_back(prm);
            }
    auto results = parallel_map(jobs.size(), cfg.workers, [&](std::size_t k) {
        auto const t0 = std::chrono::steady_clock::now();
        auto r = minimize_3d(jobs[k], init, solver);
        return std::make_pair(std::move(r), seconds_since(t0));
    });
    for (std::size_t k = 0; k < jobs.size(); ++k) {
        auto const& [r, secs] = results[k];
        Json row = {{"run", k}, {"p", jobs[k].p}, {"lambda", jobs[k].lambda}, {"omega", jobs[k].omega},
                    {"R", jobs[k].R}, {"n", bg.n()}, {"L", bg.half_width()}};
        merge(row, breakdown_json(r.breakdown));
        row["residual_norm"] = r.residual_norm;
        row["relative_residual"] = r.relative_residual;
        row["iters"] = r.iters;
        row["asymmetry"] = r.asymmetry;
        row["converged"] = r.converged;
        rep.rows.push_back(row);
        rep.run_info.push_back({{"run", k}, {"seconds", secs}, {"status", r.status}});
        out.box("minimizer-" + std::to_string(k), r.field);
        rep.add("run " + std::to_string(k) + " converged", r.converged, r.status);
    }
}

inline void scenario_tent_sweep(ScenarioConfig const& cfg, ScenarioReport& rep, detail::Output const&)
{
    using namespace detail;
    auto const& j = cfg.params;
    auto const eps = get_list(j, "eps", {0.2, 0.1, 0.05, 0.01});
    auto const ps = get_list(j, "p", {2.5});
    double const slope_tol = get<double>(j, "slope_tol", 0.03);
    double const quad_tol = get<double>(j, "quadrature_tol", 0.005);
    double const p_crit = 18.0 / 7.0;
    for (double p : ps) {
        std::vector<double> lp;
        for (double e : eps) {
            auto const t = tent_profile(e, p);
            auto const& r = t.report;
            rep.rows.push_back({{"eps", e},           {"p", p},
                                {"R", r.R},           {"S", r.S},
                                {"kin_raw", r.kin_raw}, {"coul_raw", r.coul_raw},
                                {"lp_raw", r.lp_raw}, {"lp_floor", r.lp_floor()},
                                {"kin_quad", r.kin_quad}, {"coul_quad", r.coul_quad},
                                {"lp_quad", r.lp_quad}, {"nodes", t.field.size()}});
            std::string const tag = " (eps=" + fmt(e) + ", p=" + fmt(p) + ")";
            rep.add("kin_raw <= 8" + tag, r.kin_ok(), fmt(r.kin_raw));
            rep.add("coul_raw <= 32" + tag, r.coul_ok(), fmt(r.coul_raw));
            rep.add("lp_raw >= eps^(p-18/7)/2^(p+2)" + tag, r.lp_ok(), fmt(r.lp_raw) + " vs " + fmt(r.lp_floor()));
            double const dev = std::max({std::abs(r.kin_quad / r.kin_raw - 1.0), std::abs(r.coul_quad / r.coul_raw - 1.0),
                                         std::abs(r.lp_quad / r.lp_raw - 1.0)});
            rep.add("closed form vs quadrature within " + fmt(quad_tol) + tag, dev <= quad_tol, "max rel dev " + fmt(dev));
            lp.push_back(r.lp_raw);
        }
        if (eps.size() >= 2 && std::abs(p - p_crit) > 1e-12) {
            double const s = loglog_slope(eps, lp);
            double const rel = std::abs(s / (p - p_crit) - 1.0);
            rep.summary["slope_p" + fmt(p)] = s;
            rep.add("log-log slope of lp_raw = p - 18/7 within " + fmt(slope_tol) + " (p=" + fmt(p) + ")", rel <= slope_tol,
                    "slope " + fmt(s) + " target " + fmt(p - p_crit) + " rel dev " + fmt(rel));
        }
    }
}

inline BumpStats seed_bump(Json const& j, Params const& prm)
{
    using namespace detail;
    auto const b = section(j, "bump");
    double const radius = get<double>(b, "radius", 0.0);
    if (b.contains("amplitude") && radius > 0.0) return cos2_bump_stats(b.at("amplitude").get<double>(), radius, prm.p);
    // tune: the most negative bracket-optimal bump over log-spaced radii
    auto const w = bump_witness(prm, radius > 0.0 ? std::vector<double>{radius} : log_radii(-2.0, 3.0, 101));
    return cos2_bump_stats(w.amplitude, w.radius, prm.p);
}

inline void scenario_bump_sweep(ScenarioConfig const& cfg, ScenarioReport& rep, detail::Output const&)
{
    using namespace detail;
    auto const& j = cfg.params;
    auto const Ns = get_counts(j, "N", {1, 2, 4, 8, 16});
    for (double p : get_list(j, "p", {2.8}))
        for (double lam : get_list(j, "lambda", {1e-4})) {
            Params const prm{p, lam, get<double>(j, "omega", 1.0)};
            prm.validate();
            auto const b = seed_bump(j, prm);
            auto const e1 = bump_energy(b, prm);
            std::string const tag = " (p=" + fmt(p) + ", lambda=" + fmt(lam) + ")";
            // C = lambda/4 * Q^2 * max_N (N^2 - N)/(N^2 - 2M), independent of N
            double cmax = 0.0;
            for (std::size_t N : Ns) cmax = std::max(cmax, bump_sum_cross_bound(b, N));
            double const C = 0.25 * prm.lambda * cmax;
            bool linear = true, cross_ok = true, bound_ok = true;
            std::vector<double> xs, ys;
            for (std::size_t N : Ns) {
                auto const e = bump_sum_energy(b, N, prm);
                double const n = static_cast<double>(N);
                double const cross = bump_sum_cross_term(b, N), bound = bump_sum_cross_bound(b, N);
                Json row = {{"p", p}, {"lambda", lam}, {"omega", prm.omega}, {"N", N}, {"bump_radius", b.support_radius},
                            {"bump_charge", b.charge}};
                merge(row, breakdown_json(e));
                row["cross_term"] = cross;
                row["cross_bound"] = bound;
                row["N_times_I1_plus_C"] = n * e1.total + C;
                rep.rows.push_back(row);
                auto close = [](double a, double b2) { return std::abs(a - b2) <= 1e-12 * std::max(std::abs(a), std::abs(b2)); };
                linear = linear && close(e.kinetic, n * e1.kinetic) && close(e.mass, n * e1.mass) && close(e.power, n * e1.power);
                if (N >= 2) cross_ok = cross_ok && cross <= bound;
                bound_ok = bound_ok && e.total <= n * e1.total + C;
                xs.push_back(n);
                ys.push_back(e.total);
            }
            rep.summary["seed_energy" + tag] = e1.total;
            rep.summary["C" + tag] = C;
            rep.add("kinetic, mass, power exactly linear in N" + tag, linear, "relative tolerance 1e-12");
            rep.add("cross term <= (N^2-N)/(N^2-2M) Q^2" + tag, cross_ok, "N >= 2");
            if (e1.total < 0.0) {
                rep.add("I(u_N) <= N I(u) + C with one C" + tag, bound_ok, "C = " + fmt(C));
                rep.add("I(u_N) decreases in N" + tag, std::is_sorted(ys.rbegin(), ys.rend()),
                        "seed energy " + fmt(e1.total));
            } else {
                rep.verdicts.push_back({"negative-energy seed found" + tag, "inconclusive",
                                        "best seed energy " + fmt(e1.total) + " is not negative"});
            }
        }
}

inline void scenario_dilated_bump_sweep(ScenarioConfig const& cfg, ScenarioReport& rep, detail::Output const&)
{
    using namespace detail;
    auto const& j = cfg.params;
    auto const Ns = get_counts(j, "N", {1, 8, 64});
    auto const bj = section(j, "bump");
    for (double p : get_list(j, "p", {2.5, 2.9})) {
        auto const b = cos2_bump_stats(get<double>(bj, "amplitude", 1.0), get<double>(bj, "radius", 1.0), p);
        std::vector<double> xs, lp, kin;
        bool coul_ok = true;
        for (std::size_t N : Ns) {
            auto const d = dilated_bump_sum_stats(b, N, p);
            double const n = static_cast<double>(N);
            double const l3 = d.scale * d.scale * d.scale;
            double const crude = l3 * (n * b.coulomb + bump_sum_cross_bound(b, N));
            coul_ok = coul_ok && d.coulomb <= crude * (1.0 + 1e-12) && crude <= b.coulomb + b.charge * b.charge * 2.0;
            rep.rows.push_back({{"p", p}, {"N", N}, {"lambda_N", d.scale}, {"kinetic", d.kinetic}, {"coulomb", d.coulomb},
                                {"e_norm", d.e_norm}, {"lp_mass", d.lp_mass}});
            xs.push_back(n);
            lp.push_back(d.lp_mass);
            kin.push_back(d.kinetic);
        }
        double kdev = 0.0;
        for (double k : kin) kdev = std::max(kdev, std::abs(k / kin.front() - 1.0));
        std::string const tag = " (p=" + fmt(p) + ")";
        rep.add("kinetic part constant in N to 1e-12" + tag, kdev <= 1e-12, "max rel dev " + fmt(kdev));
        rep.add("Coulomb part bounded by lambda_N^3 (C2 N + C3)" + tag, coul_ok, "C2 = D(u^2,u^2), C3 = 2 Q^2");
        if (xs.size() >= 2) {
            double const s = loglog_slope(xs, lp), target = (6.0 - 2.0 * p) / 3.0;
            rep.summary["lp_exponent" + tag] = s;
            rep.add("L^p growth exponent = (6-2p)/3 to 1e-12" + tag, std::abs(s - target) <= 1e-12,
                    "fitted " + fmt(s) + " target " + fmt(target));
        }
    }
}

inline void scenario_lower_bound_sweep(ScenarioConfig const& cfg, ScenarioReport& rep, detail::Output const&)
{
    using namespace detail;
    auto const& j = cfg.params;
    auto const sigmas = get_list(j, "sigmas", {1e-3, 1e-2, 1e-1, 1.0, 1e1, 1e2, 1e3});
    auto const probes = base_probes();
    for (double alpha : get_list(j, "alpha", {0.6, 0.1})) {
        auto const rows = lower_bound_sweep(probes, sigmas, alpha);
        double mn = std::numeric_limits<double>::infinity();
        for (auto const& r : rows) {
            rep.rows.push_back({{"family", "probe"}, {"profile", r.id}, {"sigma", r.sigma}, {"alpha", r.alpha},
                                {"lhs", r.lhs}, {"rhs", r.rhs}, {"ratio", r.ratio}});
            mn = std::min(mn, r.ratio);
        }
        rep.summary["min_ratio_alpha" + fmt(alpha)] = mn;
        if (alpha > 0.5)
            rep.add("infimum ratio over probe family > 0 (alpha=" + fmt(alpha) + ")", mn > 0.0 && std::isfinite(mn),
                    "min ratio " + fmt(mn));
    }
    if (j.contains("counterexample") && j.at("counterexample").is_null()) return;
    auto const ce = section(j, "counterexample");
    double const beta = get<double>(ce, "beta", 0.44), alpha = get<double>(ce, "alpha", 0.1);
    auto const cutoffs = get_list(ce, "cutoffs", {1e2, 1e4, 1e6});
    double const growth_min = get<double>(ce, "rhs_growth_min", 10.0);
    double const lhs_tol = get<double>(ce, "lhs_stability", 0.01);
    auto const sweep = log_counterexample_sweep(beta, alpha, cutoffs);
    for (auto const& s : sweep) {
        double const c = s.r_hi;
        rep.rows.push_back({{"family", "log-counterexample"}, {"beta", beta}, {"alpha", alpha}, {"cutoff", c},
                            {"lhs_trunc", s.lhs_trunc}, {"rhs_trunc", s.rhs_trunc}, {"lhs_closed", s.lhs_closed},
                            {"rhs_closed", s.rhs_closed}, {"ratio", log_profile_ratio(beta, alpha, c)}});
    }
    double const growth = sweep.back().rhs_trunc / sweep.front().rhs_trunc;
    double lhs_dev = 0.0;
    for (std::size_t k = 1; k < sweep.size(); ++k)
        lhs_dev = std::max(lhs_dev, std::abs(sweep[k].lhs_trunc / sweep[k - 1].lhs_trunc - 1.0));
    rep.summary["counterexample_rhs_growth"] = growth;
    rep.summary["counterexample_lhs_max_step_change"] = lhs_dev;
    rep.add("counterexample rhs_trunc grows > " + fmt(growth_min) + "x across cutoffs", growth > growth_min,
            "growth " + fmt(growth));
    rep.add("counterexample lhs_trunc stable within " + fmt(lhs_tol), lhs_dev <= lhs_tol,
            "largest relative change between successive cutoffs " + fmt(lhs_dev));
}

inline void scenario_dyadic_lemma(ScenarioConfig const& cfg, ScenarioReport& rep, detail::Output const&)
{
    using namespace detail;
    auto const& j = cfg.params;
    std::size_t const K_max = get<std::size_t>(j, "K_max", 40);
    double const floor = get<double>(j, "floor", 0.5);
    for (double alpha : get_list(j, "alpha", {0.6, 0.3})) {
        std::vector<double> ratios;
        for (std::size_t K = 0; K <= K_max; ++K) {
            auto const d = dyadic_lemma_check(spreading_family(K), alpha);
            rep.rows.push_back({{"test", "dyadic"}, {"alpha", alpha}, {"K", K}, {"lhs", d.lhs}, {"rhs", d.rhs},
                                {"ratio", d.ratio}});
            ratios.push_back(d.ratio);
        }
        double const mn = *std::min_element(ratios.begin(), ratios.end());
        std::string const tag = " (alpha=" + fmt(alpha) + ")";
        rep.summary["min_ratio" + tag] = mn;
        if (alpha > 0.5)
            rep.add("dyadic ratio >= " + fmt(floor) + " for K <= " + std::to_string(K_max) + tag, mn >= floor,
                    "min " + fmt(mn));
        else
            rep.add("dyadic ratio decays along the spreading family" + tag, ratios.back() < 0.5 * ratios.front(),
                    "K=0: " + fmt(ratios.front()) + ", K=" + std::to_string(K_max) + ": " + fmt(ratios.back()));
    }
    std::size_t const trials = get<std::size_t>(j, "sequence_trials", 500);
    double const seq_alpha = get<double>(j, "sequence_alpha", 0.6);
    std::mt19937_64 rng(cfg.seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::size_t held = 0;
    double worst = 0.0;
    for (std::size_t t = 0; t < trials; ++t) {
        std::size_t const len = 1 + static_cast<std::size_t>(unit(rng) * 60);
        std::vector<double> a(len), b(len);
        for (std::size_t n = 0; n < len; ++n) {
            double const idx = static_cast<double>(n) - static_cast<double>(len / 2);
            a[n] = unit(rng) < 0.3 ? 0.0 : std::pow(unit(rng), 3.0);
            b[n] = std::pow(1.0 + std::abs(idx), 2.0 * seq_alpha);
        }
        auto const s = sequence_inequality_check(a, b);
        held += s.holds();
        if (s.rhs > 0.0) worst = std::max(worst, s.lhs / s.rhs);
    }
    rep.summary["sequence_worst_lhs_over_rhs"] = worst;
    rep.add("sequence inequality on " + std::to_string(trials) + " random instances", held == trials,
            std::to_string(held) + " held; worst lhs/rhs " + fmt(worst));
}

inline void scenario_hls_check(ScenarioConfig const& cfg, ScenarioReport& rep, detail::Output const&)
{
    using namespace detail;
    auto const& j = cfg.params;
    auto const sigmas = get_list(j, "sigmas", {0.5, 2.0, 10.0});
    auto probes = base_probes();
    std::mt19937_64 rng(cfg.seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::size_t const random_count = get<std::size_t>(j, "random_profiles", 94);
    RadialGrid const g = probes.front().field.grid();
    for (std::size_t k = 0; k < random_count; ++k)
        probes.push_back({"random-" + std::to_string(k), with_zero_end(random_radial_start(g, rng, 1.0))});
    double inv_dev = 0.0, hmax = 0.0, rmax = 0.0;
    bool positive = true;
    for (auto const& pr : probes) {
        double const h = hls_ratio(pr.field), r = radial_weighted_ratio(pr.field);
        hmax = std::max(hmax, h);
        rmax = std::max(rmax, r);
        positive = positive && h > 0.0 && r > 0.0;
        rep.rows.push_back({{"profile", pr.id}, {"sigma", 1.0}, {"hls_ratio", h}, {"radial_weighted_ratio", r}});
        for (double s : sigmas) {
            auto const v = stretch(pr.field, s);
            double const hs = hls_ratio(v), rs = radial_weighted_ratio(v);
            inv_dev = std::max({inv_dev, std::abs(hs / h - 1.0), std::abs(rs / r - 1.0)});
            rep.rows.push_back({{"profile", pr.id}, {"sigma", s}, {"hls_ratio", hs}, {"radial_weighted_ratio", rs}});
        }
    }
    rep.summary["max_hls_ratio"] = hmax;
    rep.summary["max_radial_weighted_ratio"] = rmax;
    rep.add("ratios dilation invariant to 1e-6", inv_dev <= 1e-6, "max rel dev " + fmt(inv_dev));
    rep.add("ratios positive and bounded over " + std::to_string(probes.size()) + " profiles",
            positive && std::isfinite(hmax) && std::isfinite(rmax), "max hls " + fmt(hmax) + ", max radial " + fmt(rmax));

    // sandwich on fields supported in [1/e, e] where 1 <= (1 + |log r|)^alpha <= 2^alpha
    double const alpha = get<double>(j, "alpha", 0.6);
    RadialGrid const gs(2049, 4.0);
    bool sandwich = true;
    for (double c : {0.6, 1.0, 1.6, 2.4}) {
        auto f = sample_radial([c](double r) {
            double const lo = std::exp(-1.0), hi = std::exp(1.0);
            if (r <= lo || r >= hi) return 0.0;
            return std::exp(-4.0 * (r - c) * (r - c)) * std::sin(pi * (r - lo) / (hi - lo));
        }, gs);
        double const w = weighted_norm(f, alpha).value, rw = radial_weighted_norm(f);
        sandwich = sandwich && w <= rw * (1.0 + 1e-12) && rw <= std::pow(2.0, alpha) * w * (1.0 + 1e-12);
        rep.rows.push_back({{"profile", "sandwich-" + fmt(c)}, {"weighted_alpha", w}, {"radial_weighted", rw}});
    }
    rep.add("weighted(alpha) <= radial weighted <= 2^alpha weighted(alpha) on [1/e, e]", sandwich, "alpha " + fmt(alpha));

    std::size_t const trials = get<std::size_t>(j, "inequality_trials", 200);
    auto const t = coulomb_inequality_trials(trials, cfg.seed);
    auto const tally = [&](std::size_t held) { return std::to_string(held) + " of " + std::to_string(trials) + " held"; };
    rep.summary["cubic_bound_worst_ratio"] = t.worst_cubic;
    rep.add("Cauchy-Schwarz for D", t.cauchy_schwarz == trials, tally(t.cauchy_schwarz));
    rep.add("quarter-power triangle inequality", t.triangle == trials, tally(t.triangle));
    rep.add("parallelogram-type inequality", t.parallelogram == trials, tally(t.parallelogram));
    rep.add("int |u|^3 <= 1/2 int |grad u|^2 + D/(8 pi)", t.cubic == trials,
            tally(t.cubic) + "; worst lhs/rhs " + fmt(t.worst_cubic));
}

inline void scenario_sweep_lambda(ScenarioConfig const& cfg, ScenarioReport& rep, detail::Output const& out)
{
    using namespace detail;
    auto const& j = cfg.params;
    double const p = get<double>(j, "p", 2.8);
    require_p_window(p, 18.0 / 7.0, 3.0, "sweep-lambda");
    auto const lambdas = get_list(j, "lambda", {1e-2, 1e-3, 1e-4});
    auto const gv = radial_grid(j, 2049, 8000.0);
    auto const solver = solver_config(j, [] {
        auto c = SolverConfig::radial_defaults();
        c.grad_tol = 1e-8;
        c.max_iters = 200000;
        return c;
    }());
    auto const init_desc = section(j, "init");
    auto const init = gaussian_radial(gv, get<double>(init_desc, "amplitude", 1e-6),
                                      get<double>(init_desc, "width", gv.r_max() / 8.0));

    auto const t0 = std::chrono::steady_clock::now();
    auto const J = minimize_radial(Params::limit(p), init, solver);
    rep.run_info.push_back({{"run", "J"}, {"seconds", seconds_since(t0)}, {"status", J.status}});
    Json jrow = {{"lambda", 0.0}, {"eps", 0.0}};
    merge(jrow, breakdown_json(J.breakdown));
    jrow["iters"] = J.iters;
    jrow["relative_residual"] = J.relative_residual;
    jrow["converged"] = J.converged;
    rep.rows.push_back(jrow);
    out.radial("v-limit", J.field);
    require(J.converged, "sweep-lambda: the limit problem did not converge (" + J.status + ")");

    RadialModel const metric(gv, Params::limit(p));
    auto runs = parallel_map(lambdas.size(), cfg.workers, [&](std::size_t k) {
        double const lam = lambdas[k];
        require(lam > 0.0, "sweep-lambda: lambda must be positive");
        auto const t1 = std::chrono::steady_clock::now();
        Params const prm{p, lam, 1.0};
        // two starts mapped from the limit variables: the Gaussian and the J minimizer
        auto a = minimize_radial(prm, scale_from_limit(init, lam, p), solver);
        auto b = minimize_radial(prm, scale_from_limit(J.field, lam, p), solver);
        bool const pick_b = b.converged && (!a.converged || b.breakdown.total < a.breakdown.total);
        auto r = pick_b ? std::move(b) : std::move(a);
        return std::make_pair(std::move(r), seconds_since(t1));
    });

    std::vector<double> dist;
    std::vector<double> used;
    std::optional<RadialField> prev;
    for (std::size_t k = 0; k < lambdas.size(); ++k) {
        auto const& [r, secs] = runs[k];
        auto const sc = scale_to_limit(r.field, lambdas[k], p);
        require(std::abs(sc.v.grid().r_max() / gv.r_max() - 1.0) < 1e-12, "sweep-lambda: rescaled grid mismatch");
        RadialField const v(gv, sc.v.values(), true);
        double const jeps = eval_I(v, rescaled_params(sc.eps, p)).total;
        Json row = {{"lambda", lambdas[k]}, {"eps", sc.eps}};
        merge(row, breakdown_json(r.breakdown));
        row["J_eps"] = jeps;
        row["identity_residual"] = std::abs(jeps - std::pow(sc.eps, limit_energy_exponent(p)) * r.breakdown.total);
        row["iters"] = r.iters;
        row["relative_residual"] = r.relative_residual;
        row["converged"] = r.converged;
        if (r.converged) {
            double const d = l2_distance(metric, v, J.field);
            row["dist_to_limit"] = d;
            if (prev) row["dist_to_previous"] = l2_distance(metric, v, *prev);
            dist.push_back(d);
            used.push_back(lambdas[k]);
            prev = v;
        }
        rep.rows.push_back(row);
        rep.run_info.push_back({{"run", k}, {"seconds", secs}, {"status", r.status}});
        out.radial("v-eps-" + std::to_string(k), v);
        if (!r.converged)
            rep.verdicts.push_back({"run lambda=" + fmt(lambdas[k]) + " converged", "inconclusive", r.status});
    }
    if (dist.size() >= 2) {
        std::vector<std::size_t> order(dist.size());
        for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
        std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return used[a] > used[b]; });
        bool mono = true;
        std::string seq;
        for (std::size_t i = 0; i < order.size(); ++i) {
            if (i && !(dist[order[i]] < dist[order[i - 1]])) mono = false;
            seq += (i ? " > " : "") + fmt(dist[order[i]]);
        }
        rep.add("distance to the limit minimizer decreases as lambda decreases", mono, seq);
    }
}

inline void scenario_threshold_lambda0(ScenarioConfig const& cfg, ScenarioReport& rep, detail::Output const&)
{
    using namespace detail;
    auto const& j = cfg.params;
    double const omega = get<double>(j, "omega", 1.0);
    double const tol = get<double>(j, "tol", 1e-3);
    std::size_t const max_steps = get<std::size_t>(j, "max_steps", 30);
    auto const radii = log_radii(get<double>(j, "log10_radius_min", -2.0), get<double>(j, "log10_radius_max", 3.0),
                                 get<std::size_t>(j, "radius_count", 101));
    double const cap = 1.0 / (2.0 * pi);
    double const lam_min = get<double>(j, "lambda_min", 1e-8);
    for (double p : get_list(j, "p", {2.8})) {
        require_p_window(p, 2.0, 3.0, "threshold-lambda0");
        auto pred = [&](double lam) { return bump_witness(Params{p, lam, omega}, radii); };
        std::string const tag = " (p=" + fmt(p) + ")";
        auto const at_lo = pred(lam_min), at_hi = pred(cap), at_one = pred(1.0);
        rep.add("no negative bump at lambda = 1" + tag, !at_one.negative, "best energy " + fmt(at_one.energy));
        if (!at_lo.negative || at_hi.negative) {
            rep.add("bisection brackets the threshold" + tag, false,
                    "predicate at " + fmt(lam_min) + ": " + (at_lo.negative ? "true" : "false") + ", at 1/(2 pi): " +
                        (at_hi.negative ? "true" : "false"));
            continue;
        }
        double lo = lam_min, hi = cap;
        std::size_t steps = 0;
        while (hi - lo > tol && steps < max_steps) {
            double const mid = 0.5 * (lo + hi);
            auto const w = pred(mid);
            rep.rows.push_back({{"p", p}, {"step", steps}, {"lambda", mid}, {"negative", w.negative},
                                {"best_energy", w.energy}, {"radius", w.radius}, {"amplitude", w.amplitude}});
            (w.negative ? lo : hi) = mid;
            ++steps;
        }
        rep.summary["lambda_lo" + tag] = lo;
        rep.summary["lambda_hi" + tag] = hi;
        rep.summary["steps" + tag] = steps;
        rep.add("0 < lambda_lo < lambda_hi <= 1/(2 pi) + 1e-3" + tag, lo > 0.0 && lo < hi && hi <= cap + 1e-3,
                "[" + fmt(lo) + ", " + fmt(hi) + "]");
        rep.add("bracket width <= " + fmt(tol) + " within " + std::to_string(max_steps) + " steps" + tag,
                hi - lo <= tol, "width " + fmt(hi - lo) + " after " + std::to_string(steps) + " steps");
    }
}

inline void scenario_ball_symmetry(ScenarioConfig const& cfg, ScenarioReport& rep, detail::Output const& out)
{
    using namespace detail;
    auto const& j = cfg.params;
    double const p = get<double>(j, "p", 2.6);
    require_p_window(p, 2.0, 3.0, "ball-symmetry");
    auto const box = section(j, "box");
    std::size_t const n = get<std::size_t>(box, "n", 64), n_ref = get<std::size_t>(box, "n_ref", 48);
    std::size_t const nr = get<std::size_t>(section(j, "radial"), "n", 513);
    auto const solver3 = solver_config(j, [] {
        auto c = SolverConfig::box_defaults();
        c.grad_tol = 1e-4;
        return c;
    }());
    auto const solver1 = [&] {
        auto c = SolverConfig::radial_defaults();
        c.max_iters = 100000;
        return c;
    }();
    double const asym_min = get<double>(j, "asymmetry_min", 0.1);
    double const sep_frac = get<double>(j, "separation", 0.65);
    std::vector<std::string> const starts = [&] {
        std::vector<std::string> s;
        if (j.contains("starts"))
            for (auto const& x : j.at("starts")) s.push_back(x.get<std::string>());
        else
            s = {"centred", "two-bump", "three-bump"};
        return s;
    }();
    bool certified = false;
    std::size_t point = 0;
    // default: eps = 1/100 at p = 2.6
    for (double lam : get_list(j, "lambda", {std::pow(0.01, 4.0 * (3.0 - p) / (p - 2.0))}))
        for (double R : get_list(j, "R", {2.0})) {
            require(lam > 0.0 && R > 0.0, "ball-symmetry: lambda and R must be positive");
            std::string const tag = " (lambda=" + fmt(lam) + ", R=" + fmt(R) + ")";
            if (lam * pi >= 0.5) {
                rep.verdicts.push_back({"symmetry" + tag, "inconclusive",
                                        "trivial: lambda pi >= 1/2, both minima are 0 at the zero field"});
                rep.rows.push_back({{"point", point++}, {"lambda", lam}, {"R", R}, {"verdict", "inconclusive/trivial"}});
                continue;
            }
            // exact change of variables: J_eps on B(0, R/eps) with omega = eps^2
            double const eps = limit_scale(lam, p);
            double const Rv = R / eps;
            Params const prm{p, 1.0, eps * eps, Rv};
            double const w0 = Rv / 6.0;
            double const amp = std::pow(20.0 / (w0 * w0) + 20.0 * eps * eps, 1.0 / (p - 2.0));

            auto radial_min = [&](std::size_t nodes) {
                RadialGrid const g(nodes, Rv);
                std::optional<MinimizerResult<RadialField>> best;
                for (double wf : {1.0, 0.5, 2.0}) {
                    auto r = minimize_radial(prm, gaussian_radial(g, amp, w0 * wf), solver1);
                    if (!best || r.breakdown.total < best->breakdown.total) best = std::move(r);
                }
                return std::move(*best);
            };
            auto const rad = radial_min(nr);
            auto const rad2 = radial_min(2 * nr - 1);
            double const mbar = rad.breakdown.total;
            double const margin_r = std::abs(rad2.breakdown.total - mbar);
            out.radial("radial-" + std::to_string(point), rad.field);

            auto start_field = [&](std::string const& kind, std::size_t nodes) {
                BoxGrid const bg(nodes, Rv);
                double const s = sep_frac * Rv;
                std::vector<std::array<double, 3>> centres;
                if (kind == "centred") centres = {{0, 0, 0}};
                else if (kind == "off-centre") centres = {{s, 0, 0}};
                else if (kind == "two-bump") centres = {{s, 0, 0}, {-s, 0, 0}};
                else if (kind == "three-bump")
                    centres = {{s, 0, 0}, {-0.5 * s, 0.5 * std::sqrt(3.0) * s, 0}, {-0.5 * s, -0.5 * std::sqrt(3.0) * s, 0}};
                else throw Error("ball-symmetry: unknown start '" + kind + "'");
                return sample_box(
                    [&](double x, double y, double z) {
                        double v = 0.0;
                        for (auto const& c : centres) v += interpolate(rad.field, std::hypot(x - c[0], y - c[1], z - c[2]));
                        return v;
                    },
                    bg, Rv);
            };

            auto runs = parallel_map(starts.size(), cfg.workers, [&](std::size_t k) {
                auto const t0 = std::chrono::steady_clock::now();
                auto r = minimize_3d(prm, start_field(starts[k], n), solver3);
                return std::make_pair(std::move(r), seconds_since(t0));
            });
            std::size_t best = 0;
            for (std::size_t k = 0; k < runs.size(); ++k) {
                auto const& [r, secs] = runs[k];
                if (r.breakdown.total < runs[best].first.breakdown.total) best = k;
                Json row = {{"point", point}, {"lambda", lam}, {"R", R}, {"eps", eps}, {"start", starts[k]}, {"n", n}};
                merge(row, breakdown_json(r.breakdown));
                row["energy_I_lambda"] = r.breakdown.total / std::pow(eps, limit_energy_exponent(p));
                row["asymmetry"] = r.asymmetry;
                row["relative_residual"] = r.relative_residual;
                row["iters"] = r.iters;
                row["converged"] = r.converged;
                rep.rows.push_back(row);
                rep.run_info.push_back({{"point", point}, {"start", starts[k]}, {"seconds", secs}, {"status", r.status}});
            }
            auto const& top = runs[best].first;
            auto const t0 = std::chrono::steady_clock::now();
            auto const ref = minimize_3d(prm, start_field(starts[best], n_ref), solver3);
            rep.run_info.push_back({{"point", point}, {"start", starts[best] + "@n_ref"}, {"seconds", seconds_since(t0)},
                                    {"status", ref.status}});
            double const m = top.breakdown.total;
            double const margin3 = std::abs(m - ref.breakdown.total);
            double const margin = margin3 + margin_r;
            bool const broken = top.converged && ref.converged && m < mbar - margin && top.asymmetry > asym_min;
            certified = certified || broken;
            out.box("best-3d-" + std::to_string(point), top.field);
            rep.rows.push_back({{"point", point}, {"lambda", lam}, {"R", R}, {"eps", eps}, {"start", "summary"},
                                {"m_radial", mbar}, {"m_radial_refined", rad2.breakdown.total}, {"m_3d", m},
                                {"m_3d_ref", ref.breakdown.total}, {"margin", margin}, {"gap", mbar - m},
                                {"asymmetry", top.asymmetry}, {"best_start", starts[best]},
                                {"verdict", broken ? "broken" : "inconclusive"}});
            rep.summary["point" + std::to_string(point)] = {{"lambda", lam}, {"R", R}, {"gap", mbar - m},
                                                             {"margin", margin}, {"asymmetry", top.asymmetry},
                                                             {"verdict", broken ? "broken" : "inconclusive"}};
            ++point;
        }
    if (certified)
        rep.add("symmetry breaking certified at some tested (lambda, R)", true, "see summary rows");
    else
        rep.verdicts.push_back({"symmetry breaking certified at some tested (lambda, R)", "inconclusive",
                                "no tested point separated the minima by more than the refinement margin"});
}

inline void scenario_lambda_positivity(ScenarioConfig const& cfg, ScenarioReport& rep, detail::Output const&)
{
    using namespace detail;
    auto const& j = cfg.params;
    double const p = get<double>(j, "p", 2.8);
    double const omega = get<double>(j, "omega", 1.0);
    std::size_t const restarts = get<std::size_t>(j, "restarts", 50);
    double const floor = get<double>(j, "energy_floor", -1e-8);
    double const max_amp = get<double>(j, "max_amplitude", 4.0);
    auto const g = radial_grid(j, 513, 20.0);
    auto const solver = solver_config(j, SolverConfig::radial_defaults());
    for (double lam : get_list(j, "lambda", {0.2})) {
        Params const prm{p, lam, omega};
        prm.validate();
        auto runs = parallel_map(restarts, cfg.workers, [&](std::size_t k) {
            std::mt19937_64 rng(cfg.seed * 1000003ULL + k);
            auto init = random_radial_start(g, rng, max_amp);
            return minimize_radial(prm, init, solver);
        });
        double mn = std::numeric_limits<double>::infinity();
        std::size_t below = 0;
        for (std::size_t k = 0; k < runs.size(); ++k) {
            auto const& r = runs[k];
            Json row = {{"lambda", lam}, {"restart", k}};
            merge(row, breakdown_json(r.breakdown));
            row["iters"] = r.iters;
            row["converged"] = r.converged;
            rep.rows.push_back(row);
            rep.run_info.push_back({{"lambda", lam}, {"restart", k}, {"status", r.status}});
            mn = std::min(mn, r.breakdown.total);
            below += r.breakdown.total < floor;
        }
        std::string const tag = " (lambda=" + fmt(lam) + ")";
        rep.summary["min_energy" + tag] = mn;
        if (lam * pi >= 0.5)
            rep.add("no restart below " + fmt(floor) + tag, below == 0,
                    std::to_string(below) + " of " + std::to_string(restarts) + " below; min " + fmt(mn));
    }
}

// ---------------------------------------------------------------------------
// Dispatch
// ---------------------------------------------------------------------------

inline ScenarioReport run(ScenarioConfig const& cfg)
{
    using Fn = void (*)(ScenarioConfig const&, ScenarioReport&, detail::Output const&);
    static std::map<std::string, Fn> const table{
        {"energy", scenario_energy},
        {"minimize-radial", scenario_minimize_radial},
        {"minimize-3d", scenario_minimize_3d},
        {"tent-sweep", scenario_tent_sweep},
        {"bump-sweep", scenario_bump_sweep},
        {"dilated-bump-sweep", scenario_dilated_bump_sweep},
        {"lower-bound-sweep", scenario_lower_bound_sweep},
        {"dyadic-lemma", scenario_dyadic_lemma},
        {"hls-check", scenario_hls_check},
        {"sweep-lambda", scenario_sweep_lambda},
        {"threshold-lambda0", scenario_threshold_lambda0},
        {"ball-symmetry", scenario_ball_symmetry},
        {"lambda-positivity", scenario_lambda_positivity},
    };
    auto const it = table.find(cfg.scenario);
    require(it != table.end(), "unknown scenario '" + cfg.scenario + "'");
    ScenarioReport rep;
    rep.scenario = cfg.scenario;
    rep.environment = environment_fingerprint(cfg);
    if (!cfg.out_dir.empty()) std::filesystem::create_directories(cfg.out_dir);
    detail::Output const out{cfg.out_dir, &rep};
    auto const t0 = std::chrono::steady_clock::now();
    try {
        it->second(cfg, rep, out);
    } catch (Error const& e) {
        throw Error(cfg.scenario + ": " + e.what());
    }
    rep.environment["seconds"] = detail::seconds_since(t0);
    if (!cfg.out_dir.empty()) {
        std::ofstream js(std::filesystem::path(cfg.out_dir) / "report.json");
        require(bool(js), "cannot write report.json in " + cfg.out_dir);
        js << rep.to_json().dump(2) << '\n';
        std::ofstream csv(std::filesystem::path(cfg.out_dir) / "rows.csv");
        require(bool(csv), "cannot write rows.csv in " + cfg.out_dir);
        write_rows_csv(rep.rows, csv);
    }
    return rep;
}

} // namespace spslab
