#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <random>
#include <string>
#include <vector>

#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "constructions.hpp"
#include "coulomb.hpp"
#include "error.hpp"
#include "energy.hpp"
#include "grid.hpp"

namespace spslab {

namespace detail {

// Dual-cell boundaries [lo_i, hi_i] matching control_volumes().
inline std::vector<double> cell_edges(RadialGrid const& g)
{
    std::size_t const n = g.size();
    std::vector<double> e(n + 1);
    e[0] = 0.0;
    for (std::size_t i = 0; i + 1 < n; ++i) e[i + 1] = (static_cast<double>(i) + 0.5) * g.spacing();
    e[n] = g.r_max();
    return e;
}

inline double log_weight(double r, double alpha) { return std::pow(1.0 + std::abs(std::log(r)), alpha); }

template <class F>
double gk31(F f, double a, double b)
{
    if (a >= b) return 0.0;
    return boost::math::quadrature::gauss_kronrod<double, 31>::integrate(f, a, b, 8, 1e-13);
}

// Integral over [a, b] split at r = 1 where |log r| has its kink.
template <class F>
double gk_split(F f, double a, double b)
{
    if (a >= b) return 0.0;
    if (a < 1.0 && b > 1.0) return gk31(f, a, 1.0) + gk31(f, 1.0, b);
    return gk31(f, a, b);
}

} // namespace detail

// ---------------------------------------------------------------------------
// Weighted norms and ratios
// ---------------------------------------------------------------------------

struct WeightedNormValue {
    double alpha = 0.0;
    double value = 0.0;
};

/// int u^2 |x|^{-1/2} (1 + |log|x||)^{-alpha} dx with u^2 constant on each
/// dual cell. Cell moments 4 pi int r^{3/2} (1 + |log r|)^{-alpha} dr use
/// adaptive quadrature on the origin cell and the cell holding r = 1, and a
/// 20-point Gauss rule elsewhere.
inline WeightedNormValue weighted_norm(RadialField const& u, double alpha)
{
    require(alpha > 0.0, "weighted_norm: alpha must be positive");
    auto const e = detail::cell_edges(u.grid());
    auto f = [alpha](double r) { return r == 0.0 ? 0.0 : 4.0 * pi * std::pow(r, 1.5) / detail::log_weight(r, alpha); };
    double s = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) {
        if (u[i] == 0.0) continue;
        double const a = e[i], b = e[i + 1];
        double const m = (a == 0.0 || (a < 1.0 && b > 1.0))
                             ? detail::gk_split(f, a, b)
                             : boost::math::quadrature::gauss<double, 20>::integrate(f, a, b);
        s += u[i] * u[i] * m;
    }
    return {alpha, s};
}

/// int u^2 |x|^{-1/2} dx with exact cell moments.
inline double radial_weighted_norm(RadialField const& u)
{
    auto const e = detail::cell_edges(u.grid());
    double s = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i)
        s += u[i] * u[i] * 4.0 * pi * (std::pow(e[i + 1], 2.5) - std::pow(e[i], 2.5)) / 2.5;
    return s;
}

/// ||u||_{12/5}^{12/5} on the control volumes.
inline double l125_mass(RadialField const& u)
{
    auto const w = control_volumes(u.grid());
    double s = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) s += w[i] * std::pow(std::abs(u[i]), 2.4);
    return s;
}

/// D(u^2, u^2) / WeightedNorm(u, alpha)^2.
inline double lower_bound_ratio(RadialField const& u, double alpha)
{
    require(!u.is_zero(), "lower_bound_ratio: field is identically zero");
    double const w = weighted_norm(u, alpha).value;
    return coulomb_energy_radial(u).energy / (w * w);
}

/// D(u^2, u^2) / ||u||_{12/5}^4.
inline double hls_ratio(RadialField const& u)
{
    require(!u.is_zero(), "hls_ratio: field is identically zero");
    return coulomb_energy_radial(u).energy / std::pow(l125_mass(u), 5.0 / 3.0);
}

/// D(u^2, u^2) / (int u^2 |x|^{-1/2})^2.
inline double radial_weighted_ratio(RadialField const& u)
{
    require(!u.is_zero(), "radial_weighted_ratio: field is identically zero");
    double const w = radial_weighted_norm(u);
    return coulomb_energy_radial(u).energy / (w * w);
}

/// v(x) = u(x / sigma): the same samples on the grid stretched by sigma.
inline RadialField stretch(RadialField const& u, double sigma)
{
    require(sigma > 0.0, "stretch: factor must be positive");
    return RadialField(u.grid().scaled(sigma), u.values(), u.dirichlet());
}

// ---------------------------------------------------------------------------
// Probe family for the lower bound
// ---------------------------------------------------------------------------

struct Probe {
    std::string id;
    RadialField field;
};

/// Fixed family: ball indicator, Gaussian, cos^2 bump, two Gaussian shells and
/// a tent, all on [0, 8] with 1025 nodes.
inline std::vector<Probe> base_probes(std::size_t n = 1025, double r_max = 8.0)
{
    RadialGrid const g(n, r_max);
    auto shell = [](double c, double w) {
        return [c, w](double r) { return std::exp(-0.5 * (r - c) * (r - c) / (w * w)); };
    };
    std::vector<Probe> out;
    out.push_back({"ball", sample_radial([](double r) { return r < 1.0 ? 1.0 : (r == 1.0 ? std::sqrt(0.5) : 0.0); }, g)});
    out.push_back({"gaussian", sample_radial([](double r) { return std::exp(-0.5 * r * r); }, g)});
    out.push_back({"cos2-bump", sample_radial([](double r) { return cos2_bump(1.0, 2.0, r); }, g)});
    out.push_back({"shell-3", sample_radial(shell(3.0, 0.4), g)});
    out.push_back({"shell-5", sample_radial(shell(5.0, 0.25), g)});
    out.push_back({"tent", sample_radial([](double r) { return std::max(0.0, 1.0 - std::abs(r - 2.0)); }, g)});
    for (auto& p : out) p.field = p.field.with_values([&] {
        auto v = p.field.values();
        v.back() = 0.0;
        return v;
    }());
    return out;
}

struct ProbeRatio {
    std::string id;
    double sigma = 0.0;
    double alpha = 0.0;
    double lhs = 0.0; ///< D(u^2, u^2)
    double rhs = 0.0; ///< WeightedNorm(u, alpha)^2
    double ratio = 0.0;
};

/// Ratios over the probe family and the dilations u(x / sigma).
inline std::vector<ProbeRatio> lower_bound_sweep(std::vector<Probe> const& probes, std::vector<double> const& sigmas,
                                                 double alpha)
{
    require(!probes.empty() && !sigmas.empty(), "empty parameter grid");
    std::vector<ProbeRatio> out;
    for (auto const& p : probes)
        for (double s : sigmas) {
            auto const v = stretch(p.field, s);
            double const lhs = coulomb_energy_radial(v).energy;
            double const w = weighted_norm(v, alpha).value;
            out.push_back({p.id, s, alpha, lhs, w * w, lhs / (w * w)});
        }
    return out;
}

/// Lower-bound ratio of the truncated profile |x|^{-5/4} (1 + |log|x||)^{-beta}
/// on [1/c, c], evaluated in t = log r:
///   D = 32 pi^2 int e^{-tau/2} L(tau)^{-2 beta} G(tau) dtau,
///   G(tau) = int_{-log c}^{tau} e^{t/2} L(t)^{-2 beta} dt,  L = 1 + |t|.
inline double log_profile_ratio(double beta, double alpha, double c)
{
    require(beta > 0.0 && alpha > 0.0 && c > 1.0, "log_profile_ratio: need beta, alpha > 0 and c > 1");
    double const T = std::log(c);
    auto L = [](double t) { return 1.0 + std::abs(t); };
    auto inner = [&](double t) { return std::exp(0.5 * t) * std::pow(L(t), -2.0 * beta); };
    auto G = [&](double tau) {
        return tau <= 0.0 ? detail::gk31(inner, -T, tau) : detail::gk31(inner, -T, 0.0) + detail::gk31(inner, 0.0, tau);
    };
    auto outer = [&](double tau) { return std::exp(-0.5 * tau) * std::pow(L(tau), -2.0 * beta) * G(tau); };
    double D = 0.0;
    for (double a = -T; a < T; a += 1.0) D += detail::gk31(outer, a, std::min(a + 1.0, T));
    D *= 32.0 * pi * pi;
    double const w = detail::log_power_integral(-T, T, 2.0 * beta + alpha);
    return D / (w * w);
}

// ---------------------------------------------------------------------------
// Dyadic lemma and the sequence inequality
// ---------------------------------------------------------------------------

/// Nonnegative piecewise-constant h: value[k] on [breaks[k], breaks[k+1]).
class StepFunction {
public:
    StepFunction(std::vector<double> breaks, std::vector<double> values)
        : breaks_(std::move(breaks)), values_(std::move(values))
    {
        require(breaks_.size() == values_.size() + 1 && !values_.empty(), "StepFunction: need one more break than value");
        require(breaks_.front() > 0.0, "StepFunction: support must lie in (0, inf)");
        for (std::size_t k = 0; k + 1 < breaks_.size(); ++k)
            require(breaks_[k] < breaks_[k + 1], "StepFunction: breaks must increase");
        for (double v : values_) require(v >= 0.0 && std::isfinite(v), "StepFunction: values must be finite and >= 0");
    }

    std::vector<double> const& breaks() const { return breaks_; }
    std::vector<double> const& values() const { return values_; }
    std::size_t pieces() const { return values_.size(); }

    double operator()(double r) const
    {
        if (r < breaks_.front() || r >= breaks_.back()) return 0.0;
        auto const k = static_cast<std::size_t>(std::upper_bound(breaks_.begin(), breaks_.end(), r) - breaks_.begin()) - 1;
        return values_[k];
    }

    double integral() const
    {
        double s = 0.0;
        for (std::size_t k = 0; k < pieces(); ++k) s += values_[k] * (breaks_[k + 1] - breaks_[k]);
        return s;
    }

private:
    std::vector<double> breaks_;
    std::vector<double> values_;
};

/// The spreading family: mass 1 on each dyadic block [2^n, 2^{n+1}], n = 0..K.
inline StepFunction spreading_family(std::size_t K)
{
    std::vector<double> b, v;
    for (std::size_t n = 0; n <= K; ++n) {
        b.push_back(std::ldexp(1.0, static_cast<int>(n)));
        v.push_back(std::ldexp(1.0, -static_cast<int>(n)));
    }
    b.push_back(std::ldexp(1.0, static_cast<int>(K) + 1));
    return StepFunction(std::move(b), std::move(v));
}

struct DyadicCheck {
    double lhs = 0.0;
    double rhs = 0.0;
    double ratio = 0.0;
};

/// lhs = int int_{s/2 < r < 2s} h(r) w(r) h(s) w(s) dr ds, w = (1 + |log r|)^alpha,
/// rhs = (int h)^2. The inner integral is a sum over pieces of h; the outer one
/// is split wherever s, s/2 or 2s crosses a break or r = 1.
inline DyadicCheck dyadic_lemma_check(StepFunction const& h, double alpha)
{
    require(alpha >= 0.0, "dyadic_lemma_check: alpha must be nonnegative");
    auto const& b = h.breaks();
    auto const& v = h.values();
    auto w = [alpha](double r) { return detail::log_weight(r, alpha); };
    auto W = [&](double lo, double hi) { return detail::gk_split(w, lo, hi); };

    auto inner = [&](double s) {
        double const lo = 0.5 * s, hi = 2.0 * s;
        auto k = static_cast<std::size_t>(std::upper_bound(b.begin(), b.end(), lo) - b.begin());
        k = k == 0 ? 0 : k - 1;
        double acc = 0.0;
        for (; k < h.pieces() && b[k] < hi; ++k) {
            double const a = std::max(b[k], lo), c = std::min(b[k + 1], hi);
            if (a < c && v[k] != 0.0) acc += v[k] * W(a, c);
        }
        return acc;
    };

    std::vector<double> cuts;
    for (double x : b) {
        cuts.push_back(x);
        cuts.push_back(2.0 * x);
        cuts.push_back(0.5 * x);
    }
    cuts.push_back(1.0);
    std::sort(cuts.begin(), cuts.end());
    cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());

    double lhs = 0.0;
    for (std::size_t j = 0; j + 1 < cuts.size(); ++j) {
        double const a = cuts[j], c = cuts[j + 1];
        double const hv = h(0.5 * (a + c));
        if (hv == 0.0) continue;
        lhs += hv * detail::gk31([&](double s) { return w(s) * inner(s); }, a, c);
    }
    double const m = h.integral();
    DyadicCheck out{lhs, m * m, 0.0};
    out.ratio = out.rhs > 0.0 ? lhs / out.rhs : std::numeric_limits<double>::infinity();
    return out;
}

struct SequenceCheck {
    double lhs = 0.0; ///< (sum a_n)^2
    double rhs = 0.0; ///< (sum 1/b_n)(sum b_n a_n^2)
    bool holds() const { return lhs <= rhs * (1.0 + 1e-12); }
};

inline SequenceCheck sequence_inequality_check(std::vector<double> const& a, std::vector<double> const& b)
{
    require(a.size() == b.size() && !a.empty(), "sequence_inequality_check: sequences must have equal, nonzero length");
    double sa = 0.0, sinv = 0.0, sw = 0.0;
    for (std::size_t n = 0; n < a.size(); ++n) {
        require(a[n] >= 0.0, "sequence_inequality_check: a_n must be nonnegative");
        require(b[n] > 0.0, "sequence_inequality_check: b_n must be positive");
        sa += a[n];
        sinv += 1.0 / b[n];
        sw += b[n] * a[n] * a[n];
    }
    return {sa * sa, sinv * sw};
}

// ---------------------------------------------------------------------------
// Inequalities for D(f, g) and the quarter-power norm T(u) = D(u^2, u^2)^{1/4}
// ---------------------------------------------------------------------------

struct CoulombInequality {
    double lhs = 0.0;
    double rhs = 0.0;
    bool holds(double slack = 1e-12) const { return lhs <= rhs + slack * std::max(std::abs(lhs), std::abs(rhs)); }
};

/// D(f, g)^2 <= D(f, f) D(g, g) for nonnegative densities.
inline CoulombInequality cauchy_schwarz_check(RadialField const& f, RadialField const& g)
{
    double const fg = coulomb_bilinear_radial(f, g);
    return {fg * fg, coulomb_bilinear_radial(f, f) * coulomb_bilinear_radial(g, g)};
}

inline RadialField combine(RadialField const& u, double a, RadialField const& v, double b)
{
    require(u.grid() == v.grid(), "combine: fields live on different grids");
    std::vector<double> w(u.size());
    for (std::size_t i = 0; i < w.size(); ++i) w[i] = a * u[i] + b * v[i];
    return RadialField(u.grid(), std::move(w), u.dirichlet() && v.dirichlet());
}

/// T(u + v) <= T(u) + T(v).
inline CoulombInequality quarter_triangle_check(RadialField const& u, RadialField const& v)
{
    return {quarter_power_norm(combine(u, 1.0, v, 1.0)), quarter_power_norm(u) + quarter_power_norm(v)};
}

/// T((u+v)/2)^4 + T((u-v)/2)^4 <= (T(u)^4 + T(v)^4)/2.
inline CoulombInequality parallelogram_check(RadialField const& u, RadialField const& v)
{
    auto d = [](RadialField const& w) { return coulomb_energy_radial(w).energy; };
    return {d(combine(u, 0.5, v, 0.5)) + d(combine(u, 0.5, v, -0.5)), 0.5 * (d(u) + d(v))};
}

/// int |u|^3 <= 1/2 int |grad u|^2 + D(u^2, u^2)/(8 pi).
inline CoulombInequality cubic_bound_check(RadialField const& u)
{
    auto const w = control_volumes(u.grid());
    double cube = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) cube += w[i] * std::abs(u[i]) * u[i] * u[i];
    return {cube, 0.5 * dirichlet_integral(u) + coulomb_energy_radial(u).energy / (8.0 * pi)};
}

/// Compactly supported random profile: one to three Gaussian shells times a
/// smooth cutoff at 0.8 r_max, with an overall amplitude spread over decades.
inline RadialField random_compact_field(RadialGrid const& g, std::mt19937_64& rng, bool signed_values = true)
{
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    int const k = 1 + static_cast<int>(unit(rng) * 3.0);
    double const R = 0.8 * g.r_max();
    struct Shell {
        double c, s, a;
    };
    std::vector<Shell> shells;
    for (int j = 0; j < k; ++j) {
        double const a = std::pow(10.0, -2.0 + 4.0 * unit(rng));
        shells.push_back({R * unit(rng), 0.02 * R + 0.3 * R * unit(rng),
                          signed_values && unit(rng) < 0.3 ? -a : a});
    }
    return sample_radial(
        [&](double r) {
            if (r >= R) return 0.0;
            double v = 0.0;
            for (auto const& sh : shells) v += sh.a * std::exp(-0.5 * (r - sh.c) * (r - sh.c) / (sh.s * sh.s));
            double const t = r / R;
            return v * (1.0 - t * t) * (1.0 - t * t);
        },
        g);
}

inline RadialField squared(RadialField const& u)
{
    return RadialField(u.grid(), detail::squares(u.values()), false);
}

struct InequalityTally {
    std::size_t trials = 0;
    std::size_t cauchy_schwarz = 0;
    std::size_t triangle = 0;
    std::size_t parallelogram = 0;
    std::size_t cubic = 0;
    double worst_cubic = 0.0; ///< max lhs/rhs of the cubic bound
};

/// Runs every D inequality on `trials` random pairs of compact fields.
inline InequalityTally coulomb_inequality_trials(std::size_t trials, std::uint64_t seed, std::size_t n = 513,
                                                 double r_max = 10.0)
{
    RadialGrid const g(n, r_max);
    std::mt19937_64 rng(seed);
    InequalityTally t;
    t.trials = trials;
    for (std::size_t k = 0; k < trials; ++k) {
        auto const u = random_compact_field(g, rng), v = random_compact_field(g, rng);
        t.cauchy_schwarz += cauchy_schwarz_check(squared(u), squared(v)).holds();
        t.triangle += quarter_triangle_check(u, v).holds(1e-10);
        t.parallelogram += parallelogram_check(u, v).holds();
        auto const c = cubic_bound_check(u);
        t.cubic += c.holds();
        if (c.rhs > 0.0) t.worst_cubic = std::max(t.worst_cubic, c.lhs / c.rhs);
    }
    return t;
}

} // namespace spslab
