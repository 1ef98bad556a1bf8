#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <optional>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "coulomb.hpp"
#include "energy.hpp"
#include "error.hpp"
#include "grid.hpp"

namespace spslab {

namespace detail {

template <class F>
double gk(F f, double a, double b, double tol = 1e-13)
{
    if (a == b) return 0.0;
    return boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, a, b, 20, tol);
}

/// Dense polynomial in one variable, coefficients in increasing degree.
struct Poly {
    std::vector<double> c;

    double operator()(double x) const
    {
        double s = 0.0;
        for (std::size_t k = c.size(); k-- > 0;) s = s * x + c[k];
        return s;
    }

    friend Poly operator*(Poly const& a, Poly const& b)
    {
        Poly r{std::vector<double>(a.c.size() + b.c.size() - 1, 0.0)};
        for (std::size_t i = 0; i < a.c.size(); ++i)
            for (std::size_t j = 0; j < b.c.size(); ++j) r.c[i + j] += a.c[i] * b.c[j];
        return r;
    }

    Poly antiderivative() const
    {
        Poly r{std::vector<double>(c.size() + 1, 0.0)};
        for (std::size_t k = 0; k < c.size(); ++k) r.c[k + 1] = c[k] / static_cast<double>(k + 1);
        return r;
    }

    double integral(double a, double b) const
    {
        auto const F = antiderivative();
        return F(b) - F(a);
    }
};

} // namespace detail

// ---------------------------------------------------------------------------
// Tent profiles
// ---------------------------------------------------------------------------

struct TentReport {
    double eps = 0.0;
    double p = 0.0;
    double R = 0.0;
    double S = 0.0;
    // closed forms
    double kin_raw = 0.0;  ///< int u'^2 r^2 dr
    double coul_raw = 0.0; ///< int int u^2 u^2 r s min(r, s) dr ds
    double lp_raw = 0.0;   ///< int |u|^p r^2 dr
    // the same integrals from the grid discretization
    double kin_quad = 0.0;
    double coul_quad = 0.0;
    double lp_quad = 0.0;

    double lp_floor() const { return std::pow(eps, p - 18.0 / 7.0) / std::pow(2.0, p + 2.0); }
    bool kin_ok() const { return kin_raw <= 8.0; }
    bool coul_ok() const { return coul_raw <= 32.0; }
    bool lp_ok() const { return lp_raw >= lp_floor(); }
    bool bounds_ok() const { return kin_ok() && coul_ok() && lp_ok(); }
};

struct Tent {
    RadialField field;
    TentReport report;
};

inline double tent_radius(double eps) { return std::pow(eps, -8.0 / 7.0); }
inline double tent_half_width(double eps) { return std::pow(eps, -2.0 / 7.0); }

/// u(r) = eps (S - |r - R|) / S on |r - R| < S, R = eps^{-8/7}, S = eps^{-2/7}.
inline double tent_value(double eps, double r)
{
    double const R = tent_radius(eps), S = tent_half_width(eps);
    double const d = std::abs(r - R);
    return d >= S ? 0.0 : eps * (S - d) / S;
}

/// Closed-form integrals of the tent, with u written piecewise in x = (r - R)/S.
inline TentReport tent_closed_form(double eps, double p)
{
    require(eps > 0.0 && eps < 1.0, "tent: eps must lie in (0, 1)");
    require(p > 2.0 && p <= 6.0, "tent: p must lie in (2, 6]");
    TentReport t;
    t.eps = eps;
    t.p = p;
    t.R = tent_radius(eps);
    t.S = tent_half_width(eps);
    double const R = t.R, S = t.S;
    require(R - S > 0.0, "tent: eps too large (R - S must be positive)");

    t.kin_raw = eps * eps / (S * S) * (std::pow(R + S, 3) - std::pow(R - S, 3)) / 3.0;
    t.lp_raw = std::pow(eps, p) * S *
               (2.0 * R * R / (p + 1.0) + 4.0 * S * S / ((p + 1.0) * (p + 2.0) * (p + 3.0)));

    // coul = 2 int u^2(s) s F(s) ds,  F(s) = int_{R-S}^s u^2(r) r^2 dr
    using detail::Poly;
    double const e2 = eps * eps;
    Poly const rad{{R, S}};                       // r(x)
    Poly const uL2 = Poly{{1.0, 1.0}} * Poly{{1.0, 1.0}} * Poly{{e2}}; // x in [-1, 0]
    Poly const uR2 = Poly{{1.0, -1.0}} * Poly{{1.0, -1.0}} * Poly{{e2}}; // x in [0, 1]
    Poly const gL = uL2 * rad * rad * Poly{{S}};
    Poly const gR = uR2 * rad * rad * Poly{{S}};
    Poly FL = gL.antiderivative();
    FL.c[0] -= FL(-1.0);
    Poly FR = gR.antiderivative();
    FR.c[0] += FL(0.0) - FR(0.0);
    double const left = (uL2 * rad * FL * Poly{{S}}).integral(-1.0, 0.0);
    double const right = (uR2 * rad * FR * Poly{{S}}).integral(0.0, 1.0);
    t.coul_raw = 2.0 * (left + right);
    return t;
}

/// Samples the tent and fills both the closed-form and the quadrature
/// integrals. Default grid: spacing S/1024 out to R + 2S.
inline Tent tent_profile(double eps, double p, std::optional<RadialGrid> grid = std::nullopt)
{
    auto rep = tent_closed_form(eps, p);
    RadialGrid const g = grid ? *grid
                              : RadialGrid(static_cast<std::size_t>(std::ceil((rep.R + 2.0 * rep.S) / (rep.S / 1024.0))) + 1,
                                           rep.R + 2.0 * rep.S);
    require(g.r_max() >= rep.R + rep.S, "tent: grid does not cover the support [R - S, R + S]");
    require(2.0 * rep.S / g.spacing() >= 64.0,
            "tent: grid under-resolved, need at least 64 nodes across [R - S, R + S]; refine the grid");
    auto u = sample_radial([eps](double r) { return tent_value(eps, r); }, g);
    double const four_pi = 4.0 * pi;
    rep.kin_quad = dirichlet_integral(u) / four_pi;
    rep.coul_quad = coulomb_energy_radial(u).energy / (four_pi * four_pi);
    auto const w = control_volumes(g);
    double s = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) s += w[i] * std::pow(std::abs(u[i]), p);
    rep.lp_quad = s / four_pi;
    return {std::move(u), rep};
}

/// Least-squares slope of log y against log x.
inline double loglog_slope(std::vector<double> const& x, std::vector<double> const& y)
{
    require(x.size() == y.size() && x.size() >= 2, "loglog_slope: need at least two points");
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        require(x[i] > 0.0 && y[i] > 0.0, "loglog_slope: values must be positive");
        mx += std::log(x[i]);
        my += std::log(y[i]);
    }
    mx /= static_cast<double>(x.size());
    my /= static_cast<double>(x.size());
    double sxy = 0.0, sxx = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        double const dx = std::log(x[i]) - mx;
        sxy += dx * (std::log(y[i]) - my);
        sxx += dx * dx;
    }
    return sxy / sxx;
}

// ---------------------------------------------------------------------------
// Bumps and bump sums
// ---------------------------------------------------------------------------

struct BumpStats {
    double p = 0.0;
    double charge = 0.0;  ///< Q = int u^2
    double kinetic = 0.0; ///< int |grad u|^2
    double coulomb = 0.0; ///< D(u^2, u^2)
    double lp_mass = 0.0; ///< int |u|^p
    double support_radius = 0.0;
};

/// The standard bump a cos^2(pi r / (2M)) on r < M.
inline double cos2_bump(double amplitude, double radius, double r)
{
    if (r >= radius) return 0.0;
    double const c = std::cos(0.5 * pi * r / radius);
    return amplitude * c * c;
}

namespace detail {

struct UnitBump {
    double kinetic, charge, coulomb;
};

inline UnitBump unit_bump_integrals()
{
    static UnitBump const v = [] {
        auto b = [](double r) { return cos2_bump(1.0, 1.0, r); };
        auto db = [](double r) { return -0.5 * pi * std::sin(pi * r); };
        UnitBump u{};
        u.kinetic = 4.0 * pi * gk([&](double r) { return db(r) * db(r) * r * r; }, 0.0, 1.0);
        u.charge = 4.0 * pi * gk([&](double r) { return std::pow(b(r), 2) * r * r; }, 0.0, 1.0);
        auto F = [&](double s) { return gk([&](double r) { return std::pow(b(r), 2) * r * r; }, 0.0, s); };
        u.coulomb = 32.0 * pi * pi * gk([&](double s) { return std::pow(b(s), 2) * s * F(s); }, 0.0, 1.0);
        return u;
    }();
    return v;
}

} // namespace detail

/// Statistics of a cos^2 bump of the given amplitude and support radius.
/// Unit-bump integrals are computed once by adaptive quadrature; amplitude and
/// radius enter through exact homogeneity.
inline BumpStats cos2_bump_stats(double amplitude, double radius, double p)
{
    require(radius > 0.0, "bump radius must be positive");
    require(p > 2.0 && p <= 6.0, "bump: p must lie in (2, 6]");
    auto const u = detail::unit_bump_integrals();
    double const a = std::abs(amplitude), M = radius;
    double const lp1 =
        4.0 * pi * detail::gk([p](double r) { return std::pow(cos2_bump(1.0, 1.0, r), p) * r * r; }, 0.0, 1.0);
    BumpStats b;
    b.p = p;
    b.charge = a * a * M * M * M * u.charge;
    b.kinetic = a * a * M * u.kinetic;
    b.coulomb = std::pow(a, 4) * std::pow(M, 5) * u.coulomb;
    b.lp_mass = std::pow(a, p) * M * M * M * lp1;
    b.support_radius = M;
    return b;
}

inline EnergyBreakdown bump_energy(BumpStats const& b, Params const& prm)
{
    require(prm.p == b.p, "bump statistics were computed for a different p");
    return EnergyBreakdown::from_terms(0.5 * b.kinetic, 0.5 * prm.omega * b.charge, 0.25 * prm.lambda * b.coulomb,
                                       -b.lp_mass / prm.p);
}

inline void require_disjoint(BumpStats const& b, std::size_t N)
{
    require(N >= 1, "bump sum: N must be at least 1");
    double const n2 = static_cast<double>(N) * static_cast<double>(N);
    require(N == 1 || n2 > 2.0 * b.support_radius, "bump sum: translates overlap, need N^2 > 2M");
}

/// Exact cross term sum_{i != j} D(u_i^2, u_j^2) for N bumps spaced N^2 apart
/// on a line: Newton's theorem gives Q^2 / (|i - j| N^2) for each pair.
inline double bump_sum_cross_term(BumpStats const& b, std::size_t N)
{
    require_disjoint(b, N);
    double const n = static_cast<double>(N);
    double s = 0.0;
    for (std::size_t k = 1; k < N; ++k) s += (n - static_cast<double>(k)) / static_cast<double>(k);
    return 2.0 * b.charge * b.charge * s / (n * n);
}

/// ((N^2 - N)/(N^2 - 2M)) Q^2, the cruder bound on the cross term.
inline double bump_sum_cross_bound(BumpStats const& b, std::size_t N)
{
    require_disjoint(b, N);
    double const n = static_cast<double>(N);
    if (N == 1) return 0.0;
    return (n * n - n) / (n * n - 2.0 * b.support_radius) * b.charge * b.charge;
}

/// Energy of u_N = sum_{i=1}^N u(. + i N^2 e) from the single-bump statistics.
inline EnergyBreakdown bump_sum_energy(BumpStats const& b, std::size_t N, Params const& prm)
{
    prm.validate();
    require_disjoint(b, N);
    require(prm.p == b.p, "bump statistics were computed for a different p");
    double const n = static_cast<double>(N);
    double const D = n * b.coulomb + bump_sum_cross_term(b, N);
    return EnergyBreakdown::from_terms(0.5 * n * b.kinetic, 0.5 * prm.omega * n * b.charge, 0.25 * prm.lambda * D,
                                       -n * b.lp_mass / prm.p);
}

struct DilatedBumpSum {
    std::size_t N = 0;
    double scale = 0.0;   ///< lambda_N = N^{-1/3}
    double kinetic = 0.0; ///< int |grad v_N|^2
    double coulomb = 0.0; ///< D(v_N^2, v_N^2)
    double e_norm = 0.0;
    double lp_mass = 0.0; ///< int |v_N|^p
};

/// v_N = l^2 u_N(l x) with l = N^{-1/3}.
inline DilatedBumpSum dilated_bump_sum_stats(BumpStats const& b, std::size_t N, double p)
{
    require_disjoint(b, N);
    require(p == b.p, "bump statistics were computed for a different p");
    double const n = static_cast<double>(N);
    double const l = std::pow(n, -1.0 / 3.0);
    double const l3 = l * l * l;
    DilatedBumpSum d;
    d.N = N;
    d.scale = l;
    d.kinetic = l3 * n * b.kinetic;
    d.coulomb = l3 * (n * b.coulomb + bump_sum_cross_term(b, N));
    d.e_norm = std::sqrt(d.kinetic + std::sqrt(d.coulomb));
    d.lp_mass = std::pow(l, 2.0 * p - 3.0) * n * b.lp_mass;
    return d;
}

/// Amplitude a at which I(a) = a^2 (A + C a^2 - B a^{p-2}) has the smallest
/// bracket, a^{4-p} = (p - 2) B / (2 C), for a bump of fixed radius, and the
/// energy there. The bracket is negative for some a iff it is negative here.
inline std::pair<double, double> best_bump_amplitude(BumpStats const& unit, Params const& prm)
{
    prm.validate();
    require(prm.p < 4.0, "best_bump_amplitude: needs p < 4");
    require(prm.p == unit.p, "bump statistics were computed for a different p");
    double const A = 0.5 * unit.kinetic + 0.5 * prm.omega * unit.charge;
    double const B = unit.lp_mass / prm.p;
    double const C = 0.25 * prm.lambda * unit.coulomb;
    if (C == 0.0) return {std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity()};
    double const a = std::pow((prm.p - 2.0) * B / (2.0 * C), 1.0 / (4.0 - prm.p));
    return {a, a * a * (A + C * a * a - B * std::pow(a, prm.p - 2.0))};
}

inline std::pair<double, double> best_bump_amplitude(double radius, Params const& prm)
{
    return best_bump_amplitude(cos2_bump_stats(1.0, radius, prm.p), prm);
}

struct BumpWitness {
    bool negative = false;
    double radius = 0.0;
    double amplitude = 0.0;
    double energy = std::numeric_limits<double>::infinity();
};

/// Lowest bracket-optimal energy over the given radii; amplitude and radius
/// enter the unit-bump statistics through exact homogeneity.
inline BumpWitness bump_witness(Params const& prm, std::vector<double> const& radii)
{
    require(!radii.empty(), "empty parameter grid");
    auto const unit = cos2_bump_stats(1.0, 1.0, prm.p);
    BumpWitness best;
    for (double M : radii) {
        require(M > 0.0, "bump radius must be positive");
        BumpStats s = unit;
        s.charge *= M * M * M;
        s.kinetic *= M;
        s.coulomb *= std::pow(M, 5);
        s.lp_mass *= M * M * M;
        s.support_radius = M;
        auto const [a, e] = best_bump_amplitude(s, prm);
        if (e < best.energy) best = {e < 0.0, M, a, e};
    }
    return best;
}

/// Log-spaced radii 10^lo .. 10^hi.
inline std::vector<double> log_radii(double lo, double hi, std::size_t count)
{
    require(count >= 2 && hi > lo, "log_radii: need count >= 2 and hi > lo");
    std::vector<double> r(count);
    for (std::size_t k = 0; k < count; ++k)
        r[k] = std::pow(10.0, lo + (hi - lo) * static_cast<double>(k) / static_cast<double>(count - 1));
    return r;
}

// ---------------------------------------------------------------------------
// Log-weight counterexample
// ---------------------------------------------------------------------------

struct LogCounterexample {
    double r_lo = 0.0;
    double r_hi = 0.0;
    double lhs_trunc = 0.0; ///< int_{r_lo<|x|<r_hi} |f|^{12/5}
    double rhs_trunc = 0.0; ///< int_{r_lo<|x|<r_hi} f^2 |x|^{-1/2} (1 + |log|x||)^{-alpha}
    double lhs_closed = 0.0;
    double rhs_closed = 0.0;
};

namespace detail {

// 4 pi int_{t0}^{t1} (1 + |t|)^{-k} dt in closed form.
inline double log_power_integral(double t0, double t1, double k)
{
    auto G = [k](double T) { // int_0^T (1 + t)^{-k} dt, T >= 0
        return k == 1.0 ? std::log1p(T) : (std::pow(1.0 + T, 1.0 - k) - 1.0) / (1.0 - k);
    };
    auto signed_G = [&](double t) { return t >= 0.0 ? G(t) : -G(-t); };
    return 4.0 * pi * (signed_G(t1) - signed_G(t0));
}

} // namespace detail

/// f(x) = |x|^{-5/4} (1 + |log|x||)^{-beta} in R^3, truncated to r_lo < |x| < r_hi.
/// In t = log r both integrands reduce to powers of (1 + |t|).
inline LogCounterexample log_counterexample_profile(double beta, double alpha, double r_lo, double r_hi)
{
    require(alpha > 0.0, "counterexample: alpha must be positive");
    require(5.0 / 12.0 < (1.0 - alpha) / 2.0,
            "counterexample: admissible beta range (5/12, (1 - alpha)/2] is empty for this alpha");
    require(beta > 5.0 / 12.0 && beta <= (1.0 - alpha) / 2.0, "counterexample: beta outside (5/12, (1 - alpha)/2]");
    require(r_lo > 0.0 && r_lo < 1.0 && r_hi > 1.0, "counterexample: need 0 < r_lo < 1 < r_hi");
    double const t0 = std::log(r_lo), t1 = std::log(r_hi);
    double const kl = 12.0 * beta / 5.0, kr = 2.0 * beta + alpha;
    auto quad = [&](double k) {
        auto f = [k](double t) { return std::pow(1.0 + std::abs(t), -k); };
        return 4.0 * pi * (detail::gk(f, t0, 0.0) + detail::gk(f, 0.0, t1));
    };
    LogCounterexample out;
    out.r_lo = r_lo;
    out.r_hi = r_hi;
    out.lhs_trunc = quad(kl);
    out.rhs_trunc = quad(kr);
    out.lhs_closed = detail::log_power_integral(t0, t1, kl);
    out.rhs_closed = detail::log_power_integral(t0, t1, kr);
    return out;
}

/// The same for the symmetric cutoffs [1/c, c].
inline std::vector<LogCounterexample> log_counterexample_sweep(double beta, double alpha,
                                                               std::vector<double> const& cutoffs)
{
    require(!cutoffs.empty(), "empty parameter grid");
    std::vector<LogCounterexample> out;
    for (double c : cutoffs) out.push_back(log_counterexample_profile(beta, alpha, 1.0 / c, c));
    return out;
}

} // namespace spslab
