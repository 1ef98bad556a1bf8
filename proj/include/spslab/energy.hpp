#pragma once

// Energy functionals
//
//   I(u) = 1/2 int |grad u|^2 + omega/2 int u^2 + lambda/4 D(u^2, u^2) - 1/p int |u|^p
//
// with omega = 1 for the original problem, omega = eps^2 after the blow-up
// rescaling (J_eps) and omega = 0 for the zero-mass limit J (lambda = 1).
//
// Both discretizations are variationally consistent: `residual` is the exact
// gradient of the discrete energy with respect to the discrete L^2 product
// `inner`, so finite differences of the energy reproduce it to rounding.

#include <cmath>
#include <cstddef>
#include <limits>
#include <memory>
#include <optional>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "coulomb.hpp"
#include "error.hpp"
#include "grid.hpp"

namespace spslab {

struct Params {
    double p = 2.8;
    double lambda = 1.0;
    double omega = 1.0;
    double R = std::numeric_limits<double>::infinity(); ///< Dirichlet ball radius

    void validate() const
    {
        require(p > 2.0 && p <= 6.0, "power exponent p must lie in (2, 6]");
        require(lambda >= 0.0, "coupling lambda must be nonnegative");
        require(omega >= 0.0, "mass coefficient omega must be nonnegative");
        require(R > 0.0, "domain radius must be positive");
    }

    /// Zero-mass limit functional J.
    static Params limit(double p) { return {p, 1.0, 0.0, std::numeric_limits<double>::infinity()}; }
};

struct EnergyBreakdown {
    double kinetic = 0.0; ///< 1/2 int |grad u|^2
    double mass = 0.0;    ///< omega/2 int u^2
    double coulomb = 0.0; ///< lambda/4 D(u^2, u^2)
    double power = 0.0;   ///< -1/p int |u|^p
    double total = 0.0;

    static EnergyBreakdown from_terms(double kin, double mass, double coul, double pow)
    {
        return {kin, mass, coul, pow, kin + mass + coul + pow};
    }
};

inline std::string energy_csv_header() { return "kinetic,mass,coulomb,power,total,p,lambda,omega,R"; }

inline void write_csv_row(std::ostream& os, EnergyBreakdown const& e, Params const& prm)
{
    auto const old = os.precision(17);
    os << e.kinetic << ',' << e.mass << ',' << e.coulomb << ',' << e.power << ',' << e.total << ',' << prm.p << ','
       << prm.lambda << ',' << prm.omega << ',' << prm.R << '\n';
    os.precision(old);
}

namespace detail {

inline double signed_power(double u, double p)
{
    // |u|^{p-2} u, continuous at 0 for p > 2.
    return u == 0.0 ? 0.0 : std::copysign(std::pow(std::abs(u), p - 1.0), u);
}

} // namespace detail

/// Result of one evaluation of a discrete functional.
struct Evaluation {
    EnergyBreakdown energy;
    std::vector<double> residual;  ///< W-gradient, zero on constrained nodes
    std::vector<double> potential; ///< phi_u (empty when lambda = 0)
    double residual_scale = 0.0;   ///< sum of the norms of the four residual terms
};

namespace detail {

// |v|^p - |u|^p without cancellation when v is close to u.
inline double power_difference(double u, double v, double p)
{
    double const au = std::abs(u), av = std::abs(v);
    if (au == 0.0 || (u > 0.0) != (v > 0.0)) return std::pow(av, p) - std::pow(au, p);
    return std::pow(au, p) * std::expm1(p * std::log1p((av - au) / au));
}

} // namespace detail

// ---------------------------------------------------------------------------
// Radial discretization
// ---------------------------------------------------------------------------

class RadialModel {
public:
    using Field = RadialField;

    RadialModel(RadialGrid grid, Params params)
        : grid_(grid), params_(params), vol_(control_volumes(grid)), face_(face_weights(grid))
    {
        params_.validate();
        free_.resize(grid_.size());
        for (std::size_t i = 0; i < grid_.size(); ++i)
            free_[i] = (i + 1 < grid_.size()) && grid_.node(i) < params_.R;
    }

    RadialGrid const& grid() const { return grid_; }
    Params const& params() const { return params_; }
    std::size_t size() const { return grid_.size(); }
    bool is_free(std::size_t i) const { return free_[i]; }
    std::vector<double> const& volumes() const { return vol_; }

    Field make_field(std::vector<double> v) const { return RadialField(grid_, std::move(v), true); }

    double inner(std::vector<double> const& a, std::vector<double> const& b) const
    {
        double s = 0.0;
        for (std::size_t i = 0; i < a.size(); ++i)
            if (free_[i]) s += vol_[i] * a[i] * b[i];
        return s;
    }

    double dirichlet_integral(std::vector<double> const& u) const
    {
        double const h = grid_.spacing();
        double s = 0.0;
        for (std::size_t i = 0; i + 1 < u.size(); ++i) {
            double const d = u[i + 1] - u[i];
            s += face_[i] * d * d / h;
        }
        return s;
    }

    EnergyBreakdown energy(std::vector<double> const& u) const { return evaluate(u, false).energy; }

    EnergyBreakdown energy_and_residual(std::vector<double> const& u, std::vector<double>& res) const
    {
        auto ev = evaluate(u, true);
        res = std::move(ev.residual);
        return ev.energy;
    }

    Evaluation evaluate(std::vector<double> const& u, bool with_residual = true) const
    {
        std::size_t const n = u.size();
        require(n == grid_.size(), "radial model: field size mismatch");
        double const p = params_.p;
        Evaluation ev;
        auto const rho = detail::squares(u);
        double coul = 0.0;
        if (params_.lambda != 0.0) {
            ev.potential = detail::radial_newton_potential(grid_, rho);
            for (std::size_t i = 0; i < n; ++i) coul += vol_[i] * rho[i] * ev.potential[i];
        }
        double l2 = 0.0, lp = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            l2 += vol_[i] * rho[i];
            lp += vol_[i] * std::pow(std::abs(u[i]), p);
        }
        ev.energy = EnergyBreakdown::from_terms(0.5 * dirichlet_integral(u), 0.5 * params_.omega * l2,
                                                0.25 * params_.lambda * coul, -lp / p);
        if (!with_residual) return ev;

        double const h = grid_.spacing();
        ev.residual.assign(n, 0.0);
        double nk = 0.0, nm = 0.0, nc = 0.0, np = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            if (!free_[i]) continue;
            double lap = 0.0;
            if (i > 0) lap += face_[i - 1] * (u[i] - u[i - 1]);
            if (i + 1 < n) lap += face_[i] * (u[i] - u[i + 1]);
            double const tk = lap / (h * vol_[i]);
            double const tm = params_.omega * u[i];
            double const tc = ev.potential.empty() ? 0.0 : params_.lambda * ev.potential[i] * u[i];
            double const tp = detail::signed_power(u[i], p);
            ev.residual[i] = tk + tm + tc - tp;
            nk += vol_[i] * tk * tk;
            nm += vol_[i] * tm * tm;
            nc += vol_[i] * tc * tc;
            np += vol_[i] * tp * tp;
        }
        ev.residual_scale = std::sqrt(nk) + std::sqrt(nm) + std::sqrt(nc) + std::sqrt(np);
        return ev;
    }

    /// E(v) - E(u), assembled from differences so that it stays accurate when
    /// it is many orders of magnitude below E itself.
    double energy_difference(std::vector<double> const& u, Evaluation const& eu, std::vector<double> const& v,
                             Evaluation const& evv) const
    {
        std::size_t const n = u.size();
        double const h = grid_.spacing(), p = params_.p;
        double kin = 0.0;
        for (std::size_t i = 0; i + 1 < n; ++i) {
            double const du = u[i + 1] - u[i], dv = v[i + 1] - v[i];
            kin += face_[i] * ((v[i + 1] - u[i + 1]) - (v[i] - u[i])) * (du + dv) / h;
        }
        double mass = 0.0, coul = 0.0, pw = 0.0;
        bool const coulomb = !eu.potential.empty();
        for (std::size_t i = 0; i < n; ++i) {
            double const drho = (v[i] - u[i]) * (v[i] + u[i]);
            mass += vol_[i] * drho;
            if (coulomb) coul += vol_[i] * drho * (eu.potential[i] + evv.potential[i]);
            pw += vol_[i] * detail::power_difference(u[i], v[i], p);
        }
        return 0.5 * kin + 0.5 * params_.omega * mass + 0.25 * params_.lambda * coul - pw / p;
    }

private:
    RadialGrid grid_;
    Params params_;
    std::vector<double> vol_;
    std::vector<double> face_;
    std::vector<bool> free_;
};

// ---------------------------------------------------------------------------
// Box discretization (7-point Laplacian, zero outside the box)
// ---------------------------------------------------------------------------

class BoxModel {
public:
    using Field = Field3D;

    BoxModel(BoxGrid grid, Params params, std::optional<double> mask_radius = std::nullopt)
        : grid_(grid), params_(params), mask_(mask_radius)
    {
        params_.validate();
        if (!mask_ && std::isfinite(params_.R)) mask_ = params_.R;
        free_.resize(grid_.size());
        for (std::size_t idx = 0; idx < grid_.size(); ++idx) free_[idx] = !mask_ || grid_.radius(idx) < *mask_;
        if (params_.lambda != 0.0) solver_ = std::make_unique<FreeSpacePoisson>(grid_);
    }

    BoxGrid const& grid() const { return grid_; }
    Params const& params() const { return params_; }
    std::optional<double> mask_radius() const { return mask_; }
    std::size_t size() const { return grid_.size(); }
    bool is_free(std::size_t i) const { return free_[i]; }

    Field make_field(std::vector<double> v) const { return Field3D(grid_, std::move(v), mask_); }

    double inner(std::vector<double> const& a, std::vector<double> const& b) const
    {
        double s = 0.0;
        for (std::size_t i = 0; i < a.size(); ++i)
            if (free_[i]) s += a[i] * b[i];
        return s * grid_.cell_volume();
    }

    /// sum over all edges (including those to the zero exterior) of h (u_a - u_b)^2.
    template <class Diff>
    double edge_sum(Diff&& f) const
    {
        std::size_t const n = grid_.n();
        double s = 0.0;
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j)
                for (std::size_t k = 0; k < n; ++k) {
                    std::size_t const c = grid_.index(i, j, k);
                    s += f(c, i + 1 < n ? grid_.index(i + 1, j, k) : npos);
                    s += f(c, j + 1 < n ? grid_.index(i, j + 1, k) : npos);
                    s += f(c, k + 1 < n ? grid_.index(i, j, k + 1) : npos);
                    if (i == 0) s += f(c, npos);
                    if (j == 0) s += f(c, npos);
                    if (k == 0) s += f(c, npos);
                }
        return s * grid_.spacing();
    }

    double dirichlet_integral(std::vector<double> const& u) const
    {
        return edge_sum([&](std::size_t a, std::size_t b) {
            double const d = (b == npos ? 0.0 : u[b]) - u[a];
            return d * d;
        });
    }

    EnergyBreakdown energy(std::vector<double> const& u) { return evaluate(u, false).energy; }

    EnergyBreakdown energy_and_residual(std::vector<double> const& u, std::vector<double>& res)
    {
        auto ev = evaluate(u, true);
        res = std::move(ev.residual);
        return ev.energy;
    }

    Evaluation evaluate(std::vector<double> const& u, bool with_residual = true)
    {
        require(u.size() == grid_.size(), "box model: field size mismatch");
        double const p = params_.p;
        double const h3 = grid_.cell_volume();
        Evaluation ev;
        double coul = 0.0;
        if (solver_) {
            auto const rho = detail::squares(u);
            ev.potential = solver_->potential(rho);
            for (std::size_t i = 0; i < u.size(); ++i) coul += rho[i] * ev.potential[i];
            coul *= h3;
        }
        double l2 = 0.0, lp = 0.0;
        for (double x : u) {
            l2 += x * x;
            lp += std::pow(std::abs(x), p);
        }
        ev.energy = EnergyBreakdown::from_terms(0.5 * dirichlet_integral(u), 0.5 * params_.omega * l2 * h3,
                                                0.25 * params_.lambda * coul, -lp * h3 / p);
        if (!with_residual) return ev;

        std::size_t const n = grid_.n();
        double const ih2 = 1.0 / (grid_.spacing() * grid_.spacing());
        ev.residual.assign(u.size(), 0.0);
        double nk = 0.0, nm = 0.0, nc = 0.0, np = 0.0;
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j)
                for (std::size_t k = 0; k < n; ++k) {
                    std::size_t const idx = grid_.index(i, j, k);
                    if (!free_[idx]) continue;
                    double nb = 0.0;
                    if (i > 0) nb += u[grid_.index(i - 1, j, k)];
                    if (i + 1 < n) nb += u[grid_.index(i + 1, j, k)];
                    if (j > 0) nb += u[grid_.index(i, j - 1, k)];
                    if (j + 1 < n) nb += u[grid_.index(i, j + 1, k)];
                    if (k > 0) nb += u[grid_.index(i, j, k - 1)];
                    if (k + 1 < n) nb += u[grid_.index(i, j, k + 1)];
                    double const tk = (6.0 * u[idx] - nb) * ih2;
                    double const tm = params_.omega * u[idx];
                    double const tc = ev.potential.empty() ? 0.0 : params_.lambda * ev.potential[idx] * u[idx];
                    double const tp = detail::signed_power(u[idx], p);
                    ev.residual[idx] = tk + tm + tc - tp;
                    nk += tk * tk;
                    nm += tm * tm;
                    nc += tc * tc;
                    np += tp * tp;
                }
        ev.residual_scale = std::sqrt(h3) * (std::sqrt(nk) + std::sqrt(nm) + std::sqrt(nc) + std::sqrt(np));
        return ev;
    }

    double energy_difference(std::vector<double> const& u, Evaluation const& eu, std::vector<double> const& v,
                             Evaluation const& evv) const
    {
        double const p = params_.p, h3 = grid_.cell_volume();
        double const kin = edge_sum([&](std::size_t a, std::size_t b) {
            double const ub = b == npos ? 0.0 : u[b], vb = b == npos ? 0.0 : v[b];
            return ((vb - ub) - (v[a] - u[a])) * ((ub - u[a]) + (vb - v[a]));
        });
        double mass = 0.0, coul = 0.0, pw = 0.0;
        bool const coulomb = !eu.potential.empty();
        for (std::size_t i = 0; i < u.size(); ++i) {
            double const drho = (v[i] - u[i]) * (v[i] + u[i]);
            mass += drho;
            if (coulomb) coul += drho * (eu.potential[i] + evv.potential[i]);
            pw += detail::power_difference(u[i], v[i], p);
        }
        return 0.5 * kin + h3 * (0.5 * params_.omega * mass + 0.25 * params_.lambda * coul - pw / p);
    }

private:
    static constexpr std::size_t npos = static_cast<std::size_t>(-1);

    BoxGrid grid_;
    Params params_;
    std::optional<double> mask_;
    std::vector<bool> free_;
    std::unique_ptr<FreeSpacePoisson> solver_;
};

// ---------------------------------------------------------------------------
// Free functions
// ---------------------------------------------------------------------------

inline EnergyBreakdown eval_I(RadialField const& u, Params const& params)
{
    return RadialModel(u.grid(), params).energy(u.values());
}

inline EnergyBreakdown eval_I(Field3D const& u, Params const& params)
{
    return BoxModel(u.grid(), params, u.mask_radius()).energy(u.values());
}

inline EnergyBreakdown eval_J(RadialField const& v, double p) { return eval_I(v, Params::limit(p)); }

inline RadialField residual(RadialField const& u, Params const& params)
{
    RadialModel model(u.grid(), params);
    std::vector<double> res;
    model.energy_and_residual(u.values(), res);
    return RadialField(u.grid(), std::move(res), false);
}

inline Field3D residual(Field3D const& u, Params const& params)
{
    BoxModel model(u.grid(), params, u.mask_radius());
    std::vector<double> res;
    model.energy_and_residual(u.values(), res);
    return Field3D(u.grid(), std::move(res), u.mask_radius());
}

/// int |grad u|^2 on the discretization's own stencil.
inline double dirichlet_integral(RadialField const& u)
{
    return RadialModel(u.grid(), Params::limit(3.0)).dirichlet_integral(u.values());
}

inline double dirichlet_integral(Field3D const& u)
{
    auto prm = Params::limit(3.0);
    prm.lambda = 0.0;
    return BoxModel(u.grid(), prm, u.mask_radius()).dirichlet_integral(u.values());
}

/// M(u) = int |grad u|^2 + D(u^2, u^2).
inline double m_functional(RadialField const& u) { return dirichlet_integral(u) + coulomb_energy_radial(u).energy; }

inline double m_functional(Field3D const& u) { return dirichlet_integral(u) + coulomb_energy_3d(u).energy; }

/// ||u||_E = (int |grad u|^2 + D(u^2, u^2)^{1/2})^{1/2}.
inline double e_norm(RadialField const& u)
{
    return std::sqrt(dirichlet_integral(u) + std::sqrt(coulomb_energy_radial(u).energy));
}

inline double e_norm(Field3D const& u)
{
    return std::sqrt(dirichlet_integral(u) + std::sqrt(coulomb_energy_3d(u).energy));
}

/// v(x) = s^2 u(s x): same samples times s^2 on the grid shrunk by 1/s.
/// Exact on the grid, so every scaling identity holds to rounding.
inline RadialField dilate(RadialField const& u, double s)
{
    require(s > 0.0, "dilate: factor must be positive");
    std::vector<double> v = u.values();
    for (double& x : v) x *= s * s;
    return RadialField(u.grid().scaled(1.0 / s), std::move(v), u.dirichlet());
}

inline Field3D dilate(Field3D const& u, double s)
{
    require(s > 0.0, "dilate: factor must be positive");
    std::vector<double> v = u.values();
    for (double& x : v) x *= s * s;
    std::optional<double> mask;
    if (u.mask_radius()) mask = *u.mask_radius() / s;
    return Field3D(u.grid().scaled(1.0 / s), std::move(v), mask);
}

/// eps = lambda^{(p-2)/(4(3-p))}.
inline double limit_scale(double lambda, double p)
{
    require(p > 2.0 && p < 3.0, "the blow-up rescaling needs p in (2, 3)");
    require(lambda > 0.0, "the blow-up rescaling needs lambda > 0");
    return std::pow(lambda, (p - 2.0) / (4.0 * (3.0 - p)));
}

/// Exponent k in J_eps(v) = eps^k I_lambda(u): k = (6-p)/(p-2).
inline double limit_energy_exponent(double p) { return (6.0 - p) / (p - 2.0); }

struct LimitScaling {
    RadialField v;
    double eps;
};

/// v(x) = eps^{2/(p-2)} u(eps x); v lives on the grid stretched by 1/eps.
/// J_eps(v) (omega = eps^2, lambda = 1) equals eps^{(6-p)/(p-2)} I_lambda(u).
inline LimitScaling scale_to_limit(RadialField const& u, double lambda, double p)
{
    double const eps = limit_scale(lambda, p);
    double const amp = std::pow(eps, 2.0 / (p - 2.0));
    std::vector<double> v = u.values();
    for (double& x : v) x *= amp;
    return {RadialField(u.grid().scaled(1.0 / eps), std::move(v), u.dirichlet()), eps};
}

/// Inverse of scale_to_limit: u(x) = eps^{-2/(p-2)} v(x/eps).
inline RadialField scale_from_limit(RadialField const& v, double lambda, double p)
{
    double const eps = limit_scale(lambda, p);
    double const amp = std::pow(eps, -2.0 / (p - 2.0));
    std::vector<double> u = v.values();
    for (double& x : u) x *= amp;
    return RadialField(v.grid().scaled(eps), std::move(u), v.dirichlet());
}

/// Parameters of J_eps for a given eps.
inline Params rescaled_params(double eps, double p)
{
    return {p, 1.0, eps * eps, std::numeric_limits<double>::infinity()};
}

} // namespace spslab
