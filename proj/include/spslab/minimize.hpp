#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "energy.hpp"
#include "error.hpp"
#include "grid.hpp"

namespace spslab {

struct SolverConfig {
    std::size_t max_iters = 20000;
    double grad_tol = 1e-6; ///< bound on the relative residual
    double armijo_c = 1e-4;
    double backtrack = 0.5;
    double init_step = 1e-2;

    void validate() const
    {
        require(armijo_c > 0.0 && armijo_c < 1.0, "armijo_c must lie in (0, 1)");
        require(backtrack > 0.0 && backtrack < 1.0, "backtrack must lie in (0, 1)");
        require(grad_tol > 0.0, "grad_tol must be positive");
        require(init_step > 0.0, "init_step must be positive");
    }

    static SolverConfig radial_defaults() { return {}; }
    static SolverConfig box_defaults()
    {
        SolverConfig c;
        c.max_iters = 3000;
        return c;
    }
};

template <class Field>
struct MinimizerResult {
    Field field;
    EnergyBreakdown breakdown;
    double residual_norm = 0.0;     ///< ||residual||_2 in the discrete L^2 product
    double relative_residual = 0.0; ///< the convergence measure, see relative_residual()
    std::size_t iters = 0;
    double asymmetry = 0.0;
    bool converged = false;
    std::string status;
};

// ---------------------------------------------------------------------------
// Spherical averages and the asymmetry measure
// ---------------------------------------------------------------------------

/// Shell averages over |x| in [(k-1/2)h, (k+1/2)h), on a radial grid with the
/// box spacing. Empty shells are filled by linear interpolation.
inline RadialField spherical_average(Field3D const& u)
{
    auto const& g = u.grid();
    double const h = g.spacing();
    double const r_far = std::sqrt(3.0) * (g.half_width() + h);
    std::size_t const shells = std::max<std::size_t>(RadialGrid::min_nodes, static_cast<std::size_t>(r_far / h) + 2);
    std::vector<double> sum(shells, 0.0), cnt(shells, 0.0);
    for (std::size_t idx = 0; idx < g.size(); ++idx) {
        auto const k = static_cast<std::size_t>(std::floor(g.radius(idx) / h + 0.5));
        if (k < shells) {
            sum[k] += u[idx];
            cnt[k] += 1.0;
        }
    }
    std::vector<double> avg(shells, 0.0);
    std::vector<std::size_t> filled;
    for (std::size_t k = 0; k < shells; ++k)
        if (cnt[k] > 0.0) {
            avg[k] = sum[k] / cnt[k];
            filled.push_back(k);
        }
    require(!filled.empty(), "spherical_average: no populated shells");
    for (std::size_t k = 0; k < shells; ++k) {
        if (cnt[k] > 0.0) continue;
        auto const hi = std::lower_bound(filled.begin(), filled.end(), k);
        if (hi == filled.begin()) {
            avg[k] = avg[*hi];
        } else if (hi == filled.end()) {
            avg[k] = 0.0; // beyond the box corners
        } else {
            std::size_t const a = *(hi - 1), b = *hi;
            double const t = static_cast<double>(k - a) / static_cast<double>(b - a);
            avg[k] = (1.0 - t) * avg[a] + t * avg[b];
        }
    }
    return RadialField(RadialGrid(shells, static_cast<double>(shells - 1) * h), std::move(avg), false);
}

/// Projection onto lattice-radial fields: every node is replaced by the mean
/// over all nodes at exactly the same distance from the centre.
inline std::vector<double> radial_projection(Field3D const& u)
{
    auto const& g = u.grid();
    std::map<long long, std::pair<double, double>> classes;
    for (std::size_t idx = 0; idx < g.size(); ++idx) {
        auto& c = classes[g.squared_radius_key(idx)];
        c.first += u[idx];
        c.second += 1.0;
    }
    std::vector<double> s(g.size());
    for (std::size_t idx = 0; idx < g.size(); ++idx) {
        auto const& c = classes[g.squared_radius_key(idx)];
        s[idx] = c.first / c.second;
    }
    return s;
}

/// ||u - S u||_2 / ||u||_2 with S the radial projection; lies in [0, 1].
inline double asymmetry(Field3D const& u)
{
    require(!u.is_zero(), "asymmetry: field is identically zero");
    auto const s = radial_projection(u);
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) {
        num += (u[i] - s[i]) * (u[i] - s[i]);
        den += u[i] * u[i];
    }
    return std::sqrt(num / den);
}

// ---------------------------------------------------------------------------
// Projected gradient descent with Armijo backtracking and Barzilai-Borwein steps
// ---------------------------------------------------------------------------

/// Relative residual ||r|| / (||-Lap u|| + ||omega u|| + ||lambda phi u|| + |||u|^{p-1}||):
/// dimensionless and invariant under the exact dilations of the functional.
inline double relative_residual(Evaluation const& ev, double residual_norm)
{
    return ev.residual_scale > 0.0 ? residual_norm / ev.residual_scale : 0.0;
}

/// Steepest descent in the discrete L^2 metric. Steps start from the
/// Barzilai-Borwein length and are backtracked until the Armijo condition
///   E(x - a g) - E(x) <= -c a ||g||^2
/// holds, with the energy change assembled from differences (see
/// energy_difference) so the test stays meaningful near convergence.
template <class Model>
MinimizerResult<typename Model::Field> minimize(Model& model, std::vector<double> x, SolverConfig const& cfg)
{
    cfg.validate();
    require(x.size() == model.size(), "minimize: initial field does not match the model grid");
    for (std::size_t i = 0; i < x.size(); ++i)
        if (!model.is_free(i)) x[i] = 0.0;

    std::vector<double> xt(x.size()), s(x.size()), y(x.size());
    auto ev = model.evaluate(x);
    double alpha = cfg.init_step;
    std::size_t it = 0;
    bool converged = false;
    std::string status = "iteration cap reached";
    double gnorm = std::sqrt(model.inner(ev.residual, ev.residual));
    double amax0 = 0.0;
    for (double v : x) amax0 = std::max(amax0, std::abs(v));

    for (;; ++it) {
        if (gnorm == 0.0 || relative_residual(ev, gnorm) <= cfg.grad_tol) {
            converged = true;
            status = "converged";
            break;
        }
        if (it >= cfg.max_iters) break;

        double const g2 = gnorm * gnorm;
        bool accepted = false;
        Evaluation et;
        while (true) {
            bool moved = false;
            for (std::size_t i = 0; i < x.size(); ++i) {
                xt[i] = x[i] - alpha * ev.residual[i];
                moved = moved || xt[i] != x[i];
            }
            if (!moved) break;
            et = model.evaluate(xt);
            double const dE = model.energy_difference(x, ev, xt, et);
            if (std::isfinite(et.energy.total) && dE < 0.0 && dE <= -cfg.armijo_c * alpha * g2) {
                accepted = true;
                break;
            }
            alpha *= cfg.backtrack;
            if (alpha < 1e-300) break;
        }
        if (!accepted) {
            status = "line search stalled at machine precision";
            break;
        }

        for (std::size_t i = 0; i < x.size(); ++i) {
            s[i] = xt[i] - x[i];
            y[i] = et.residual[i] - ev.residual[i];
        }
        double const ss = model.inner(s, s), sy = model.inner(s, y);
        x.swap(xt);
        ev = std::move(et);
        gnorm = std::sqrt(model.inner(ev.residual, ev.residual));
        alpha = sy > 0.0 ? ss / sy : 2.0 * alpha;

        double amax = 0.0;
        for (double v : x) amax = std::max(amax, std::abs(v));
        if (!std::isfinite(ev.energy.total) || amax > 1e12 * std::max(1.0, amax0)) {
            ++it;
            status = "diverged: energy unbounded below along the descent path";
            break;
        }
        // collapse: the power term is negligible against the quadratic part, so zero attracts
        double const quad = ev.energy.kinetic + ev.energy.mass;
        if (amax < 1e-100 * amax0 ||
            (amax < 1e-6 * amax0 && std::abs(ev.energy.power) <= 1e-3 * quad && quad > 0.0)) {
            ++it;
            std::fill(x.begin(), x.end(), 0.0);
            ev = model.evaluate(x);
            gnorm = 0.0;
            converged = true;
            status = "converged to the zero critical point";
            break;
        }
    }

    MinimizerResult<typename Model::Field> out{model.make_field(std::move(x)), ev.energy, gnorm,
                                               relative_residual(ev, gnorm), it, 0.0, converged, status};
    return out;
}

inline MinimizerResult<RadialField> minimize_radial(Params const& params, RadialField const& init,
                                                    SolverConfig const& cfg = SolverConfig::radial_defaults())
{
    require(init.dirichlet() || init.values().back() == 0.0, "minimize_radial: initial field must vanish at r_max");
    RadialModel model(init.grid(), params);
    return minimize(model, init.values(), cfg);
}

inline MinimizerResult<Field3D> minimize_3d(Params const& params, Field3D const& init,
                                            SolverConfig const& cfg = SolverConfig::box_defaults())
{
    BoxModel model(init.grid(), params, init.mask_radius());
    auto res = minimize(model, init.values(), cfg);
    res.asymmetry = res.field.is_zero() ? 0.0 : asymmetry(res.field);
    return res;
}

// ---------------------------------------------------------------------------
// Initial fields
// ---------------------------------------------------------------------------

/// a exp(-r^2 / (2 s^2)), forced to zero at r_max.
inline RadialField gaussian_radial(RadialGrid const& grid, double amplitude, double width)
{
    std::vector<double> v(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) {
        double const r = grid.node(i) / width;
        v[i] = amplitude * std::exp(-0.5 * r * r);
    }
    return RadialField(grid, std::move(v), true);
}

struct Bump3D {
    std::array<double, 3> centre{0.0, 0.0, 0.0};
    double amplitude = 1.0;
    double width = 1.0;
};

/// Sum of Gaussians a exp(-|x - c|^2 / (2 s^2)).
inline Field3D gaussian_bumps(BoxGrid const& grid, std::vector<Bump3D> const& bumps,
                              std::optional<double> mask_radius = std::nullopt)
{
    return sample_box(
        [&](double x, double y, double z) {
            double s = 0.0;
            for (auto const& b : bumps) {
                double const dx = x - b.centre[0], dy = y - b.centre[1], dz = z - b.centre[2];
                s += b.amplitude * std::exp(-0.5 * (dx * dx + dy * dy + dz * dz) / (b.width * b.width));
            }
            return s;
        },
        grid, mask_radius);
}

/// Random radial start: a sum of 1-3 Gaussian shells with random centres,
/// widths and amplitudes inside [0, 0.8 r_max].
inline RadialField random_radial_start(RadialGrid const& grid, std::mt19937_64& rng, double max_amplitude = 2.0)
{
    std::uniform_int_distribution<int> count(1, 3);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    int const k = count(rng);
    struct Shell {
        double c, s, a;
    };
    std::vector<Shell> shells;
    for (int j = 0; j < k; ++j)
        shells.push_back({0.8 * grid.r_max() * unit(rng) * unit(rng), 0.3 + 0.1 * grid.r_max() * unit(rng),
                          max_amplitude * (0.05 + unit(rng))});
    std::vector<double> v(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) {
        double s = 0.0;
        for (auto const& sh : shells) {
            double const t = (grid.node(i) - sh.c) / sh.s;
            s += sh.a * std::exp(-0.5 * t * t);
        }
        v[i] = s;
    }
    return RadialField(grid, std::move(v), true);
}

} // namespace spslab
