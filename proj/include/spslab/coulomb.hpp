#pragma once

// Coulomb potentials and energies. Convention used throughout the library:
//
//   phi_u = u^2 * (1/|x|)                       (no 1/(4 pi))
//   D(f, g) = int int f(x) g(y) / |x - y| dx dy
//   Coulomb energy of u = D(u^2, u^2) = int phi_u u^2 dx
//
// so -Delta phi_u = 4 pi u^2 and int |grad phi_u|^2 = 4 pi D(u^2, u^2).

#include <cmath>
#include <complex>
#include <cstddef>
#include <memory>
#include <mutex>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <fftw3.h>

#include "error.hpp"
#include "grid.hpp"

namespace spslab {

struct CoulombValue {
    double energy = 0.0;
};

namespace detail {

// Discrete Newton potential of a radial density on the control-volume grid.
// Between distinct shells the kernel is Newton's 1/max(r, s); a shell sees
// itself at 1/r; the central ball of radius h/2 has self-kernel 6/(5 a).
//   phi_i = sum_j W_j rho_j K(r_i, r_j)
// evaluated with one prefix and one suffix sum.
inline std::vector<double> radial_newton_potential(RadialGrid const& g, std::vector<double> const& rho)
{
    std::size_t const n = g.size();
    auto const w = control_volumes(g);
    double const a = 0.5 * g.spacing();

    std::vector<double> outer(n + 1, 0.0); // outer[i] = sum_{j >= i, j >= 1} W_j rho_j / r_j
    for (std::size_t j = n; j-- > 1;) outer[j] = outer[j + 1] + w[j] * rho[j] / g.node(j);
    outer[0] = outer[1];

    std::vector<double> phi(n);
    phi[0] = w[0] * rho[0] * 6.0 / (5.0 * a) + outer[1];
    double inner = w[0] * rho[0]; // sum_{j <= i} W_j rho_j
    for (std::size_t i = 1; i < n; ++i) {
        inner += w[i] * rho[i];
        phi[i] = inner / g.node(i) + outer[i + 1];
    }
    return phi;
}

inline std::vector<double> squares(std::vector<double> const& u)
{
    std::vector<double> rho(u.size());
    for (std::size_t i = 0; i < u.size(); ++i) rho[i] = u[i] * u[i];
    return rho;
}

} // namespace detail

/// phi_u at every node; phi(0) is the limit 4 pi int u^2(s) s ds.
inline RadialField radial_potential(RadialField const& u)
{
    return RadialField(u.grid(), detail::radial_newton_potential(u.grid(), detail::squares(u.values())), false);
}

/// D(f, g) = 16 pi^2 int int f(r) g(s) r s min(r, s) dr ds for radial densities.
inline double coulomb_bilinear_radial(RadialField const& f, RadialField const& g)
{
    require(f.grid() == g.grid(), "coulomb_bilinear_radial: fields live on different grids");
    for (std::size_t i = 0; i < f.size(); ++i)
        require(f[i] >= 0.0 && g[i] >= 0.0, "coulomb_bilinear_radial: densities must be nonnegative");
    auto const phi = detail::radial_newton_potential(f.grid(), g.values());
    auto const w = control_volumes(f.grid());
    double s = 0.0;
    for (std::size_t i = 0; i < f.size(); ++i) s += w[i] * f[i] * phi[i];
    return s;
}

inline CoulombValue coulomb_energy_radial(RadialField const& u)
{
    auto const rho = detail::squares(u.values());
    auto const phi = detail::radial_newton_potential(u.grid(), rho);
    auto const w = control_volumes(u.grid());
    double s = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) s += w[i] * rho[i] * phi[i];
    return {s};
}

/// T(u) = D(u^2, u^2)^{1/4}.
inline double quarter_power_norm(RadialField const& u) { return std::pow(coulomb_energy_radial(u).energy, 0.25); }

/// int_{[-1/2,1/2]^3} dx / |x|, the cell-averaged value of 1/|x| on a unit cell.
/// Reduced to 3 int_0^1 asinh(1/sqrt(1+t^2)) dt by splitting the cube into six pyramids.
inline double unit_cell_inverse_distance()
{
    static double const value = [] {
        auto f = [](double t) { return std::asinh(1.0 / std::sqrt(1.0 + t * t)); };
        return 3.0 * boost::math::quadrature::gauss_kronrod<double, 31>::integrate(f, 0.0, 1.0, 15, 1e-15);
    }();
    return value;
}

namespace detail {

inline std::mutex& fftw_planner_mutex()
{
    static std::mutex m;
    return m;
}

struct FftwFree {
    void operator()(void* p) const { fftw_free(p); }
};

} // namespace detail

/// Free-space solver phi = h^3 sum_j G(x_i - x_j) rho_j on a BoxGrid, by
/// zero-padded cyclic convolution on a (2n)^3 grid. G(d) = 1/|d| off the
/// origin and c/h at the origin, c = unit_cell_inverse_distance().
///
/// One instance owns its plans and buffers; it is not safe to share one
/// instance between threads, but separate instances are independent.
class FreeSpacePoisson {
public:
    explicit FreeSpacePoisson(BoxGrid grid) : grid_(grid), m_(2 * grid.n())
    {
        std::size_t const m = m_;
        real_size_ = m * m * m;
        complex_size_ = m * m * (m / 2 + 1);
        real_.reset(static_cast<double*>(fftw_malloc(sizeof(double) * real_size_)));
        spec_.reset(static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * complex_size_)));
        kernel_.assign(complex_size_, std::complex<double>(0.0, 0.0));
        require(real_ && spec_, "FreeSpacePoisson: allocation failed");
        {
            std::lock_guard<std::mutex> lock(detail::fftw_planner_mutex());
            int const dim = static_cast<int>(m);
            forward_ = fftw_plan_dft_r2c_3d(dim, dim, dim, real_.get(), spec_.get(), FFTW_ESTIMATE);
            backward_ = fftw_plan_dft_c2r_3d(dim, dim, dim, spec_.get(), real_.get(), FFTW_ESTIMATE);
        }
        require(forward_ && backward_, "FreeSpacePoisson: FFTW planning failed");
        build_kernel();
    }

    FreeSpacePoisson(FreeSpacePoisson const&) = delete;
    FreeSpacePoisson& operator=(FreeSpacePoisson const&) = delete;

    ~FreeSpacePoisson()
    {
        std::lock_guard<std::mutex> lock(detail::fftw_planner_mutex());
        if (forward_) fftw_destroy_plan(forward_);
        if (backward_) fftw_destroy_plan(backward_);
    }

    BoxGrid const& grid() const { return grid_; }

    /// Potential of the density rho (one value per node of the box).
    std::vector<double> potential(std::vector<double> const& rho)
    {
        std::size_t const n = grid_.n(), m = m_;
        require(rho.size() == grid_.size(), "FreeSpacePoisson: density size mismatch");
        std::fill(real_.get(), real_.get() + real_size_, 0.0);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j)
                for (std::size_t k = 0; k < n; ++k) real_.get()[(i * m + j) * m + k] = rho[grid_.index(i, j, k)];
        fftw_execute_dft_r2c(forward_, real_.get(), spec_.get());
        for (std::size_t q = 0; q < complex_size_; ++q) {
            std::complex<double> const z(spec_.get()[q][0], spec_.get()[q][1]);
            auto const prod = z * kernel_[q];
            spec_.get()[q][0] = prod.real();
            spec_.get()[q][1] = prod.imag();
        }
        fftw_execute_dft_c2r(backward_, spec_.get(), real_.get());
        std::vector<double> phi(grid_.size());
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j)
                for (std::size_t k = 0; k < n; ++k) phi[grid_.index(i, j, k)] = real_.get()[(i * m + j) * m + k];
        return phi;
    }

private:
    void build_kernel()
    {
        std::size_t const n = grid_.n(), m = m_;
        double const h = grid_.spacing();
        double const h3 = grid_.cell_volume();
        double const scale = h3 / static_cast<double>(real_size_); // FFTW transforms are unnormalised
        auto offset = [&](std::size_t q) {
            return q < n ? static_cast<double>(q) : static_cast<double>(q) - static_cast<double>(m);
        };
        for (std::size_t i = 0; i < m; ++i)
            for (std::size_t j = 0; j < m; ++j)
                for (std::size_t k = 0; k < m; ++k) {
                    double const dx = offset(i), dy = offset(j), dz = offset(k);
                    double const d = std::sqrt(dx * dx + dy * dy + dz * dz);
                    double const green = d == 0.0 ? unit_cell_inverse_distance() / h : 1.0 / (h * d);
                    real_.get()[(i * m + j) * m + k] = green * scale;
                }
        fftw_execute_dft_r2c(forward_, real_.get(), spec_.get());
        for (std::size_t q = 0; q < complex_size_; ++q) kernel_[q] = std::complex<double>(spec_.get()[q][0], spec_.get()[q][1]);
    }

    BoxGrid grid_;
    std::size_t m_;
    std::size_t real_size_ = 0;
    std::size_t complex_size_ = 0;
    std::unique_ptr<double, detail::FftwFree> real_;
    std::unique_ptr<fftw_complex, detail::FftwFree> spec_;
    std::vector<std::complex<double>> kernel_;
    fftw_plan forward_ = nullptr;
    fftw_plan backward_ = nullptr;
};

inline Field3D potential_3d(Field3D const& u)
{
    FreeSpacePoisson solver(u.grid());
    auto phi = solver.potential(detail::squares(u.values()));
    return Field3D(u.grid(), std::move(phi));
}

inline CoulombValue coulomb_energy_3d(Field3D const& u, FreeSpacePoisson& solver)
{
    require(solver.grid() == u.grid(), "coulomb_energy_3d: solver built for another grid");
    auto const rho = detail::squares(u.values());
    auto const phi = solver.potential(rho);
    double s = 0.0;
    for (std::size_t i = 0; i < rho.size(); ++i) s += rho[i] * phi[i];
    return {s * u.grid().cell_volume()};
}

inline CoulombValue coulomb_energy_3d(Field3D const& u)
{
    FreeSpacePoisson solver(u.grid());
    return coulomb_energy_3d(u, solver);
}

} // namespace spslab
