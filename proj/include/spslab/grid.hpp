#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <fstream>
#include <functional>
#include <iomanip>
#include <limits>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "error.hpp"

namespace spslab {

inline constexpr double pi = std::numbers::pi;

// ---------------------------------------------------------------------------
// Radial grid: r_i = i*h, i = 0..n-1, r_{n-1} = r_max.
// ---------------------------------------------------------------------------

class RadialGrid {
public:
    static constexpr std::size_t min_nodes = 16;

    RadialGrid(std::size_t n, double r_max) : n_(n), r_max_(r_max)
    {
        require(n >= min_nodes, "n too small: radial grid needs at least 16 nodes");
        require(std::isfinite(r_max) && r_max > 0.0, "r_max must be positive");
        h_ = r_max / static_cast<double>(n - 1);
    }

    std::size_t size() const { return n_; }
    double r_max() const { return r_max_; }
    double spacing() const { return h_; }

    double node(std::size_t i) const
    {
        return i + 1 == n_ ? r_max_ : static_cast<double>(i) * h_;
    }

    std::vector<double> nodes() const
    {
        std::vector<double> r(n_);
        for (std::size_t i = 0; i < n_; ++i) r[i] = node(i);
        return r;
    }

    /// Same node count, every radius multiplied by `factor`.
    RadialGrid scaled(double factor) const { return RadialGrid(n_, r_max_ * factor); }

    bool operator==(RadialGrid const& o) const { return n_ == o.n_ && r_max_ == o.r_max_; }

private:
    std::size_t n_;
    double r_max_;
    double h_;
};

inline RadialGrid make_radial_grid(std::size_t n, double r_max) { return RadialGrid(n, r_max); }

/// Shell volumes of the dual cells [r_{i-1/2}, r_{i+1/2}] (the first cell is the
/// ball of radius h/2, the last one is the half cell ending at r_max). They sum
/// to the volume of the ball of radius r_max.
inline std::vector<double> control_volumes(RadialGrid const& g)
{
    std::size_t const n = g.size();
    double const h = g.spacing();
    std::vector<double> w(n);
    auto ball = [](double r) { return 4.0 * pi / 3.0 * r * r * r; };
    double lo = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        double const hi = (i + 1 == n) ? g.r_max() : (static_cast<double>(i) + 0.5) * h;
        w[i] = ball(hi) - ball(lo);
        lo = hi;
    }
    return w;
}

/// Weights 4*pi*(r_{i+1}^3 - r_i^3)/(3h) of the face differences (u_{i+1}-u_i)/h:
/// with them the discrete Dirichlet integral is exact for piecewise linear u.
inline std::vector<double> face_weights(RadialGrid const& g)
{
    std::size_t const n = g.size();
    double const h = g.spacing();
    std::vector<double> a(n - 1);
    for (std::size_t i = 0; i + 1 < n; ++i) {
        double const r0 = g.node(i), r1 = g.node(i + 1);
        a[i] = 4.0 * pi * (r1 * r1 * r1 - r0 * r0 * r0) / (3.0 * h);
    }
    return a;
}

class RadialField {
public:
    RadialField(RadialGrid grid, std::vector<double> values, bool dirichlet = false)
        : grid_(grid), values_(std::move(values)), dirichlet_(dirichlet)
    {
        require(values_.size() == grid_.size(), "radial field: value count does not match grid");
        for (std::size_t i = 0; i < values_.size(); ++i)
            require(std::isfinite(values_[i]),
                    "radial field: non-finite value at node " + std::to_string(i));
        if (dirichlet_) values_.back() = 0.0;
    }

    static RadialField zeros(RadialGrid grid, bool dirichlet = true)
    {
        return RadialField(grid, std::vector<double>(grid.size(), 0.0), dirichlet);
    }

    RadialGrid const& grid() const { return grid_; }
    std::vector<double> const& values() const { return values_; }
    double operator[](std::size_t i) const { return values_[i]; }
    std::size_t size() const { return values_.size(); }
    bool dirichlet() const { return dirichlet_; }

    RadialField with_values(std::vector<double> v) const { return RadialField(grid_, std::move(v), dirichlet_); }

    bool is_zero() const
    {
        return std::all_of(values_.begin(), values_.end(), [](double x) { return x == 0.0; });
    }

private:
    RadialGrid grid_;
    std::vector<double> values_;
    bool dirichlet_;
};

/// values[i] = profile(r_i). The result is flagged Dirichlet when the profile
/// vanishes at r_max.
inline RadialField sample_radial(std::function<double(double)> const& profile, RadialGrid const& grid)
{
    std::vector<double> v(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) {
        double const r = grid.node(i);
        v[i] = profile(r);
        if (!std::isfinite(v[i])) {
            std::ostringstream os;
            os << "sample_radial: non-finite profile value at node " << i << " (r = " << r << ")";
            throw Error(os.str());
        }
    }
    bool const dirichlet = v.back() == 0.0;
    return RadialField(grid, std::move(v), dirichlet);
}

/// Composite trapezoid value of int_0^{r_max} f(r) r^k dr, k in {0,1,2,3}.
inline double integrate_radial(RadialField const& f, int k)
{
    require(k >= 0 && k <= 3, "integrate_radial: weight exponent must be in {0,1,2,3}");
    auto const& g = f.grid();
    double const h = g.spacing();
    double sum = 0.0;
    for (std::size_t i = 0; i < f.size(); ++i) {
        double const r = g.node(i);
        double const wt = (i == 0 || i + 1 == f.size()) ? 0.5 * h : h;
        sum += wt * f[i] * std::pow(r, k);
    }
    return sum;
}

/// Volume integral 4*pi*int f r^2 dr by the control-volume rule used by all
/// energy functionals.
inline double integrate_volume(RadialField const& f)
{
    auto const w = control_volumes(f.grid());
    double s = 0.0;
    for (std::size_t i = 0; i < f.size(); ++i) s += w[i] * f[i];
    return s;
}

inline void write_csv(RadialField const& f, std::ostream& os)
{
    os << "r,value\n" << std::setprecision(17);
    for (std::size_t i = 0; i < f.size(); ++i) os << f.grid().node(i) << ',' << f[i] << '\n';
}

inline void write_csv(RadialField const& f, std::string const& path)
{
    std::ofstream os(path);
    require(bool(os), "cannot open " + path + " for writing");
    write_csv(f, os);
}

/// Reads the two-column CSV written by write_csv; the nodes must form a uniform grid from 0.
inline RadialField read_radial_csv(std::istream& is)
{
    std::string line;
    std::getline(is, line);
    require(line == "r,value", "radial csv: missing header");
    std::vector<double> r, v;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        auto const comma = line.find(',');
        require(comma != std::string::npos, "radial csv: malformed row");
        r.push_back(std::stod(line.substr(0, comma)));
        v.push_back(std::stod(line.substr(comma + 1)));
    }
    require(r.size() >= RadialGrid::min_nodes, "radial csv: too few rows");
    require(r.front() == 0.0, "radial csv: first node must be r = 0");
    RadialGrid grid(r.size(), r.back());
    for (std::size_t i = 0; i < r.size(); ++i)
        require(std::abs(r[i] - grid.node(i)) <= 1e-9 * grid.r_max(), "radial csv: nodes are not uniform");
    return RadialField(grid, std::move(v), v.back() == 0.0);
}

// ---------------------------------------------------------------------------
// Box grid on [-L, L]^3, n nodes per axis.
// ---------------------------------------------------------------------------

class BoxGrid {
public:
    static constexpr std::size_t min_nodes = 16;

    BoxGrid(std::size_t n, double half_width) : n_(n), L_(half_width)
    {
        require(n >= min_nodes, "n too small: box grid needs at least 16 nodes per axis");
        require(std::isfinite(half_width) && half_width > 0.0, "box half-width must be positive");
        h_ = 2.0 * L_ / static_cast<double>(n - 1);
    }

    std::size_t n() const { return n_; }
    std::size_t size() const { return n_ * n_ * n_; }
    double half_width() const { return L_; }
    double spacing() const { return h_; }
    double cell_volume() const { return h_ * h_ * h_; }

    double coord(std::size_t i) const { return -L_ + static_cast<double>(i) * h_; }
    std::size_t index(std::size_t i, std::size_t j, std::size_t k) const { return (i * n_ + j) * n_ + k; }

    std::array<double, 3> point(std::size_t idx) const
    {
        std::size_t const k = idx % n_, j = (idx / n_) % n_, i = idx / (n_ * n_);
        return {coord(i), coord(j), coord(k)};
    }

    double radius(std::size_t idx) const
    {
        auto const x = point(idx);
        return std::sqrt(x[0] * x[0] + x[1] * x[1] + x[2] * x[2]);
    }

    /// Twice the lattice offset from the box centre, squared: identifies nodes
    /// at exactly the same distance from the origin without rounding.
    long long squared_radius_key(std::size_t idx) const
    {
        long long const c = static_cast<long long>(n_) - 1;
        std::size_t const k = idx % n_, j = (idx / n_) % n_, i = idx / (n_ * n_);
        long long const a = 2 * static_cast<long long>(i) - c;
        long long const b = 2 * static_cast<long long>(j) - c;
        long long const d = 2 * static_cast<long long>(k) - c;
        return a * a + b * b + d * d;
    }

    BoxGrid scaled(double factor) const { return BoxGrid(n_, L_ * factor); }

    bool operator==(BoxGrid const& o) const { return n_ == o.n_ && L_ == o.L_; }

private:
    std::size_t n_;
    double L_;
    double h_;
};

class Field3D {
public:
    Field3D(BoxGrid grid, std::vector<double> values, std::optional<double> mask_radius = std::nullopt)
        : grid_(grid), values_(std::move(values)), mask_(mask_radius)
    {
        require(values_.size() == grid_.size(), "3d field: value count does not match grid");
        for (std::size_t i = 0; i < values_.size(); ++i)
            require(std::isfinite(values_[i]), "3d field: non-finite value at node " + std::to_string(i));
        if (mask_) {
            require(*mask_ > 0.0, "mask radius must be positive");
            apply_mask();
        }
    }

    static Field3D zeros(BoxGrid grid, std::optional<double> mask_radius = std::nullopt)
    {
        return Field3D(grid, std::vector<double>(grid.size(), 0.0), mask_radius);
    }

    BoxGrid const& grid() const { return grid_; }
    std::vector<double> const& values() const { return values_; }
    double operator[](std::size_t i) const { return values_[i]; }
    std::size_t size() const { return values_.size(); }
    std::optional<double> mask_radius() const { return mask_; }

    /// Nodes that carry unknowns: strictly inside the mask ball when one is set.
    bool is_free(std::size_t idx) const { return !mask_ || grid_.radius(idx) < *mask_; }

    Field3D with_values(std::vector<double> v) const { return Field3D(grid_, std::move(v), mask_); }

    bool is_zero() const
    {
        return std::all_of(values_.begin(), values_.end(), [](double x) { return x == 0.0; });
    }

private:
    void apply_mask()
    {
        for (std::size_t i = 0; i < values_.size(); ++i)
            if (!is_free(i)) values_[i] = 0.0;
    }

    BoxGrid grid_;
    std::vector<double> values_;
    std::optional<double> mask_;
};

inline Field3D sample_box(std::function<double(double, double, double)> const& f, BoxGrid const& grid,
                          std::optional<double> mask_radius = std::nullopt)
{
    std::vector<double> v(grid.size());
    for (std::size_t idx = 0; idx < grid.size(); ++idx) {
        auto const x = grid.point(idx);
        v[idx] = f(x[0], x[1], x[2]);
        require(std::isfinite(v[idx]), "sample_box: non-finite value at node " + std::to_string(idx));
    }
    return Field3D(grid, std::move(v), mask_radius);
}

/// Lifts a radial profile to the box: u(x) = profile(|x|).
inline Field3D sample_box_radial(std::function<double(double)> const& profile, BoxGrid const& grid,
                                 std::optional<double> mask_radius = std::nullopt)
{
    return sample_box([&](double x, double y, double z) { return profile(std::sqrt(x * x + y * y + z * z)); },
                      grid, mask_radius);
}

/// Plain 3D sum h^3 * sum f (fields vanish on the box boundary).
inline double integrate_box(Field3D const& f)
{
    double s = 0.0;
    for (double v : f.values()) s += v;
    return s * f.grid().cell_volume();
}

/// Writes `<stem>.bin` (row-major float64, native little-endian) and
/// `<stem>.json` with {n, L, mask_radius}.
inline void write_field(Field3D const& f, std::string const& stem)
{
    {
        std::ofstream os(stem + ".bin", std::ios::binary);
        require(bool(os), "cannot open " + stem + ".bin for writing");
        os.write(reinterpret_cast<char const*>(f.values().data()),
                 static_cast<std::streamsize>(f.size() * sizeof(double)));
    }
    nlohmann::json header = {{"n", f.grid().n()}, {"L", f.grid().half_width()}};
    header["mask_radius"] = f.mask_radius() ? nlohmann::json(*f.mask_radius()) : nlohmann::json(nullptr);
    std::ofstream js(stem + ".json");
    require(bool(js), "cannot open " + stem + ".json for writing");
    js << header.dump(2) << '\n';
}

inline Field3D read_field(std::string const& stem)
{
    std::ifstream js(stem + ".json");
    require(bool(js), "cannot open " + stem + ".json");
    auto const header = nlohmann::json::parse(js);
    BoxGrid const grid(header.at("n").get<std::size_t>(), header.at("L").get<double>());
    std::optional<double> mask;
    if (!header.at("mask_radius").is_null()) mask = header.at("mask_radius").get<double>();
    std::vector<double> v(grid.size());
    std::ifstream is(stem + ".bin", std::ios::binary);
    require(bool(is), "cannot open " + stem + ".bin");
    is.read(reinterpret_cast<char*>(v.data()), static_cast<std::streamsize>(v.size() * sizeof(double)));
    require(is.gcount() == static_cast<std::streamsize>(v.size() * sizeof(double)), "field file truncated");
    return Field3D(grid, std::move(v), mask);
}

} // namespace spslab
