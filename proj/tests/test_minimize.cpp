#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include <spslab/minimize.hpp>

using namespace spslab;

TEST(SolverConfig, Validation)
{
    SolverConfig c;
    c.armijo_c = 1.5;
    EXPECT_THROW(c.validate(), Error);
    c = {};
    c.backtrack = 0.0;
    EXPECT_THROW(c.validate(), Error);
    EXPECT_NO_THROW(SolverConfig::box_defaults().validate());
}

TEST(MinimizeRadial, ConvergesToNegativeState)
{
    RadialGrid g(513, 40.0);
    Params const prm{2.8, 1e-3, 1.0};
    auto const r = minimize_radial(prm, gaussian_radial(g, 20.0, 4.0));
    ASSERT_TRUE(r.converged) << r.status;
    EXPECT_LT(r.breakdown.total, 0.0);
    EXPECT_LE(r.relative_residual, 1e-6);
    EXPECT_LT(r.breakdown.total, eval_I(gaussian_radial(g, 20.0, 4.0), prm).total);
}

TEST(MinimizeRadial, EnergyNeverIncreasesWithIterationBudget)
{
    RadialGrid g(257, 30.0);
    Params const prm{2.8, 1e-3, 1.0};
    auto const init = gaussian_radial(g, 10.0, 3.0);
    double prev = eval_I(init, prm).total;
    for (std::size_t iters : {5u, 20u, 80u, 320u}) {
        SolverConfig c;
        c.max_iters = iters;
        double const e = minimize_radial(prm, init, c).breakdown.total;
        EXPECT_LE(e, prev);
        prev = e;
    }
}

TEST(MinimizeRadial, CollapsesToZeroWhenCouplingIsLarge)
{
    RadialGrid g(257, 20.0);
    auto const r = minimize_radial(Params{2.8, 0.2, 1.0}, gaussian_radial(g, 1.0, 2.0));
    EXPECT_TRUE(r.converged);
    EXPECT_EQ(r.status, "converged to the zero critical point");
    EXPECT_EQ(r.breakdown.total, 0.0);
    EXPECT_TRUE(r.field.is_zero());
}

TEST(MinimizeRadial, ZeroStartIsAlreadyCritical)
{
    RadialGrid g(65, 5.0);
    auto const r = minimize_radial(Params{2.8, 1.0, 1.0}, RadialField::zeros(g));
    EXPECT_TRUE(r.converged);
    EXPECT_EQ(r.iters, 0u);
}

TEST(MinimizeRadial, RejectsBadConfig)
{
    RadialGrid g(65, 5.0);
    SolverConfig c;
    c.grad_tol = -1.0;
    EXPECT_THROW(minimize_radial(Params{2.8, 1.0, 1.0}, RadialField::zeros(g), c), Error);
}

TEST(MinimizeRadial, ReproducibleBitForBit)
{
    RadialGrid g(257, 30.0);
    Params const prm{2.8, 1e-3, 1.0};
    auto const a = minimize_radial(prm, gaussian_radial(g, 10.0, 3.0));
    auto const b = minimize_radial(prm, gaussian_radial(g, 10.0, 3.0));
    EXPECT_EQ(a.iters, b.iters);
    EXPECT_EQ(a.breakdown.total, b.breakdown.total);
    EXPECT_EQ(a.field.values(), b.field.values());
}

TEST(Minimize3D, CentredStartStaysRadial)
{
    BoxGrid g(24, 24.0);
    Params const prm{2.8, 1e-3, 1.0};
    SolverConfig c = SolverConfig::box_defaults();
    c.grad_tol = 1e-5;
    auto const r = minimize_3d(prm, gaussian_bumps(g, {Bump3D{{0, 0, 0}, 20.0, 4.0}}), c);
    ASSERT_TRUE(r.converged) << r.status;
    EXPECT_LT(r.breakdown.total, 0.0);
    EXPECT_LT(r.asymmetry, 0.02);
}

TEST(Asymmetry, ZeroForRadialFieldsAndLargeForOffCentre)
{
    BoxGrid g(32, 4.0);
    auto const radial = sample_box_radial([](double r) { return std::exp(-r * r); }, g);
    EXPECT_LT(asymmetry(radial), 1e-12);
    auto const off = gaussian_bumps(g, {Bump3D{{2.0, 0, 0}, 1.0, 0.5}});
    EXPECT_GT(asymmetry(off), 0.5);
}

TEST(Asymmetry, SphericalAverageOfRadialLift)
{
    BoxGrid g(32, 4.0);
    auto const u = sample_box_radial([](double r) { return 1.0 / (1.0 + r * r); }, g);
    auto const avg = spherical_average(u);
    EXPECT_GT(avg.size(), 10u);
    for (std::size_t i = 1; i + 1 < avg.size(); ++i) {
        double const r = avg.grid().node(i);
        if (r > 3.0) break;
        EXPECT_NEAR(avg[i], 1.0 / (1.0 + r * r), 0.05);
    }
}

TEST(RandomStart, SeededAndFinite)
{
    RadialGrid g(129, 10.0);
    std::mt19937_64 a(5), b(5);
    auto const u = random_radial_start(g, a), v = random_radial_start(g, b);
    EXPECT_EQ(u.values(), v.values());
    EXPECT_FALSE(u.is_zero());
}
