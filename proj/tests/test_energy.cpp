#include <cmath>
#include <random>
#include <sstream>

#include <gtest/gtest.h>

#include <spslab/energy.hpp>
#include <spslab/inequalities.hpp>
#include <spslab/minimize.hpp>

#include "oracles.hpp"

using namespace spslab;

namespace {

RadialField gaussian(RadialGrid const& g, double a = 1.0, double w = 1.0)
{
    return sample_radial([=](double r) { return a * std::exp(-0.5 * r * r / (w * w)); }, g);
}

double lp_integral(RadialField const& u, double p)
{
    return -p * eval_I(u, Params{p, 0.0, 0.0}).power;
}

} // namespace

TEST(Params, Validation)
{
    EXPECT_THROW((Params{2.0, 1.0, 1.0}.validate()), Error);
    EXPECT_THROW((Params{2.8, -1.0, 1.0}.validate()), Error);
    EXPECT_THROW((Params{2.8, 1.0, -1.0}.validate()), Error);
    EXPECT_THROW((Params{2.8, 1.0, 1.0, 0.0}.validate()), Error);
    EXPECT_NO_THROW(Params::limit(2.8).validate());
}

TEST(EnergyRadial, TermsOfAGaussian)
{
    RadialGrid g(8193, 14.0);
    auto const u = gaussian(g);
    auto const e = eval_I(u, Params{3.0, 1.0, 1.0});
    double const pi32 = std::pow(pi, 1.5);
    // u = e^{-r^2/2}: int u^2 = pi^{3/2}, int |grad u|^2 = 3/2 pi^{3/2}, int u^3 = (2 pi / 3)^{3/2}
    EXPECT_NEAR(e.kinetic, 0.75 * pi32, 1e-4);
    EXPECT_NEAR(e.mass, 0.5 * pi32, 1e-5);
    EXPECT_NEAR(e.power, -std::pow(2.0 * pi / 3.0, 1.5) / 3.0, 1e-5);
    double const a = 1.0, d = 2.0 * std::pow(pi, 2.5) / (a * a * std::sqrt(2.0 * a));
    EXPECT_NEAR(e.coulomb / (0.25 * d), 1.0, 1e-5);
    EXPECT_DOUBLE_EQ(e.total, e.kinetic + e.mass + e.coulomb + e.power);
}

TEST(EnergyRadial, EvenUnderSignFlip)
{
    RadialGrid g(513, 8.0);
    std::mt19937_64 rng(1);
    auto const u = random_compact_field(g, rng);
    auto const v = combine(u, -1.0, u, 0.0);
    Params const prm{2.7, 0.3, 0.5};
    EXPECT_EQ(eval_I(u, prm).total, eval_I(v, prm).total);
}

TEST(EnergyRadial, GradientMatchesFiniteDifferences)
{
    RadialGrid g(513, 10.0);
    std::mt19937_64 rng(42);
    for (double p : {2.3, 2.8, 3.5}) {
        auto const u = random_compact_field(g, rng);
        RadialModel m(g, Params{p, 0.7, 0.4});
        EXPECT_LE(oracle::gradient_check(m, u.values(), 20, 7), 1e-5) << "p = " << p;
    }
}

TEST(EnergyRadial, GradientOnBallDomain)
{
    RadialGrid g(257, 4.0);
    auto const u = gaussian(g, 1.5, 1.0);
    RadialModel m(g, Params{2.6, 1.0, 1.0, 3.0});
    EXPECT_LE(oracle::gradient_check(m, u.values(), 20, 9), 1e-5);
}

TEST(Energy3D, GradientMatchesFiniteDifferences)
{
    BoxGrid g(24, 4.0);
    auto const u = gaussian_bumps(g, {Bump3D{{0.5, -0.3, 0.2}, 1.2, 0.9}, Bump3D{{-1.0, 0.8, 0.0}, -0.7, 0.6}});
    BoxModel m(g, Params{2.8, 0.5, 0.3});
    EXPECT_LE(oracle::gradient_check(m, u.values(), 20, 13), 1e-5);
}

TEST(Energy3D, GradientWithMask)
{
    BoxGrid g(20, 3.0);
    auto const u = gaussian_bumps(g, {Bump3D{{0.4, 0.0, 0.0}, 1.0, 0.8}}, 2.5);
    BoxModel m(g, Params{2.6, 1.0, 1.0, 2.5});
    EXPECT_LE(oracle::gradient_check(m, u.values(), 20, 17), 1e-5);
}

TEST(Energy3D, RadialLiftAgreesWithRadialModel)
{
    BoxGrid g(64, 7.0);
    RadialGrid rg(4097, 7.0);
    auto prof = [](double r) { return std::exp(-0.5 * r * r); };
    Params const prm{2.8, 0.5, 1.0};
    auto const e3 = eval_I(sample_box_radial(prof, g), prm);
    auto const e1 = eval_I(sample_radial(prof, rg), prm);
    EXPECT_NEAR(e3.mass / e1.mass, 1.0, 1e-3);
    EXPECT_NEAR(e3.power / e1.power, 1.0, 1e-3);
    EXPECT_NEAR(e3.kinetic / e1.kinetic, 1.0, 0.02);
    EXPECT_NEAR(e3.coulomb / e1.coulomb, 1.0, 0.02);
}

TEST(Scaling, DilationIdentities)
{
    RadialGrid g(1025, 10.0);
    auto const u = gaussian(g);
    for (double lam : {0.1, 10.0}) {
        auto const v = dilate(u, lam);
        EXPECT_NEAR(m_functional(v) / m_functional(u), std::pow(lam, 3.0), 1e-6 * std::pow(lam, 3.0));
        EXPECT_NEAR(dirichlet_integral(v) / dirichlet_integral(u), std::pow(lam, 3.0), 1e-6 * std::pow(lam, 3.0));
        for (double p : {2.6, 2.8}) {
            double const k = std::pow(lam, 2.0 * p - 3.0);
            EXPECT_NEAR(lp_integral(v, p) / lp_integral(u, p), k, 1e-6 * k);
        }
    }
}

TEST(Scaling, DilationIsIdentityAtOne)
{
    RadialGrid g(129, 4.0);
    auto const u = gaussian(g);
    auto const v = dilate(u, 1.0);
    EXPECT_TRUE(v.grid() == u.grid());
    for (std::size_t i = 0; i < u.size(); ++i) EXPECT_EQ(u[i], v[i]);
}

TEST(Scaling, LimitScaleExamples)
{
    EXPECT_DOUBLE_EQ(limit_scale(1.0, 2.7), 1.0);
    EXPECT_NEAR(limit_scale(0.01, 2.8), 0.01, 1e-15);
    EXPECT_DOUBLE_EQ(limit_energy_exponent(2.8), 4.0);
    EXPECT_THROW(limit_scale(0.1, 3.0), Error);
    EXPECT_THROW(limit_scale(0.0, 2.8), Error);
}

TEST(Scaling, LimitEnergyIdentity)
{
    RadialGrid g(1025, 10.0);
    auto const u = gaussian(g, 2.0, 1.3);
    for (double p : {2.6, 2.8})
        for (double lam : {0.01, 0.1, 10.0}) {
            auto const [v, eps] = scale_to_limit(u, lam, p);
            double const j = eval_I(v, rescaled_params(eps, p)).total;
            double const i = eval_I(u, Params{p, lam, 1.0}).total;
            double const k = std::pow(eps, limit_energy_exponent(p));
            EXPECT_NEAR(j / (k * i), 1.0, 1e-6) << "p=" << p << " lambda=" << lam;
            auto const back = scale_from_limit(v, lam, p);
            for (std::size_t n = 0; n < u.size(); ++n) EXPECT_NEAR(back[n], u[n], 1e-12 * std::abs(u[0]));
        }
}

TEST(Scaling, ENormDefinition)
{
    RadialGrid g(513, 8.0);
    auto const u = gaussian(g);
    auto const e = eval_I(u, Params::limit(2.8));
    // lambda = 1, omega = 0: kinetic = 1/2 int |grad u|^2, coulomb = D/4
    EXPECT_NEAR(e_norm(u) * e_norm(u), 2.0 * e.kinetic + std::sqrt(4.0 * e.coulomb), 1e-12);
    EXPECT_EQ(e.mass, 0.0);
}

TEST(EnergyCsv, RowLayout)
{
    std::ostringstream os;
    write_csv_row(os, EnergyBreakdown::from_terms(1.0, 2.0, 3.0, -4.0), Params{2.8, 0.5, 1.0});
    EXPECT_EQ(energy_csv_header(), "kinetic,mass,coulomb,power,total,p,lambda,omega,R");
    auto const row = os.str();
    EXPECT_EQ(std::count(row.begin(), row.end(), ','), 8);
    EXPECT_EQ(row.substr(0, 2), "1,");
}
