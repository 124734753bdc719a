#include <gtest/gtest.h>

#include <cmath>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "liouville/bubble.hpp"
#include "liouville/grid.hpp"

using namespace liouville;

TEST(Grid, SizeAndRadius) {
    const RadialGrid g = make_grid(Params::nonquantized(0.5, 0.1), 1024);
    EXPECT_EQ(g.size(), 1024u);
    EXPECT_DOUBLE_EQ(g.r_max, 10.0);
    EXPECT_DOUBLE_EQ(g.r.back(), 10.0);
    for (std::size_t i = 1; i < g.size(); ++i) EXPECT_GT(g.r[i], g.r[i - 1]);
}

TEST(Grid, QuantizedRadiusScalesWithTau) {
    Params p = Params::quantized(1, 0.1);
    p.tau = 0.5;
    EXPECT_DOUBLE_EQ(make_grid(p, 64).r_max, 5.0);
}

TEST(Grid, RejectsSmallGrids) {
    EXPECT_THROW(make_grid(Params::nonquantized(0.5, 0.1), 8), GridSizeError);
    EXPECT_THROW(make_grid(Params::nonquantized(0.5, 0.1), 15), GridSizeError);
    EXPECT_NO_THROW(make_grid(Params::nonquantized(0.5, 0.1), 16));
}

TEST(Grid, IntegratesConstants) {
    const RadialGrid g = make_grid(Params::nonquantized(0.5, 0.1), 1024);
    const double v = g.integrate(std::vector<double>(g.size(), 1.0));
    EXPECT_NEAR(v, g.r_max - g.r_min(), 1e-10 * g.r_max);
}

TEST(Grid, IntegratesTheBubbleDensity) {
    // int_0^inf r^(2a+1) (1 + r^(2+2a))^-2 dr = 1/(2+2a), substitute s = r^(2+2a)
    const RadialGrid g = make_grid(Params::nonquantized(0.5, 1e-4), 4096);
    std::vector<double> f(g.size());
    for (std::size_t i = 0; i < g.size(); ++i) f[i] = std::pow(g.r[i], 2.0) * bubble_exp(0.5, g.r[i]);
    EXPECT_NEAR(g.integrate(f), 1.0 / 3.0, 1e-6);
}

TEST(Grid, InterpolatesCubicsInLogRadius) {
    const RadialGrid g = make_grid(Params::nonquantized(0.5, 0.1), 256);
    auto f = [](double s) { return 1.0 + s - 0.5 * s * s + 0.1 * s * s * s; };
    std::vector<double> v(g.size());
    for (std::size_t i = 0; i < g.size(); ++i) v[i] = f(g.s[i]);
    for (double r : {1e-5, 0.3, 1.0, 7.7})
        EXPECT_NEAR(interpolate(g, v, r), f(std::log(r)), 1e-9 * std::abs(f(std::log(r))));
}

TEST(WeightedIntegrate, ZeroIntegrand) {
    const RadialGrid g = make_grid(Params::nonquantized(0.5, 0.1), 256);
    EXPECT_EQ(weighted_integrate(g, [](double) { return 0.0; }, 0.0, 10.0).value, 0.0);
}

TEST(WeightedIntegrate, EndpointSingularity) {
    const RadialGrid g = make_grid(Params::nonquantized(0.5, 0.1), 256);
    EXPECT_NEAR(weighted_integrate(g, [](double r) { return 1.0 / std::sqrt(r); }, 0.0, 1.0).value, 2.0, 1e-8);
}

TEST(WeightedIntegrate, AgreesWithAdaptiveGaussKronrod) {
    const double a = 0.5;
    const RadialGrid g = make_grid(Params::nonquantized(a, 0.1), 1024);
    auto f = [&](double t) { return t * (-std::pow(t, 1.0 + 2.0 * a) * bubble_exp(a, t)) * f1_jet(a, 1, t).value; };
    const double v = weighted_integrate(g, f, 0.0, 10.0).value;
    double err = 0.0;
    const double ref = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, 0.0, 10.0, 20, 1e-14, &err);
    EXPECT_TRUE(std::isfinite(v));
    EXPECT_NEAR(v, ref, 1e-8 * std::abs(ref));
}

TEST(WeightedIntegrate, RejectsIntervalsOutsideTheGrid) {
    const RadialGrid g = make_grid(Params::nonquantized(0.5, 0.1), 256);
    EXPECT_THROW(weighted_integrate(g, [](double) { return 1.0; }, 0.0, 11.0), DomainError);
    EXPECT_THROW(weighted_integrate(g, [](double) { return 1.0; }, 2.0, 1.0), DomainError);
}
