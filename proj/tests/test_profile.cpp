#include <gtest/gtest.h>

#include <cmath>

#include "liouville/profile.hpp"
#include "liouville/verifier.hpp"
#include "support.hpp"

using namespace liouville;

namespace {

Params flat(double alpha, double eps) {
    Params p = Params::nonquantized(alpha, eps);
    p.h.grad = {0.0, 0.0};
    p.h.hess = {0.0, 0.0, 0.0};
    return p;
}

// sup |c0| / (eps^2 (1+r)^(-2a) log(2+r)) over the grid
double c0_envelope_constant(const Params& p, const RadialGrid& g, const ModeFunction& f) {
    double C = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i) {
        const double w = p.eps * p.eps * std::pow(1.0 + g.r[i], -2.0 * p.exponent()) * std::log(2.0 + g.r[i]);
        C = std::max(C, std::abs(f.values[i]) / w);
    }
    return C;
}

} // namespace

TEST(C1, VanishesWithoutAGradient) {
    const Params p = flat(0.5, 0.01);
    EXPECT_TRUE(build_c1(p, make_grid(p, 256)).is_zero());
}

TEST(C1, SolvesItsModeEquation) {
    const Params p = Params::nonquantized(0.5, 0.01);
    const RadialGrid g = make_grid(p, 4096);
    const CorrectionTerm c1 = build_c1(p, g);
    ASSERT_EQ(c1.modes.size(), 2u);
    double worst = 0.0;
    for (std::size_t k = 0; k < 2; ++k) {
        const ModeFunction& f = c1.modes[k];
        for (std::size_t i = 0; i < g.size(); ++i) {
            const Jet j{f.values[i], f.deriv[i], f.deriv2[i]};
            worst = std::max(worst, std::abs(apply_mode_operator(0.5, 1, j, g.r[i]) + c1.forcing[k].values[i]));
        }
    }
    EXPECT_LT(worst, 1e-8);
    EXPECT_EQ(c1.modes[1].sup_abs(), 0.0);  // a = (1, 0)
}

TEST(C1, DecaysLikeTheClosedForm) {
    const Params p = Params::nonquantized(0.5, 0.01);
    const RadialGrid g = make_grid(p, 4096);
    const CorrectionTerm c1 = build_c1(p, g);
    std::vector<double> x, y;
    for (std::size_t i = 0; i < g.size(); ++i)
        if (g.r[i] >= 10.0) {
            x.push_back(g.r[i]);
            y.push_back(std::abs(c1.modes[0].values[i]));
        }
    EXPECT_NEAR(decay_and_order_fit(x, y).exponent, -2.0, 0.05);
}

TEST(C2, VanishesForIsotropicCoefficients) {
    const Params p = flat(0.5, 0.01);
    const RadialGrid g = make_grid(p, 512);
    EXPECT_TRUE(build_c2(p, g).term.is_zero());
}

TEST(C2, RadialProfilesAreGridStable) {
    const Params p = Params::nonquantized(0.5, 0.01);
    const RadialGrid g1 = make_grid(p, 4096), g2 = make_grid(p, 8192);
    const C2Result a = build_c2(p, g1), b = build_c2(p, g2);
    EXPECT_NEAR(a.w1.sup_abs() / b.w1.sup_abs(), 1.0, 1e-4);
    EXPECT_NEAR(a.w2.sup_abs() / b.w2.sup_abs(), 1.0, 1e-4);
    EXPECT_EQ(a.sign, b.sign);
    EXPECT_GE(a.audit_ratio, 100.0);
}

TEST(C2, RemovesTheSecondModeResidual) {
    const Params p = Params::nonquantized(0.5, 0.01);
    const Profile with = build_nonquantized(p, 4096, {true, true, true, false});
    const Profile without = build_nonquantized(p, 4096, {true, true, false, false});
    const double e = p.eps;
    EXPECT_LE(with.residual.mode_weighted_sup[2], e * e * e);
    EXPECT_GE(without.residual.mode_weighted_sup[2], 0.1 * e * e);
}

TEST(C0, VanishesWithoutForcing) {
    const Params p = flat(0.5, 0.01);
    EXPECT_TRUE(build_c0(p, make_grid(p, 512)).is_zero());
}

TEST(C0, StartsFlatAtTheOrigin) {
    const Params p = Params::nonquantized(0.5, 0.01);
    const RadialGrid g = make_grid(p, 4096);
    const ModeFunction c0 = build_c0(p, g).modes[0];
    EXPECT_LT(std::abs(c0.values.front()), 1e-20);
    EXPECT_LT(std::abs(c0.deriv.front()), 1e-14);
    const Jet at0 = c0.at(g, 0.0);
    EXPECT_EQ(at0.value, 0.0);
}

TEST(C0, EnvelopeConstantIsGridStable) {
    const Params p = Params::nonquantized(0.5, 0.01);
    const RadialGrid g1 = make_grid(p, 4096), g2 = make_grid(p, 8192);
    const double C1 = c0_envelope_constant(p, g1, build_c0(p, g1).modes[0]);
    const double C2 = c0_envelope_constant(p, g2, build_c0(p, g2).modes[0]);
    EXPECT_TRUE(std::isfinite(C1));
    EXPECT_NEAR(C1 / C2, 1.0, 1e-6);
}

TEST(QuantizedC, EnvelopeConstantIsGridStable) {
    const Params p = Params::quantized(1, 0.01);
    const RadialGrid g1 = make_grid(p, 4096), g2 = make_grid(p, 8192);
    const double C1 = c0_envelope_constant(p, g1, build_c_quantized(p, g1, ModeSolver(1.0, g1)).modes[0]);
    const double C2 = c0_envelope_constant(p, g2, build_c_quantized(p, g2, ModeSolver(1.0, g2)).modes[0]);
    EXPECT_NEAR(C1 / C2, 1.0, 1e-6);
}

TEST(Residual, VanishesForTheExactSolution) {
    const Profile p = build_nonquantized(flat(0.5, 0.01), 1024);
    EXPECT_EQ(p.residual.weighted_sup, 0.0);
    EXPECT_TRUE(p.converged);
    ASSERT_TRUE(p.iterate.has_value());
    EXPECT_TRUE(p.iterate->is_zero());
}

TEST(Residual, IsThirdOrderInEps) {
    const Profile a = build_nonquantized(Params::nonquantized(0.5, 0.1), 4096, {true, true, true, false});
    const Profile b = build_nonquantized(Params::nonquantized(0.5, 0.01), 4096, {true, true, true, false});
    // normalized = weighted sup / eps^3 stays bounded as eps shrinks tenfold
    EXPECT_LT(b.residual.normalized, 3.0 * a.residual.normalized);
    EXPECT_GT(b.residual.normalized, a.residual.normalized / 3.0);
}

TEST(Residual, ModesAreBoundedByTheField) {
    const Profile p = build_nonquantized(Params::nonquantized(0.5, 0.03), 2048, {true, true, true, false});
    EXPECT_LE(p.residual.mode_weighted_sup[0], p.residual.weighted_sup * (1 + 1e-12));
    for (int l = 1; l <= p.params.l_max; ++l)
        EXPECT_LE(p.residual.mode_weighted_sup[l], 2.0 * p.residual.weighted_sup * (1 + 1e-12)) << l;
    EXPECT_LE(p.residual.tail_energy_ratio, p.params.tol);
}

TEST(Picard, ContractsAndConverges) {
    const Profile p = build_nonquantized(Params::nonquantized(0.5, 0.01), 4096);
    ASSERT_TRUE(p.converged);
    ASSERT_GE(p.iteration_trace.size(), 3u);
    for (std::size_t k = 2; k < p.iteration_trace.size(); ++k)
        EXPECT_LE(p.iteration_trace[k], 0.1 * p.iteration_trace[k - 1]) << k;
    EXPECT_LT(p.relative_trace.back(), p.params.tol);
    for (double b : p.bound_trace) EXPECT_LE(b, 2.0 * p.bound_trace.front());
}

TEST(Picard, ReportsNonConvergence) {
    Params p = Params::nonquantized(0.5, 0.1);
    p.max_iter = 1;
    EXPECT_THROW(build_nonquantized(p, 1024), ConvergenceError);
}

TEST(Quantized, ZeroEpsGivesTheBubble) {
    Params p = Params::quantized(1, 0.0);
    const RadialGrid g = make_grid_span(1e-6, 100.0, 512);
    const Profile pr = build_quantized(p, g);
    for (const auto& t : pr.corrections) EXPECT_TRUE(t.is_zero());
    EXPECT_TRUE(pr.iterate->is_zero());
    EXPECT_EQ(pr.value(2.0, 0.3), eval_bubble(1.0, 2.0));
}

TEST(Quantized, FiniteDifferenceResidualIsSmall) {
    for (int n : {0, 1}) {
        const double eps = 0.01;
        const Profile pr = build_quantized(Params::quantized(n, eps), 4096);
        EXPECT_TRUE(pr.converged);
        EXPECT_LE(fd_residual(pr).weighted_sup, 100.0 * std::pow(eps, 4)) << n;
    }
}

TEST(Quantized, RejectsOtherCoefficients) {
    Params p = Params::quantized(1, 0.01);
    p.h.grad = {1.0, 0.0};
    EXPECT_THROW(build_quantized(p, 256), DomainError);
}

TEST(Unscale, ShiftsByTheScale) {
    const Profile p = build_nonquantized(Params::nonquantized(0.5, 0.01), 4096);
    const UnscaledProfile u = unscale(p);
    EXPECT_NEAR(u(0.0, 0.0), 3.0 * std::log(100.0), 1e-9);
    EXPECT_DOUBLE_EQ(u.radius(), 1.0);
    EXPECT_NEAR(u(0.3, -0.4), p.value(50.0, std::atan2(-0.4, 0.3)) + 3.0 * std::log(100.0), 1e-12);
    EXPECT_THROW(u(1.0, 0.5), DomainError);
}
