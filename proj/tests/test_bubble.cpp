#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <numbers>

#include "liouville/bubble.hpp"
#include "support.hpp"

using namespace liouville;
using testing_support::log_points;
using testing_support::relative_mode_residual;

TEST(Bubble, ValuesAtSimplePoints) {
    EXPECT_EQ(eval_bubble(0.5, 0.0), 0.0);
    for (double a : {-0.5, 0.0, 0.5, 1.5, 3.0}) EXPECT_NEAR(eval_bubble(a, 1.0), -2.0 * std::log(2.0), 1e-15);
    const long double ref = -2.0L * std::log(1.0L + std::pow(2.0L, 3.0L));
    EXPECT_NEAR(eval_bubble(0.5, 2.0), static_cast<double>(ref), 1e-15);
    EXPECT_NEAR(eval_bubble(0.5, 2.0), -2.0 * std::log(9.0), 1e-15);
}

TEST(Bubble, SolvesTheUnperturbedEquation) {
    for (double a : {-0.5, 0.5, 1.5})
        for (double r : log_points(1e-3, 1e3, 60)) {
            const Jet U = bubble_jet(a, r);
            const double lhs = U.d2 + U.d1 / r;
            const double rhs = -potential(a, r);
            EXPECT_LE(std::abs(lhs - rhs), 1e-12 * std::max(std::abs(U.d2), std::abs(U.d1 / r))) << a << " " << r;
        }
}

TEST(Bubble, JetsMatchFiniteDifferences) {
    for (double a : {-0.5, 0.5, 1.5})
        for (double r : {0.3, 1.0, 2.5}) {
            const auto [d1, d2] = testing_support::central_derivatives([&](double x) { return eval_bubble(a, x); }, r, 1e-3);
            const Jet U = bubble_jet(a, r);
            EXPECT_NEAR(U.d1, d1, 1e-8 * (1 + std::abs(d1)));
            EXPECT_NEAR(U.d2, d2, 1e-6 * (1 + std::abs(d2)));
        }
}

TEST(Bubble, RejectsExponentsAtOrBelowMinusOne) {
    EXPECT_THROW(eval_bubble(-1.0, 1.0), DomainError);
    EXPECT_THROW(eval_bubble(-2.0, 1.0), DomainError);
    EXPECT_THROW(eval_bubble(0.5, -1.0), DomainError);
}

TEST(G, ValuesAtSimplePoints) {
    EXPECT_EQ(eval_g(0.5, 0.0), 0.0);
    EXPECT_NEAR(eval_g(0.5, 1.0), -1.0 / 6.0, 1e-15);
}

TEST(G, SolvesTheFirstModeEquation) {
    for (double r : log_points(1e-3, 1e3, 200)) {
        const double S = detail::pw(r, 2.0) * bubble_exp(0.5, r);  // r^(1+2a) e^U
        EXPECT_LT(relative_mode_residual(0.5, 1, g_jet(0.5, r), r, S), 1e-12) << r;
    }
}

TEST(G, JetsMatchFiniteDifferences) {
    for (double r : {0.2, 1.0, 4.0}) {
        const auto [d1, d2] = testing_support::central_derivatives([](double x) { return eval_g(0.5, x); }, r, 1e-3);
        const Jet g = g_jet(0.5, r);
        EXPECT_NEAR(g.d1, d1, 1e-9);
        EXPECT_NEAR(g.d2, d2, 1e-7);
    }
}

class PairSuite : public ::testing::TestWithParam<std::tuple<double, int>> {};

TEST_P(PairSuite, HomogeneousResidualAndWronskian) {
    const auto [a, l] = GetParam();
    const auto pair = fundamental_pair(a, l);
    const double W = fundamental_wronskian_exact(a, l);
    double wmin = INFINITY, wmax = -INFINITY;
    for (double r : log_points(0.01, 100.0, 200)) {
        const Jet f1 = pair.f1(r), f2 = pair.f2(r);
        EXPECT_LT(relative_mode_residual(a, l, f1, r), 1e-10) << "F1 r=" << r;
        EXPECT_LT(relative_mode_residual(a, l, f2, r), 1e-10) << "F2 r=" << r;
        const double rw = r * (f1.value * f2.d1 - f1.d1 * f2.value);
        wmin = std::min(wmin, rw);
        wmax = std::max(wmax, rw);
    }
    EXPECT_LT((wmax - wmin) / std::abs(W), 1e-10);
    EXPECT_LT(std::abs(wmin - W) / std::abs(W), 1e-10);
}

INSTANTIATE_TEST_SUITE_P(Exponents, PairSuite,
                         ::testing::Combine(::testing::Values(-0.5, 0.5, 1.5), ::testing::Range(1, 9)));

TEST(FundamentalPair, AtTheCriticalFrequencyMatchesTheKernel) {
    for (int n : {0, 1, 2, 3}) {
        const auto k = kernel_elements(n);
        const Jet ref_at_1 = k[1](1.0);
        EXPECT_DOUBLE_EQ(ref_at_1.value, 1.0);
        for (double r : log_points(1e-2, 1e2, 50)) {
            const double direct = 2.0 * std::pow(r, n + 1) / (1.0 + std::pow(r, 2 * n + 2));
            const double f1 = f1_jet(n, n + 1, r).value;
            EXPECT_NEAR(f1, direct, 2e-15 * std::abs(direct)) << n << " " << r;
            EXPECT_NEAR(k[1](r).value, f1, 4.0 * std::numeric_limits<double>::epsilon() * std::abs(f1));
        }
    }
}

TEST(FundamentalPair, DegeneratesAtOnePlusAlpha) {
    EXPECT_THROW(fundamental_pair(1.0, 2), DegeneratePairError);
    EXPECT_THROW(fundamental_pair(0.5, 0), DomainError);
    EXPECT_NO_THROW(fundamental_pair(0.5, 2));
}

TEST(U1, ValuesAndLimit) {
    for (double a : {-0.5, 0.5, 2.0}) {
        EXPECT_EQ(eval_u1(a, 0.0), 1.0);
        EXPECT_NEAR(eval_u1(a, 1.0), 0.0, 1e-16);
    }
    double prev = eval_u1(0.5, 1.0);
    for (double r : log_points(1.0, 1e3, 40)) {
        const double v = eval_u1(0.5, r);
        EXPECT_LE(v, prev);
        EXPECT_GT(v, -1.0);
        prev = v;
    }
    EXPECT_NEAR(eval_u1(0.5, 1e3), -1.0, 3e-9);
}

TEST(U1U2, HomogeneousAndUnitWronskian) {
    for (double a : {-0.5, 0.5, 1.5})
        for (double r : log_points(1e-3, 1e3, 100)) {
            const Jet u1 = u1_jet(a, r), u2 = u2_jet(a, r);
            EXPECT_LT(relative_mode_residual(a, 0, u1, r), 1e-10);
            EXPECT_LT(relative_mode_residual(a, 0, u2, r), 1e-10);
            EXPECT_NEAR(r * (u1.value * u2.d1 - u1.d1 * u2.value), 1.0, 1e-12);
        }
}

TEST(HModes, IsotropicHessianHasNoSecondMode) {
    Params p = Params::nonquantized(0.5, 0.1);
    p.h.hess = {2.5, 0.0, 2.5};
    const HModes m = h_modes(p, 3.0);
    EXPECT_EQ(m.m2c, 0.0);
    EXPECT_EQ(m.m2s, 0.0);
}

TEST(HModes, SecondModeOfADiagonalHessian) {
    const auto t = theta2_coefficients({4.0, 0.0, 0.0});
    EXPECT_DOUBLE_EQ(t[0], 1.0);
    EXPECT_DOUBLE_EQ(t[1], 0.0);
}

TEST(HModes, SumMatchesDirectEvaluation) {
    Params p = Params::nonquantized(0.5, 0.2);
    p.h = {18.0, {1.0, -0.5}, {3.0, 0.7, 1.0}};
    for (double r : {0.5, 1.0, 3.0})
        for (double t : {0.0, std::numbers::pi / 3, 2.0, 4.5}) {
            const double direct = p.h(p.eps * r * std::cos(t), p.eps * r * std::sin(t));
            EXPECT_NEAR(h_modes(p, r)(t), direct, 1e-14 * direct) << r << " " << t;
        }
}

TEST(QuantizedBubble, ReducesToTheStandardBubble) {
    for (int n : {0, 1, 2})
        for (double r : {0.0, 0.5, 1.0, 2.0})
            for (double t : {0.0, 1.0})
                EXPECT_NEAR(quantized_bubble(n, 1.0, 0.0, r * std::cos(t), r * std::sin(t)), eval_bubble(n, r), 1e-14);
}

TEST(QuantizedBubble, KernelElementsAreParameterDerivatives) {
    const int n = 1;
    const auto k = kernel_elements(n);
    EXPECT_EQ(k[0](0.0).value, 1.0);
    const double h = 1e-6;
    for (double r : {0.3, 1.0, 1.7}) {
        const double t = 0.4;
        const double y1 = r * std::cos(t), y2 = r * std::sin(t);
        const double dl = (quantized_bubble(n, 1 + h, 0.0, y1, y2) - quantized_bubble(n, 1 - h, 0.0, y1, y2)) / (2 * h);
        EXPECT_NEAR(dl, k[0](r).value, 1e-8);
        const double dx = (quantized_bubble(n, 1.0, h, y1, y2) - quantized_bubble(n, 1.0, -h, y1, y2)) / (2 * h);
        EXPECT_NEAR(dx, 2.0 * k[1](r).value * std::cos((n + 1) * t), 1e-8);
        const double dy = (quantized_bubble(n, 1.0, {0.0, h}, y1, y2) - quantized_bubble(n, 1.0, {0.0, -h}, y1, y2)) / (2 * h);
        EXPECT_NEAR(dy, 2.0 * k[2](r).value * std::sin((n + 1) * t), 1e-8);
    }
}

TEST(QuantizedBubble, KernelElementsAreHomogeneous) {
    for (int n : {0, 1, 2}) {
        const auto k = kernel_elements(n);
        for (double r : log_points(1e-2, 1e2, 100)) {
            EXPECT_LT(relative_mode_residual(n, 0, k[0](r), r), 1e-10);
            EXPECT_LT(relative_mode_residual(n, n + 1, k[1](r), r), 1e-10);
            EXPECT_LT(relative_mode_residual(n, n + 1, k[2](r), r), 1e-10);
        }
        EXPECT_EQ(k[1].frequency(), n + 1);
    }
    EXPECT_THROW(quantized_bubble(1, 0.0, 0.0, 1.0, 0.0), DomainError);
}
