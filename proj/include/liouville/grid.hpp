#ifndef LIOUVILLE_GRID_HPP
#define LIOUVILLE_GRID_HPP

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <vector>

#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>

#include "liouville/errors.hpp"
#include "liouville/params.hpp"

namespace liouville {

enum class Grading { log_uniform };

/// Nodes r_0 < ... < r_{m-1} = R, uniform in s = log r.
struct RadialGrid {
    std::vector<double> r;
    std::vector<double> s;
    std::vector<double> weights;  // integrate f dr over [r_0, R], exact for cubics
    double r_max = 0.0;
    double ds = 0.0;
    Grading grading = Grading::log_uniform;

    std::size_t size() const { return r.size(); }
    double r_min() const { return r.front(); }

    /// Interval index i with s_i <= s < s_{i+1}, clamped to [0, m-2].
    std::size_t interval(double s_value) const {
        const double x = (s_value - s.front()) / ds;
        if (!(x > 0.0)) return 0;
        return std::min<std::size_t>(static_cast<std::size_t>(x), size() - 2);
    }

    /// Sum of f_i w_i.
    double integrate(const std::vector<double>& f) const {
        double acc = 0.0;
        for (std::size_t i = 0; i < f.size(); ++i) acc += f[i] * weights[i];
        return acc;
    }
};

namespace detail {

/// Lagrange weights of 4 equally spaced nodes at 0,1,2,3 evaluated at x.
inline std::array<double, 4> lagrange4(double x) {
    return {-(x - 1.0) * (x - 2.0) * (x - 3.0) / 6.0, x * (x - 2.0) * (x - 3.0) / 2.0,
            -x * (x - 1.0) * (x - 3.0) / 2.0, x * (x - 1.0) * (x - 2.0) / 6.0};
}

/// Lagrange basis through 4 arbitrary nodes.
inline std::array<double, 4> lagrange4(const double* nodes, double x) {
    std::array<double, 4> out{};
    for (int k = 0; k < 4; ++k) {
        double v = 1.0;
        for (int j = 0; j < 4; ++j)
            if (j != k) v *= (x - nodes[j]) / (nodes[k] - nodes[j]);
        out[k] = v;
    }
    return out;
}

/// Gauss-Legendre rule mapped to [0, 1].
template <int N>
struct UnitGauss {
    std::array<double, N> x{};
    std::array<double, N> w{};

    UnitGauss() {
        using rule = boost::math::quadrature::gauss<double, N>;
        const auto& a = rule::abscissa();
        const auto& wt = rule::weights();
        int k = 0;
        for (std::size_t i = 0; i < a.size(); ++i) {
            if (a[i] == 0.0) {
                x[k] = 0.5;
                w[k++] = 0.5 * wt[i];
            } else {
                x[k] = 0.5 * (1.0 - a[i]);
                w[k++] = 0.5 * wt[i];
                x[k] = 0.5 * (1.0 + a[i]);
                w[k++] = 0.5 * wt[i];
            }
        }
        std::array<int, N> idx{};
        for (int i = 0; i < N; ++i) idx[i] = i;
        std::sort(idx.begin(), idx.end(), [&](int p, int q) { return x[p] < x[q]; });
        auto xs = x;
        auto ws = w;
        for (int i = 0; i < N; ++i) {
            x[i] = xs[idx[i]];
            w[i] = ws[idx[i]];
        }
    }
};

inline std::size_t stencil_start(std::size_t i, std::size_t m) {
    if (i == 0) return 0;
    return std::min(i - 1, m - 4);
}

} // namespace detail

/// Smallest node: at most 1e-6 R, and small enough that the r^(1+2a) weight
/// carries less than tol below it.
inline double grid_inner_radius(double exponent, double r_max, double tol) {
    const double b = 2.0 + 2.0 * exponent;
    const double weighted = std::pow(tol * b, 1.0 / b);
    return std::min(1e-6 * r_max, weighted);
}

inline RadialGrid make_grid_span(double r_min, double r_max, int m) {
    if (m < 16) throw GridSizeError("grid needs at least 16 nodes, got " + std::to_string(m));
    if (!(r_min > 0.0 && r_max > r_min)) throw DomainError("grid span must satisfy 0 < r_min < r_max");
    RadialGrid g;
    g.r_max = r_max;
    g.r.resize(m);
    g.s.resize(m);
    const double s0 = std::log(r_min);
    const double s1 = std::log(r_max);
    g.ds = (s1 - s0) / (m - 1);
    for (int i = 0; i < m; ++i) {
        g.s[i] = s0 + g.ds * i;
        g.r[i] = std::exp(g.s[i]);
    }
    g.s.back() = s1;
    g.r.back() = r_max;

    // Piecewise cubic interpolation in r, integrated exactly by 2-point Gauss per interval.
    g.weights.assign(m, 0.0);
    const detail::UnitGauss<2> gl;
    for (int i = 0; i + 1 < m; ++i) {
        const std::size_t j0 = detail::stencil_start(i, m);
        const double h = g.r[i + 1] - g.r[i];
        for (int q = 0; q < 2; ++q) {
            const double x = g.r[i] + gl.x[q] * h;
            const auto L = detail::lagrange4(&g.r[j0], x);
            for (int k = 0; k < 4; ++k) g.weights[j0 + k] += gl.w[q] * h * L[k];
        }
    }
    return g;
}

/// Log-uniform grid on [r_min, R] with R = eps^-1 (tau eps^-1 for the quantized pipeline).
inline RadialGrid make_grid(const Params& params, int m) {
    if (m < 16) throw GridSizeError("grid needs at least 16 nodes, got " + std::to_string(m));
    if (!(params.eps > 0.0)) throw DomainError("grid needs eps > 0");
    const double R = params.domain_radius();
    return make_grid_span(grid_inner_radius(params.exponent(), R, params.tol), R, m);
}

/// Four-point Lagrange interpolation in s of grid-aligned samples.
inline double interpolate(const RadialGrid& g, const std::vector<double>& f, double r) {
    const double sv = std::log(r);
    const std::size_t i = g.interval(sv);
    const std::size_t j0 = detail::stencil_start(i, g.size());
    const auto L = detail::lagrange4((sv - g.s[j0]) / g.ds);
    return L[0] * f[j0] + L[1] * f[j0 + 1] + L[2] * f[j0 + 2] + L[3] * f[j0 + 3];
}

struct QuadratureResult {
    double value = 0.0;
    double error = 0.0;
};

/// Integral of f over [from, to] by double-exponential quadrature on panels cut at
/// every 64th grid node. Integrable endpoint singularities r^b, b > -1, are supported.
inline QuadratureResult weighted_integrate(const RadialGrid& grid, const std::function<double(double)>& f,
                                           double from, double to, double tol = 1e-10) {
    if (!(from >= 0.0 && to <= grid.r_max * (1.0 + 1e-14) && from <= to))
        throw DomainError("integration interval must lie in [0, R]");
    QuadratureResult out;
    if (from == to) return out;
    std::vector<double> cuts{from};
    for (std::size_t i = 0; i < grid.size(); i += 64)
        if (grid.r[i] > from && grid.r[i] < to) cuts.push_back(grid.r[i]);
    cuts.push_back(to);
    boost::math::quadrature::tanh_sinh<double> integrator;
    for (std::size_t k = 0; k + 1 < cuts.size(); ++k) {
        double err = 0.0;
        double l1 = 0.0;
        out.value += integrator.integrate(f, cuts[k], cuts[k + 1], 1e-14, &err, &l1);
        out.error += err;
    }
    if (!(out.error <= tol) || !std::isfinite(out.value))
        throw ToleranceError("quadrature tolerance not met", out.error);
    return out;
}

} // namespace liouville

#endif
