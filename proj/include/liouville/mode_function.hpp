#ifndef LIOUVILLE_MODE_FUNCTION_HPP
#define LIOUVILLE_MODE_FUNCTION_HPP

#include <cmath>
#include <vector>

#include "liouville/bubble.hpp"
#include "liouville/errors.hpp"
#include "liouville/grid.hpp"

namespace liouville {

enum class Parity { radial, cos, sin };

inline const char* to_string(Parity p) {
    switch (p) {
        case Parity::radial: return "radial";
        case Parity::cos: return "cos";
        case Parity::sin: return "sin";
    }
    return "?";
}

/// Angular factor of a mode: 1, cos(l t) or sin(l t).
inline double angular_factor(int l, Parity p, double theta) {
    switch (p) {
        case Parity::radial: return 1.0;
        case Parity::cos: return std::cos(l * theta);
        case Parity::sin: return std::sin(l * theta);
    }
    return 0.0;
}

/// Radial samples of one Fourier mode, aligned with a RadialGrid. Values carry first
/// and second radial derivatives so the mode can be evaluated off-grid by quintic
/// Hermite interpolation in s = log r.
struct ModeFunction {
    int l = 0;
    Parity parity = Parity::radial;
    std::vector<double> values;
    std::vector<double> deriv;
    std::vector<double> deriv2;
    double error_estimate = 0.0;

    static ModeFunction zero(int l, Parity parity, std::size_t m) {
        ModeFunction f;
        f.l = l;
        f.parity = parity;
        f.values.assign(m, 0.0);
        f.deriv.assign(m, 0.0);
        f.deriv2.assign(m, 0.0);
        return f;
    }

    /// Tabulates a closed form (times a constant) on the grid.
    template <class JetFn>
    static ModeFunction from_jet(int l, Parity parity, const RadialGrid& grid, JetFn&& fn, double scale = 1.0) {
        ModeFunction f = zero(l, parity, grid.size());
        for (std::size_t i = 0; i < grid.size(); ++i) {
            const Jet j = fn(grid.r[i]);
            f.values[i] = scale * j.value;
            f.deriv[i] = scale * j.d1;
            f.deriv2[i] = scale * j.d2;
        }
        return f;
    }

    bool valid_parity() const { return (parity == Parity::radial) == (l == 0); }

    double sup_abs() const {
        double m = 0.0;
        for (double v : values) m = std::max(m, std::abs(v));
        return m;
    }

    ModeFunction& operator+=(const ModeFunction& o) {
        for (std::size_t i = 0; i < values.size(); ++i) {
            values[i] += o.values[i];
            deriv[i] += o.deriv[i];
            deriv2[i] += o.deriv2[i];
        }
        error_estimate += o.error_estimate;
        return *this;
    }

    ModeFunction& operator*=(double c) {
        for (std::size_t i = 0; i < values.size(); ++i) {
            values[i] *= c;
            deriv[i] *= c;
            deriv2[i] *= c;
        }
        error_estimate *= std::abs(c);
        return *this;
    }

    /// Value and radial derivatives at r in [0, R].
    Jet at(const RadialGrid& grid, double r) const {
        if (r > grid.r_max * (1.0 + 1e-12)) throw DomainError("mode evaluated outside the grid");
        const double r0 = grid.r.front();
        if (r < r0) return below_first_node(r, r0);
        const double sv = std::log(r);
        const std::size_t i = grid.interval(sv);
        const double h = grid.ds;
        const double t = std::clamp((sv - grid.s[i]) / h, 0.0, 1.0);
        const double ra = grid.r[i];
        const double rb = grid.r[i + 1];
        // derivatives in s: f_s = r f', f_ss = r^2 f'' + r f'
        const double ya = values[i], yb = values[i + 1];
        const double pa = ra * deriv[i], pb = rb * deriv[i + 1];
        const double qa = ra * ra * deriv2[i] + pa, qb = rb * rb * deriv2[i + 1] + pb;

        const double t2 = t * t, t3 = t2 * t, t4 = t3 * t, t5 = t4 * t;
        const double H0 = 1 - 10 * t3 + 15 * t4 - 6 * t5;
        const double H1 = t - 6 * t3 + 8 * t4 - 3 * t5;
        const double H2 = 0.5 * t2 - 1.5 * t3 + 1.5 * t4 - 0.5 * t5;
        const double H3 = 10 * t3 - 15 * t4 + 6 * t5;
        const double H4 = -4 * t3 + 7 * t4 - 3 * t5;
        const double H5 = 0.5 * t3 - t4 + 0.5 * t5;
        const double D0 = -30 * t2 + 60 * t3 - 30 * t4;
        const double D1 = 1 - 18 * t2 + 32 * t3 - 15 * t4;
        const double D2 = t - 4.5 * t2 + 6 * t3 - 2.5 * t4;
        const double D4 = -12 * t2 + 28 * t3 - 15 * t4;
        const double D5 = 1.5 * t2 - 4 * t3 + 2.5 * t4;
        const double E0 = -60 * t + 180 * t2 - 120 * t3;
        const double E1 = -36 * t + 96 * t2 - 60 * t3;
        const double E2 = 1 - 9 * t + 18 * t2 - 10 * t3;
        const double E4 = -24 * t + 84 * t2 - 60 * t3;
        const double E5 = 3 * t - 12 * t2 + 10 * t3;

        const double y = ya * H0 + h * pa * H1 + h * h * qa * H2 + yb * H3 + h * pb * H4 + h * h * qb * H5;
        const double ys = ((ya - yb) * D0 + h * pa * D1 + h * h * qa * D2 + h * pb * D4 + h * h * qb * D5) / h;
        const double yss =
            ((ya - yb) * E0 + h * pa * E1 + h * h * qa * E2 + h * pb * E4 + h * h * qb * E5) / (h * h);
        return {y, ys / r, (yss - ys) / (r * r)};
    }

private:
    // Leading power behaviour r^p inside the first node: p = l for l >= 1; for the
    // radial mode p is read off the logarithmic derivative at r0.
    Jet below_first_node(double r, double r0) const {
        const double f0 = values.front();
        if (f0 == 0.0) return {};
        double p = l;
        if (l == 0) {
            p = r0 * deriv.front() / f0;
            if (!(p > 0.0 && p < 60.0)) p = 2.0;
        }
        const double c = f0 / std::pow(r0, p);
        if (r == 0.0) return {0.0, p == 1.0 ? c : 0.0, p == 2.0 ? 2.0 * c : 0.0};
        const double v = c * std::pow(r, p);
        return {v, p * v / r, p * (p - 1.0) * v / (r * r)};
    }
};

} // namespace liouville

#endif
