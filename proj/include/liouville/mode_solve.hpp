#ifndef LIOUVILLE_MODE_SOLVE_HPP
#define LIOUVILLE_MODE_SOLVE_HPP

// Linear solvers for the mode-l restrictions of the linearized operator
//   f'' + f'/r + (V - l^2/r^2) f + S = 0,   V = 8(1+a)^2 r^(2a) e^U.
// Mode l >= 1 uses variation of parameters with the closed-form pair, written in the
// scaled variables F1 = r^l phi1, F2 = r^-l phi2 so nothing overflows. Mode 0 is an
// initial-value integration in s = log r, cross-checked against the u1/u2 representation.

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <string>
#include <tuple>
#include <vector>

#include "liouville/bubble.hpp"
#include "liouville/errors.hpp"
#include "liouville/grid.hpp"
#include "liouville/mode_function.hpp"

namespace liouville {

struct SolveOptions {
    bool check_tail = true;
    double tail_floor = 0.0;   // tail magnitudes below this skip the decay test
    bool cross_check = true;
    double cross_tol = 1e-8;   // mode 0: IVP vs representation, relative to sup|f|
};

namespace detail {

/// Decay exponent p of a sampled tail, fitted as log2 of the envelope ratio over
/// [R/4, R/2] and [R/2, R]. +inf for an identically zero outer half.
inline double tail_decay_exponent(const RadialGrid& g, const std::vector<double>& S) {
    const double R = g.r_max;
    double inner = 0.0, outer = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i) {
        if (g.r[i] >= 0.25 * R && g.r[i] < 0.5 * R) inner = std::max(inner, std::abs(S[i]));
        else if (g.r[i] >= 0.5 * R) outer = std::max(outer, std::abs(S[i]));
    }
    if (outer == 0.0) return std::numeric_limits<double>::infinity();
    if (inner == 0.0) return -std::numeric_limits<double>::infinity();
    return std::log2(inner / outer);
}

/// Local power p of S ~ r^p at the first node, from the first two samples.
inline double leading_power(double s0, double s1, double ds, double fallback) {
    if (s0 != 0.0 && s1 != 0.0 && (s0 > 0.0) == (s1 > 0.0)) {
        const double p = std::log(s1 / s0) / ds;
        if (std::isfinite(p)) return std::clamp(p, -1.9, 60.0);
    }
    return fallback;
}

} // namespace detail

/// Residual of the discrete operator with a 4th-order 5-point stencil in s.
struct DiscreteResidual {
    std::vector<double> residual;  // zero outside the stencil range
    double max_abs = 0.0;
    double max_rel = 0.0;          // max |res| / max scale over checked nodes
};

inline DiscreteResidual discrete_residual(double alpha, int l, const RadialGrid& g, const std::vector<double>& f,
                                          const std::vector<double>& S) {
    DiscreteResidual out;
    const std::size_t m = g.size();
    out.residual.assign(m, 0.0);
    const double h = g.ds;
    double scale = 0.0;
    for (std::size_t i = 2; i + 2 < m; ++i) {
        const double fss = (-f[i - 2] + 16.0 * f[i - 1] - 30.0 * f[i] + 16.0 * f[i + 1] - f[i + 2]) / (12.0 * h * h);
        const double r = g.r[i];
        const double lap = fss / (r * r);
        const double v = potential(alpha, r) * f[i];
        const double c = double(l) * l * f[i] / (r * r);
        const double src = S.empty() ? 0.0 : S[i];
        out.residual[i] = lap + v - c + src;
        out.max_abs = std::max(out.max_abs, std::abs(out.residual[i]));
        scale = std::max({scale, std::abs(lap), std::abs(v), std::abs(c), std::abs(src)});
    }
    out.max_rel = scale > 0.0 ? out.max_abs / scale : 0.0;
    return out;
}

/// Solver bound to one exponent and one grid; caches the closed-form data at nodes and
/// at the 6-point Gauss nodes of every interval.
class ModeSolver {
public:
    static constexpr int kGauss = 6;

    ModeSolver(double alpha, const RadialGrid& grid) : alpha_(alpha), grid_(&grid) {
        detail::check_alpha(alpha);
        const std::size_t m = grid.size();
        if (m < 16) throw GridSizeError("solver needs at least 16 nodes");
        beta_ = bubble_beta(alpha);
        const double h = grid.ds;
        wn_.resize(m);
        zn_.resize(m);
        vn_.resize(m);
        for (std::size_t i = 0; i < m; ++i) {
            std::tie(wn_[i], zn_[i]) = wz(grid.s[i]);
            vn_[i] = potential(alpha, grid.r[i]);
        }
        wq_.resize((m - 1) * kGauss);
        zq_.resize((m - 1) * kGauss);
        e2q_.resize((m - 1) * kGauss);
        sq_.resize((m - 1) * kGauss);
        for (std::size_t i = 0; i + 1 < m; ++i) {
            for (int q = 0; q < kGauss; ++q) {
                const double sv = grid.s[i] + gauss_.x[q] * h;
                const std::size_t k = i * kGauss + q;
                std::tie(wq_[k], zq_[k]) = wz(sv);
                e2q_[k] = std::exp(2.0 * sv);
                sq_[k] = sv;
            }
        }
        for (int pos = 0; pos < 3; ++pos)
            for (int q = 0; q < kGauss; ++q) lag_[pos][q] = detail::lagrange4(pos + gauss_.x[q]);
        for (int pos = 0; pos < 3; ++pos) lag_mid_[pos] = detail::lagrange4(pos + 0.5);
    }

    double alpha() const { return alpha_; }
    const RadialGrid& grid() const { return *grid_; }
    double potential_at(std::size_t i) const { return vn_[i]; }

    /// Mode l >= 1 with the variation-of-parameters tie-break: no F2 component at
    /// 0 and no F1 component at infinity (the outer integral is truncated at R).
    ModeFunction solve_l(int l, const std::vector<double>& S, Parity parity, const SolveOptions& opt = {}) const {
        check_pair(alpha_, l);
        if (parity == Parity::radial) throw DomainError("mode l >= 1 needs cos or sin parity");
        const RadialGrid& g = *grid_;
        const std::size_t m = g.size();
        if (S.size() != m) throw DomainError("right side is not aligned with the grid");

        ModeFunction f = ModeFunction::zero(l, parity, m);
        double sup = 0.0;
        for (double v : S) sup = std::max(sup, std::abs(v));
        if (sup == 0.0) return f;

        const double p_tail = detail::tail_decay_exponent(g, S);
        if (opt.check_tail) {
            double outer = 0.0;
            for (std::size_t i = 0; i < m; ++i)
                if (g.r[i] >= 0.5 * g.r_max) outer = std::max(outer, std::abs(S[i]));
            if (outer > std::max(opt.tail_floor, 1e-14 * sup) && !(p_tail > 1.0 + 2.0 * alpha_))
                throw TailDecayError("right side of mode " + std::to_string(l) + " decays like r^-" +
                                         std::to_string(p_tail) + ", slower than r^-(1+2a)",
                                     p_tail);
        }

        const auto [A, B] = fundamental_coefficients(alpha_, l);
        const Jet j1 = f1_jet(alpha_, l, 1.0);
        const Jet j2 = f2_jet(alpha_, l, 1.0);
        const double C = j1.value * j2.d1 - j1.d1 * j2.value;  // r W(F1, F2), r-independent
        const double h = g.ds;
        const double decay = std::exp(-l * h);
        std::array<double, kGauss> kf{}, kb{};
        for (int q = 0; q < kGauss; ++q) {
            kf[q] = h * gauss_.w[q] * std::exp(-l * h * (1.0 - gauss_.x[q]));
            kb[q] = h * gauss_.w[q] * std::exp(-l * h * gauss_.x[q]);
        }

        // I1_i = r_i^-l int_0^r_i t F1 S dt,  I2_i = r_i^l int_r_i^R t F2 S dt
        std::vector<double> I1(m, 0.0), I2(m, 0.0);
        {
            const double p0 = detail::leading_power(S[0], S[1], h, double(l) + 2.0 * alpha_);
            const double phi1 = A * wn_[0] + B * zn_[0];
            I1[0] = g.r[0] * g.r[0] * phi1 * S[0] / std::max(l + 2.0 + p0, 0.5);
        }
        for (std::size_t i = 1; i < m; ++i) {
            const std::size_t j = i - 1;
            double acc = 0.0;
            for (int q = 0; q < kGauss; ++q) {
                const std::size_t k = j * kGauss + q;
                acc += kf[q] * e2q_[k] * (A * wq_[k] + B * zq_[k]) * source_at(S, j, q);
            }
            I1[i] = decay * I1[i - 1] + acc;
        }
        for (std::size_t i = m - 1; i-- > 0;) {
            double acc = 0.0;
            for (int q = 0; q < kGauss; ++q) {
                const std::size_t k = i * kGauss + q;
                acc += kb[q] * e2q_[k] * (A * zq_[k] + B * wq_[k]) * source_at(S, i, q);
            }
            I2[i] = decay * I2[i + 1] + acc;
        }

        for (std::size_t i = 0; i < m; ++i) {
            const double r = g.r[i];
            const double phi1 = A * wn_[i] + B * zn_[i];
            const double phi2 = A * zn_[i] + B * wn_[i];
            const double zw = beta_ * zn_[i] * wn_[i];
            f.values[i] = -(phi1 * I2[i] + phi2 * I1[i]) / C;
            f.deriv[i] = -((l * phi1 + (B - A) * zw) * I2[i] + (-l * phi2 + (A - B) * zw) * I1[i]) / (C * r);
            f.deriv2[i] = -f.deriv[i] / r - (vn_[i] - double(l) * l / (r * r)) * f.values[i] - S[i];
        }

        // Neglected int_R^inf t F2 S, from the fitted decay of S.
        const double p = std::isfinite(p_tail) && p_tail > 0.0 ? p_tail : 2.0 + 2.0 * alpha_;
        const double R = g.r_max;
        const double phi1R = A * wn_[m - 1] + B * zn_[m - 1];
        f.error_estimate =
            std::abs(phi1R) * std::abs(A) * std::abs(S[m - 1]) * R * R / (std::max(p + l - 2.0, 0.5) * std::abs(C));
        return f;
    }

    /// Mode 0 with f(0) = f'(0) = 0.
    ModeFunction solve_0(const std::vector<double>& S, const SolveOptions& opt = {}) const {
        const RadialGrid& g = *grid_;
        const std::size_t m = g.size();
        if (S.size() != m) throw DomainError("right side is not aligned with the grid");
        ModeFunction f = ModeFunction::zero(0, Parity::radial, m);
        double sup = 0.0;
        for (double v : S) sup = std::max(sup, std::abs(v));
        if (sup == 0.0) return f;

        const double h = g.ds;
        const double p0 = detail::leading_power(S[0], S[1], h, 2.0 * alpha_);
        double y = -S[0] * g.r[0] * g.r[0] / ((p0 + 2.0) * (p0 + 2.0));
        double z = (p0 + 2.0) * y;
        store0(f, 0, y, z, S[0]);
        for (std::size_t i = 0; i + 1 < m; ++i) {
            const double ra = g.r[i], rb = g.r[i + 1];
            const double rm = std::exp(g.s[i] + 0.5 * h);
            const double qa = ra * ra * vn_[i], qb = rb * rb * vn_[i + 1];
            const double qm = rm * rm * potential(alpha_, rm);
            const double fa = ra * ra * S[i], fb = rb * rb * S[i + 1];
            const double fm = rm * rm * midpoint_source(S, i);
            const double k1y = z, k1z = -(qa * y + fa);
            const double k2y = z + 0.5 * h * k1z, k2z = -(qm * (y + 0.5 * h * k1y) + fm);
            const double k3y = z + 0.5 * h * k2z, k3z = -(qm * (y + 0.5 * h * k2y) + fm);
            const double k4y = z + h * k3z, k4z = -(qb * (y + h * k3y) + fb);
            y += h * (k1y + 2.0 * k2y + 2.0 * k3y + k4y) / 6.0;
            z += h * (k1z + 2.0 * k2z + 2.0 * k3z + k4z) / 6.0;
            if (!std::isfinite(y) || !std::isfinite(z)) throw StepError("mode-0 integration blew up", rb);
            store0(f, i + 1, y, z, S[i + 1]);
        }

        if (opt.cross_check) {
            const std::vector<double> rep = representation0(S, p0);
            const double scale = f.sup_abs();
            double diff = 0.0;
            for (std::size_t i = 0; i < m; ++i) diff = std::max(diff, std::abs(rep[i] - f.values[i]));
            f.error_estimate = diff;
            if (scale > 0.0 && diff > 10.0 * opt.cross_tol * scale)
                throw ToleranceError("mode-0 integration disagrees with the u1/u2 representation", diff / scale);
        }
        return f;
    }

    /// u1 int_0^r t u2 S - u2 int_0^r t u1 S with the closed-form pair (r W = 1).
    std::vector<double> representation0(const std::vector<double>& S, double p0) const {
        const RadialGrid& g = *grid_;
        const std::size_t m = g.size();
        const double h = g.ds;
        const double a1 = 1.0 + alpha_;
        const double r0 = g.r[0];
        // u1 ~ 1, u2 ~ 1/(1+a) + log r below r0
        double J0 = S[0] * r0 * r0 / (p0 + 2.0);
        double J1 = S[0] * r0 * r0 * ((1.0 / a1 + std::log(r0)) / (p0 + 2.0) - 1.0 / ((p0 + 2.0) * (p0 + 2.0)));
        std::vector<double> out(m);
        auto emit = [&](std::size_t i) {
            const double u1 = wn_[i] - zn_[i];
            const double u2 = u2_jet(alpha_, g.r[i]).value;
            out[i] = u1 * J1 - u2 * J0;
        };
        emit(0);
        for (std::size_t i = 0; i + 1 < m; ++i) {
            for (int q = 0; q < kGauss; ++q) {
                const std::size_t k = i * kGauss + q;
                const double u1 = wq_[k] - zq_[k];
                const double x = a1 * sq_[k];
                const double u2 = (1.0 - x * std::tanh(x)) / a1;
                const double wt = h * gauss_.w[q] * e2q_[k] * source_at(S, i, q);
                J0 += wt * u1;
                J1 += wt * u2;
            }
            emit(i + 1);
        }
        return out;
    }

    /// Numerical second mode-0 solution with r W(u1, u2) = 1: reduction of order inside
    /// anchor r_a ~ 1/2 and outside r_b ~ 2, joined by an RK4 integration across r = 1.
    ModeFunction build_u2(double glue_tol = 1e-8) const {
        const RadialGrid& g = *grid_;
        const std::size_t m = g.size();
        const double h = g.ds;
        auto nearest = [&](double r) {
            const double x = (std::log(r) - g.s.front()) / h;
            return static_cast<std::size_t>(std::clamp(std::lround(x), 1L, static_cast<long>(m) - 2));
        };
        const std::size_t ia = nearest(0.5);
        const std::size_t ib = nearest(2.0);
        if (!(g.r[ia] < 1.0 && g.r[ib] > 1.0 && std::abs(wn_[ib] - zn_[ib]) > 1e-3))
            throw DomainError("grid does not straddle r = 1 with room for both anchors");

        // J(s) = int ds / u1^2, cumulative on the grid
        std::vector<double> J(m, 0.0);
        for (std::size_t i = 0; i + 1 < m; ++i) {
            double acc = 0.0;
            for (int q = 0; q < kGauss; ++q) {
                const std::size_t k = i * kGauss + q;
                const double u1 = wq_[k] - zq_[k];
                acc += h * gauss_.w[q] / (u1 * u1);
            }
            J[i + 1] = J[i] + acc;
        }
        ModeFunction u = ModeFunction::zero(0, Parity::radial, m);
        auto u1s = [&](std::size_t i) { return -2.0 * beta_ * zn_[i] * wn_[i]; };  // r u1'
        auto from_reduction = [&](std::size_t i, double K, double J0) {
            const double u1 = wn_[i] - zn_[i];
            const double y = u1 * (J[i] - J0 + K);
            const double z = u1s(i) * (J[i] - J0 + K) + 1.0 / u1;
            store0(u, i, y, z, 0.0);
        };
        for (std::size_t i = 0; i <= ia; ++i) from_reduction(i, 0.0, J[ia]);

        // RK4 across the zero of u1, 8 substeps per interval
        double y = 0.0;
        double z = 1.0 / (wn_[ia] - zn_[ia]);
        const int sub = 8;
        const double hs = h / sub;
        auto q_at = [&](double sv) {
            const double r = std::exp(sv);
            return r * r * potential(alpha_, r);
        };
        for (std::size_t i = ia; i < ib; ++i) {
            for (int k = 0; k < sub; ++k) {
                const double s0 = g.s[i] + k * hs;
                const double qa = q_at(s0), qm = q_at(s0 + 0.5 * hs), qb = q_at(s0 + hs);
                const double k1y = z, k1z = -qa * y;
                const double k2y = z + 0.5 * hs * k1z, k2z = -qm * (y + 0.5 * hs * k1y);
                const double k3y = z + 0.5 * hs * k2z, k3z = -qm * (y + 0.5 * hs * k2y);
                const double k4y = z + hs * k3z, k4z = -qb * (y + hs * k3y);
                y += hs * (k1y + 2.0 * k2y + 2.0 * k3y + k4y) / 6.0;
                z += hs * (k1z + 2.0 * k2z + 2.0 * k3z + k4z) / 6.0;
            }
            if (i + 1 < ib) store0(u, i + 1, y, z, 0.0);
        }
        const double u1b = wn_[ib] - zn_[ib];
        const double K = y / u1b;
        const double z_red = u1s(ib) * K + 1.0 / u1b;
        const double mismatch = std::abs(z_red - z) / std::max(1.0, std::abs(z));
        if (mismatch > glue_tol) throw ToleranceError("u2 anchors disagree on the derivative", mismatch);
        for (std::size_t i = ib; i < m; ++i) from_reduction(i, K, J[ib]);
        u.error_estimate = mismatch;
        return u;
    }

private:
    std::pair<double, double> wz(double sv) const {
        const double e = std::exp(beta_ * sv);
        if (std::isinf(e)) return {0.0, 1.0};
        const double w = 1.0 / (1.0 + e);
        return {w, e * w};
    }

    double source_at(const std::vector<double>& S, std::size_t interval, int q) const {
        const std::size_t m = S.size();
        const std::size_t j0 = detail::stencil_start(interval, m);
        const auto& L = lag_[interval - j0][q];
        return L[0] * S[j0] + L[1] * S[j0 + 1] + L[2] * S[j0 + 2] + L[3] * S[j0 + 3];
    }

    double midpoint_source(const std::vector<double>& S, std::size_t interval) const {
        const std::size_t j0 = detail::stencil_start(interval, S.size());
        const auto& L = lag_mid_[interval - j0];
        return L[0] * S[j0] + L[1] * S[j0 + 1] + L[2] * S[j0 + 2] + L[3] * S[j0 + 3];
    }

    // y = f, z = r f'
    void store0(ModeFunction& f, std::size_t i, double y, double z, double S) const {
        const double r = grid_->r[i];
        f.values[i] = y;
        f.deriv[i] = z / r;
        f.deriv2[i] = -f.deriv[i] / r - vn_[i] * y - S;
    }

    double alpha_;
    double beta_ = 0.0;
    const RadialGrid* grid_;
    detail::UnitGauss<kGauss> gauss_;
    std::vector<double> wn_, zn_, vn_;
    std::vector<double> wq_, zq_, e2q_, sq_;
    std::array<std::array<std::array<double, 4>, kGauss>, 3> lag_{};
    std::array<std::array<double, 4>, 3> lag_mid_{};
};

/// One-shot wrappers.
inline ModeFunction solve_mode_l(double alpha, int l, const ModeFunction& rhs, const RadialGrid& grid,
                                 const SolveOptions& opt = {}) {
    if (rhs.l != l) throw DomainError("right side has frequency " + std::to_string(rhs.l) + ", expected " +
                                      std::to_string(l));
    return ModeSolver(alpha, grid).solve_l(l, rhs.values, rhs.parity, opt);
}

inline ModeFunction solve_mode0(double alpha, const ModeFunction& rhs, const RadialGrid& grid,
                                const SolveOptions& opt = {}) {
    if (rhs.l != 0) throw DomainError("mode-0 solve needs a radial right side");
    return ModeSolver(alpha, grid).solve_0(rhs.values, opt);
}

inline ModeFunction build_u2(double alpha, const RadialGrid& grid) { return ModeSolver(alpha, grid).build_u2(); }

} // namespace liouville

#endif
