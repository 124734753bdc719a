#ifndef LIOUVILLE_PROFILE_HPP
#define LIOUVILLE_PROFILE_HPP

// Approximate blow-up profiles in the scaled variable y = x / eps:
//   v = U + c0 + c1 + c2 + d   (non-integer exponent)
//   v = U + c + b              (integer exponent N, h = 8(N+1)^2 + |x|^2)
// Every correction is a sum of Fourier modes solving L_l f + S = 0 for a recorded
// forcing S, so residuals can be assembled without differentiating anything.

#include <algorithm>
#include <cmath>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "liouville/bubble.hpp"
#include "liouville/errors.hpp"
#include "liouville/grid.hpp"
#include "liouville/mode_function.hpp"
#include "liouville/mode_solve.hpp"
#include "liouville/params.hpp"

namespace liouville {

enum class Origin { c0, c1, c2, d, c, b };

inline const char* to_string(Origin o) {
    switch (o) {
        case Origin::c0: return "c0";
        case Origin::c1: return "c1";
        case Origin::c2: return "c2";
        case Origin::d: return "d";
        case Origin::c: return "c";
        case Origin::b: return "b";
    }
    return "?";
}

/// One correction: its modes and, aligned with them, the forcing S of L_l f + S = 0.
struct CorrectionTerm {
    Origin origin = Origin::c0;
    std::vector<ModeFunction> modes;
    std::vector<ModeFunction> forcing;

    bool is_zero() const {
        for (const auto& f : modes)
            if (f.sup_abs() > 0.0) return false;
        return true;
    }

    const ModeFunction* find(int l, Parity p) const {
        for (const auto& f : modes)
            if (f.l == l && f.parity == p) return &f;
        return nullptr;
    }

    int max_l() const {
        int l = 0;
        for (const auto& f : modes) l = std::max(l, f.l);
        return l;
    }
};

namespace detail {

/// cos(l t_j), sin(l t_j) on n uniform angles, for l < l_top.
struct AngularTable {
    int n = 0;
    int l_top = 0;
    std::vector<double> theta;
    std::vector<std::vector<double>> cs, sn;

    AngularTable(int n_theta, int top) : n(n_theta), l_top(top) {
        theta.resize(n);
        for (int j = 0; j < n; ++j) theta[j] = 2.0 * std::numbers::pi * j / n;
        cs.assign(top, std::vector<double>(n));
        sn.assign(top, std::vector<double>(n));
        for (int l = 0; l < top; ++l)
            for (int j = 0; j < n; ++j) {
                // exact reduction of l*j mod n keeps the table symmetric
                const double t = 2.0 * std::numbers::pi * ((static_cast<long>(l) * j) % n) / n;
                cs[l][j] = std::cos(t);
                sn[l][j] = std::sin(t);
            }
    }

    double factor(int l, Parity p, int j) const {
        if (p == Parity::radial) return 1.0;
        return p == Parity::cos ? cs[l][j] : sn[l][j];
    }
};

/// Adds the modes of a term, sampled at node i, into out[j] over the angular table.
inline void accumulate(const std::vector<ModeFunction>& modes, std::size_t i, const AngularTable& tab,
                       std::vector<double>& out) {
    for (const auto& f : modes) {
        const double v = f.values[i];
        if (v == 0.0) continue;
        if (f.parity == Parity::radial) {
            for (int j = 0; j < tab.n; ++j) out[j] += v;
        } else {
            const auto& row = f.parity == Parity::cos ? tab.cs[f.l] : tab.sn[f.l];
            for (int j = 0; j < tab.n; ++j) out[j] += v * row[j];
        }
    }
}

inline double bubble_weight(double exponent, double r) {
    return detail::pw(r, 2.0 * exponent) * bubble_exp(exponent, r);
}

} // namespace detail

/// Mode decomposition of a residual-type field on the grid.
struct ResidualField {
    double exponent = 0.0;
    double eps = 0.0;
    int l_max = 0;
    std::vector<double> radial;
    std::vector<std::vector<double>> cos_modes;  // [l][node], l = 1..l_max; row 0 unused
    std::vector<std::vector<double>> sin_modes;
    double weighted_sup = 0.0;                   // sup |E| (1+r)^(1+2a) over nodes and angles
    double normalized = 0.0;                     // weighted_sup / eps^3
    std::vector<double> mode_weighted_sup;       // per l, both parities combined
    double tail_energy_ratio = 0.0;              // modes l_max < l < 2 l_max against the total
    double angular_energy = 0.0;                 // modes 1 <= l <= l_max, summed over nodes

    ModeFunction mode(int l, Parity p) const {
        ModeFunction f = ModeFunction::zero(l, p, radial.size());
        if (l == 0) f.values = radial;
        else f.values = p == Parity::cos ? cos_modes[l] : sin_modes[l];
        return f;
    }
};

/// Residual of the scaled equation for U + corrections, optionally plus an iterate d:
///   E        = P[(H - h0) e^c + h0 (e^c - 1 - c)] - sum S
///   E + f(d) with f(d) = P[H e^c (e^d - 1 - d) + (H e^c - h0) d]
/// where P = r^(2a) e^U and H = h(eps y). Projected onto modes 0..l_top.
inline ResidualField assemble_residual(const Params& params, const RadialGrid& grid,
                                       const std::vector<CorrectionTerm>& corrections,
                                       const CorrectionTerm* d = nullptr, std::optional<int> l_top = std::nullopt) {
    const int L = l_top.value_or(params.l_max);
    const int n_theta = 4 * std::max(params.l_max, 1);
    const detail::AngularTable tab(n_theta, 2 * std::max(params.l_max, 1));
    const std::size_t m = grid.size();
    const double a = params.exponent();
    const double h0 = params.h.h0;
    const double eps = params.eps;
    const auto t2 = theta2_coefficients(params.h.hess);

    ResidualField out;
    out.exponent = a;
    out.eps = eps;
    out.l_max = L;
    out.radial.assign(m, 0.0);
    out.cos_modes.assign(L + 1, std::vector<double>(m, 0.0));
    out.sin_modes.assign(L + 1, std::vector<double>(m, 0.0));
    out.mode_weighted_sup.assign(L + 1, 0.0);

    std::vector<double> c(n_theta), dv(n_theta), S(n_theta), G(n_theta);
    double total_energy = 0.0, tail_energy = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
        const double r = grid.r[i];
        const double P = detail::bubble_weight(a, r);
        const double er = eps * r;
        std::fill(c.begin(), c.end(), 0.0);
        std::fill(S.begin(), S.end(), 0.0);
        std::fill(dv.begin(), dv.end(), 0.0);
        for (const auto& t : corrections) {
            detail::accumulate(t.modes, i, tab, c);
            detail::accumulate(t.forcing, i, tab, S);
        }
        if (d) detail::accumulate(d->modes, i, tab, dv);
        const double dh0 = 0.25 * er * er * params.h.laplacian();
        const double w = std::pow(1.0 + r, 1.0 + 2.0 * a);
        for (int j = 0; j < n_theta; ++j) {
            const double dh = dh0 + er * (params.h.grad[0] * tab.cs[1][j] + params.h.grad[1] * tab.sn[1][j]) +
                              er * er * (t2[0] * tab.cs[2][j] + t2[1] * tab.sn[2][j]);
            const double ec1 = std::expm1(c[j]);
            double g = P * (dh * (1.0 + ec1) + h0 * (ec1 - c[j])) - S[j];
            if (d) {
                const double He = (h0 + dh) * (1.0 + ec1);
                const double Hdiff = dh * (1.0 + ec1) + h0 * ec1;  // H e^c - h0
                g += P * (He * (std::expm1(dv[j]) - dv[j]) + Hdiff * dv[j]);
            }
            G[j] = g;
            out.weighted_sup = std::max(out.weighted_sup, std::abs(g) * w);
        }
        double e2 = 0.0;
        for (int j = 0; j < n_theta; ++j) e2 += G[j] * G[j];
        total_energy += e2 / n_theta;

        double a0 = 0.0;
        for (int j = 0; j < n_theta; ++j) a0 += G[j];
        out.radial[i] = a0 / n_theta;
        out.mode_weighted_sup[0] = std::max(out.mode_weighted_sup[0], std::abs(out.radial[i]) * w);
        for (int l = 1; l < tab.l_top; ++l) {
            double ac = 0.0, as = 0.0;
            const auto& cr = tab.cs[l];
            const auto& sr = tab.sn[l];
            for (int j = 0; j < n_theta; ++j) {
                ac += G[j] * cr[j];
                as += G[j] * sr[j];
            }
            ac *= 2.0 / n_theta;
            as *= 2.0 / n_theta;
            const double el = 0.5 * (ac * ac + as * as);
            if (l <= params.l_max) out.angular_energy += el;
            else tail_energy += el;
            if (l <= L) {
                out.cos_modes[l][i] = ac;
                out.sin_modes[l][i] = as;
                out.mode_weighted_sup[l] = std::max(out.mode_weighted_sup[l], std::hypot(ac, as) * w);
            }
        }
    }
    out.normalized = eps > 0.0 ? out.weighted_sup / (eps * eps * eps) : 0.0;
    out.tail_energy_ratio = total_energy > 0.0 ? tail_energy / total_energy : 0.0;
    if (out.tail_energy_ratio > params.tol)
        throw ToleranceError("angular modes beyond the truncation carry too much energy", out.tail_energy_ratio);
    return out;
}

/// c1 = eps g(r) (a1 cos t + a2 sin t), with forcing eps a_j r^(1+2a) e^U.
inline CorrectionTerm build_c1(const Params& params, const RadialGrid& grid) {
    if (params.pipeline != Pipeline::nonquantized) throw DomainError("c1 belongs to the non-integer pipeline");
    const double a = params.alpha;
    CorrectionTerm t;
    t.origin = Origin::c1;
    const Parity parities[2] = {Parity::cos, Parity::sin};
    for (int k = 0; k < 2; ++k) {
        const double coef = params.eps * params.h.grad[k];
        t.modes.push_back(ModeFunction::from_jet(1, parities[k], grid, [&](double r) { return g_jet(a, r); }, coef));
        ModeFunction s = ModeFunction::zero(1, parities[k], grid.size());
        for (std::size_t i = 0; i < grid.size(); ++i)
            s.values[i] = coef * grid.r[i] * detail::bubble_weight(a, grid.r[i]);
        t.forcing.push_back(std::move(s));
    }
    return t;
}

/// Radial profiles of the mode-2 correction: L_2 w1 + r^(2+2a) e^U = 0 and
/// L_2 w2 + r^(2a) e^U (4(1+a)^2 g^2 + g r) = 0.
struct C2Result {
    CorrectionTerm term;
    ModeFunction w1;
    ModeFunction w2;
    int sign = 1;
    double audit_ratio = 0.0;  // mode-2 weighted residual without c2 over with c2, at order eps^2
};

inline std::vector<double> w1_source(double a, const RadialGrid& grid) {
    std::vector<double> S(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) S[i] = grid.r[i] * grid.r[i] * detail::bubble_weight(a, grid.r[i]);
    return S;
}

inline std::vector<double> w2_source(double a, const RadialGrid& grid) {
    std::vector<double> S(grid.size());
    const double k = 4.0 * (1.0 + a) * (1.0 + a);
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const double r = grid.r[i];
        const double g = eval_g(a, r);
        S[i] = detail::bubble_weight(a, r) * (k * g * g + g * r);
    }
    return S;
}

/// Coefficients (cos 2t, sin 2t) of (a.theta)^2 minus its mean.
inline std::array<double, 2> gradient_product_coefficients(const QuadraticH& h) {
    return {0.5 * (h.grad[0] * h.grad[0] - h.grad[1] * h.grad[1]), h.grad[0] * h.grad[1]};
}

namespace detail {

inline CorrectionTerm assemble_c2(const Params& params, const RadialGrid& grid, const ModeFunction& w1,
                                  const ModeFunction& w2, const std::vector<double>& S1,
                                  const std::vector<double>& S2, int sign) {
    const auto th = theta2_coefficients(params.h.hess);
    const auto pr = gradient_product_coefficients(params.h);
    const double e2 = params.eps * params.eps * sign;
    CorrectionTerm t;
    t.origin = Origin::c2;
    const Parity parities[2] = {Parity::cos, Parity::sin};
    for (int k = 0; k < 2; ++k) {
        ModeFunction f = ModeFunction::zero(2, parities[k], grid.size());
        ModeFunction s = ModeFunction::zero(2, parities[k], grid.size());
        for (std::size_t i = 0; i < grid.size(); ++i) {
            f.values[i] = e2 * (th[k] * w1.values[i] + pr[k] * w2.values[i]);
            f.deriv[i] = e2 * (th[k] * w1.deriv[i] + pr[k] * w2.deriv[i]);
            f.deriv2[i] = e2 * (th[k] * w1.deriv2[i] + pr[k] * w2.deriv2[i]);
            s.values[i] = e2 * (th[k] * S1[i] + pr[k] * S2[i]);
        }
        f.error_estimate = std::abs(e2) * (std::abs(th[k]) * w1.error_estimate + std::abs(pr[k]) * w2.error_estimate);
        t.modes.push_back(std::move(f));
        t.forcing.push_back(std::move(s));
    }
    return t;
}

} // namespace detail

/// Mode-0 correction c0 with c0(0) = c0'(0) = 0, forcing
/// eps^2 r^(2a) e^U (r^2 Lap h / 4 + |a|^2 (4(1+a)^2 g^2 + g r) / 2).
inline CorrectionTerm build_c0(const Params& params, const RadialGrid& grid, const ModeSolver& solver) {
    if (params.pipeline != Pipeline::nonquantized) throw DomainError("c0 belongs to the non-integer pipeline");
    const double a = params.alpha;
    const double e2 = params.eps * params.eps;
    const double k = 4.0 * (1.0 + a) * (1.0 + a);
    ModeFunction s = ModeFunction::zero(0, Parity::radial, grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const double r = grid.r[i];
        const double g = eval_g(a, r);
        s.values[i] = e2 * detail::bubble_weight(a, r) *
                      (0.25 * r * r * params.h.laplacian() + 0.5 * params.h.grad_norm2() * (k * g * g + g * r));
    }
    CorrectionTerm t;
    t.origin = Origin::c0;
    t.modes.push_back(solver.solve_0(s.values));
    t.forcing.push_back(std::move(s));
    return t;
}

inline CorrectionTerm build_c0(const Params& params, const RadialGrid& grid) {
    return build_c0(params, grid, ModeSolver(params.alpha, grid));
}

/// c2 = eps^2 (w1 Theta2 + w2 P2), P2 the mode-2 part of (a.theta)^2. The overall sign is
/// the one that cancels the order-eps^2 mode-2 residual; the audit evaluates that order
/// at a small auxiliary scale on the same grid.
inline C2Result build_c2(const Params& params, const RadialGrid& grid, const ModeSolver& solver) {
    if (params.pipeline != Pipeline::nonquantized) throw DomainError("c2 belongs to the non-integer pipeline");
    const double a = params.alpha;
    C2Result out;
    const auto S1 = w1_source(a, grid);
    const auto S2 = w2_source(a, grid);
    out.w1 = solver.solve_l(2, S1, Parity::cos);
    out.w2 = solver.solve_l(2, S2, Parity::cos);

    const auto th = theta2_coefficients(params.h.hess);
    const auto pr = gradient_product_coefficients(params.h);
    const bool trivial = th[0] == 0.0 && th[1] == 0.0 && pr[0] == 0.0 && pr[1] == 0.0;
    if (trivial) {
        out.term = detail::assemble_c2(params, grid, out.w1, out.w2, S1, S2, 1);
        return out;
    }

    Params aux = params;
    aux.eps = std::min(params.eps, 1e-4);
    aux.l_max = std::min(params.l_max, 8);
    const std::vector<CorrectionTerm> base{build_c1(aux, grid), build_c0(aux, grid, solver)};
    const double without = assemble_residual(aux, grid, base, nullptr, 2).mode_weighted_sup[2];
    for (int sign : {1, -1}) {
        auto with = base;
        with.push_back(detail::assemble_c2(aux, grid, out.w1, out.w2, S1, S2, sign));
        const double res = assemble_residual(aux, grid, with, nullptr, 2).mode_weighted_sup[2];
        const double ratio = res > 0.0 ? without / res : std::numeric_limits<double>::infinity();
        if (ratio >= 100.0) {
            out.sign = sign;
            out.audit_ratio = ratio;
            out.term = detail::assemble_c2(params, grid, out.w1, out.w2, S1, S2, sign);
            return out;
        }
        out.audit_ratio = std::max(out.audit_ratio, ratio);
    }
    throw ToleranceError("c2 does not cancel the order-eps^2 mode-2 residual", out.audit_ratio);
}

inline C2Result build_c2(const Params& params, const RadialGrid& grid) {
    return build_c2(params, grid, ModeSolver(params.alpha, grid));
}

/// Quantized radial correction: L_0 c + eps^2 r^(2N+2) e^U = 0, c(0) = c'(0) = 0.
inline CorrectionTerm build_c_quantized(const Params& params, const RadialGrid& grid, const ModeSolver& solver) {
    const double a = params.exponent();
    const double e2 = params.eps * params.eps;
    ModeFunction s = ModeFunction::zero(0, Parity::radial, grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i)
        s.values[i] = e2 * grid.r[i] * grid.r[i] * detail::bubble_weight(a, grid.r[i]);
    CorrectionTerm t;
    t.origin = Origin::c;
    t.modes.push_back(solver.solve_0(s.values));
    t.forcing.push_back(std::move(s));
    return t;
}

/// Weight of the iterate bound: (1+r)^(1-2a) log(2+r), or log(2+r) for the integer case.
inline double iterate_weight(const Params& params, double r) {
    if (params.pipeline == Pipeline::quantized) return std::log(2.0 + r);
    return std::pow(1.0 + r, 1.0 - 2.0 * params.alpha) * std::log(2.0 + r);
}

/// eps^3 for the non-integer pipeline, eps^2 for the integer one.
inline double iterate_scale(const Params& params) {
    const double e = params.eps;
    return params.pipeline == Pipeline::quantized ? e * e : e * e * e;
}

/// sup over nodes and angles of |term| / iterate_weight.
inline double weighted_iterate_norm(const Params& params, const RadialGrid& grid, const CorrectionTerm& t) {
    const int n_theta = 4 * std::max(params.l_max, 1);
    const int top = std::max(t.max_l() + 1, 2);
    const detail::AngularTable tab(n_theta, top);
    std::vector<double> v(n_theta);
    double out = 0.0;
    for (std::size_t i = 0; i < grid.size(); ++i) {
        std::fill(v.begin(), v.end(), 0.0);
        detail::accumulate(t.modes, i, tab, v);
        const double w = iterate_weight(params, grid.r[i]);
        for (double x : v) out = std::max(out, std::abs(x) / w);
    }
    return out;
}

struct PicardResult {
    CorrectionTerm iterate;
    std::vector<double> deltas;     // weighted sup of d^(m+1) - d^(m)
    std::vector<double> relative;   // deltas over the weighted sup of d^(m+1)
    std::vector<double> bounds;     // weighted sup of d^(m) over eps^3 (eps^2 integer case)
    bool converged = false;
};

/// Picard iteration L d^(m+1) = -(E + f(d^(m))) from d^(0) = 0, one solve per mode.
inline PicardResult picard_d(const Params& params, const RadialGrid& grid, const ModeSolver& solver,
                             const std::vector<CorrectionTerm>& corrections) {
    const bool radial_only = params.pipeline == Pipeline::quantized;
    const int L = radial_only ? 0 : params.l_max;
    const Origin origin = radial_only ? Origin::b : Origin::d;
    PicardResult out;
    CorrectionTerm d;
    d.origin = origin;
    d.modes.push_back(ModeFunction::zero(0, Parity::radial, grid.size()));
    for (int l = 1; l <= L; ++l) {
        d.modes.push_back(ModeFunction::zero(l, Parity::cos, grid.size()));
        d.modes.push_back(ModeFunction::zero(l, Parity::sin, grid.size()));
    }
    d.forcing = d.modes;

    const double scale = iterate_scale(params);
    for (int it = 1; it <= params.max_iter; ++it) {
        const ResidualField G = assemble_residual(params, grid, corrections, &d, L);
        // The residual is only guaranteed to decay like r^-(1+2a), with no margin, and on
        // short domains it is far from asymptotic; truncation shows up in error_estimate.
        SolveOptions opt;
        opt.check_tail = false;

        CorrectionTerm next;
        next.origin = origin;
        next.modes.push_back(solver.solve_0(G.radial, opt));
        next.forcing.push_back(G.mode(0, Parity::radial));
        for (int l = 1; l <= L; ++l) {
            for (Parity p : {Parity::cos, Parity::sin}) {
                const auto& src = p == Parity::cos ? G.cos_modes[l] : G.sin_modes[l];
                next.modes.push_back(solver.solve_l(l, src, p, opt));
                next.forcing.push_back(G.mode(l, p));
            }
        }
        CorrectionTerm diff = next;
        for (std::size_t k = 0; k < diff.modes.size(); ++k) {
            for (std::size_t i = 0; i < grid.size(); ++i) diff.modes[k].values[i] -= d.modes[k].values[i];
        }
        const double delta = weighted_iterate_norm(params, grid, diff);
        const double norm = weighted_iterate_norm(params, grid, next);
        out.deltas.push_back(delta);
        out.relative.push_back(norm > 0.0 ? delta / norm : 0.0);
        out.bounds.push_back(scale > 0.0 ? norm / scale : 0.0);
        d = std::move(next);
        if (!std::isfinite(delta)) throw ConvergenceError("Picard iterate is not finite", out.deltas);
        if (out.relative.back() < params.tol) {
            out.converged = true;
            break;
        }
        if (it >= 2 && out.bounds.back() > 2.0 * out.bounds.front())
            throw ConvergenceError("Picard iterate bound is growing", out.deltas);
    }
    if (!out.converged)
        throw ConvergenceError("Picard iteration did not converge in " + std::to_string(params.max_iter) + " steps",
                               out.deltas);
    out.iterate = std::move(d);
    return out;
}

/// Which parts of a profile to evaluate.
enum Component : unsigned {
    kBubble = 1u,
    kC0 = 2u,
    kC1 = 4u,
    kC2 = 8u,
    kC = 16u,
    kIterate = 32u,
    kCorrections = kC0 | kC1 | kC2 | kC,
    kAll = 63u,
};

inline unsigned component_of(Origin o) {
    switch (o) {
        case Origin::c0: return kC0;
        case Origin::c1: return kC1;
        case Origin::c2: return kC2;
        case Origin::c: return kC;
        case Origin::d:
        case Origin::b: return kIterate;
    }
    return 0u;
}

/// Radial jets of every angular frequency at one radius.
struct FourierJets {
    Jet radial;
    std::vector<Jet> cos;  // index l
    std::vector<Jet> sin;

    double value(double theta) const {
        double v = radial.value;
        for (std::size_t l = 1; l < cos.size(); ++l)
            v += cos[l].value * std::cos(l * theta) + sin[l].value * std::sin(l * theta);
        return v;
    }
};

struct BuildOptions {
    bool c0 = true;
    bool c1 = true;
    bool c2 = true;
    bool iterate = true;
};

/// The assembled approximate solution in the scaled variable.
struct Profile {
    Params params;
    RadialGrid grid;
    std::vector<CorrectionTerm> corrections;
    std::optional<CorrectionTerm> iterate;
    bool converged = false;
    std::vector<double> iteration_trace;   // absolute weighted deltas
    std::vector<double> relative_trace;
    std::vector<double> bound_trace;       // iterate bound constant per step
    std::optional<C2Result> c2;
    ResidualField residual;                // E, without the iterate

    Pipeline pipeline() const { return params.pipeline; }
    double exponent() const { return params.exponent(); }

    const CorrectionTerm* term(Origin o) const {
        if (iterate && iterate->origin == o) return &*iterate;
        for (const auto& t : corrections)
            if (t.origin == o) return &t;
        return nullptr;
    }

    int max_l() const {
        int l = 0;
        for (const auto& t : corrections) l = std::max(l, t.max_l());
        if (iterate) l = std::max(l, iterate->max_l());
        return l;
    }

    FourierJets fourier_at(double r, unsigned mask = kAll) const {
        FourierJets out;
        const int L = max_l();
        out.cos.assign(L + 1, Jet{});
        out.sin.assign(L + 1, Jet{});
        if (mask & kBubble) out.radial = bubble_jet(exponent(), r);
        auto add = [&](const CorrectionTerm& t) {
            if (!(mask & component_of(t.origin))) return;
            for (const auto& f : t.modes) {
                const Jet j = f.at(grid, r);
                if (f.parity == Parity::radial) out.radial = out.radial + j;
                else if (f.parity == Parity::cos) out.cos[f.l] = out.cos[f.l] + j;
                else out.sin[f.l] = out.sin[f.l] + j;
            }
        };
        for (const auto& t : corrections) add(t);
        if (iterate) add(*iterate);
        return out;
    }

    double value(double r, double theta, unsigned mask = kAll) const {
        return fourier_at(r, mask).value(theta);
    }
};

/// Non-integer exponent: c1 (closed form), c2, c0, then the Picard iterate d.
inline Profile build_nonquantized(const Params& params, int m, const BuildOptions& opt = {}) {
    params.validate();
    if (params.pipeline != Pipeline::nonquantized) throw DomainError("expected the non-integer pipeline");
    Profile p;
    p.params = params;
    p.grid = make_grid(params, m);
    const ModeSolver solver(params.alpha, p.grid);
    if (opt.c1) p.corrections.push_back(build_c1(params, p.grid));
    if (opt.c2) {
        p.c2 = build_c2(params, p.grid, solver);
        p.corrections.push_back(p.c2->term);
    }
    if (opt.c0) p.corrections.push_back(build_c0(params, p.grid, solver));
    p.residual = assemble_residual(params, p.grid, p.corrections);
    if (opt.iterate) {
        PicardResult pr = picard_d(params, p.grid, solver, p.corrections);
        p.iterate = std::move(pr.iterate);
        p.converged = pr.converged;
        p.iteration_trace = std::move(pr.deltas);
        p.relative_trace = std::move(pr.relative);
        p.bound_trace = std::move(pr.bounds);
    }
    return p;
}

/// Integer exponent N with h = 8(N+1)^2 + |x|^2: radial c, then the Picard iterate b.
/// eps = 0 is accepted on an explicit grid and yields U itself.
inline Profile build_quantized(const Params& params, const RadialGrid& grid, bool iterate = true) {
    params.validate(true);
    if (params.pipeline != Pipeline::quantized) throw DomainError("expected the integer pipeline");
    if (!(params.h == default_h_quantized(params.n)))
        throw DomainError("the integer pipeline fixes h = 8(N+1)^2 + |x|^2");
    Profile p;
    p.params = params;
    p.grid = grid;
    const ModeSolver solver(params.exponent(), p.grid);
    p.corrections.push_back(build_c_quantized(params, p.grid, solver));
    Params eval = params;
    eval.l_max = std::min(params.l_max, 2);  // radial fields: the angular projection is only an audit here
    p.residual = assemble_residual(eval, p.grid, p.corrections, nullptr, 0);
    if (iterate) {
        PicardResult pr = picard_d(params, p.grid, solver, p.corrections);
        p.iterate = std::move(pr.iterate);
        p.converged = pr.converged;
        p.iteration_trace = std::move(pr.deltas);
        p.relative_trace = std::move(pr.relative);
        p.bound_trace = std::move(pr.bounds);
    }
    return p;
}

inline Profile build_quantized(const Params& params, int m, bool iterate = true) {
    params.validate();
    return build_quantized(params, make_grid(params, m), iterate);
}

inline Profile build_profile(const Params& params, int m) {
    return params.pipeline == Pipeline::quantized ? build_quantized(params, m) : build_nonquantized(params, m);
}

/// u(x) = v(x / eps) - 2(1+a) log eps on the unit disk (1+N for the integer pipeline).
struct UnscaledProfile {
    const Profile* profile = nullptr;
    double shift = 0.0;
    unsigned mask = kAll;

    double radius() const { return profile->params.eps * profile->grid.r_max; }

    double operator()(double x1, double x2) const {
        const double eps = profile->params.eps;
        const double rho = std::hypot(x1, x2);
        if (rho > radius() * (1.0 + 1e-12)) throw DomainError("point lies outside the scaled grid");
        return profile->value(std::min(rho / eps, profile->grid.r_max), std::atan2(x2, x1), mask) + shift;
    }
};

inline UnscaledProfile unscale(const Profile& p, unsigned mask = kAll) {
    if (!(p.params.eps > 0.0)) throw DomainError("unscaling needs eps > 0");
    return {&p, -2.0 * (1.0 + p.exponent()) * std::log(p.params.eps), mask};
}

} // namespace liouville

#endif
