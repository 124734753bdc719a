#ifndef LIOUVILLE_VERIFIER_HPP
#define LIOUVILLE_VERIFIER_HPP

// Checks that only evaluate a profile and never reuse the construction's operators:
// finite-difference residuals, circle oscillations, boundary data, energy, psi, fits.

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <vector>

#include "liouville/bubble.hpp"
#include "liouville/errors.hpp"
#include "liouville/grid.hpp"
#include "liouville/params.hpp"
#include "liouville/profile.hpp"

namespace liouville {

struct FdOptions {
    unsigned mask = kAll;       // kBubble is always included
    int rings = 384;
    int angles = 0;             // 0: max(8 l_max, 16)
    double bubble_step = 1e-7;  // relative radial step for U
    double step = 3e-4;         // relative radial step for the corrections
    double angle_step = 1e-6;
    double r_inner = 1e-2;      // rings start at max(2 r_min, r_inner): the l = 1 terms are ~ r
                                // there and the radial stencil loses ulp(f) / (step r)^2
};

struct FdResidual {
    std::vector<double> radii;
    std::vector<double> angles;
    std::vector<double> field;  // [ring * angles + j]
    double weighted_sup = 0.0;  // sup |res| (1+r)^(1+2a), scaled variable
    double l1 = 0.0;            // int |res| dy over the sampled annulus
    double unscaled_sup = 0.0;  // sup of the residual of the unscaled equation on B_1
};

namespace detail {

/// U(r + h) - U(r) without cancellation.
inline double bubble_increment(double alpha, double r, double h) {
    const double beta = bubble_beta(alpha);
    const double s = pw(r, beta);
    const double ds = s * std::expm1(beta * std::log1p(h / r));
    return -2.0 * std::log1p(ds / (1.0 + s));
}

/// U(r + h) - 2U(r) + U(r - h) without cancellation, using
/// e^A + e^B - 2 = expm1(A + B) - expm1(A) expm1(B) with A + B = beta log(1 - (h/r)^2).
inline double bubble_second_difference(double alpha, double r, double h) {
    const double beta = bubble_beta(alpha);
    const double s = pw(r, beta);
    const double eta = h / r;
    const double ea = std::expm1(beta * std::log1p(eta));
    const double eb = std::expm1(beta * std::log1p(-eta));
    const double sum = s * (std::expm1(beta * std::log1p(-eta * eta)) - ea * eb);
    const double num = (1.0 + s) * sum + s * ea * s * eb;
    return -2.0 * std::log1p(num / ((1.0 + s) * (1.0 + s)));
}

/// cos(l t), sin(l t) for l = 0..L at one angle.
inline void trig_row(double t, int L, std::vector<double>& c, std::vector<double>& s) {
    c.resize(L + 1);
    s.resize(L + 1);
    for (int l = 0; l <= L; ++l) {
        c[l] = std::cos(l * t);
        s[l] = std::sin(l * t);
    }
}

inline double fourier_value(const FourierJets& f, const std::vector<double>& c, const std::vector<double>& s) {
    double v = f.radial.value;
    for (std::size_t l = 1; l < f.cos.size(); ++l) v += f.cos[l].value * c[l] + f.sin[l].value * s[l];
    return v;
}

inline int default_angles(const Params& p) { return std::max(8 * p.l_max, 16); }

} // namespace detail

/// Second-order polar finite differences of v plus r^(2a) h(eps y) e^v on rings and
/// angles offset by half a step from any construction node.
inline FdResidual fd_residual(const Profile& profile, const FdOptions& opt = {}) {
    const Params& params = profile.params;
    const double a = profile.exponent();
    const double r_lo = std::max(2.0 * profile.grid.r_min(), opt.r_inner);
    const double r_hi = profile.grid.r_max * (1.0 - 2.0 * opt.step);
    if (!(r_hi > r_lo) || opt.rings < 1) throw DomainError("finite-difference patch is empty");
    const int n_theta = opt.angles > 0 ? opt.angles : detail::default_angles(params);
    const int L = profile.max_l();
    const unsigned wmask = opt.mask & ~static_cast<unsigned>(kBubble);

    FdResidual out;
    const double dlog = (std::log(r_hi) - std::log(r_lo)) / opt.rings;
    for (int k = 0; k < opt.rings; ++k) out.radii.push_back(r_lo * std::exp((k + 0.5) * dlog));
    for (int j = 0; j < n_theta; ++j) out.angles.push_back(2.0 * std::numbers::pi * (j + 0.5) / n_theta);
    out.field.assign(out.radii.size() * n_theta, 0.0);

    std::vector<std::vector<double>> c0(n_theta), s0(n_theta);
    for (int j = 0; j < n_theta; ++j) detail::trig_row(out.angles[j], L, c0[j], s0[j]);
    // v(t+k) - 2v(t) + v(t-k) summed mode by mode: each mode contributes
    // -4 sin^2(l k / 2) times itself, which is the same stencil without the cancellation.
    const double k = opt.angle_step;
    std::vector<double> ang(L + 1);
    for (int l = 0; l <= L; ++l) {
        const double sl = std::sin(0.5 * l * k);
        ang[l] = -4.0 * sl * sl / (k * k);
    }
    const double eps = params.eps;
    const double dtheta = 2.0 * std::numbers::pi / n_theta;
    for (std::size_t k = 0; k < out.radii.size(); ++k) {
        const double r = out.radii[k];
        const double hu = opt.bubble_step * r;
        const double dp = detail::bubble_increment(a, r, hu);
        const double dm = -detail::bubble_increment(a, r, -hu);
        const double lap_u = detail::bubble_second_difference(a, r, hu) / (hu * hu) + (dp + dm) / (2.0 * hu * r);
        const double P = detail::pw(r, 2.0 * a) * bubble_exp(a, r);

        const double hw = opt.step * r;
        const FourierJets w0 = profile.fourier_at(r, wmask);
        const FourierJets wp = profile.fourier_at(r + hw, wmask);
        const FourierJets wm = profile.fourier_at(r - hw, wmask);
        const double weight = std::pow(1.0 + r, 1.0 + 2.0 * a);
        for (int j = 0; j < n_theta; ++j) {
            const double v0 = detail::fourier_value(w0, c0[j], s0[j]);
            const double vrp = detail::fourier_value(wp, c0[j], s0[j]);
            const double vrm = detail::fourier_value(wm, c0[j], s0[j]);
            double vtt = 0.0;
            for (int l = 1; l <= L; ++l) vtt += ang[l] * (w0.cos[l].value * c0[j][l] + w0.sin[l].value * s0[j][l]);
            const double lap_w = (vrp - 2.0 * v0 + vrm) / (hw * hw) + (vrp - vrm) / (2.0 * hw * r) + vtt / (r * r);
            const double t = out.angles[j];
            const double H = params.h(eps * r * std::cos(t), eps * r * std::sin(t));
            const double res = lap_u + lap_w + P * H * std::exp(v0);
            out.field[k * n_theta + j] = res;
            out.weighted_sup = std::max(out.weighted_sup, std::abs(res) * weight);
            out.l1 += std::abs(res) * r * r * dlog * dtheta;
            if (eps > 0.0 && r * eps <= 1.0) out.unscaled_sup = std::max(out.unscaled_sup, std::abs(res) / (eps * eps));
        }
    }
    return out;
}

/// Bound on |FD Laplacian of U - Delta U| at radius r for the stencil above:
/// eta^2 (r^4 |U''''| / 12 + r^3 |U'''| / 6) / r^2 with eta = bubble_step, plus 64 ulps of
/// each stencil term. Radial derivatives come from those in s = log r, where U_s = -2 b q
/// with q = r^b / (1 + r^b).
inline double bubble_fd_bound(double alpha, double r, double bubble_step = FdOptions{}.bubble_step) {
    const double b = bubble_beta(alpha);
    const double s = detail::pw(r, b);
    const double q = s / (1.0 + s), p = 1.0 / (1.0 + s);
    const double u1 = -2.0 * b * q;
    const double u2 = -2.0 * b * b * q * p;
    const double u3 = -2.0 * b * b * b * q * p * (p - q);
    const double u4 = -2.0 * b * b * b * b * q * p * (1.0 - 6.0 * q * p);
    const double r2d2 = u2 - u1;
    const double r3d3 = u3 - 3.0 * u2 + 2.0 * u1;
    const double r4d4 = u4 - 6.0 * u3 + 11.0 * u2 - 6.0 * u1;
    const double trunc = bubble_step * bubble_step * (std::abs(r4d4) / 12.0 + std::abs(r3d3) / 6.0);
    const double round = 64.0 * std::numeric_limits<double>::epsilon() * (std::abs(r2d2) + std::abs(u1));
    return (trunc + round) / (r * r);
}

/// max over angles of |term| at each radius.
inline std::vector<double> term_envelope(const Profile& profile, Origin origin, const std::vector<double>& radii) {
    const int n = detail::default_angles(profile.params);
    const CorrectionTerm* t = profile.term(origin);
    std::vector<double> out(radii.size(), 0.0);
    if (!t) return out;
    const int L = t->max_l();
    std::vector<std::vector<double>> c(n), s(n);
    for (int j = 0; j < n; ++j) detail::trig_row(2.0 * std::numbers::pi * (j + 0.5) / n, L, c[j], s[j]);
    std::vector<double> v(n);
    for (std::size_t k = 0; k < radii.size(); ++k) {
        std::fill(v.begin(), v.end(), 0.0);
        for (const auto& f : t->modes) {
            const double x = f.at(profile.grid, radii[k]).value;
            for (int j = 0; j < n; ++j)
                v[j] += f.parity == Parity::radial ? x : f.parity == Parity::cos ? x * c[j][f.l] : x * s[j][f.l];
        }
        for (double x : v) out[k] = std::max(out[k], std::abs(x));
    }
    return out;
}

struct HarnackTable {
    std::vector<double> radii;
    std::vector<double> osc;
    double max = 0.0;
};

/// max_t v(r, t) - min_t v(r, t) on each radius.
inline HarnackTable harnack_oscillation(const Profile& profile, const std::vector<double>& radii, int angles = 0,
                                        unsigned mask = kAll) {
    const int n = angles > 0 ? angles : detail::default_angles(profile.params);
    const int L = profile.max_l();
    std::vector<std::vector<double>> c(n), s(n);
    for (int j = 0; j < n; ++j) detail::trig_row(2.0 * std::numbers::pi * j / n, L, c[j], s[j]);
    HarnackTable out;
    for (double r : radii) {
        const FourierJets f = profile.fourier_at(r, mask & ~static_cast<unsigned>(kBubble));
        double lo = std::numeric_limits<double>::infinity(), hi = -lo;
        for (int j = 0; j < n; ++j) {
            const double v = detail::fourier_value(f, c[j], s[j]);
            lo = std::min(lo, v);
            hi = std::max(hi, v);
        }
        out.radii.push_back(r);
        out.osc.push_back(hi - lo);
        out.max = std::max(out.max, hi - lo);
    }
    return out;
}

/// Log-spaced radii from 2 r_min to R.
inline std::vector<double> harnack_radii(const Profile& profile, int count = 200) {
    std::vector<double> out;
    const double lo = std::log(2.0 * profile.grid.r_min()), hi = std::log(profile.grid.r_max);
    for (int k = 0; k < count; ++k) out.push_back(std::exp(lo + (hi - lo) * k / (count - 1)));
    out.back() = profile.grid.r_max;
    return out;
}

struct BoundaryEnergy {
    double boundary_osc = 0.0;
    double energy = 0.0;
    double energy_error = 0.0;
};

/// Oscillation of u on the unit circle and int_{B_1} |x|^(2a) h e^u dx, both computed in
/// the scaled variable (the integral is scale invariant).
inline BoundaryEnergy boundary_osc_and_energy(const Profile& profile, unsigned mask = kAll, double tol = 1e-9) {
    const Params& params = profile.params;
    const double rb = 1.0 / params.eps;
    if (rb > profile.grid.r_max * (1.0 + 1e-12)) throw DomainError("the unit disk is not covered by the grid");
    const double a = profile.exponent();
    const int n = detail::default_angles(params);
    const int L = profile.max_l();
    std::vector<std::vector<double>> c(n), s(n);
    for (int j = 0; j < n; ++j) detail::trig_row(2.0 * std::numbers::pi * j / n, L, c[j], s[j]);
    const unsigned wmask = mask & ~static_cast<unsigned>(kBubble);

    BoundaryEnergy out;
    out.boundary_osc = harnack_oscillation(profile, {std::min(rb, profile.grid.r_max)}, n, mask).max;
    auto integrand = [&](double r) {
        if (r == 0.0) return 0.0;
        const FourierJets f = profile.fourier_at(r, wmask);
        double acc = 0.0;
        for (int j = 0; j < n; ++j) {
            const double t = 2.0 * std::numbers::pi * j / n;
            const double H = params.h(params.eps * r * std::cos(t), params.eps * r * std::sin(t));
            acc += H * std::exp(detail::fourier_value(f, c[j], s[j]));
        }
        return 2.0 * std::numbers::pi * r * detail::pw(r, 2.0 * a) * bubble_exp(a, r) * acc / n;
    };
    const QuadratureResult q = weighted_integrate(profile.grid, integrand, 0.0, std::min(rb, profile.grid.r_max), tol);
    out.energy = q.value;
    out.energy_error = q.error;
    return out;
}

struct PsiResult {
    std::vector<double> a;  // cos coefficients, index l (a[0] = 0 after removing the mean)
    std::vector<double> b;
    std::array<double, 2> grad0{0.0, 0.0};
    double tail_ratio = 0.0;
};

/// Fourier coefficients of the zero-mean boundary trace; the harmonic extension is
/// sum r^l (a_l cos lt + b_l sin lt), whose gradient at 0 is (a_1, b_1).
inline PsiResult psi_from_boundary(const std::vector<double>& trace, double tol = 1e-10) {
    const int n = static_cast<int>(trace.size());
    if (n < 16) throw DomainError("boundary trace needs at least 16 samples");
    PsiResult out;
    const int top = n / 2;
    out.a.assign(top + 1, 0.0);
    out.b.assign(top + 1, 0.0);
    double mean = 0.0;
    for (double v : trace) mean += v;
    mean /= n;
    double total = 0.0, tail = 0.0;
    for (int l = 1; l <= top; ++l) {
        double ac = 0.0, as = 0.0;
        for (int j = 0; j < n; ++j) {
            const double t = 2.0 * std::numbers::pi * ((static_cast<long>(l) * j) % n) / n;
            ac += (trace[j] - mean) * std::cos(t);
            as += (trace[j] - mean) * std::sin(t);
        }
        const double f = (l == top && n % 2 == 0) ? 1.0 / n : 2.0 / n;
        out.a[l] = ac * f;
        out.b[l] = as * f;
        const double e = out.a[l] * out.a[l] + out.b[l] * out.b[l];
        total += e;
        if (l > n / 4) tail += e;
    }
    out.grad0 = {out.a[1], out.b[1]};
    // a trace that is flat to roundoff has nothing to resolve
    double scale = 0.0;
    for (double v : trace) scale = std::max(scale, std::abs(v));
    const double floor = 64.0 * std::numeric_limits<double>::epsilon() * scale;
    out.tail_ratio = total > floor * floor ? tail / total : 0.0;
    if (out.tail_ratio > tol) throw ToleranceError("boundary trace is under-resolved", out.tail_ratio);
    return out;
}

/// Samples u on the unit circle (scaled radius 1/eps) and extracts psi.
inline PsiResult psi_from_profile(const Profile& profile, double tol = 1e-10) {
    const int n = detail::default_angles(profile.params);
    const double rb = 1.0 / profile.params.eps;
    if (rb > profile.grid.r_max * (1.0 + 1e-12)) throw DomainError("the unit disk is not covered by the grid");
    const FourierJets f = profile.fourier_at(std::min(rb, profile.grid.r_max));
    std::vector<double> trace(n);
    for (int j = 0; j < n; ++j) trace[j] = f.value(2.0 * std::numbers::pi * j / n);
    return psi_from_boundary(trace, tol);
}

struct NonvanishingReport {
    std::array<double, 2> grad_log_h{0.0, 0.0};
    double grad_log_h_norm = 0.0;
    double combined_norm = 0.0;  // |grad log h(0) + grad psi(0)|
    double lap_log_h = 0.0;      // signed value
};

/// grad log h(0) = a / h0, lap log h(0) = tr B / h0 - |a|^2 / h0^2.
inline NonvanishingReport nonvanishing_report(const Params& params, std::array<double, 2> psi_grad0) {
    const QuadraticH& h = params.h;
    NonvanishingReport out;
    out.grad_log_h = {h.grad[0] / h.h0, h.grad[1] / h.h0};
    out.grad_log_h_norm = std::hypot(out.grad_log_h[0], out.grad_log_h[1]);
    out.combined_norm = std::hypot(out.grad_log_h[0] + psi_grad0[0], out.grad_log_h[1] + psi_grad0[1]);
    out.lap_log_h = h.laplacian() / h.h0 - h.grad_norm2() / (h.h0 * h.h0);
    return out;
}

struct PowerFit {
    double exponent = 0.0;
    double constant = 0.0;
    double width = 0.0;     // 1.96 standard errors of the exponent
    double residual = 0.0;  // rms of the log residuals
};

/// Least squares of log y = log C + p log x.
inline PowerFit decay_and_order_fit(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size()) throw FitError("fit needs paired data");
    const std::size_t n = x.size();
    if (n < 3) throw FitError("fit needs at least 3 points, got " + std::to_string(n));
    std::vector<double> lx(n), ly(n);
    for (std::size_t i = 0; i < n; ++i) {
        if (!(x[i] > 0.0 && y[i] > 0.0) || !std::isfinite(x[i]) || !std::isfinite(y[i]))
            throw FitError("fit needs positive finite data");
        lx[i] = std::log(x[i]);
        ly[i] = std::log(y[i]);
    }
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        mx += lx[i];
        my += ly[i];
    }
    mx /= n;
    my /= n;
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        sxx += (lx[i] - mx) * (lx[i] - mx);
        sxy += (lx[i] - mx) * (ly[i] - my);
    }
    if (!(sxx > 0.0)) throw FitError("fit needs at least two distinct abscissae");
    PowerFit out;
    out.exponent = sxy / sxx;
    const double b = my - out.exponent * mx;
    out.constant = std::exp(b);
    double ss = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double e = ly[i] - b - out.exponent * lx[i];
        ss += e * e;
    }
    out.residual = std::sqrt(ss / n);
    out.width = 1.96 * std::sqrt(ss / (n - 2) / sxx);
    return out;
}

} // namespace liouville

#endif
