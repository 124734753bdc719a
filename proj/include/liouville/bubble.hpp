#ifndef LIOUVILLE_BUBBLE_HPP
#define LIOUVILLE_BUBBLE_HPP

// Closed-form radial functions around the standard bubble U = -2 log(1 + r^(2+2a)).
// Everything here returns value, first and second radial derivative analytically.

#include <array>
#include <cmath>
#include <complex>
#include <limits>
#include <string>

#include "liouville/errors.hpp"
#include "liouville/params.hpp"

namespace liouville {

/// Value and first two radial derivatives.
struct Jet {
    double value = 0.0;
    double d1 = 0.0;
    double d2 = 0.0;

    Jet operator+(const Jet& o) const { return {value + o.value, d1 + o.d1, d2 + o.d2}; }
    Jet operator-(const Jet& o) const { return {value - o.value, d1 - o.d1, d2 - o.d2}; }
    Jet operator*(double c) const { return {c * value, c * d1, c * d2}; }
    friend Jet operator*(double c, const Jet& j) { return j * c; }
};

namespace detail {

/// r^p with the origin handled explicitly (r^p for p < 0 is +inf there).
inline double pw(double r, double p) {
    if (r == 0.0) {
        if (p > 0.0) return 0.0;
        if (p == 0.0) return 1.0;
        return std::numeric_limits<double>::infinity();
    }
    return std::exp(p * std::log(r));
}

inline void check_alpha(double alpha) {
    if (!(alpha > -1.0)) throw DomainError("singular exponent must be > -1, got " + std::to_string(alpha));
}

/// r^p / (1 + r^beta) and its derivatives. Brackets are rewritten in 1/(1+s) for s > 1
/// so that the large-r cancellation in the second derivative is exact in the leading term.
inline Jet power_over_bubble(double p, double beta, double r) {
    const double s = pw(r, beta);
    const double w = 1.0 / (1.0 + s);
    const double z = std::isinf(s) ? 1.0 : s * w;
    Jet out;
    out.value = pw(r, p) * w;
    double b1, b2;
    if (s <= 1.0) {
        b1 = p - beta * z;
        b2 = p * (p - 1.0) - beta * (2.0 * p + beta - 1.0) * z + 2.0 * beta * beta * z * z;
    } else {
        b1 = (p - beta) + beta * w;
        b2 = (p - beta) * (p - beta - 1.0) + w * (beta * (2.0 * p + beta - 1.0) - 4.0 * beta * beta) +
             2.0 * beta * beta * w * w;
    }
    out.d1 = pw(r, p - 1.0) * w * b1;
    out.d2 = pw(r, p - 2.0) * w * b2;
    return out;
}

} // namespace detail

inline double bubble_beta(double alpha) { return 2.0 + 2.0 * alpha; }

/// U(r) = -2 log(1 + r^(2+2a)) with derivatives.
inline Jet bubble_jet(double alpha, double r) {
    detail::check_alpha(alpha);
    if (r < 0.0) throw DomainError("radius must be non-negative");
    const double beta = bubble_beta(alpha);
    const Jet t = detail::power_over_bubble(beta - 1.0, beta, r);
    return {-2.0 * std::log1p(detail::pw(r, beta)), -2.0 * beta * t.value, -2.0 * beta * t.d1};
}

inline double eval_bubble(double alpha, double r) { return bubble_jet(alpha, r).value; }

/// e^U = (1 + r^(2+2a))^-2.
inline double bubble_exp(double alpha, double r) {
    const double w = 1.0 / (1.0 + detail::pw(r, bubble_beta(alpha)));
    return w * w;
}

/// Linearized potential 8(1+a)^2 r^(2a) e^U.
inline double potential(double alpha, double r) {
    return bubble_height(alpha) * detail::pw(r, 2.0 * alpha) * bubble_exp(alpha, r);
}

/// f'' + f'/r + (V - l^2/r^2) f for a jet at radius r > 0.
inline double apply_mode_operator(double alpha, int l, const Jet& f, double r) {
    return f.d2 + f.d1 / r + (potential(alpha, r) - double(l) * l / (r * r)) * f.value;
}

/// g(r) = -r / (4a(1+a)(1 + r^(2+2a))): the radial profile of the first-order correction.
inline Jet g_jet(double alpha, double r) {
    detail::check_alpha(alpha);
    if (alpha == 0.0) throw DomainError("g is singular at alpha = 0");
    if (r < 0.0) throw DomainError("radius must be non-negative");
    const double k = -1.0 / (4.0 * alpha * (1.0 + alpha));
    return k * detail::power_over_bubble(1.0, bubble_beta(alpha), r);
}

inline double eval_g(double alpha, double r) { return g_jet(alpha, r).value; }

/// u1 = (1 - r^(2+2a)) / (1 + r^(2+2a)), the scaling kernel of the mode-0 operator.
inline Jet u1_jet(double alpha, double r) {
    detail::check_alpha(alpha);
    if (r < 0.0) throw DomainError("radius must be non-negative");
    const double beta = bubble_beta(alpha);
    return detail::power_over_bubble(0.0, beta, r) - detail::power_over_bubble(beta, beta, r);
}

inline double eval_u1(double alpha, double r) { return u1_jet(alpha, r).value; }

/// Second mode-0 homogeneous solution in closed form, normalized so r W(u1, u2) = 1.
/// With x = (1+a) log r the mode-0 equation becomes f_xx + 2 sech^2(x) f = 0, whose
/// solutions are tanh x (= -u1) and x tanh x - 1.
inline Jet u2_jet(double alpha, double r) {
    detail::check_alpha(alpha);
    if (!(r > 0.0)) throw DomainError("u2 is singular at r = 0");
    const double a1 = 1.0 + alpha;
    const double x = a1 * std::log(r);
    const double t = std::tanh(x);
    const double c = std::cosh(x);
    const double sech2 = std::isinf(c) ? 0.0 : 1.0 / (c * c);
    const double q = t + x * sech2;  // d/dx (x tanh x)
    Jet out;
    out.value = (1.0 - x * t) / a1;
    out.d1 = -q / r;
    out.d2 = q / (r * r) - a1 * (2.0 * sech2 - 2.0 * x * sech2 * t) / (r * r);
    return out;
}

/// Coefficients (A, B) of the fundamental pair: A = l/(1+a) + 1, B = l/(1+a) - 1.
inline std::array<double, 2> fundamental_coefficients(double alpha, int l) {
    const double k = double(l) / (1.0 + alpha);
    return {k + 1.0, k - 1.0};
}

inline void check_pair(double alpha, int l) {
    detail::check_alpha(alpha);
    if (l < 1) throw DomainError("fundamental pair needs l >= 1");
    if (std::abs(double(l) - (1.0 + alpha)) < 1e-12)
        throw DegeneratePairError("fundamental pair degenerates at l = 1 + alpha (l = " + std::to_string(l) + ")");
}

/// F1 ~ r^l at 0 and infinity.
inline Jet f1_jet(double alpha, int l, double r) {
    const auto [A, B] = fundamental_coefficients(alpha, l);
    const double beta = bubble_beta(alpha);
    return A * detail::power_over_bubble(l, beta, r) + B * detail::power_over_bubble(l + beta, beta, r);
}

/// F2 ~ r^-l at 0 and infinity.
inline Jet f2_jet(double alpha, int l, double r) {
    const auto [A, B] = fundamental_coefficients(alpha, l);
    const double beta = bubble_beta(alpha);
    return A * detail::power_over_bubble(beta - l, beta, r) + B * detail::power_over_bubble(-double(l), beta, r);
}

/// r W(F1, F2) = 2l (1 - l^2/(1+a)^2), constant in r.
inline double fundamental_wronskian_exact(double alpha, int l) {
    const double k = double(l) / (1.0 + alpha);
    return 2.0 * l * (1.0 - k * k);
}

enum class ClosedFormKind { bubble_U, g, u1, u2, F1, F2, kernel_dlambda, kernel_dxi_cos, kernel_dxi_sin };

/// A named closed-form radial function (with its angular frequency).
struct ClosedForm {
    ClosedFormKind kind = ClosedFormKind::bubble_U;
    double exponent = 0.0;  // alpha, or N for the kernel elements
    int l = 0;

    int frequency() const {
        switch (kind) {
            case ClosedFormKind::F1:
            case ClosedFormKind::F2: return l;
            case ClosedFormKind::g: return 1;
            case ClosedFormKind::kernel_dxi_cos:
            case ClosedFormKind::kernel_dxi_sin: return int(std::lround(exponent)) + 1;
            default: return 0;
        }
    }

    Jet operator()(double r) const {
        switch (kind) {
            case ClosedFormKind::bubble_U: return bubble_jet(exponent, r);
            case ClosedFormKind::g: return g_jet(exponent, r);
            case ClosedFormKind::u1:
            case ClosedFormKind::kernel_dlambda: return u1_jet(exponent, r);
            case ClosedFormKind::u2: return u2_jet(exponent, r);
            case ClosedFormKind::F1: return f1_jet(exponent, l, r);
            case ClosedFormKind::F2: return f2_jet(exponent, l, r);
            case ClosedFormKind::kernel_dxi_cos:
            case ClosedFormKind::kernel_dxi_sin: {
                const double np1 = exponent + 1.0;
                return 2.0 * detail::power_over_bubble(np1, 2.0 * np1, r);
            }
        }
        return {};
    }
};

struct FundamentalPair {
    ClosedForm f1;
    ClosedForm f2;
};

inline FundamentalPair fundamental_pair(double alpha, int l) {
    check_pair(alpha, l);
    return {ClosedForm{ClosedFormKind::F1, alpha, l}, ClosedForm{ClosedFormKind::F2, alpha, l}};
}

/// Mode decomposition of the quadratic h at x = eps*y, y = r(cos t, sin t):
/// h = m0 + m1c cos t + m1s sin t + m2c cos 2t + m2s sin 2t, exactly.
struct HModes {
    double m0 = 0.0;
    double m1c = 0.0;
    double m1s = 0.0;
    double m2c = 0.0;
    double m2s = 0.0;

    double operator()(double theta) const {
        return m0 + m1c * std::cos(theta) + m1s * std::sin(theta) + m2c * std::cos(2.0 * theta) +
               m2s * std::sin(2.0 * theta);
    }
};

/// Theta_2 coefficients (cos 2t, sin 2t) of the Hessian.
inline std::array<double, 2> theta2_coefficients(const Sym2& B) {
    return {0.25 * (B.xx - B.yy), 0.5 * B.xy};
}

inline HModes h_modes(const Params& params, double r) {
    const double er = params.eps * r;
    const auto t2 = theta2_coefficients(params.h.hess);
    HModes m;
    m.m0 = params.h.h0 + 0.25 * er * er * params.h.laplacian();
    m.m1c = er * params.h.grad[0];
    m.m1s = er * params.h.grad[1];
    m.m2c = er * er * t2[0];
    m.m2s = er * er * t2[1];
    return m;
}

/// U = log(lambda / (1 + lambda |y^(N+1) - xi|^2)^2), the integer-exponent bubble family.
inline double quantized_bubble(int n, double lambda, std::complex<double> xi, double y1, double y2) {
    if (n < 0) throw DomainError("N must be a non-negative integer");
    if (!(lambda > 0.0)) throw DomainError("lambda must be positive");
    const std::complex<double> z = std::pow(std::complex<double>(y1, y2), n + 1);
    const double d = std::norm(z - xi);
    return std::log(lambda) - 2.0 * std::log1p(lambda * d);
}

/// d/dlambda at lambda = 1 and the real/imaginary parts of d/dxi at xi = 0.
inline std::array<ClosedForm, 3> kernel_elements(int n) {
    if (n < 0) throw DomainError("N must be a non-negative integer");
    return {ClosedForm{ClosedFormKind::kernel_dlambda, double(n), 0},
            ClosedForm{ClosedFormKind::kernel_dxi_cos, double(n), n + 1},
            ClosedForm{ClosedFormKind::kernel_dxi_sin, double(n), n + 1}};
}

} // namespace liouville

#endif
