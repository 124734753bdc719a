#ifndef LIOUVILLE_PARAMS_HPP
#define LIOUVILLE_PARAMS_HPP

#include <array>
#include <cmath>
#include <string>
#include <vector>

#include "liouville/errors.hpp"

namespace liouville {

/// Which construction is run: a non-integer singular exponent, or an integer one (N).
enum class Pipeline { nonquantized, quantized };

inline const char* to_string(Pipeline p) {
    return p == Pipeline::nonquantized ? "nonquantized" : "quantized";
}

/// Symmetric 2x2 matrix stored as (xx, xy, yy).
struct Sym2 {
    double xx = 0.0;
    double xy = 0.0;
    double yy = 0.0;

    double trace() const { return xx + yy; }
    bool operator==(const Sym2&) const = default;
};

/// Quadratic coefficient function h(x) = h0 + a.x + 1/2 x^T B x.
struct QuadraticH {
    double h0 = 18.0;
    std::array<double, 2> grad{1.0, 0.0};
    Sym2 hess{3.0, 0.0, 1.0};

    double operator()(double x1, double x2) const {
        return h0 + grad[0] * x1 + grad[1] * x2 +
               0.5 * (hess.xx * x1 * x1 + 2.0 * hess.xy * x1 * x2 + hess.yy * x2 * x2);
    }
    double laplacian() const { return hess.trace(); }
    double grad_norm2() const { return grad[0] * grad[0] + grad[1] * grad[1]; }

    bool operator==(const QuadraticH&) const = default;
};

/// Normalized bubble height 8(1+alpha)^2.
inline double bubble_height(double alpha) { return 8.0 * (1.0 + alpha) * (1.0 + alpha); }

/// Default coefficient for the non-integer exponent: a = (1,0), B = diag(3,1).
inline QuadraticH default_h_nonquantized(double alpha) {
    return QuadraticH{bubble_height(alpha), {1.0, 0.0}, {3.0, 0.0, 1.0}};
}

/// The integer-exponent coefficient h(x) = 8(N+1)^2 + |x|^2.
inline QuadraticH default_h_quantized(int n) {
    return QuadraticH{bubble_height(n), {0.0, 0.0}, {2.0, 0.0, 2.0}};
}

/// One problem instance.
struct Params {
    Pipeline pipeline = Pipeline::nonquantized;
    double alpha = 0.5;   // singular exponent (nonquantized)
    int n = 1;            // singular exponent (quantized)
    double eps = 0.01;    // scale
    QuadraticH h = default_h_nonquantized(0.5);
    int l_max = 32;
    double tol = 1e-12;
    double tau = 1.0;
    int max_iter = 50;

    /// The exponent used by the active pipeline.
    double exponent() const { return pipeline == Pipeline::quantized ? double(n) : alpha; }

    /// Radius of the scaled working domain.
    double domain_radius() const {
        return (pipeline == Pipeline::quantized ? tau : 1.0) / eps;
    }

    static Params nonquantized(double alpha, double eps) {
        Params p;
        p.pipeline = Pipeline::nonquantized;
        p.alpha = alpha;
        p.eps = eps;
        p.h = default_h_nonquantized(alpha);
        return p;
    }

    static Params quantized(int n, double eps) {
        Params p;
        p.pipeline = Pipeline::quantized;
        p.n = n;
        p.alpha = n;
        p.eps = eps;
        p.h = default_h_quantized(n);
        return p;
    }

    /// Every violated invariant, by field name. Empty when valid.
    /// eps = 0 is accepted only with allow_zero_eps (limit runs on an explicit grid).
    std::vector<std::string> problems(bool allow_zero_eps = false) const {
        std::vector<std::string> out;
        const double a = exponent();
        if (pipeline == Pipeline::nonquantized) {
            if (!(alpha > -1.0)) out.push_back("alpha: must be > -1");
            if (alpha >= 0.0 && std::abs(alpha - std::round(alpha)) < 1e-12)
                out.push_back("alpha: must not be a non-negative integer for the nonquantized pipeline");
        } else if (n < 0) {
            out.push_back("n: must be a non-negative integer");
        }
        if (allow_zero_eps ? !(eps >= 0.0 && eps < 1.0) : !(eps > 0.0 && eps < 1.0))
            out.push_back("eps: must lie in (0, 1)");
        if (!(h.h0 > 0.0)) out.push_back("h.h0: must be positive");
        else if (std::abs(h.h0 - bubble_height(a)) > 1e-12 * bubble_height(a))
            out.push_back("h.h0: must equal 8(1+exponent)^2");
        if (l_max < 2) out.push_back("l_max: must be >= 2");
        if (!(tol > 0.0)) out.push_back("tol: must be positive");
        if (!(tau > 0.0)) out.push_back("tau: must be positive");
        if (max_iter < 1) out.push_back("max_iter: must be >= 1");
        return out;
    }

    void validate(bool allow_zero_eps = false) const {
        auto p = problems(allow_zero_eps);
        if (!p.empty()) throw ValidationError(std::move(p));
    }
};

} // namespace liouville

#endif
