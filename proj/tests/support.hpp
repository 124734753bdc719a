#ifndef LIOUVILLE_TEST_SUPPORT_HPP
#define LIOUVILLE_TEST_SUPPORT_HPP

#include <algorithm>
#include <cmath>
#include <vector>

#include "liouville/bubble.hpp"

namespace testing_support {

inline std::vector<double> log_points(double lo, double hi, int n) {
    std::vector<double> out;
    for (int k = 0; k < n; ++k) out.push_back(lo * std::pow(hi / lo, double(k) / (n - 1)));
    return out;
}

/// |L_l f + S| over the largest term of the operator at r.
inline double relative_mode_residual(double alpha, int l, const liouville::Jet& f, double r, double S = 0.0) {
    const double V = liouville::potential(alpha, r);
    const double c = double(l) * l / (r * r);
    const double res = f.d2 + f.d1 / r + (V - c) * f.value + S;
    const double scale = std::max({std::abs(f.d2), std::abs(f.d1 / r), std::abs(V * f.value), std::abs(c * f.value),
                                   std::abs(S)});
    return scale > 0.0 ? std::abs(res) / scale : 0.0;
}

/// Central differences of a scalar function: (f', f'') with step h.
template <class F>
std::pair<double, double> central_derivatives(F&& f, double r, double h) {
    const double fp = f(r + h), f0 = f(r), fm = f(r - h);
    const double fp2 = f(r + 2 * h), fm2 = f(r - 2 * h);
    const double d1 = (8.0 * (fp - fm) - (fp2 - fm2)) / (12.0 * h);
    const double d2 = (-fp2 + 16.0 * fp - 30.0 * f0 + 16.0 * fm - fm2) / (12.0 * h * h);
    return {d1, d2};
}

} // namespace testing_support

#endif
