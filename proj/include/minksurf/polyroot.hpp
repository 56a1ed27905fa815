#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <vector>

namespace minksurf {

namespace detail {

inline double poly_eval(std::span<const double> c, double x) {
    double acc = 0.0;
    for (std::size_t k = c.size(); k-- > 0;) acc = acc * x + c[k];
    return acc;
}

inline std::vector<double> poly_derivative(std::span<const double> c) {
    std::vector<double> d;
    for (std::size_t k = 1; k < c.size(); ++k)
        d.push_back(static_cast<double>(k) * c[k]);
    return d;
}

// bisection on a bracketing interval followed by guarded Newton polish
inline double refine_root(std::span<const double> c, std::span<const double> dc,
                          double lo, double hi) {
    double flo = poly_eval(c, lo);
    if (flo == 0.0) return lo;
    for (int it = 0; it < 120; ++it) {
        const double mid = 0.5 * (lo + hi);
        const double fm = poly_eval(c, mid);
        if (fm == 0.0) return mid;
        if ((fm < 0.0) == (flo < 0.0)) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
        if (hi - lo <= 1e-15 * std::max(1.0, std::abs(lo) + std::abs(hi))) break;
    }
    double x = 0.5 * (lo + hi);
    for (int it = 0; it < 8; ++it) {
        const double f = poly_eval(c, x);
        const double df = poly_eval(dc, x);
        if (df == 0.0) break;
        const double step = f / df;
        const double nx = x - step;
        if (nx < lo || nx > hi) break;
        x = nx;
        if (std::abs(step) <= 1e-15 * std::max(1.0, std::abs(x))) break;
    }
    return x;
}

}  // namespace detail

/// All real roots of a dense polynomial (coefficients in ascending order),
/// by recursive critical-point isolation: the roots of the derivative split
/// the line into monotone pieces, each holding at most one sign change.
/// Roots are refined to ~1e-15 relative accuracy; even-multiplicity roots
/// that only touch zero are detected through the critical values.
inline std::vector<double> real_roots(std::span<const double> coeffs_in) {
    // strip negligible leading coefficients
    std::vector<double> c(coeffs_in.begin(), coeffs_in.end());
    double scale = 0.0;
    for (double v : c) scale = std::max(scale, std::abs(v));
    if (scale == 0.0) return {};
    while (c.size() > 1 && std::abs(c.back()) < 1e-14 * scale) c.pop_back();

    const std::size_t degree = c.size() - 1;
    if (degree == 0) return {};
    if (degree == 1) return {-c[0] / c[1]};

    const auto dc = detail::poly_derivative(c);
    std::vector<double> crit = real_roots(dc);
    std::sort(crit.begin(), crit.end());

    double bound = 0.0;
    for (std::size_t k = 0; k < degree; ++k)
        bound = std::max(bound, std::abs(c[k] / c.back()));
    bound += 1.0;

    std::vector<double> nodes{-bound};
    for (double x : crit)
        if (x > -bound && x < bound) nodes.push_back(x);
    nodes.push_back(bound);

    std::vector<double> roots;
    const double touch_tol = 1e-12 * scale * std::max(1.0, std::pow(bound, degree));
    for (std::size_t k = 0; k + 1 < nodes.size(); ++k) {
        const double a = nodes[k], b = nodes[k + 1];
        const double fa = detail::poly_eval(c, a);
        const double fb = detail::poly_eval(c, b);
        if ((fa < 0.0 && fb > 0.0) || (fa > 0.0 && fb < 0.0))
            roots.push_back(detail::refine_root(c, dc, a, b));
        // grazing root at a critical point
        if (k + 2 < nodes.size() && std::abs(fb) <= touch_tol) roots.push_back(b);
    }
    std::sort(roots.begin(), roots.end());
    roots.erase(std::unique(roots.begin(), roots.end(),
                            [](double a, double b) {
                                return std::abs(a - b) <=
                                       1e-12 * std::max(1.0, std::abs(a));
                            }),
                roots.end());
    return roots;
}

}  // namespace minksurf
