#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <string>
#include <vector>

#include "minksurf/errors.hpp"
#include "minksurf/grid.hpp"
#include "minksurf/polyroot.hpp"
#include "minksurf/potentials.hpp"
#include "minksurf/solution_types.hpp"

namespace minksurf {

/// One point of the self-similar branch, parametrized by z = -g^3 > 0.
struct ProfileSample {
    double z, g, f, xi;
};

/// Sampled branch of the self-similar reduction with invariant
/// 2 g^3 + f^2 g^2 = C (< 0). Stored in ascending z; xi is then strictly
/// decreasing.
struct SelfSimilarProfile {
    double C = -1.0;
    std::vector<ProfileSample> samples;

    double xi_min() const { return samples.back().xi; }
    double xi_max() const { return samples.front().xi; }
    double z_min() const { return samples.front().z; }
    double z_max() const { return samples.back().z; }
};

namespace detail {

inline double xi_of_z(double z, double C) {
    return z * std::pow(z + 0.5 * C, -0.75) * std::pow(z - 0.25 * C, -0.375);
}

inline double dxi_dz(double z, double C) {
    return xi_of_z(z, C) *
           (1.0 / z - 0.75 / (z + 0.5 * C) - 0.375 / (z - 0.25 * C));
}

}  // namespace detail

/// Build the branch over [z_min, z_max]. The admissible region is
/// z > -C/2 (> 0): below it the square root of f turns imaginary and the
/// similarity integral hits its pole.
inline SelfSimilarProfile solve_profile(double C, double z_min, double z_max, int n) {
    if (!(C < 0.0)) throw EvalError("solve_profile: C must be negative");
    if (!(z_max > z_min)) throw EvalError("solve_profile: empty z range");
    if (n < 8) throw EvalError("solve_profile: need at least 8 samples");
    if (!(z_min > -0.5 * C))
        throw EvalError("solve_profile: range must stay above the pole at z = " +
                        std::to_string(-0.5 * C) +
                        " (radicand and similarity integral break below it)");
    SelfSimilarProfile p;
    p.C = C;
    p.samples.reserve(static_cast<std::size_t>(n));
    const double dz = (z_max - z_min) / (n - 1);
    for (int k = 0; k < n; ++k) {
        const double z = z_min + k * dz;
        const double g = -std::cbrt(z);
        const double f = std::sqrt(C + 2.0 * z) / std::cbrt(z);
        p.samples.push_back({z, g, f, detail::xi_of_z(z, C)});
    }
    return p;
}

/// Invert the (strictly decreasing) similarity map xi(z) on the branch.
inline double invert_xi(const SelfSimilarProfile& p, double xi) {
    if (!(xi >= p.xi_min() && xi <= p.xi_max()))
        throw EvalError("invert_xi: xi = " + std::to_string(xi) +
                        " outside the profile range [" + std::to_string(p.xi_min()) +
                        ", " + std::to_string(p.xi_max()) + "]");
    double lo = p.z_min(), hi = p.z_max();
    for (int it = 0; it < 80; ++it) {
        const double mid = 0.5 * (lo + hi);
        (detail::xi_of_z(mid, p.C) >= xi ? lo : hi) = mid;
    }
    double z = 0.5 * (lo + hi);
    for (int it = 0; it < 6; ++it) {
        const double r = detail::xi_of_z(z, p.C) - xi;
        const double d = detail::dxi_dz(z, p.C);
        const double nz = z - r / d;
        if (nz < lo || nz > hi) break;
        z = nz;
    }
    return z;
}

/// Both sides of the branch identity derived from the coupled profile
/// equations, together with the target -9 z^2 (C - 4 z) they must equal.
/// The corrupted term of the printed identity and its naive repair are
/// evaluated alongside as negative controls.
struct Check47Result {
    double target;
    double lhs_adopted;   // corrupted term read as -(C+4g^3)^2 (C-2g^3)
    double rhs_adopted;   // right side with (C+4g^3) squared
    double lhs_printed;   // corrupted term read literally as -(C+4g^3)(C-2g)
    double lhs_naive;     // corrupted term read as -(C+4g^3)(C-2g^3)
    double rhs_printed;   // right side with (C+4g^3) to the first power
};

inline Check47Result check47(double z, double C) {
    const double u = -z;  // g^3
    const double g = -std::cbrt(z);
    const double A = C + 4.0 * u;
    const double D = C - 2.0 * u;
    const double E = C + u;

    Check47Result r{};
    r.target = -9.0 * z * z * (C - 4.0 * z);

    const double common =
        6.0 * A * D * u - 6.0 * u * E * E - D * E * E + 2.0 * E * A * D;
    r.lhs_adopted = common - A * A * D;
    r.lhs_printed = common - A * (C - 2.0 * g);
    r.lhs_naive = common - A * D;

    if (z > 0.0) {
        const double xi = detail::xi_of_z(z, C);
        const double factor = std::pow(xi, 8.0 / 3.0) / (g * g);
        r.rhs_adopted = (9.0 / 16.0) * factor * D * D * A * A;
        r.rhs_printed = (9.0 / 16.0) * factor * D * D * A;
    }
    return r;
}

/// Real g-roots of the degree-27 similarity polynomial at a given (xi, C).
/// Only cubes of g appear, so the isolation runs on the degree-9 polynomial
/// in u = g^3 (same real roots through the odd cube map, far better
/// conditioned). Coefficients are expanded in exact integer arithmetic.
///
/// With principal real fractional powers the branch consistent with the
/// profile carries -u^8 on the right-hand side; the as-printed +u^8 variant
/// is available for comparison.
inline std::vector<double> poly48_roots(double xi, double C, bool printed = false) {
    if (!(xi > 0.0)) throw EvalError("poly48_roots: xi must be positive");
    // (u + C/4)^3 (u - C/2)^6: coefficient of u^j is C^(9-j) * I_j / 4096
    // with I_j = sum over i+k=j of C(3,i) C(6,k) (-1)^k 2^(2i+k)
    static constexpr std::array<long long, 4> binom3{1, 3, 3, 1};
    static constexpr std::array<long long, 7> binom6{1, 6, 15, 20, 15, 6, 1};
    std::array<double, 10> q{};
    const double xi8 = std::pow(xi, 8);
    for (int j = 0; j <= 9; ++j) {
        long long integer = 0;
        for (int i = std::max(0, j - 6); i <= std::min(3, j); ++i) {
            const int k = j - i;
            const long long term = binom3[static_cast<std::size_t>(i)] *
                                   binom6[static_cast<std::size_t>(k)] *
                                   (1LL << (2 * i + k));
            integer += (k % 2 == 0) ? term : -term;
        }
        q[static_cast<std::size_t>(j)] =
            xi8 * (static_cast<double>(integer) / 4096.0) * std::pow(C, 9 - j);
    }
    q[8] += printed ? -1.0 : 1.0;

    const std::vector<double> u_roots = real_roots(q);
    std::vector<double> g_roots;
    g_roots.reserve(u_roots.size());
    for (double u : u_roots) g_roots.push_back(std::cbrt(u));
    return g_roots;
}

namespace detail {

// derivative dy/dx at every node of a non-uniform line via local 5-point
// Lagrange polynomials (4th order for smoothly varying spacing)
inline std::vector<double> nonuniform_derivative(std::span<const double> x,
                                                 std::span<const double> y) {
    const int n = static_cast<int>(x.size());
    std::vector<double> out(static_cast<std::size_t>(n));
    const int w = std::min(5, n);
    for (int m = 0; m < n; ++m) {
        const int start = std::clamp(m - w / 2, 0, n - w);
        double acc = 0.0;
        for (int a = 0; a < w; ++a) {
            const int ia = start + a;
            // L_a'(x_m) for the Lagrange basis on the window
            double sum = 0.0;
            for (int b = 0; b < w; ++b) {
                if (b == a) continue;
                double prod = 1.0;
                for (int c = 0; c < w; ++c) {
                    if (c == a || c == b) continue;
                    prod *= (x[static_cast<std::size_t>(m)] -
                             x[static_cast<std::size_t>(start + c)]) /
                            (x[static_cast<std::size_t>(ia)] -
                             x[static_cast<std::size_t>(start + c)]);
                }
                sum += prod / (x[static_cast<std::size_t>(ia)] -
                               x[static_cast<std::size_t>(start + b)]);
            }
            acc += y[static_cast<std::size_t>(ia)] * sum;
        }
        out[static_cast<std::size_t>(m)] = acc;
    }
    return out;
}

}  // namespace detail

/// Residuals of the two coupled profile equations along the branch,
/// differentiating the stored (xi, g, f) table numerically.
inline std::vector<ResidualReport> residual_odes(const SelfSimilarProfile& p) {
    const std::size_t n = p.samples.size();
    std::vector<double> xi(n), g(n), f(n);
    for (std::size_t k = 0; k < n; ++k) {
        // ascending xi (reverse of the stored z-order)
        const auto& s = p.samples[n - 1 - k];
        xi[k] = s.xi;
        g[k] = s.g;
        f[k] = s.f;
    }
    for (std::size_t k = 0; k + 1 < n; ++k)
        if (!(xi[k + 1] > xi[k]))
            throw EvalError("residual_odes: xi must be strictly monotone");

    const auto dg = detail::nonuniform_derivative(xi, g);
    const auto df = detail::nonuniform_derivative(xi, f);

    double mx1 = 0.0, mx2 = 0.0, ss1 = 0.0, ss2 = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        const double combo = f[k] / 3.0 + xi[k] * df[k];
        const double r1 = dg[k] - df[k] * combo;
        const double r2 = 2.0 * (xi[k] * dg[k] - g[k] / 3.0) - combo * combo -
                          (9.0 / 16.0) * std::pow(xi[k], 14.0 / 3.0) * f[k] * f[k] *
                              df[k] * df[k];
        mx1 = std::max(mx1, std::abs(r1));
        mx2 = std::max(mx2, std::abs(r2));
        ss1 += r1 * r1;
        ss2 += r2 * r2;
    }
    const double spacing = (xi.back() - xi.front()) / static_cast<double>(n - 1);
    return {{"ode-g", mx1, std::sqrt(ss1 / static_cast<double>(n)), spacing,
             std::nullopt},
            {"ode-coupled", mx2, std::sqrt(ss2 / static_cast<double>(n)), spacing,
             std::nullopt}};
}

/// Rebuild the self-similar light-cone solution on a chart:
/// R = tau^{1/3} f(xi), zeta = tau^{-1/3} g(xi) with xi = tau mu^{-3/4},
/// kappa integrated from the sampled fields. The chart must keep xi inside
/// the profile's branch.
inline LightconeTriple reconstruct_Rtilde(const SelfSimilarProfile& p,
                                          const GridDomain& chart) {
    if (!(chart.lower(0) > 0.0) || !(chart.lower(1) > 0.0))
        throw EvalError("reconstruct_Rtilde: chart must have tau > 0 and mu > 0");
    std::vector<double> R(chart.size()), Z(chart.size());
    for (int i = 0; i < chart.count(0); ++i)
        for (int j = 0; j < chart.count(1); ++j) {
            const double tau = chart.coord(0, i);
            const double mu = chart.coord(1, j);
            const double xi = tau * std::pow(mu, -0.75);
            const double z = invert_xi(p, xi);
            const double g = -std::cbrt(z);
            const double f = std::sqrt(p.C + 2.0 * z) / std::cbrt(z);
            R[chart.index(i, j)] = std::cbrt(tau) * f;
            Z[chart.index(i, j)] = g / std::cbrt(tau);
        }
    ScalarField Rf = ScalarField::from_values(chart, std::move(R));
    ScalarField Zf = ScalarField::from_values(chart, std::move(Z));
    ScalarField Kf = compute_kappa(Rf, Zf, 1.0).field;
    return {chart, std::move(Rf), std::move(Zf), std::move(Kf), 1.0};
}

}  // namespace minksurf
