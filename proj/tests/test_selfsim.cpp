#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <functional>

#include "minksurf/residuals.hpp"
#include "minksurf/selfsim.hpp"
#include "minksurf/transform.hpp"

using namespace minksurf;

namespace {

double adaptive_simpson(const std::function<double(double)>& f, double a, double b,
                        double tol, int depth = 24) {
    const double m = 0.5 * (a + b);
    const double fa = f(a), fb = f(b), fm = f(m);
    std::function<double(double, double, double, double, double, double, int)> rec =
        [&](double x0, double x2, double f0, double f1, double f2, double whole,
            int d) -> double {
        const double x1l = 0.5 * (x0 + 0.5 * (x0 + x2));
        const double xm = 0.5 * (x0 + x2);
        const double x1r = 0.5 * (xm + x2);
        const double fl = f(x1l), fr = f(x1r);
        const double left = (xm - x0) / 6.0 * (f0 + 4.0 * fl + f1);
        const double right = (x2 - xm) / 6.0 * (f1 + 4.0 * fr + f2);
        if (d <= 0 || std::abs(left + right - whole) < 15.0 * tol)
            return left + right + (left + right - whole) / 15.0;
        return rec(x0, xm, f0, fl, f1, left, d - 1) +
               rec(xm, x2, f1, fr, f2, right, d - 1);
    };
    const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    return rec(a, b, fa, fm, fb, whole, depth);
}

}  // namespace

TEST_CASE("polynomial real-root isolation") {
    // (x-1)(x-2)(x+3) = x^3 - 7x + 6
    const double cubic[4] = {6.0, -7.0, 0.0, 1.0};
    auto roots = real_roots(cubic);
    REQUIRE(roots.size() == 3);
    CHECK_THAT(roots[0], Catch::Matchers::WithinAbs(-3.0, 1e-12));
    CHECK_THAT(roots[1], Catch::Matchers::WithinAbs(1.0, 1e-12));
    CHECK_THAT(roots[2], Catch::Matchers::WithinAbs(2.0, 1e-12));

    // grazing double root (x-1)^2
    const double square[3] = {1.0, -2.0, 1.0};
    roots = real_roots(square);
    REQUIRE(roots.size() == 1);
    CHECK_THAT(roots[0], Catch::Matchers::WithinAbs(1.0, 1e-6));

    // no real roots
    const double quad[3] = {1.0, 0.0, 1.0};
    CHECK(real_roots(quad).empty());
}

TEST_CASE("profile satisfies its algebraic invariant") {
    const auto p = solve_profile(-1.0, 0.8, 3.0, 400);
    REQUIRE(p.samples.size() == 400);
    for (const auto& s : p.samples) {
        const double g3 = s.g * s.g * s.g;
        CHECK(std::abs(2.0 * g3 + s.f * s.f * s.g * s.g - p.C) < 1e-12);
        CHECK_THAT(s.z, Catch::Matchers::WithinRel(-g3, 1e-14));
        CHECK(s.xi > 0.0);
    }
    // xi strictly decreasing in z
    for (std::size_t k = 0; k + 1 < p.samples.size(); ++k)
        CHECK(p.samples[k].xi > p.samples[k + 1].xi);
}

TEST_CASE("profile construction rejects bad ranges") {
    CHECK_THROWS_AS(solve_profile(1.0, 0.8, 3.0, 100), EvalError);    // C >= 0
    CHECK_THROWS_AS(solve_profile(-1.0, 3.0, 0.8, 100), EvalError);   // empty
    CHECK_THROWS_AS(solve_profile(-1.0, 0.4, 3.0, 100), EvalError);   // below pole
    CHECK_THROWS_AS(solve_profile(-1.0, 0.5, 3.0, 100), EvalError);   // at pole
}

TEST_CASE("similarity integral matches quadrature of its differential form") {
    const double C = -1.0;
    const auto p = solve_profile(C, 0.8, 3.0, 16);
    const double g_ref = p.samples.front().g;
    const double xi_ref = p.samples.front().xi;

    auto integrand = [C](double g) {
        const double g3 = g * g * g;
        return 3.0 * (C + g3) * (C + g3) /
               (g * (C + 4.0 * g3) * (C - 2.0 * g3));
    };
    // the same token read as printed, quadratic instead of cubic
    auto integrand_printed = [C](double g) {
        const double g3 = g * g * g;
        return 3.0 * (C + g3) * (C + g3) /
               (g * (C + 4.0 * g3) * (C - 2.0 * g * g));
    };

    double worst = 0.0, worst_printed = 0.0;
    for (std::size_t k = 4; k < p.samples.size(); k += 4) {
        const auto& s = p.samples[k];
        const double lhs = std::log(s.xi / xi_ref);
        const double quad = adaptive_simpson(integrand, g_ref, s.g, 1e-12);
        const double quad_printed =
            adaptive_simpson(integrand_printed, g_ref, s.g, 1e-12);
        worst = std::max(worst, std::abs(quad - lhs));
        worst_printed = std::max(worst_printed, std::abs(quad_printed - lhs));
    }
    CHECK(worst < 1e-8);
    CHECK(worst_printed > 1e-3);  // the printed token does not integrate to xi
}

TEST_CASE("branch identity hits its stated target") {
    const double C = -1.0;
    // the polynomial side is defined for any z
    CHECK(check47(0.0, C).lhs_adopted == 0.0);
    CHECK(check47(0.0, C).target == 0.0);
    for (const double z : {0.1, 0.5, 1.0}) {
        const auto r = check47(z, C);
        CHECK_THAT(r.lhs_adopted, Catch::Matchers::WithinAbs(r.target, 1e-12));
    }
    // on the branch the similarity side is defined too
    double worst_printed_lhs = 0.0, worst_printed_rhs = 0.0;
    for (const double z : {0.6, 0.9, 1.3, 2.0}) {
        const auto r = check47(z, C);
        const double scale = std::max(1.0, std::abs(r.target));
        CHECK(std::abs(r.lhs_adopted - r.target) < 1e-9 * scale);
        CHECK(std::abs(r.rhs_adopted - r.target) < 1e-9 * scale);
        worst_printed_lhs =
            std::max(worst_printed_lhs, std::abs(r.lhs_printed - r.target) / scale);
        worst_printed_rhs =
            std::max(worst_printed_rhs, std::abs(r.rhs_printed - r.target) / scale);
        // the naive cubed-token repair is still inhomogeneous
        CHECK(std::abs(r.lhs_naive - r.target) > 1e-3 * scale);
    }
    CHECK(worst_printed_lhs > 1e-3);
    CHECK(worst_printed_rhs > 1e-3);
}

TEST_CASE("similarity polynomial has the profile root") {
    const auto p = solve_profile(-1.0, 0.8, 3.0, 60);
    for (std::size_t k = 0; k < p.samples.size(); k += 7) {
        const auto& s = p.samples[k];
        const auto roots = poly48_roots(s.xi, p.C);
        double best = 1e300;
        for (double g : roots)
            best = std::min(best, std::abs(std::abs(g * g * g) - s.z));
        CHECK(best < 1e-8 * std::max(1.0, s.z));

        // the as-printed sign has no root matching the branch
        const auto printed = poly48_roots(s.xi, p.C, true);
        double best_printed = 1e300;
        for (double g : printed)
            best_printed = std::min(best_printed, std::abs(std::abs(g * g * g) - s.z));
        CHECK(best_printed > 1e-4 * std::max(1.0, s.z));
    }
}

TEST_CASE("similarity polynomial scaling covariance") {
    const double C = -1.0, xi = 1.2, lambda = 2.0;
    const auto base = poly48_roots(xi, C);
    const auto scaled =
        poly48_roots(xi * std::pow(lambda, -0.375), C * lambda * lambda * lambda);
    REQUIRE(!base.empty());
    for (double g : base) {
        double best = 1e300;
        for (double h : scaled) best = std::min(best, std::abs(h - lambda * g));
        CHECK(best < 1e-9 * std::max(1.0, std::abs(lambda * g)));
    }
}

TEST_CASE("huge similarity values do not break root isolation") {
    CHECK_NOTHROW(poly48_roots(1e6, -1.0));
    CHECK_THROWS_AS(poly48_roots(-1.0, -1.0), EvalError);
}

TEST_CASE("profile equations close along the branch") {
    const auto coarse = solve_profile(-1.0, 0.8, 3.0, 400);
    const auto fine = solve_profile(-1.0, 0.8, 3.0, 800);
    const auto rc = residual_odes(coarse);
    const auto rf = residual_odes(fine);
    REQUIRE(rc.size() == 2);
    for (const auto& r : rc) CHECK(r.max_norm < 1e-6);
    for (std::size_t k = 0; k < 2; ++k)
        CHECK(rc[k].max_norm / rf[k].max_norm >= 8.0);

    // sensitivity: a biased f must show up in the first equation
    auto bumped = coarse;
    for (auto& s : bumped.samples) s.f += 1e-3;
    const auto rb = residual_odes(bumped);
    CHECK(rb[0].max_norm > 1e-4);
}

TEST_CASE("reconstructed solution solves the gauge system") {
    const auto p = solve_profile(-1.0, 0.75, 11.0, 800);
    const GridDomain chart =
        GridDomain::make({"tau", "mu"}, {1.0, 0.9}, {1.6, 1.4}, {65, 65});
    const auto triple = reconstruct_Rtilde(p, chart);

    const auto reps = residual_lightcone(triple);
    const double h = chart.spacing(0);
    for (const auto& rep : reps)
        if (rep.equation.starts_with("zeta-grad")) CHECK(rep.max_norm < 25.0 * h * h);

    // reflected level set with constant C
    const auto ls = level_set_check(triple, LevelSet::eq39, {.C = -1.0});
    CHECK(ls.max_norm < 1e-12);

    // the sampled g solves the similarity polynomial
    for (int i = 10; i < 60; i += 13) {
        const double tau = chart.coord(0, i);
        const double mu = chart.coord(1, i);
        const double xi = tau * std::pow(mu, -0.75);
        const double g = triple.zeta(i, i) * std::cbrt(tau);
        const auto roots = poly48_roots(xi, p.C);
        double best = 1e300;
        for (double r : roots) best = std::min(best, std::abs(r - g));
        CHECK(best < 1e-8);
    }

    // out of range is a clean error
    const GridDomain far =
        GridDomain::make({"tau", "mu"}, {10.0, 0.9}, {12.0, 1.4}, {17, 17});
    CHECK_THROWS_AS(reconstruct_Rtilde(p, far), EvalError);
}

TEST_CASE("reconstructed solution feeds the involutive transform") {
    const auto p = solve_profile(-1.0, 0.75, 11.0, 800);
    const GridDomain chart =
        GridDomain::make({"tau", "mu"}, {1.0, 0.9}, {1.6, 1.4}, {65, 65});
    const auto triple = reconstruct_Rtilde(p, chart);
    const auto res = bianchi_transform(triple);
    CHECK(res.diag.min_abs_lag > 1e-6 * res.diag.median_abs_lag);
    CHECK(product_identity(triple, res.out).max_norm < 0.05);
}
