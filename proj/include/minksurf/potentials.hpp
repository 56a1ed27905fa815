#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "minksurf/errors.hpp"
#include "minksurf/grid.hpp"
#include "minksurf/solution_types.hpp"

namespace minksurf {

struct PotentialOptions {
    /// Compatibility gate: defect must stay below
    /// tol_factor * h^2 * max(1, scale of the prescribed gradient).
    double tol_factor = 25.0;
};

struct PotentialResult {
    ScalarField field;
    double compatibility_defect = 0.0;
    double tolerance = 0.0;
};

namespace detail {

// Cumulative integral of a sampled line with local-cubic (4th order) panels.
inline void cumulative_line(std::span<const double> in, std::span<double> out,
                            std::ptrdiff_t stride, int n, double h) {
    auto at = [&](int k) { return in[static_cast<std::size_t>(k) * stride]; };
    auto& o = out;
    double acc = 0.0;
    o[0] = 0.0;
    for (int k = 0; k + 1 < n; ++k) {
        double panel;
        if (k == 0)
            panel = h * (9.0 * at(0) + 19.0 * at(1) - 5.0 * at(2) + at(3)) / 24.0;
        else if (k == n - 2)
            panel = h * (at(n - 4) - 5.0 * at(n - 3) + 19.0 * at(n - 2) + 9.0 * at(n - 1)) /
                    24.0;
        else
            panel = h * (-at(k - 1) + 13.0 * at(k) + 13.0 * at(k + 1) - at(k + 2)) / 24.0;
        acc += panel;
        o[static_cast<std::size_t>(k + 1) * stride] = acc;
    }
}

}  // namespace detail

/// Reconstruct a potential from its prescribed gradient, integrating from
/// the lower-left corner (first along the second axis, then the first) and
/// normalizing the corner value to zero. Rejects gradients whose mixed
/// partials fail to commute: such inputs do not come from a solution.
inline PotentialResult integrate_gradient(const ScalarField& grad1,
                                          const ScalarField& grad2,
                                          const std::string& label,
                                          const PotentialOptions& opt = {}) {
    if (!grad1.same_domain(grad2))
        throw GridError(label + ": gradient components on different domains");
    const GridDomain& d = grad1.domain();

    const ScalarField cross = linear_combination(1.0, differentiate(grad1, 1), -1.0,
                                                 differentiate(grad2, 0));
    const auto [defect, defect_rms] = interior_norms(cross, 2);
    (void)defect_rms;
    double scale = 1.0;
    for (double v : grad1.values()) scale = std::max(scale, std::abs(v));
    for (double v : grad2.values()) scale = std::max(scale, std::abs(v));
    const double h = std::max(d.spacing(0), d.spacing(1));
    const double tol = opt.tol_factor * h * h * scale;
    if (defect > tol)
        throw CompatibilityError(label + ": compatibility defect " +
                                 std::to_string(defect) + " exceeds tolerance " +
                                 std::to_string(tol) +
                                 " (input is not a solution)");

    const int n0 = d.count(0);
    const int n1 = d.count(1);
    std::vector<double> out(d.size(), 0.0);
    // corner row: integrate the second-axis component along mu
    detail::cumulative_line(grad2.values(), out, 1, n1, d.spacing(1));
    // columns: integrate the first-axis component along tau on top of the row
    std::vector<double> col_in(static_cast<std::size_t>(n0)),
        col_out(static_cast<std::size_t>(n0));
    for (int j = 0; j < n1; ++j) {
        for (int i = 0; i < n0; ++i) col_in[static_cast<std::size_t>(i)] = grad1(i, j);
        detail::cumulative_line(col_in, col_out, 1, n0, d.spacing(0));
        const double base = out[d.index(0, j)];
        for (int i = 0; i < n0; ++i)
            out[d.index(i, j)] = base + col_out[static_cast<std::size_t>(i)];
    }
    return {ScalarField::from_values(d, std::move(out)), defect, tol};
}

/// zeta from R: zeta_tau = (Rdot^2 + R^2 R'^2 / eta^2)/2, zeta_mu = Rdot R'.
inline PotentialResult compute_zeta(const ScalarField& R, double eta,
                                    const PotentialOptions& opt = {}) {
    const ScalarField Rt = differentiate(R, 0);
    const ScalarField Rm = differentiate(R, 1);
    std::vector<double> g1(R.domain().size()), g2(R.domain().size());
    const auto vR = R.values();
    const auto v1 = Rt.values();
    const auto v2 = Rm.values();
    for (std::size_t k = 0; k < g1.size(); ++k) {
        g1[k] = 0.5 * (v1[k] * v1[k] + vR[k] * vR[k] * v2[k] * v2[k] / (eta * eta));
        g2[k] = v1[k] * v2[k];
    }
    return integrate_gradient(ScalarField::from_values(R.domain(), std::move(g1)),
                              ScalarField::from_values(R.domain(), std::move(g2)),
                              "compute_zeta", opt);
}

/// kappa from (R, zeta): kappa_tau = R^2 zeta_mu / eta, kappa_mu = eta zeta_tau.
inline PotentialResult compute_kappa(const ScalarField& R, const ScalarField& zeta,
                                     double eta, const PotentialOptions& opt = {}) {
    if (!R.same_domain(zeta)) throw GridError("compute_kappa: R and zeta domains differ");
    const ScalarField zt = differentiate(zeta, 0);
    const ScalarField zm = differentiate(zeta, 1);
    std::vector<double> g1(R.domain().size()), g2(R.domain().size());
    const auto vR = R.values();
    const auto v1 = zt.values();
    const auto v2 = zm.values();
    for (std::size_t k = 0; k < g1.size(); ++k) {
        g1[k] = vR[k] * vR[k] * v2[k] / eta;
        g2[k] = eta * v1[k];
    }
    return integrate_gradient(ScalarField::from_values(R.domain(), std::move(g1)),
                              ScalarField::from_values(R.domain(), std::move(g2)),
                              "compute_kappa", opt);
}

/// v from (r, z): v_t = r^2 z_phi / E, v_phi = E z_t.
inline PotentialResult compute_v(const ScalarField& r, const ScalarField& z, double E,
                                 const PotentialOptions& opt = {}) {
    if (!r.same_domain(z)) throw GridError("compute_v: r and z domains differ");
    const ScalarField zt = differentiate(z, 0);
    const ScalarField zp = differentiate(z, 1);
    std::vector<double> g1(r.domain().size()), g2(r.domain().size());
    const auto vr = r.values();
    const auto v1 = zt.values();
    const auto v2 = zp.values();
    for (std::size_t k = 0; k < g1.size(); ++k) {
        g1[k] = vr[k] * vr[k] * v2[k] / E;
        g2[k] = E * v1[k];
    }
    return integrate_gradient(ScalarField::from_values(r.domain(), std::move(g1)),
                              ScalarField::from_values(r.domain(), std::move(g2)),
                              "compute_v", opt);
}

struct LightconeChart {
    ScalarField tau;
    ScalarField mu;
    std::vector<ResidualReport> reports;  // the two chart-consistency residuals
};

/// Light-cone chart of a physical pair: tau = (t+z)/2, mu = (E phi + v)/(2 eta),
/// with the chart-consistency residuals reported (and gated).
inline LightconeChart lightcone_chart(const PhysicalPair& pair, double eta,
                                      const PotentialOptions& opt = {}) {
    const GridDomain& d = pair.domain;
    std::vector<double> tv(d.size()), mv(d.size());
    for (int i = 0; i < d.count(0); ++i)
        for (int j = 0; j < d.count(1); ++j) {
            tv[d.index(i, j)] = 0.5 * (d.coord(0, i) + pair.z(i, j));
            mv[d.index(i, j)] =
                (pair.E * d.coord(1, j) + pair.v(i, j)) / (2.0 * eta);
        }
    ScalarField tau = ScalarField::from_values(d, std::move(tv));
    ScalarField mu = ScalarField::from_values(d, std::move(mv));

    const ScalarField mu_t = differentiate(mu, 0);
    const ScalarField mu_p = differentiate(mu, 1);
    const ScalarField tau_t = differentiate(tau, 0);
    const ScalarField tau_p = differentiate(tau, 1);

    std::vector<double> res_a(d.size()), res_b(d.size());
    double scale = 1.0;
    for (std::size_t k = 0; k < res_a.size(); ++k) {
        const double r = pair.r.values()[k];
        res_a[k] = eta * mu_t.values()[k] - r * r * tau_p.values()[k] / pair.E;
        res_b[k] = eta * mu_p.values()[k] / pair.E - tau_t.values()[k];
        scale = std::max({scale, std::abs(mu_t.values()[k]), std::abs(tau_t.values()[k])});
    }
    const double h = std::max(d.spacing(0), d.spacing(1));
    const double tol = opt.tol_factor * h * h * scale;

    LightconeChart out{std::move(tau), std::move(mu), {}};
    const auto fa = ScalarField::from_values(d, std::move(res_a));
    const auto fb = ScalarField::from_values(d, std::move(res_b));
    const auto [ma, la] = interior_norms(fa, 2);
    const auto [mb, lb] = interior_norms(fb, 2);
    out.reports.push_back({"chart-mu-t", ma, la, h, std::nullopt});
    out.reports.push_back({"chart-mu-phi", mb, lb, h, std::nullopt});
    if (ma > tol || mb > tol)
        throw CompatibilityError("lightcone_chart: consistency residual exceeds " +
                                 std::to_string(tol));
    return out;
}

}  // namespace minksurf
