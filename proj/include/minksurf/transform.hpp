#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <string>
#include <vector>

#include "minksurf/chart.hpp"
#include "minksurf/errors.hpp"
#include "minksurf/grid.hpp"
#include "minksurf/potentials.hpp"
#include "minksurf/solution_types.hpp"

namespace minksurf {

/// Transform density L = (Rdot^2 - R^2 R'^2 / eta^2)/2. Its square times
/// eta is the Jacobian of (tau, mu) -> (zeta, kappa); the transform is
/// singular where L vanishes.
inline ScalarField transform_density(const ScalarField& R, double eta) {
    const ScalarField Rt = differentiate(R, 0);
    const ScalarField Rm = differentiate(R, 1);
    std::vector<double> out(R.domain().size());
    for (std::size_t k = 0; k < out.size(); ++k) {
        const double r = R.values()[k];
        const double a = Rt.values()[k];
        const double b = Rm.values()[k];
        out[k] = 0.5 * (a * a - r * r * b * b / (eta * eta));
    }
    return ScalarField::from_values(R.domain(), std::move(out));
}

struct TransformDiagnostics {
    ScalarField lag;    // L over the source chart
    ScalarField delta;  // eta * L^2
    double min_abs_lag = 0.0;
    double median_abs_lag = 0.0;
    int max_newton_iterations = 0;
    double mean_newton_iterations = 0.0;
    std::array<double, 4> output_bounds{};  // {lo0, hi0, lo1, hi1}
};

struct BianchiOptions {
    /// Refuse the transform when min |L| < factor * median |L|.
    double lag_threshold_factor = 1e-6;
    ChartResampleOptions resample;
};

struct BianchiResult {
    LightconeTriple out;
    TransformDiagnostics diag;
};

/// The involutive transform: rewrite the radius as a function of its own
/// potentials. The output chart carries the (zeta, kappa) values of the
/// input; the output potentials are the old coordinates pulled back through
/// the inverse chart, and the output constant is 1.
inline BianchiResult bianchi_transform(const LightconeTriple& in,
                                       const BianchiOptions& opt = {}) {
    const ScalarField lag = transform_density(in.R, in.eta);

    {
        const auto [lo, hi] =
            std::minmax_element(lag.values().begin(), lag.values().end());
        if (*lo < 0.0 && *hi > 0.0)
            throw SingularError(
                "bianchi_transform: transform density changes sign on the chart");
    }
    std::vector<double> mag(lag.values().begin(), lag.values().end());
    for (auto& v : mag) v = std::abs(v);
    std::vector<double> sorted = mag;
    std::nth_element(sorted.begin(), sorted.begin() + sorted.size() / 2, sorted.end());
    const double median = sorted[sorted.size() / 2];
    const double mn = *std::min_element(mag.begin(), mag.end());
    if (mn < opt.lag_threshold_factor * median)
        throw SingularError("bianchi_transform: transform density too close to zero "
                            "(min |L| = " +
                            std::to_string(mn) + ", median = " + std::to_string(median) +
                            ")");

    const ScalarField fields[1] = {in.R};
    const ChartResampleResult res =
        chart_resample(in.zeta, in.kappa, fields, {"zeta", "kappa"}, opt.resample);

    BianchiResult out;
    out.out = LightconeTriple{res.out_domain, res.resampled[0], res.inv0, res.inv1, 1.0};
    out.diag.lag = lag;
    out.diag.delta = map(lag, [eta = in.eta](double v) { return eta * v * v; });
    out.diag.min_abs_lag = mn;
    out.diag.median_abs_lag = median;
    out.diag.max_newton_iterations = res.max_newton_iterations;
    out.diag.mean_newton_iterations = res.mean_newton_iterations;
    out.diag.output_bounds = {res.out_domain.lower(0), res.out_domain.upper(0),
                              res.out_domain.lower(1), res.out_domain.upper(1)};
    return out;
}

/// Product of the transform densities of a solution and its transform at
/// corresponding points; the pairing makes it identically one.
inline ResidualReport product_identity(const LightconeTriple& in,
                                       const LightconeTriple& out) {
    const ScalarField lag_in = transform_density(in.R, in.eta);
    const ScalarField lag_out = transform_density(out.R, out.eta);
    const GridDomain& d = out.domain;
    const int margin = 2;
    double mx = 0.0, sumsq = 0.0;
    std::size_t n = 0;
    for (int i = margin; i < d.count(0) - margin; ++i)
        for (int j = margin; j < d.count(1) - margin; ++j) {
            const double fac_out = lag_out(i, j);
            // the output potentials are the source coordinates of this node
            const double fac_in = interpolate(lag_in, out.zeta(i, j), out.kappa(i, j));
            const double v = fac_out * fac_in - 1.0;
            mx = std::max(mx, std::abs(v));
            sumsq += v * v;
            ++n;
        }
    return {"product-identity", mx, std::sqrt(sumsq / static_cast<double>(n)),
            std::max(d.spacing(0), d.spacing(1)), std::nullopt};
}

/// Apply the transform twice and compare with the input radius on the
/// common chart, identifying R with |R|.
inline ResidualReport involution_check(const LightconeTriple& in,
                                       const BianchiOptions& opt = {}) {
    const BianchiResult first = bianchi_transform(in, opt);
    const BianchiResult second = bianchi_transform(first.out, opt);
    const LightconeTriple& back = second.out;
    const GridDomain& d = back.domain;
    double mx = 0.0, sumsq = 0.0;
    for (int i = 0; i < d.count(0); ++i)
        for (int j = 0; j < d.count(1); ++j) {
            const double orig =
                interpolate(in.R, d.coord(0, i), d.coord(1, j));
            const double v = std::abs(back.R(i, j)) - std::abs(orig);
            mx = std::max(mx, std::abs(v));
            sumsq += v * v;
        }
    return {"involution", mx, std::sqrt(sumsq / static_cast<double>(d.size())),
            std::max(d.spacing(0), d.spacing(1)), std::nullopt};
}

struct ScalingParams {
    double alpha = 1.0;
    double gamma = 1.0;

    /// On the degree-six family this scaling is the reparametrization
    /// beta -> alpha^2 gamma^{3/2} beta.
    double beta_equivalent() const {
        if (!(gamma > 0))
            throw EvalError("beta_equivalent: needs gamma > 0");
        return alpha * alpha * gamma * std::sqrt(gamma);
    }
};

/// Scaling symmetry on sampled data: R -> alpha R(alpha gamma tau, gamma mu),
/// zeta -> alpha^3 gamma zeta(...), kappa -> alpha^4 gamma kappa(...).
/// The new chart is the exact preimage lattice, so no interpolation is done.
inline LightconeTriple scale(const LightconeTriple& in, const ScalingParams& p) {
    if (p.alpha == 0.0 || p.gamma == 0.0)
        throw EvalError("scale: alpha and gamma must be nonzero");
    const GridDomain& d = in.domain;
    const double ag = p.alpha * p.gamma;

    const double b0a = d.lower(0) / ag, b0b = d.upper(0) / ag;
    const double b1a = d.lower(1) / p.gamma, b1b = d.upper(1) / p.gamma;
    const GridDomain nd = GridDomain::make(
        {d.axis_name(0), d.axis_name(1)}, {std::min(b0a, b0b), std::min(b1a, b1b)},
        {std::max(b0a, b0b), std::max(b1a, b1b)}, {d.count(0), d.count(1)});

    const bool flip0 = ag < 0.0;
    const bool flip1 = p.gamma < 0.0;
    const double fz = std::pow(p.alpha, 3) * p.gamma;
    const double fk = std::pow(p.alpha, 4) * p.gamma;

    std::vector<double> r(nd.size()), z(nd.size()), k(nd.size());
    for (int i = 0; i < nd.count(0); ++i)
        for (int j = 0; j < nd.count(1); ++j) {
            const int si = flip0 ? nd.count(0) - 1 - i : i;
            const int sj = flip1 ? nd.count(1) - 1 - j : j;
            r[nd.index(i, j)] = p.alpha * in.R(si, sj);
            z[nd.index(i, j)] = fz * in.zeta(si, sj);
            k[nd.index(i, j)] = fk * in.kappa(si, sj);
        }
    return {nd, ScalarField::from_values(nd, std::move(r)),
            ScalarField::from_values(nd, std::move(z)),
            ScalarField::from_values(nd, std::move(k)), in.eta};
}

struct PhysicalResult {
    PhysicalPair pair;
    /// Inverse chart: (tau, mu) of the scaled solution at each (t, phi) node.
    ScalarField tau_inv;
    ScalarField mu_inv;
};

/// Return to orthonormal parametrization: scale, then invert
/// (tau, mu) -> (t, E phi) = (tau + zeta/2, mu + kappa/2) onto a uniform
/// physical chart, and rebuild v from the resampled shape.
inline PhysicalResult to_physical(const LightconeTriple& in, const ScalingParams& p,
                                  double E = 1.0, const ChartResampleOptions& options = {},
                                  double eta = 1.0) {
    if (!(E > 0)) throw EvalError("to_physical: E must be positive");
    (void)eta;
    const LightconeTriple s = scale(in, p);
    const GridDomain& d = s.domain;

    std::vector<double> tval(d.size()), wval(d.size()), zval(d.size());
    for (int i = 0; i < d.count(0); ++i)
        for (int j = 0; j < d.count(1); ++j) {
            const std::size_t k = d.index(i, j);
            tval[k] = d.coord(0, i) + 0.5 * s.zeta(i, j);
            wval[k] = d.coord(1, j) + 0.5 * s.kappa(i, j);
            zval[k] = d.coord(0, i) - 0.5 * s.zeta(i, j);
        }
    const ScalarField U = ScalarField::from_values(d, std::move(tval));
    const ScalarField W = ScalarField::from_values(d, std::move(wval));
    const ScalarField Z = ScalarField::from_values(d, std::move(zval));

    const ScalarField fields[2] = {s.R, Z};
    const ChartResampleResult res = chart_resample(U, W, fields, {"t", "w"}, options);

    // second axis currently carries w = E phi; relabel it as phi = w / E
    const GridDomain& wd = res.out_domain;
    const GridDomain pd = GridDomain::make(
        {"t", "phi"}, {wd.lower(0), wd.lower(1) / E}, {wd.upper(0), wd.upper(1) / E},
        {wd.count(0), wd.count(1)});
    auto relabel = [&](const ScalarField& f) {
        return ScalarField::from_values(pd,
                                        std::vector<double>(f.values().begin(),
                                                            f.values().end()));
    };
    const ScalarField r = relabel(res.resampled[0]);
    const ScalarField z = relabel(res.resampled[1]);
    const ScalarField v = compute_v(r, z, E).field;
    return {PhysicalPair{pd, r, z, v, E}, relabel(res.inv0), relabel(res.inv1)};
}

/// A pair (x, y) over some chart with x' = ydot and xdot = r^2 y'.
struct ConjugatePair {
    ScalarField first;   // x-like member
    ScalarField second;  // y-like member
};

struct ConjugateComposition {
    GridDomain domain;
    ScalarField X;
    ScalarField Y;
    ScalarField R;
    std::vector<ResidualReport> reports;
};

struct ConjugateOptions {
    double tol_factor = 25.0;          // gate on the conjugacy of the inputs
    double degeneracy_factor = 1e-6;   // gate on Tdot^2 - r^2 T'^2
    ChartResampleOptions resample;
};

/// Compose two conjugate pairs: rewrite (x, y) in the chart defined by the
/// second pair (T = second, phi2 = first). The composition is conjugate
/// with respect to the resampled radius.
inline ConjugateComposition compose_conjugate(const ScalarField& r,
                                              const ConjugatePair& pair1,
                                              const ConjugatePair& pair2,
                                              const ConjugateOptions& opt = {}) {
    const GridDomain& d = r.domain();
    for (const ScalarField* f : {&pair1.first, &pair1.second, &pair2.first, &pair2.second})
        if (!f->same_domain(r))
            throw GridError("compose_conjugate: fields on different charts");

    const double h = std::max(d.spacing(0), d.spacing(1));
    auto check_pair = [&](const ConjugatePair& pr, const std::string& which) {
        const ScalarField xd = differentiate(pr.first, 0);
        const ScalarField xp = differentiate(pr.first, 1);
        const ScalarField yd = differentiate(pr.second, 0);
        const ScalarField yp = differentiate(pr.second, 1);
        double scale = 1.0, worst = 0.0;
        const int m = 2;
        for (int i = m; i < d.count(0) - m; ++i)
            for (int j = m; j < d.count(1) - m; ++j) {
                const double rr = r(i, j);
                worst = std::max(worst, std::abs(xp(i, j) - yd(i, j)));
                worst = std::max(worst, std::abs(xd(i, j) - rr * rr * yp(i, j)));
                scale = std::max({scale, std::abs(xd(i, j)), std::abs(yd(i, j))});
            }
        if (worst > opt.tol_factor * h * h * scale)
            throw CompatibilityError("compose_conjugate: " + which +
                                     " pair is not conjugate (defect " +
                                     std::to_string(worst) + ")");
    };
    check_pair(pair1, "first");
    check_pair(pair2, "second");

    // invertibility of the new chart: Tdot^2 - r^2 T'^2 bounded away from 0
    {
        const ScalarField Td = differentiate(pair2.second, 0);
        const ScalarField Tp = differentiate(pair2.second, 1);
        std::vector<double> g(d.size());
        for (std::size_t k = 0; k < d.size(); ++k) {
            const double rr = r.values()[k];
            g[k] = std::abs(Td.values()[k] * Td.values()[k] -
                            rr * rr * Tp.values()[k] * Tp.values()[k]);
        }
        std::vector<double> sorted = g;
        std::nth_element(sorted.begin(), sorted.begin() + sorted.size() / 2, sorted.end());
        const double median = sorted[sorted.size() / 2];
        const double mn = *std::min_element(g.begin(), g.end());
        if (mn < opt.degeneracy_factor * median)
            throw SingularError("compose_conjugate: chart change degenerates "
                                "(Tdot^2 - r^2 T'^2 reaches " +
                                std::to_string(mn) + ")");
    }

    const ScalarField fields[3] = {pair1.first, pair1.second, r};
    const ChartResampleResult res =
        chart_resample(pair2.second, pair2.first, fields, {"T", "phi2"}, opt.resample);

    ConjugateComposition out;
    out.domain = res.out_domain;
    out.X = res.resampled[0];
    out.Y = res.resampled[1];
    out.R = res.resampled[2];

    const ScalarField Xd = differentiate(out.X, 0);
    const ScalarField Xp = differentiate(out.X, 1);
    const ScalarField Yd = differentiate(out.Y, 0);
    const ScalarField Yp = differentiate(out.Y, 1);
    std::vector<double> ra(out.domain.size()), rb(out.domain.size());
    for (std::size_t k = 0; k < out.domain.size(); ++k) {
        const double rr = out.R.values()[k];
        ra[k] = Xp.values()[k] - Yd.values()[k];
        rb[k] = Xd.values()[k] - rr * rr * Yp.values()[k];
    }
    const int margin = 2;
    const auto fa = ScalarField::from_values(out.domain, std::move(ra));
    const auto fb = ScalarField::from_values(out.domain, std::move(rb));
    const auto [ma, la] = interior_norms(fa, margin);
    const auto [mb, lb] = interior_norms(fb, margin);
    const double oh = std::max(out.domain.spacing(0), out.domain.spacing(1));
    out.reports.push_back({"compose-x-prime", ma, la, oh, std::nullopt});
    out.reports.push_back({"compose-x-dot", mb, lb, oh, std::nullopt});
    return out;
}

struct ScalingFit {
    double beta = 0.0;
    double rms_residual = 0.0;
};

/// Least-squares fit of a sampled radius to the one-parameter pure-scaling
/// orbit beta * tau * sqrt(mu) of the degree-six family. Used to certify
/// that transform/scale chains leave that orbit.
inline ScalingFit fit_tau_sqrt_mu_scaling(const LightconeTriple& t) {
    const GridDomain& d = t.domain;
    double num = 0.0, den = 0.0;
    for (int i = 0; i < d.count(0); ++i)
        for (int j = 0; j < d.count(1); ++j) {
            const double mu = d.coord(1, j);
            if (!(mu > 0.0))
                throw EvalError("fit_tau_sqrt_mu_scaling: chart must have mu > 0");
            const double basis = d.coord(0, i) * std::sqrt(mu);
            num += basis * t.R(i, j);
            den += basis * basis;
        }
    const double beta = num / den;
    double sumsq = 0.0;
    for (int i = 0; i < d.count(0); ++i)
        for (int j = 0; j < d.count(1); ++j) {
            const double basis = d.coord(0, i) * std::sqrt(d.coord(1, j));
            const double e = t.R(i, j) - beta * basis;
            sumsq += e * e;
        }
    return {beta, std::sqrt(sumsq / static_cast<double>(d.size()))};
}

}  // namespace minksurf
