#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "minksurf/catalog.hpp"
#include "minksurf/physical.hpp"
#include "minksurf/potentials.hpp"
#include "minksurf/residuals.hpp"
#include "minksurf/transform.hpp"

using namespace minksurf;

namespace {

GridDomain lc_chart(int n) {
    return GridDomain::make({"tau", "mu"}, {1.0, 0.5}, {2.0, 1.5}, {n, n});
}

double max_abs_diff(const ScalarField& a, const ScalarField& b) {
    double m = 0.0;
    for (std::size_t k = 0; k < a.values().size(); ++k)
        m = std::max(m, std::abs(a.values()[k] - b.values()[k]));
    return m;
}

}  // namespace

TEST_CASE("scaling with unit parameters is the identity") {
    const auto in = sample_triple(EpsilonFamilySolution(0.3), lc_chart(17));
    const auto out = scale(in, {1.0, 1.0});
    CHECK(out.domain == in.domain);
    CHECK(max_abs_diff(out.R, in.R) == 0.0);
    CHECK(max_abs_diff(out.zeta, in.zeta) == 0.0);
    CHECK(max_abs_diff(out.kappa, in.kappa) == 0.0);
}

TEST_CASE("sampled scaling agrees with the analytic scaling") {
    const auto base = std::make_shared<EpsilonFamilySolution>(0.3);
    const ScalingParams p{1.4, 0.8};
    const auto in = sample_triple(*base, lc_chart(33));
    const auto out = scale(in, p);
    const ScaledSolution scaled(base, p.alpha, p.gamma);
    const auto direct = sample_triple(scaled, out.domain);
    CHECK(max_abs_diff(out.R, direct.R) < 1e-12);
    CHECK(max_abs_diff(out.zeta, direct.zeta) < 1e-12);
    CHECK(max_abs_diff(out.kappa, direct.kappa) < 1e-12);
}

TEST_CASE("sampled scalings compose multiplicatively") {
    const auto in = sample_triple(HyperboloidSolution(), lc_chart(17));
    const auto two_step = scale(scale(in, {2.0, 0.5}), {0.5, 3.0});
    const auto one_step = scale(in, {1.0, 1.5});
    CHECK(two_step.domain == one_step.domain);
    CHECK(max_abs_diff(two_step.R, one_step.R) < 1e-12);
    CHECK(max_abs_diff(two_step.zeta, one_step.zeta) < 1e-12);
    CHECK(max_abs_diff(two_step.kappa, one_step.kappa) < 1e-12);
}

TEST_CASE("negative scaling parameters flip the chart consistently") {
    const auto in = sample_triple(HyperboloidSolution(), lc_chart(17));
    const auto out = scale(in, {-1.0, -1.0});  // alpha*gamma = 1, gamma = -1
    CHECK(out.domain.lower(1) == -1.5);
    // the hyperboloid is invariant: R at (tau, mu) equals -R(tau, -mu)
    for (int i = 0; i < 17; ++i)
        for (int j = 0; j < 17; ++j) {
            const double tau = out.domain.coord(0, i);
            const double mu = out.domain.coord(1, j);
            CHECK_THAT(out.R(i, j),
                       Catch::Matchers::WithinRel(std::sqrt(2.0) * mu / tau, 1e-13));
        }
    CHECK_THROWS_AS(scale(in, {0.0, 1.0}), EvalError);
}

TEST_CASE("physical map of the epsilon family matches the closed form") {
    const double eps = 0.3;
    const auto in = sample_triple(EpsilonFamilySolution(eps), lc_chart(33));
    const GridDomain& d = in.domain;
    // before inversion: t = tau - (mu^2 + eps/3)/(2 tau^3),
    //                   E phi = mu + (mu^3 + eps mu)/(2 tau^4)
    for (int i = 0; i < d.count(0); ++i)
        for (int j = 0; j < d.count(1); ++j) {
            const double tau = d.coord(0, i), mu = d.coord(1, j);
            const double t = tau + 0.5 * in.zeta(i, j);
            const double w = mu + 0.5 * in.kappa(i, j);
            const double t_closed = tau - (mu * mu + eps / 3.0) / (2.0 * std::pow(tau, 3));
            const double w_closed =
                mu + (std::pow(mu, 3) + eps * mu) / (2.0 * std::pow(tau, 4));
            CHECK_THAT(t, Catch::Matchers::WithinAbs(t_closed, 1e-13));
            CHECK_THAT(w, Catch::Matchers::WithinAbs(w_closed, 1e-13));
        }
}

TEST_CASE("to_physical inverts its own forward map") {
    const auto in = sample_triple(EpsilonFamilySolution(0.3), lc_chart(65));
    const auto res = to_physical(in, {1.0, 1.0});
    const GridDomain& d = res.pair.domain;
    const GridDomain& sd = in.domain;

    // the numeric forward map the inversion actually solved
    std::vector<double> tv(sd.size()), wv(sd.size());
    for (int i = 0; i < sd.count(0); ++i)
        for (int j = 0; j < sd.count(1); ++j) {
            tv[sd.index(i, j)] = sd.coord(0, i) + 0.5 * in.zeta(i, j);
            wv[sd.index(i, j)] = sd.coord(1, j) + 0.5 * in.kappa(i, j);
        }
    const auto Ut = ScalarField::from_values(sd, std::move(tv));
    const auto Wt = ScalarField::from_values(sd, std::move(wv));

    double worst_numeric = 0.0, worst_analytic = 0.0;
    const EpsilonFamilySolution sol(0.3);
    for (int i = 0; i < d.count(0); ++i)
        for (int j = 0; j < d.count(1); ++j) {
            const double tau = res.tau_inv(i, j), mu = res.mu_inv(i, j);
            worst_numeric = std::max(
                worst_numeric, std::abs(interpolate(Ut, tau, mu) - d.coord(0, i)));
            worst_numeric = std::max(
                worst_numeric, std::abs(interpolate(Wt, tau, mu) - d.coord(1, j)));
            const auto jets = sol.jets(tau, mu);
            worst_analytic = std::max(
                worst_analytic, std::abs(tau + 0.5 * jets.zeta.v - d.coord(0, i)));
            worst_analytic = std::max(
                worst_analytic, std::abs(mu + 0.5 * jets.kappa.v - d.coord(1, j)));
        }
    CHECK(worst_numeric < 1e-8);   // Newton tolerance on the sampled map
    CHECK(worst_analytic < 1e-5);  // plus the sampling/interpolation error
}

TEST_CASE("hyperboloid returns to its orthonormal closed form") {
    const auto in = sample_triple(HyperboloidSolution(), lc_chart(65));
    const auto res = to_physical(in, {1.0, 1.0});
    const PhysicalPair& pair = res.pair;
    const HyperboloidPhysical closed;
    const GridDomain& d = pair.domain;
    double worst_r = 0.0, worst_z = 0.0;
    for (int i = 0; i < d.count(0); ++i)
        for (int j = 0; j < d.count(1); ++j) {
            const auto p = closed.point(d.coord(0, i), d.coord(1, j));
            worst_r = std::max(worst_r, std::abs(pair.r(i, j) - p.r));
            worst_z = std::max(worst_z, std::abs(pair.z(i, j) - p.z_plus));
        }
    CHECK(worst_r < 1e-4);
    CHECK(worst_z < 1e-4);

    const auto reps = residual_physical(pair);
    const double h = d.spacing(0);
    for (const auto& rep : reps) CHECK(rep.max_norm < 50.0 * h * h);
}

TEST_CASE("hand-checkable conjugate composition") {
    const GridDomain d = GridDomain::make({"t", "phi"}, {0.0, 0.0}, {1.0, 1.0}, {33, 33});
    const auto r = ScalarField::sample(d, [](double, double) { return 1.0; });
    const ConjugatePair xy{ScalarField::sample(d, [](double t, double p) { return t + p; }),
                           ScalarField::sample(d, [](double t, double p) { return t + p; })};
    const ConjugatePair chart{
        ScalarField::sample(d, [](double t, double p) { return t + 2 * p; }),
        ScalarField::sample(d, [](double t, double p) { return 2 * t + p; })};
    const auto res = compose_conjugate(r, xy, chart);
    for (const auto& rep : res.reports) CHECK(rep.max_norm < 1e-10);
    const GridDomain& od = res.domain;
    for (int i = 0; i < od.count(0); ++i)
        for (int j = 0; j < od.count(1); ++j) {
            const double expected = (od.coord(0, i) + od.coord(1, j)) / 3.0;
            CHECK_THAT(res.X(i, j), Catch::Matchers::WithinAbs(expected, 1e-10));
            CHECK_THAT(res.Y(i, j), Catch::Matchers::WithinAbs(expected, 1e-10));
        }
}

TEST_CASE("degenerate chart pair is refused") {
    const GridDomain d = GridDomain::make({"t", "phi"}, {0.0, 0.0}, {1.0, 1.0}, {33, 33});
    const auto r = ScalarField::sample(d, [](double, double) { return 1.0; });
    const ConjugatePair xy{ScalarField::sample(d, [](double t, double p) { return t + p; }),
                           ScalarField::sample(d, [](double t, double p) { return t + p; })};
    CHECK_THROWS_AS(compose_conjugate(r, xy, xy), SingularError);
}

TEST_CASE("non-conjugate inputs are refused") {
    const GridDomain d = GridDomain::make({"t", "phi"}, {0.0, 0.0}, {1.0, 1.0}, {33, 33});
    const auto r = ScalarField::sample(d, [](double, double) { return 1.0; });
    const ConjugatePair bad{
        ScalarField::sample(d, [](double t, double p) { return t * t + p; }),
        ScalarField::sample(d, [](double t, double p) { return std::sin(t * p); })};
    const ConjugatePair chart{
        ScalarField::sample(d, [](double t, double p) { return t + 2 * p; }),
        ScalarField::sample(d, [](double t, double p) { return 2 * t + p; })};
    CHECK_THROWS_AS(compose_conjugate(r, bad, chart), CompatibilityError);
}

TEST_CASE("hyperboloid conjugate pairs compose") {
    const GridDomain d = GridDomain::make({"t", "phi"}, {1.0, 0.4}, {1.8, 1.4}, {65, 65});
    const HyperboloidPhysical sol;
    const auto r = ScalarField::sample(
        d, [&](double t, double phi) { return sol.point(t, phi).r; });
    const auto z = ScalarField::sample(
        d, [&](double t, double phi) { return sol.point(t, phi).z_plus; });
    const auto v = compute_v(r, z, 1.0);
    const PhysicalPair pair{d, r, z, v.field, 1.0};
    const auto chart = lightcone_chart(pair, 1.0);

    const auto res = compose_conjugate(r, ConjugatePair{v.field, z},
                                       ConjugatePair{chart.mu, chart.tau});
    const double h = std::max(res.domain.spacing(0), res.domain.spacing(1));
    for (const auto& rep : res.reports) CHECK(rep.max_norm < 25.0 * h * h);
}

TEST_CASE("pure-scaling fit recovers beta on the orbit") {
    const auto in = sample_triple(TauSqrtMuSolution(1.7), lc_chart(33));
    const auto fit = fit_tau_sqrt_mu_scaling(in);
    CHECK_THAT(fit.beta, Catch::Matchers::WithinRel(1.7, 1e-12));
    CHECK(fit.rms_residual < 1e-12);
}
