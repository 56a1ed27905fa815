#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "minksurf/catalog.hpp"
#include "minksurf/residuals.hpp"
#include "minksurf/transform.hpp"

using namespace minksurf;

namespace {

GridDomain hyper_chart(int n) {
    return GridDomain::make({"tau", "mu"}, {1.0, 0.5}, {2.0, 1.5}, {n, n});
}

GridDomain elliptic_chart(int n) {
    return GridDomain::make({"tau", "mu"}, {1.0, 1.0}, {1.4, 2.0}, {n, n});
}

}  // namespace

TEST_CASE("hyperboloid transform lands back in the same family") {
    const auto in = sample_triple(HyperboloidSolution(), hyper_chart(65));
    const auto res = bianchi_transform(in);
    const LightconeTriple& out = res.out;

    // kappa/zeta = -mu/tau pointwise, so the transformed radius is
    // -sqrt(2) kappa-hat / zeta-hat on the new chart
    const GridDomain& d = out.domain;
    CHECK(d.upper(0) < 0.0);  // zeta < 0 on the source chart
    double worst = 0.0;
    for (int i = 0; i < d.count(0); ++i)
        for (int j = 0; j < d.count(1); ++j) {
            const double a = d.coord(0, i), b = d.coord(1, j);
            worst = std::max(worst,
                             std::abs(out.R(i, j) - (-std::sqrt(2.0) * b / a)));
        }
    CHECK(worst < 1e-4);
    CHECK(res.diag.min_abs_lag > 0.0);
    CHECK(res.diag.max_newton_iterations <= 50);

    // the new potentials are the old coordinates: closed forms for this family
    double worst_zeta = 0.0, worst_kappa = 0.0;
    for (int i = 0; i < d.count(0); ++i)
        for (int j = 0; j < d.count(1); ++j) {
            const double a = d.coord(0, i), b = d.coord(1, j);
            worst_zeta = std::max(worst_zeta,
                                  std::abs(out.zeta(i, j) - (-b * b / std::pow(a, 3))));
            worst_kappa = std::max(
                worst_kappa, std::abs(out.kappa(i, j) - b * b * b / std::pow(a, 4)));
        }
    CHECK(worst_zeta < 1e-5);
    CHECK(worst_kappa < 1e-5);
}

TEST_CASE("transform output solves the radius wave equation") {
    const auto in = sample_triple(HyperboloidSolution(), hyper_chart(65));
    const auto out = bianchi_transform(in).out;
    const auto reps = residual_lightcone(out);
    // the error floor is set by the source resolution, not the output grid
    const double h = std::max(in.domain.spacing(0), in.domain.spacing(1));
    double scale = 0.0;
    for (double v : out.R.values()) scale = std::max(scale, std::abs(v));
    for (const auto& rep : reps)
        if (rep.equation == "R-wave") CHECK(rep.max_norm < 200.0 * h * h * scale);
}

TEST_CASE("derivative relations of the transformed radius") {
    const auto in = sample_triple(HyperboloidSolution(), hyper_chart(65));
    const auto res = bianchi_transform(in);
    const LightconeTriple& out = res.out;

    const ScalarField Rt_in = differentiate(in.R, 0);
    const ScalarField Rm_in = differentiate(in.R, 1);
    const ScalarField rho_a = differentiate(out.R, 0);
    const ScalarField rho_b = differentiate(out.R, 1);

    const GridDomain& d = out.domain;
    double worst_a = 0.0, worst_b = 0.0;
    for (int i = 2; i < d.count(0) - 2; ++i)
        for (int j = 2; j < d.count(1) - 2; ++j) {
            const double tau = out.zeta(i, j);
            const double mu = out.kappa(i, j);
            const double lag = interpolate(res.diag.lag, tau, mu);
            worst_a = std::max(
                worst_a, std::abs(rho_a(i, j) - interpolate(Rt_in, tau, mu) / lag));
            worst_b = std::max(
                worst_b,
                std::abs(rho_b(i, j) + interpolate(Rm_in, tau, mu) / (in.eta * lag)));
        }
    const double h = in.domain.spacing(0);
    CHECK(worst_a < 25.0 * h * h);
    CHECK(worst_b < 25.0 * h * h);
}

TEST_CASE("product identity holds at corresponding points") {
    const auto in = sample_triple(HyperboloidSolution(), hyper_chart(65));
    const auto res = bianchi_transform(in);
    const auto rep = product_identity(in, res.out);
    const double h = in.domain.spacing(0);
    CHECK(rep.max_norm < 25.0 * h * h);

    // negative control: misaligned correspondence breaks the identity
    LightconeTriple wrong = res.out;
    wrong.zeta = map(wrong.zeta, [](double v) { return v * 1.05; });
    const auto bad = product_identity(in, wrong);
    CHECK(bad.max_norm > 100.0 * rep.max_norm);
}

TEST_CASE("the transform is involutive on the hyperboloid") {
    const auto in = sample_triple(HyperboloidSolution(), hyper_chart(65));
    const auto rep = involution_check(in);
    CHECK(rep.max_norm < 1e-4);
}

TEST_CASE("elliptic transform matches its closed form") {
    const EllipticFamilySolution sol(shared_elliptic_profile());
    const auto in = sample_triple(sol, elliptic_chart(65));
    const auto res = bianchi_transform(in);
    const LightconeTriple& out = res.out;
    const auto& F = *shared_elliptic_profile();

    const GridDomain& d = out.domain;
    CHECK(d.lower(0) > 0.0);  // zeta > 0 here, fractional powers are safe
    double worst = 0.0, worst_printed = 0.0;
    for (int i = 0; i < d.count(0); ++i)
        for (int j = 0; j < d.count(1); ++j) {
            const double a = d.coord(0, i), b = d.coord(1, j);
            worst = std::max(worst,
                             std::abs(out.R(i, j) - elliptic_image_radius(a, b, F)));
            worst_printed = std::max(
                worst_printed,
                std::abs(out.R(i, j) - elliptic_image_radius_printed(a, b, F)));
        }
    CHECK(worst < 5e-4);
    // the as-printed profile is off by order one: it solves a different
    // conservation law than the image profile does
    CHECK(worst_printed > 0.1);

    CHECK(product_identity(in, out).max_norm < 5e-4);
    CHECK(involution_check(in).max_norm < 5e-4);
}

TEST_CASE("the transformed potentials obey the new-potential law") {
    // integrating the output radius reproduces the stored output potentials
    // up to additive gauge constants
    const auto in = sample_triple(HyperboloidSolution(), hyper_chart(65));
    const auto out = bianchi_transform(in).out;
    const double h = std::max(in.domain.spacing(0), in.domain.spacing(1));

    // resampled fields carry interpolation kinks, so the compatibility gate
    // must sit above their O(h^2)-with-large-constant defect
    const PotentialOptions loose{1e4};
    const auto zeta_num = compute_zeta(out.R, out.eta, loose).field;
    const auto kappa_num = compute_kappa(out.R, out.zeta, out.eta, loose).field;
    const GridDomain& d = out.domain;
    const double z_off = out.zeta(0, 0) - zeta_num(0, 0);
    const double k_off = out.kappa(0, 0) - kappa_num(0, 0);
    double worst_z = 0.0, worst_k = 0.0;
    for (int i = 0; i < d.count(0); ++i)
        for (int j = 0; j < d.count(1); ++j) {
            worst_z = std::max(worst_z,
                               std::abs(zeta_num(i, j) + z_off - out.zeta(i, j)));
            worst_k = std::max(worst_k,
                               std::abs(kappa_num(i, j) + k_off - out.kappa(i, j)));
        }
    CHECK(worst_z < 25.0 * h * h);
    CHECK(worst_k < 25.0 * h * h);
}

TEST_CASE("transformed radius residual converges at 2nd order") {
    std::optional<std::array<double, 4>> pinned;
    std::vector<ResidualReport> waves;
    for (const int n : {65, 129, 257}) {
        const auto in = sample_triple(HyperboloidSolution(), hyper_chart(n));
        BianchiOptions opt;
        opt.resample.output_bounds = pinned;
        const auto res = bianchi_transform(in, opt);
        if (!pinned) pinned = res.diag.output_bounds;
        const auto reps = residual_lightcone(res.out);
        for (const auto& r : reps)
            if (r.equation == "R-wave")
                waves.push_back({r.equation, r.max_norm, r.l2_norm,
                                 in.domain.spacing(0), std::nullopt});
    }
    CHECK(convergence_order(waves) > 1.8);
}

TEST_CASE("transform refuses charts crossing its singular locus") {
    // mu = tau^4/4 crosses this chart, where the transform density vanishes
    const GridDomain d = GridDomain::make({"tau", "mu"}, {1.0, 0.3}, {1.5, 1.4}, {65, 65});
    const auto in = sample_triple(TauSqrtMuSolution(1.0), d);
    CHECK_THROWS_AS(bianchi_transform(in), SingularError);
}

TEST_CASE("degree-six family transform runs off its singular locus") {
    const GridDomain d = GridDomain::make({"tau", "mu"}, {1.0, 1.5}, {1.5, 2.5}, {65, 65});
    const auto in = sample_triple(TauSqrtMuSolution(1.0), d);
    const auto res = bianchi_transform(in);
    CHECK(product_identity(in, res.out).max_norm < 1e-3);
    // its radius is genuinely outside the pure-scaling orbit of the family
    const auto fit = fit_tau_sqrt_mu_scaling(res.out);
    CHECK(fit.rms_residual > 1e-2);
}
