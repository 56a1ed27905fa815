#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <sstream>

#include "minksurf/field_io.hpp"
#include "minksurf/grid.hpp"
#include "minksurf/rng.hpp"

using namespace minksurf;

namespace {

GridDomain unit_chart(int n0 = 65, int n1 = 65) {
    return GridDomain::make({"tau", "mu"}, {1.0, 0.5}, {2.0, 1.5}, {n0, n1});
}

double max_abs_diff(const ScalarField& a, const ScalarField& b) {
    double m = 0.0;
    auto va = a.values();
    auto vb = b.values();
    for (std::size_t k = 0; k < va.size(); ++k)
        m = std::max(m, std::abs(va[k] - vb[k]));
    return m;
}

}  // namespace

TEST_CASE("chart construction computes exact spacings") {
    const GridDomain d = unit_chart();
    CHECK(d.spacing(0) == 1.0 / 64.0);
    CHECK(d.spacing(1) == 1.0 / 64.0);
    CHECK(d.coord(0, 0) == 1.0);
    CHECK(d.coord(1, 64) == 1.5);
    CHECK(d.size() == 65u * 65u);
}

TEST_CASE("chart construction rejects bad input") {
    const SingularLine origin{0, 0.0};
    // straddles the excluded line
    CHECK_THROWS_AS(GridDomain::make({"tau", "mu"}, {-1.0, 0.0}, {1.0, 1.0}, {65, 65},
                                     std::span(&origin, 1)),
                    GridError);
    // touches it
    CHECK_THROWS_AS(GridDomain::make({"tau", "mu"}, {0.0, 0.0}, {1.0, 1.0}, {65, 65},
                                     std::span(&origin, 1)),
                    GridError);
    // below the minimum point count
    CHECK_THROWS_AS(GridDomain::make({"tau", "mu"}, {1.0, 0.0}, {2.0, 1.0}, {4, 65}),
                    GridError);
    // degenerate bounds
    CHECK_THROWS_AS(GridDomain::make({"tau", "mu"}, {2.0, 0.0}, {1.0, 1.0}, {65, 65}),
                    GridError);
}

TEST_CASE("differentiate is exact on low-degree polynomials") {
    const GridDomain d = unit_chart();
    const auto f1 = ScalarField::sample(d, [](double t, double) { return t; });
    const auto d1 = differentiate(f1, 0);
    for (double v : d1.values()) CHECK(std::abs(v - 1.0) < 1e-13);

    const auto f2 = ScalarField::sample(d, [](double t, double) { return t * t; });
    const auto d2 = differentiate(f2, 0);
    for (int i = 0; i < d.count(0); ++i)
        for (int j = 0; j < d.count(1); ++j)
            CHECK(std::abs(d2(i, j) - 2.0 * d.coord(0, i)) < 1e-12);

    // five-node stencils are exact through degree four
    const auto f4 = ScalarField::sample(d, [](double, double m) {
        return 1.25 * m * m * m * m - m * m * m - 2.0 * m;
    });
    const auto d4 = differentiate(f4, 1);
    for (int i = 0; i < d.count(0); ++i)
        for (int j = 0; j < d.count(1); ++j) {
            const double m = d.coord(1, j);
            const double exact = 5.0 * m * m * m - 3.0 * m * m - 2.0;
            CHECK(std::abs(d4(i, j) - exact) < 1e-11);
        }
}

TEST_CASE("differentiate converges at 4th order including edges") {
    double err[2];
    const int counts[2] = {65, 129};
    for (int k = 0; k < 2; ++k) {
        const GridDomain d = unit_chart(counts[k], counts[k]);
        const auto f = ScalarField::sample(d, [](double t, double) { return std::sin(t); });
        const auto df = differentiate(f, 0);
        double e = 0.0;
        for (int i = 0; i < d.count(0); ++i)
            for (int j = 0; j < d.count(1); ++j)
                e = std::max(e, std::abs(df(i, j) - std::cos(d.coord(0, i))));
        err[k] = e;
    }
    CHECK(err[0] / err[1] >= 12.0);
}

TEST_CASE("differentiate is linear") {
    const GridDomain d = unit_chart(33, 33);
    const auto f = ScalarField::sample(d, [](double t, double m) { return std::sin(t * m); });
    const auto g = ScalarField::sample(d, [](double t, double m) { return std::exp(t - m); });
    const double a = 1.7, b = -0.3;
    const auto lhs = differentiate(linear_combination(a, f, b, g), 0);
    const auto rhs = linear_combination(a, differentiate(f, 0), b, differentiate(g, 0));
    CHECK(max_abs_diff(lhs, rhs) < 1e-12);
}

TEST_CASE("mixed partials commute to stencil accuracy") {
    const GridDomain d = unit_chart(65, 65);
    const auto f =
        ScalarField::sample(d, [](double t, double m) { return std::sin(t) * std::exp(m); });
    const auto dtm = differentiate(differentiate(f, 0), 1);
    const auto dmt = differentiate(differentiate(f, 1), 0);
    double scale = 0.0;
    for (double v : f.values()) scale = std::max(scale, std::abs(v));
    const double h = d.spacing(0);
    CHECK(max_abs_diff(dtm, dmt) <= 100.0 * scale * h * h * h);
}

TEST_CASE("interpolation reproduces values and cubics") {
    const GridDomain d = unit_chart();
    const auto c = ScalarField::sample(d, [](double, double) { return 3.25; });
    CHECK(interpolate(c, 1.234, 0.777) == 3.25);

    const auto f3 = ScalarField::sample(d, [](double t, double) { return t * t * t; });
    const double x = 1.31415926;
    CHECK(std::abs(interpolate(f3, x, 1.0) - x * x * x) < 1e-13);

    // nodal exactness
    const auto g = ScalarField::sample(d, [](double t, double m) { return std::sin(3 * t * m); });
    CHECK(interpolate(g, d.coord(0, 17), d.coord(1, 41)) == g(17, 41));

    CHECK_THROWS_AS(interpolate(f3, 2.5, 1.0), GridError);
    CHECK_THROWS_AS(interpolate(f3, 1.5, 0.2), GridError);
}

TEST_CASE("interpolation error decays like h^4") {
    DeterministicRng rng(17);
    double err[2];
    const int counts[2] = {33, 65};
    for (int k = 0; k < 2; ++k) {
        const GridDomain d = unit_chart(counts[k], counts[k]);
        const auto f =
            ScalarField::sample(d, [](double t, double m) { return std::sin(2 * t + m); });
        double e = 0.0;
        for (int q = 0; q < 200; ++q) {
            const double x = rng.uniform(1.05, 1.95);
            const double y = rng.uniform(0.55, 1.45);
            e = std::max(e, std::abs(interpolate(f, x, y) - std::sin(2 * x + y)));
        }
        err[k] = e;
    }
    CHECK(err[0] / err[1] > 8.0);
}

TEST_CASE("convergence_order recovers slopes") {
    auto mk = [](double res, double h) {
        return ResidualReport{"r", res, res, h, std::nullopt};
    };
    const ResidualReport geom[3] = {mk(1e-2, 0.1), mk(2.5e-3, 0.05), mk(6.25e-4, 0.025)};
    CHECK_THAT(convergence_order(geom), Catch::Matchers::WithinAbs(2.0, 1e-12));

    const ResidualReport flat[3] = {mk(1e-3, 0.1), mk(1e-3, 0.05), mk(1e-3, 0.025)};
    CHECK_THAT(convergence_order(flat), Catch::Matchers::WithinAbs(0.0, 1e-12));

    const ResidualReport two[2] = {mk(1e-2, 0.1), mk(2.5e-3, 0.05)};
    CHECK_THROWS_AS(convergence_order(std::span(two, 2)), GridError);

    const ResidualReport bad[3] = {mk(1e-2, 0.1), mk(2.5e-3, 0.07), mk(6.25e-4, 0.025)};
    CHECK_THROWS_AS(convergence_order(std::span(bad, 3)), GridError);
}

TEST_CASE("field validation") {
    const GridDomain d = unit_chart(8, 8);
    std::vector<double> vals(d.size(), 1.0);
    vals[3] = std::numeric_limits<double>::quiet_NaN();
    CHECK_THROWS_AS(ScalarField::from_values(d, vals), GridError);
    CHECK_THROWS_AS(ScalarField::from_values(d, std::vector<double>(7, 0.0)), GridError);
}

TEST_CASE("field JSON and CSV round trip") {
    const GridDomain d = unit_chart(8, 9);
    const auto f = ScalarField::sample(d, [](double t, double m) { return t * m; });
    const auto j = to_json(f);
    const auto g = field_from_json(j);
    CHECK(g.same_domain(f));
    CHECK(max_abs_diff(f, g) == 0.0);

    std::ostringstream os;
    write_csv(os, f);
    const std::string csv = os.str();
    CHECK(csv.starts_with("coord1,coord2,value\n"));
    // one line per node plus the header
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 1 + 8 * 9);
}
