#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "minksurf/errors.hpp"
#include "minksurf/grid.hpp"

namespace minksurf {

struct ChartResampleOptions {
    /// Output grid size; 0 keeps the source counts.
    int out_count0 = 0;
    int out_count1 = 0;
    /// Pin the output rectangle {lo0, hi0, lo1, hi1} instead of detecting it
    /// (useful for convergence studies across resolutions).
    std::optional<std::array<double, 4>> output_bounds;
    double newton_tol = 1e-12;
    int max_iterations = 50;
    /// Raster resolution for the image mask; 0 picks counts/2.
    int raster0 = 0;
    int raster1 = 0;
    /// Gate on |det J| relative to its median over the source chart.
    double det_threshold_factor = 1e-12;
};

struct ChartResampleResult {
    GridDomain out_domain;
    /// Source coordinates of each output node (the inverse chart).
    ScalarField inv0;
    ScalarField inv1;
    std::vector<ScalarField> resampled;
    int max_newton_iterations = 0;
    double mean_newton_iterations = 0.0;
};

namespace detail {

// Largest axis-aligned rectangle of set cells (histogram method).
// Returns {r0, r1, c0, c1} inclusive, or nullopt when nothing is set.
inline std::optional<std::array<int, 4>> max_rectangle(const std::vector<char>& mask,
                                                       int rows, int cols) {
    std::vector<int> height(static_cast<std::size_t>(cols), 0);
    long best_area = 0;
    std::array<int, 4> best{};
    for (int r = 0; r < rows; ++r) {
        for (int c = 0; c < cols; ++c)
            height[static_cast<std::size_t>(c)] =
                mask[static_cast<std::size_t>(r) * cols + c]
                    ? height[static_cast<std::size_t>(c)] + 1
                    : 0;
        // stack scan over the histogram for this base row
        std::vector<int> stack;
        for (int c = 0; c <= cols; ++c) {
            const int h = (c == cols) ? 0 : height[static_cast<std::size_t>(c)];
            while (!stack.empty() &&
                   height[static_cast<std::size_t>(stack.back())] >= h) {
                const int top = stack.back();
                stack.pop_back();
                const int th = height[static_cast<std::size_t>(top)];
                const int left = stack.empty() ? 0 : stack.back() + 1;
                const long area = static_cast<long>(th) * (c - left);
                if (area > best_area) {
                    best_area = area;
                    best = {r - th + 1, r, left, c - 1};
                }
            }
            if (c < cols) stack.push_back(c);
        }
    }
    if (best_area == 0) return std::nullopt;
    return best;
}

struct Raster {
    double lo0, lo1, w0, w1;
    int n0, n1;
    std::vector<int> seed;  // flat source index per cell, -1 when empty

    int cell0(double x) const {
        return std::clamp(static_cast<int>((x - lo0) / w0), 0, n0 - 1);
    }
    int cell1(double y) const {
        return std::clamp(static_cast<int>((y - lo1) / w1), 0, n1 - 1);
    }
    double center0(int c) const { return lo0 + (c + 0.5) * w0; }
    double center1(int c) const { return lo1 + (c + 0.5) * w1; }
};

struct P2 {
    double x, y;
};

inline double cross2(const P2& o, const P2& a, const P2& b) {
    return (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x);
}

inline bool in_triangle(const P2& p, const P2& a, const P2& b, const P2& c) {
    const double d1 = cross2(a, b, p);
    const double d2 = cross2(b, c, p);
    const double d3 = cross2(c, a, p);
    const bool has_neg = (d1 < 0) || (d2 < 0) || (d3 < 0);
    const bool has_pos = (d1 > 0) || (d2 > 0) || (d3 > 0);
    return !(has_neg && has_pos);
}

inline bool in_quad(const P2& p, const P2& q00, const P2& q10, const P2& q11,
                    const P2& q01) {
    return in_triangle(p, q00, q10, q11) || in_triangle(p, q00, q11, q01);
}

}  // namespace detail

/// Invert the coordinate change p -> (U(p), V(p)) onto a uniform rectangle
/// inscribed in the forward image, and pull the given fields back onto it.
///
/// The rectangle is found by rasterizing the forward-image samples, eroding
/// one cell (so jagged image boundaries cannot leak in) and taking the
/// maximal rectangle of surviving cells. Each output node is then located in
/// the source chart by damped Newton iteration on the interpolated map,
/// seeded from the nearest forward-image sample.
inline ChartResampleResult chart_resample(const ScalarField& U, const ScalarField& V,
                                          std::span<const ScalarField> fields,
                                          std::array<std::string, 2> out_names,
                                          const ChartResampleOptions& opt = {}) {
    if (!U.same_domain(V)) throw GridError("chart_resample: U and V domains differ");
    for (const auto& f : fields)
        if (!f.same_domain(U)) throw GridError("chart_resample: field domain differs");
    const GridDomain& d = U.domain();

    const ScalarField Ut = differentiate(U, 0);
    const ScalarField Um = differentiate(U, 1);
    const ScalarField Vt = differentiate(V, 0);
    const ScalarField Vm = differentiate(V, 1);

    // Jacobian gate: a sign change means the map folds somewhere inside
    {
        std::vector<double> dets(d.size());
        for (std::size_t k = 0; k < d.size(); ++k)
            dets[k] = Ut.values()[k] * Vm.values()[k] - Um.values()[k] * Vt.values()[k];
        const auto [mn_it, mx_it] = std::minmax_element(dets.begin(), dets.end());
        if (*mn_it < 0.0 && *mx_it > 0.0)
            throw SingularError(
                "chart_resample: Jacobian changes sign on the chart (fold)");
        std::vector<double> mags(dets.size());
        for (std::size_t k = 0; k < dets.size(); ++k) mags[k] = std::abs(dets[k]);
        std::vector<double> sorted = mags;
        std::nth_element(sorted.begin(), sorted.begin() + sorted.size() / 2, sorted.end());
        const double median = sorted[sorted.size() / 2];
        const double mn = *std::min_element(mags.begin(), mags.end());
        if (mn < opt.det_threshold_factor * median)
            throw SingularError("chart_resample: Jacobian vanishes on the chart (min " +
                                std::to_string(mn) + ", median " + std::to_string(median) +
                                ")");
    }

    // forward image samples and bounding box
    double blo0 = U.values()[0], bhi0 = blo0, blo1 = V.values()[0], bhi1 = blo1;
    for (std::size_t k = 0; k < d.size(); ++k) {
        blo0 = std::min(blo0, U.values()[k]);
        bhi0 = std::max(bhi0, U.values()[k]);
        blo1 = std::min(blo1, V.values()[k]);
        bhi1 = std::max(bhi1, V.values()[k]);
    }

    // the image of a quasi-homogeneous family is a thin curved band, so the
    // mask must be fine enough to resolve its width
    detail::Raster raster;
    raster.n0 = opt.raster0 > 0 ? opt.raster0 : 256;
    raster.n1 = opt.raster1 > 0 ? opt.raster1 : 256;
    raster.lo0 = blo0;
    raster.lo1 = blo1;
    raster.w0 = (bhi0 - blo0) / raster.n0;
    raster.w1 = (bhi1 - blo1) / raster.n1;
    if (!(raster.w0 > 0.0) || !(raster.w1 > 0.0))
        throw SingularError("chart_resample: forward image is degenerate");
    raster.seed.assign(static_cast<std::size_t>(raster.n0) * raster.n1, -1);

    for (int i = 0; i < d.count(0); ++i)
        for (int j = 0; j < d.count(1); ++j) {
            const std::size_t k = d.index(i, j);
            const int c0 = raster.cell0(U.values()[k]);
            const int c1 = raster.cell1(V.values()[k]);
            raster.seed[static_cast<std::size_t>(c0) * raster.n1 + c1] =
                static_cast<int>(k);
        }

    // Resolution of the image in each output direction: the median extent of
    // a forward-mapped source cell. Output grids finer than this carry no
    // extra information and amplify interpolation noise under differencing.
    const auto median_cell = [&](const ScalarField& W) {
        std::vector<double> ext;
        ext.reserve(d.size());
        for (int i = 0; i + 1 < d.count(0); ++i)
            for (int j = 0; j + 1 < d.count(1); ++j)
                ext.push_back(std::max(std::abs(W(i + 1, j) - W(i, j)),
                                       std::abs(W(i, j + 1) - W(i, j))));
        std::nth_element(ext.begin(), ext.begin() + ext.size() / 2, ext.end());
        return std::max(ext[ext.size() / 2], 1e-300);
    };
    const double cell_u = median_cell(U);
    const double cell_v = median_cell(V);
    auto derive_counts = [&](double span0, double span1) {
        auto pick = [&](double span, double cell, int src) {
            const int n = static_cast<int>(std::lround(span / cell)) + 1;
            // floor of 16 keeps an interior after stencil margins
            return std::clamp(n, 16, 2 * src);
        };
        return std::array<int, 2>{pick(span0, cell_u, d.count(0)),
                                  pick(span1, cell_v, d.count(1))};
    };

    GridDomain out_domain;
    if (opt.output_bounds) {
        const auto& b = *opt.output_bounds;
        const auto n = derive_counts(b[1] - b[0], b[3] - b[2]);
        out_domain = GridDomain::make(
            out_names, {b[0], b[2]}, {b[1], b[3]},
            {opt.out_count0 > 0 ? opt.out_count0 : n[0],
             opt.out_count1 > 0 ? opt.out_count1 : n[1]});
    } else {
        // Mark cells whose center lies inside the image of some source grid
        // cell. Coverage by quads (rather than by the samples alone) keeps
        // stretched regions of the image from reading as holes.
        std::vector<char> mask(raster.seed.size(), 0);
        for (int i = 0; i + 1 < d.count(0); ++i)
            for (int j = 0; j + 1 < d.count(1); ++j) {
                const detail::P2 q00{U(i, j), V(i, j)};
                const detail::P2 q10{U(i + 1, j), V(i + 1, j)};
                const detail::P2 q11{U(i + 1, j + 1), V(i + 1, j + 1)};
                const detail::P2 q01{U(i, j + 1), V(i, j + 1)};
                const double qlo0 = std::min({q00.x, q10.x, q11.x, q01.x});
                const double qhi0 = std::max({q00.x, q10.x, q11.x, q01.x});
                const double qlo1 = std::min({q00.y, q10.y, q11.y, q01.y});
                const double qhi1 = std::max({q00.y, q10.y, q11.y, q01.y});
                for (int a = raster.cell0(qlo0); a <= raster.cell0(qhi0); ++a)
                    for (int b = raster.cell1(qlo1); b <= raster.cell1(qhi1); ++b) {
                        if (mask[static_cast<std::size_t>(a) * raster.n1 + b]) continue;
                        const detail::P2 c{raster.center0(a), raster.center1(b)};
                        if (detail::in_quad(c, q00, q10, q11, q01))
                            mask[static_cast<std::size_t>(a) * raster.n1 + b] = 1;
                    }
            }
        std::vector<char> eroded(mask.size(), 0);
        for (int a = 1; a + 1 < raster.n0; ++a)
            for (int b = 1; b + 1 < raster.n1; ++b) {
                bool all = true;
                for (int da = -1; da <= 1 && all; ++da)
                    for (int db = -1; db <= 1 && all; ++db)
                        all = mask[static_cast<std::size_t>(a + da) * raster.n1 + b + db];
                eroded[static_cast<std::size_t>(a) * raster.n1 + b] = all;
            }
        const auto rect = detail::max_rectangle(eroded, raster.n0, raster.n1);
        if (!rect)
            throw SingularError(
                "chart_resample: no rectangle fits inside the forward image");
        const auto [r0, r1, c0, c1] = *rect;
        const std::array<double, 2> lo{raster.lo0 + r0 * raster.w0,
                                       raster.lo1 + c0 * raster.w1};
        const std::array<double, 2> hi{raster.lo0 + (r1 + 1) * raster.w0,
                                       raster.lo1 + (c1 + 1) * raster.w1};
        const auto n = derive_counts(hi[0] - lo[0], hi[1] - lo[1]);
        out_domain = GridDomain::make(out_names, lo, hi,
                                      {opt.out_count0 > 0 ? opt.out_count0 : n[0],
                                       opt.out_count1 > 0 ? opt.out_count1 : n[1]});
    }

    // Newton inversion per output node
    const double span0 = d.upper(0) - d.lower(0);
    const double span1 = d.upper(1) - d.lower(1);
    const double tol0 = opt.newton_tol * span0;
    const double tol1 = opt.newton_tol * span1;
    const double value_scale =
        std::max({1e-300, std::abs(blo0), std::abs(bhi0), std::abs(blo1), std::abs(bhi1)});

    auto find_seed = [&](double a, double b) -> int {
        const int c0 = raster.cell0(a);
        const int c1 = raster.cell1(b);
        const int rmax = std::max(raster.n0, raster.n1);
        for (int radius = 0; radius < rmax; ++radius) {
            for (int da = -radius; da <= radius; ++da)
                for (int db = -radius; db <= radius; ++db) {
                    if (std::max(std::abs(da), std::abs(db)) != radius) continue;
                    const int a0 = c0 + da, b0 = c1 + db;
                    if (a0 < 0 || a0 >= raster.n0 || b0 < 0 || b0 >= raster.n1) continue;
                    const int s = raster.seed[static_cast<std::size_t>(a0) * raster.n1 + b0];
                    if (s >= 0) return s;
                }
        }
        throw SingularError("chart_resample: empty forward image");
    };

    std::vector<double> inv0(out_domain.size()), inv1(out_domain.size());
    std::vector<std::vector<double>> res_values(fields.size());
    for (auto& rv : res_values) rv.resize(out_domain.size());

    long total_iters = 0;
    int max_iters = 0;
    auto clamp0 = [&](double x) { return std::clamp(x, d.lower(0), d.upper(0)); };
    auto clamp1 = [&](double y) { return std::clamp(y, d.lower(1), d.upper(1)); };

    for (int i = 0; i < out_domain.count(0); ++i)
        for (int j = 0; j < out_domain.count(1); ++j) {
            const double a = out_domain.coord(0, i);
            const double b = out_domain.coord(1, j);
            const int s = find_seed(a, b);
            double x = d.coord(0, s / d.count(1));
            double y = d.coord(1, s % d.count(1));
            double ru = interpolate(U, x, y) - a;
            double rv = interpolate(V, x, y) - b;
            bool converged = false;
            int it = 0;
            for (; it < opt.max_iterations; ++it) {
                if (std::abs(ru) < opt.newton_tol * value_scale &&
                    std::abs(rv) < opt.newton_tol * value_scale) {
                    converged = true;
                    break;
                }
                const double j11 = interpolate(Ut, x, y);
                const double j12 = interpolate(Um, x, y);
                const double j21 = interpolate(Vt, x, y);
                const double j22 = interpolate(Vm, x, y);
                const double det = j11 * j22 - j12 * j21;
                if (det == 0.0)
                    throw NewtonError("chart_resample: singular Jacobian during Newton");
                double dx = (j22 * ru - j12 * rv) / det;
                double dy = (-j21 * ru + j11 * rv) / det;
                // damped update: keep the residual decreasing
                const double old_norm = std::max(std::abs(ru), std::abs(rv));
                double nx = x, ny = y, nu = ru, nv = rv;
                double step = 1.0;
                for (int halve = 0; halve < 5; ++halve) {
                    nx = clamp0(x - step * dx);
                    ny = clamp1(y - step * dy);
                    nu = interpolate(U, nx, ny) - a;
                    nv = interpolate(V, nx, ny) - b;
                    if (std::max(std::abs(nu), std::abs(nv)) <= old_norm) break;
                    step *= 0.5;
                }
                const bool tiny_step = std::abs(x - nx) < tol0 && std::abs(y - ny) < tol1;
                x = nx;
                y = ny;
                ru = nu;
                rv = nv;
                if (tiny_step) {
                    converged = std::abs(ru) < 1e3 * opt.newton_tol * value_scale &&
                                std::abs(rv) < 1e3 * opt.newton_tol * value_scale;
                    ++it;
                    break;
                }
            }
            if (!converged)
                throw NewtonError("chart_resample: Newton failed at output node (" +
                                  std::to_string(a) + ", " + std::to_string(b) + ")");
            total_iters += it;
            max_iters = std::max(max_iters, it);
            inv0[out_domain.index(i, j)] = x;
            inv1[out_domain.index(i, j)] = y;
            for (std::size_t f = 0; f < fields.size(); ++f)
                res_values[f][out_domain.index(i, j)] = interpolate(fields[f], x, y);
        }

    ChartResampleResult result;
    result.out_domain = out_domain;
    result.inv0 = ScalarField::from_values(out_domain, std::move(inv0));
    result.inv1 = ScalarField::from_values(out_domain, std::move(inv1));
    for (auto& rv : res_values)
        result.resampled.push_back(ScalarField::from_values(out_domain, std::move(rv)));
    result.max_newton_iterations = max_iters;
    result.mean_newton_iterations =
        static_cast<double>(total_iters) / static_cast<double>(out_domain.size());
    return result;
}

}  // namespace minksurf
