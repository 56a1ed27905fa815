#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "minksurf/errors.hpp"

namespace minksurf {

/// Axis-aligned line a chart must not contain or touch
/// (e.g. the tau = 0 singularity of the hyperboloid family).
struct SingularLine {
    int axis = 0;  // 0 = first axis, 1 = second axis
    double value = 0.0;
};

/// Uniformly sampled rectangular chart with two named coordinate axes.
///
/// Spacing is (upper-lower)/(count-1) exactly; construction rejects
/// degenerate bounds, counts below 8, and bounds that straddle or touch
/// a declared singular line.
class GridDomain {
public:
    static constexpr int min_count = 8;

    GridDomain() = default;

    static GridDomain make(std::array<std::string, 2> names,
                           std::array<double, 2> lower,
                           std::array<double, 2> upper,
                           std::array<int, 2> counts,
                           std::span<const SingularLine> excluded = {}) {
        for (int a = 0; a < 2; ++a) {
            if (!std::isfinite(lower[a]) || !std::isfinite(upper[a]))
                throw GridError("grid bounds must be finite");
            if (!(upper[a] > lower[a]))
                throw GridError("grid bounds must satisfy upper > lower on axis " +
                                names[a]);
            if (counts[a] < min_count)
                throw GridError("grid needs at least " + std::to_string(min_count) +
                                " points per axis, got " + std::to_string(counts[a]));
        }
        for (const auto& line : excluded) {
            if (line.axis < 0 || line.axis > 1)
                throw GridError("singular line axis must be 0 or 1");
            if (lower[line.axis] <= line.value && line.value <= upper[line.axis])
                throw GridError("chart straddles or touches the singular line " +
                                names[line.axis] + " = " + std::to_string(line.value));
        }
        GridDomain d;
        d.names_ = std::move(names);
        d.lower_ = lower;
        d.upper_ = upper;
        d.counts_ = counts;
        for (int a = 0; a < 2; ++a)
            d.spacing_[a] = (upper[a] - lower[a]) / static_cast<double>(counts[a] - 1);
        return d;
    }

    const std::string& axis_name(int axis) const { return names_[axis]; }
    double lower(int axis) const { return lower_[axis]; }
    double upper(int axis) const { return upper_[axis]; }
    int count(int axis) const { return counts_[axis]; }
    double spacing(int axis) const { return spacing_[axis]; }

    /// Coordinate of node i along an axis.
    double coord(int axis, int i) const {
        return lower_[axis] + spacing_[axis] * static_cast<double>(i);
    }

    std::size_t size() const {
        return static_cast<std::size_t>(counts_[0]) * static_cast<std::size_t>(counts_[1]);
    }

    std::size_t index(int i, int j) const {
        return static_cast<std::size_t>(i) * static_cast<std::size_t>(counts_[1]) +
               static_cast<std::size_t>(j);
    }

    /// Closed-domain membership with a tiny relative slack so points produced
    /// by clamped iterations evaluate on the boundary.
    bool contains(double x, double y) const {
        const double sx = 1e-12 * (upper_[0] - lower_[0]);
        const double sy = 1e-12 * (upper_[1] - lower_[1]);
        return x >= lower_[0] - sx && x <= upper_[0] + sx &&
               y >= lower_[1] - sy && y <= upper_[1] + sy;
    }

    bool operator==(const GridDomain&) const = default;

private:
    std::array<std::string, 2> names_{"tau", "mu"};
    std::array<double, 2> lower_{0.0, 0.0};
    std::array<double, 2> upper_{1.0, 1.0};
    std::array<int, 2> counts_{min_count, min_count};
    std::array<double, 2> spacing_{0.0, 0.0};
};

/// Immutable table of finite values over a GridDomain, stored row-major
/// (row = first axis). All operations return new fields.
class ScalarField {
public:
    ScalarField() = default;

    static ScalarField from_values(GridDomain domain, std::vector<double> values) {
        if (values.size() != domain.size())
            throw GridError("field shape does not match its domain");
        for (double v : values)
            if (!std::isfinite(v)) throw GridError("field values must be finite");
        ScalarField f;
        f.domain_ = std::move(domain);
        f.values_ = std::move(values);
        return f;
    }

    template <class F>
    static ScalarField sample(const GridDomain& domain, F&& fn) {
        std::vector<double> values(domain.size());
        for (int i = 0; i < domain.count(0); ++i)
            for (int j = 0; j < domain.count(1); ++j)
                values[domain.index(i, j)] = fn(domain.coord(0, i), domain.coord(1, j));
        return from_values(domain, std::move(values));
    }

    const GridDomain& domain() const { return domain_; }
    std::span<const double> values() const { return values_; }

    double operator()(int i, int j) const { return values_[domain_.index(i, j)]; }

    bool same_domain(const ScalarField& other) const { return domain_ == other.domain_; }

private:
    GridDomain domain_;
    std::vector<double> values_;
};

/// Pointwise combination of fields over one shared domain.
template <class F>
ScalarField zip(const ScalarField& a, const ScalarField& b, F&& fn) {
    if (!a.same_domain(b)) throw GridError("zip: fields live on different domains");
    std::vector<double> out(a.domain().size());
    auto va = a.values();
    auto vb = b.values();
    for (std::size_t k = 0; k < out.size(); ++k) out[k] = fn(va[k], vb[k]);
    return ScalarField::from_values(a.domain(), std::move(out));
}

template <class F>
ScalarField map(const ScalarField& a, F&& fn) {
    std::vector<double> out(a.domain().size());
    auto va = a.values();
    for (std::size_t k = 0; k < out.size(); ++k) out[k] = fn(va[k]);
    return ScalarField::from_values(a.domain(), std::move(out));
}

/// a*f + b*g
inline ScalarField linear_combination(double a, const ScalarField& f, double b,
                                      const ScalarField& g) {
    return zip(f, g, [a, b](double x, double y) { return a * x + b * y; });
}

namespace detail {

// First-derivative stencils on five consecutive nodes, exact through degree 4.
// Row p gives the weights (per 1/h) for the derivative at offset p of the block.
inline constexpr std::array<std::array<double, 5>, 5> d1_weights = {{
    {-25.0 / 12.0, 4.0, -3.0, 4.0 / 3.0, -1.0 / 4.0},
    {-1.0 / 4.0, -5.0 / 6.0, 3.0 / 2.0, -1.0 / 2.0, 1.0 / 12.0},
    {1.0 / 12.0, -2.0 / 3.0, 0.0, 2.0 / 3.0, -1.0 / 12.0},
    {-1.0 / 12.0, 1.0 / 2.0, -3.0 / 2.0, 5.0 / 6.0, 1.0 / 4.0},
    {1.0 / 4.0, -4.0 / 3.0, 3.0, -4.0, 25.0 / 12.0},
}};

inline void derivative_line(std::span<const double> in, std::span<double> out,
                            std::ptrdiff_t stride, int n, double inv_h) {
    auto at = [&](int k) { return in[static_cast<std::size_t>(k) * stride]; };
    for (int k = 0; k < n; ++k) {
        int start = std::clamp(k - 2, 0, n - 5);
        const auto& w = d1_weights[static_cast<std::size_t>(k - start)];
        double acc = 0.0;
        for (int m = 0; m < 5; ++m) acc += w[static_cast<std::size_t>(m)] * at(start + m);
        out[static_cast<std::size_t>(k) * stride] = acc * inv_h;
    }
}

}  // namespace detail

/// Partial derivative along an axis, sampled on the same domain.
/// Interior stencils are 4th-order central; edge rows use one-sided
/// 4th-order stencils so the global order is not degraded.
inline ScalarField differentiate(const ScalarField& f, int axis) {
    if (axis != 0 && axis != 1) throw GridError("differentiate: axis must be 0 or 1");
    const GridDomain& d = f.domain();
    std::vector<double> out(d.size());
    const double inv_h = 1.0 / d.spacing(axis);
    const int n0 = d.count(0);
    const int n1 = d.count(1);
    std::span<const double> in = f.values();
    if (axis == 0) {
        for (int j = 0; j < n1; ++j)
            detail::derivative_line(in.subspan(static_cast<std::size_t>(j)),
                                    std::span<double>(out).subspan(static_cast<std::size_t>(j)),
                                    n1, n0, inv_h);
    } else {
        for (int i = 0; i < n0; ++i)
            detail::derivative_line(in.subspan(d.index(i, 0)),
                                    std::span<double>(out).subspan(d.index(i, 0)), 1, n1,
                                    inv_h);
    }
    return ScalarField::from_values(d, std::move(out));
}

namespace detail {

// Start index of the 4-node interpolation block around x.
inline int block_start(double x, double lo, double h, int n) {
    int cell = static_cast<int>(std::floor((x - lo) / h));
    return std::clamp(cell - 1, 0, n - 4);
}

// Lagrange weights for 4 consecutive nodes; exact on cubics, and exactly
// nodal (0/1 weights) when x sits on a node.
inline std::array<double, 4> lagrange4(double x, double x0, double h) {
    std::array<double, 4> node{}, w{};
    for (int a = 0; a < 4; ++a) node[static_cast<std::size_t>(a)] = x0 + h * a;
    for (int a = 0; a < 4; ++a) {
        double num = 1.0, den = 1.0;
        for (int b = 0; b < 4; ++b) {
            if (a == b) continue;
            num *= x - node[static_cast<std::size_t>(b)];
            den *= node[static_cast<std::size_t>(a)] - node[static_cast<std::size_t>(b)];
        }
        w[static_cast<std::size_t>(a)] = num / den;
    }
    return w;
}

}  // namespace detail

/// Local bicubic-quality interpolation (4x4 tensor-product Lagrange).
/// Reproduces bicubic polynomials exactly; throws for points outside the chart.
inline double interpolate(const ScalarField& f, double x, double y) {
    const GridDomain& d = f.domain();
    if (!d.contains(x, y))
        throw GridError("interpolate: point (" + std::to_string(x) + ", " +
                        std::to_string(y) + ") outside chart");
    const int i0 = detail::block_start(x, d.lower(0), d.spacing(0), d.count(0));
    const int j0 = detail::block_start(y, d.lower(1), d.spacing(1), d.count(1));
    const auto wx = detail::lagrange4(x, d.coord(0, i0), d.spacing(0));
    const auto wy = detail::lagrange4(y, d.coord(1, j0), d.spacing(1));
    double acc = 0.0;
    for (int a = 0; a < 4; ++a) {
        double row = 0.0;
        for (int b = 0; b < 4; ++b)
            row += wy[static_cast<std::size_t>(b)] * f(i0 + a, j0 + b);
        acc += wx[static_cast<std::size_t>(a)] * row;
    }
    return acc;
}

/// One verification result: norms of an equation residual on a chart.
struct ResidualReport {
    std::string equation;
    double max_norm = 0.0;
    double l2_norm = 0.0;  // root-mean-square over the evaluated nodes
    double spacing = 0.0;
    std::optional<double> order;  // filled by convergence studies
    /// magnitude of the terms the residual compares; tolerance gates
    /// should scale with it
    double scale = 1.0;
};

/// Max and RMS norms over the chart interior, excluding a margin of
/// boundary cells (where one-sided stencils were used).
inline std::pair<double, double> interior_norms(const ScalarField& f, int margin) {
    const GridDomain& d = f.domain();
    const int n0 = d.count(0);
    const int n1 = d.count(1);
    if (2 * margin >= n0 || 2 * margin >= n1)
        throw GridError("interior_norms: margin leaves no interior");
    double mx = 0.0, sumsq = 0.0;
    std::size_t cnt = 0;
    for (int i = margin; i < n0 - margin; ++i)
        for (int j = margin; j < n1 - margin; ++j) {
            const double v = std::abs(f(i, j));
            mx = std::max(mx, v);
            sumsq += v * v;
            ++cnt;
        }
    return {mx, std::sqrt(sumsq / static_cast<double>(cnt))};
}

/// Least-squares slope of log(max residual) against log(spacing) for a
/// sequence of reports at successively halved spacings. Needs at least
/// three reports with spacing ratios of 2.
inline double convergence_order(std::span<const ResidualReport> reports) {
    if (reports.size() < 3)
        throw GridError("convergence_order: need at least 3 reports");
    for (std::size_t k = 1; k < reports.size(); ++k) {
        const double ratio = reports[k - 1].spacing / reports[k].spacing;
        if (!(ratio > 1.9 && ratio < 2.1))
            throw GridError("convergence_order: spacings must halve between reports");
    }
    const auto n = static_cast<double>(reports.size());
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    for (const auto& r : reports) {
        const double x = std::log(r.spacing);
        const double y = std::log(std::max(r.max_norm, 1e-300));
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

}  // namespace minksurf
