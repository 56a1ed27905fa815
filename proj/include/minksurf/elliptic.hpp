#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "minksurf/errors.hpp"

namespace minksurf {

struct EllipticOptions {
    double rtol = 1e-13;
    double atol = 1e-13;
    double max_step = 0.01;
    double blowup_cap = 1e3;
};

/// The odd elliptic-type function F with F(0) = 0, Fdot(0) = 1 and
/// Fddot = 2 F^3, so that Fdot^2 - F^4 = 1 along the trajectory.
///
/// F blows up at a finite argument; integration stops once |F| exceeds
/// `blowup_cap` and the usable range is reported by `range()`. Values in
/// between stored nodes come from two-point quintic Hermite interpolation,
/// which uses the exact nodal derivatives supplied by the equation itself.
class EllipticF {
public:
    struct Node {
        double s, f, fdot;
    };
    struct Value {
        double f, fdot;
    };
    using Options = EllipticOptions;

    explicit EllipticF(Options opt = {}) : opt_(opt) { integrate(); }

    /// Largest s for which eval() is defined (symmetric range [-s, s]).
    double range() const { return nodes_.back().s; }

    std::span<const Node> nodes() const { return nodes_; }

    Value eval(double s) const {
        const double a = std::abs(s);
        if (a > range())
            throw EvalError("EllipticF: argument " + std::to_string(s) +
                            " beyond the blow-up horizon " + std::to_string(range()));
        Value v = eval_abs(a);
        if (s < 0) v.f = -v.f;  // F odd, Fdot even
        return v;
    }

private:
    static std::array<double, 2> rhs(const std::array<double, 2>& y) {
        return {y[1], 2.0 * y[0] * y[0] * y[0]};
    }

    void integrate() {
        // Dormand-Prince 5(4) pair with step-size control.
        static constexpr double a21 = 1.0 / 5;
        static constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
        static constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
        static constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187,
                                a53 = 64448.0 / 6561, a54 = -212.0 / 729;
        static constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33,
                                a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                                a65 = -5103.0 / 18656;
        static constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192,
                                b5 = -2187.0 / 6784, b6 = 11.0 / 84;
        static constexpr double e1 = 35.0 / 384 - 5179.0 / 57600,
                                e3 = 500.0 / 1113 - 7571.0 / 16695,
                                e4 = 125.0 / 192 - 393.0 / 640,
                                e5 = -2187.0 / 6784 + 92097.0 / 339200,
                                e6 = 11.0 / 84 - 187.0 / 2100, e7 = -1.0 / 40;

        std::array<double, 2> y{0.0, 1.0};
        double s = 0.0;
        double h = 1e-4;
        nodes_.push_back({s, y[0], y[1]});

        auto step_once = [&](double hs, std::array<double, 2>& out) {
            const auto k1 = rhs(y);
            std::array<double, 2> t;
            for (int i = 0; i < 2; ++i) t[i] = y[i] + hs * a21 * k1[i];
            const auto k2 = rhs(t);
            for (int i = 0; i < 2; ++i) t[i] = y[i] + hs * (a31 * k1[i] + a32 * k2[i]);
            const auto k3 = rhs(t);
            for (int i = 0; i < 2; ++i)
                t[i] = y[i] + hs * (a41 * k1[i] + a42 * k2[i] + a43 * k3[i]);
            const auto k4 = rhs(t);
            for (int i = 0; i < 2; ++i)
                t[i] = y[i] + hs * (a51 * k1[i] + a52 * k2[i] + a53 * k3[i] + a54 * k4[i]);
            const auto k5 = rhs(t);
            for (int i = 0; i < 2; ++i)
                t[i] = y[i] + hs * (a61 * k1[i] + a62 * k2[i] + a63 * k3[i] +
                                    a64 * k4[i] + a65 * k5[i]);
            const auto k6 = rhs(t);
            for (int i = 0; i < 2; ++i)
                out[i] = y[i] + hs * (b1 * k1[i] + b3 * k3[i] + b4 * k4[i] +
                                      b5 * k5[i] + b6 * k6[i]);
            const auto k7 = rhs(out);
            double err = 0.0;
            for (int i = 0; i < 2; ++i) {
                const double e = hs * (e1 * k1[i] + e3 * k3[i] + e4 * k4[i] +
                                       e5 * k5[i] + e6 * k6[i] + e7 * k7[i]);
                const double scale =
                    opt_.atol + opt_.rtol * std::max(std::abs(y[i]), std::abs(out[i]));
                err = std::max(err, std::abs(e) / scale);
            }
            return err;
        };

        constexpr double h_min = 1e-12;
        constexpr std::size_t max_nodes = 2'000'000;
        while (nodes_.size() < max_nodes) {
            h = std::min(h, opt_.max_step);
            std::array<double, 2> ynew;
            const double err = step_once(h, ynew);
            if (err <= 1.0) {
                if (std::abs(ynew[0]) >= opt_.blowup_cap) {
                    if (h <= h_min) break;  // pinned against the pole
                    h *= 0.5;
                    continue;
                }
                s += h;
                y = ynew;
                // project onto the conserved trajectory: Fdot^2 = F^4 + 1 and
                // Fdot never changes sign on the principal branch
                y[1] = std::sqrt(y[0] * y[0] * y[0] * y[0] + 1.0);
                nodes_.push_back({s, y[0], y[1]});
            }
            const double factor =
                std::clamp(0.9 * std::pow(std::max(err, 1e-16), -0.2), 0.2, 5.0);
            h = std::max(h * factor, h_min);
        }
    }

    Value eval_abs(double s) const {
        // containing step via binary search on the stored nodes
        auto it = std::upper_bound(nodes_.begin(), nodes_.end(), s,
                                   [](double v, const Node& n) { return v < n.s; });
        std::size_t hi = static_cast<std::size_t>(it - nodes_.begin());
        if (hi == 0) hi = 1;
        if (hi >= nodes_.size()) hi = nodes_.size() - 1;
        const Node& n0 = nodes_[hi - 1];
        const Node& n1 = nodes_[hi];
        const double h = n1.s - n0.s;
        const double u = (s - n0.s) / h;
        const auto cube = [](double x) { return x * x * x; };
        return {hermite5(u, h, n0.f, n0.fdot, 2.0 * cube(n0.f), n1.f, n1.fdot,
                         2.0 * cube(n1.f)),
                hermite5(u, h, n0.fdot, 2.0 * cube(n0.f), 6.0 * n0.f * n0.f * n0.fdot,
                         n1.fdot, 2.0 * cube(n1.f), 6.0 * n1.f * n1.f * n1.fdot)};
    }

    // Two-point quintic Hermite with value/1st/2nd derivative data at the ends.
    static double hermite5(double u, double h, double f0, double d0, double a0,
                           double f1, double d1, double a1) {
        const double u2 = u * u, u3 = u2 * u, u4 = u3 * u, u5 = u4 * u;
        const double h00 = 1.0 - 10.0 * u3 + 15.0 * u4 - 6.0 * u5;
        const double h10 = u - 6.0 * u3 + 8.0 * u4 - 3.0 * u5;
        const double h20 = 0.5 * (u2 - 3.0 * u3 + 3.0 * u4 - u5);
        const double h01 = 10.0 * u3 - 15.0 * u4 + 6.0 * u5;
        const double h11 = -4.0 * u3 + 7.0 * u4 - 3.0 * u5;
        const double h21 = 0.5 * (u3 - 2.0 * u4 + u5);
        return f0 * h00 + h * d0 * h10 + h * h * a0 * h20 + f1 * h01 + h * d1 * h11 +
               h * h * a1 * h21;
    }

    Options opt_;
    std::vector<Node> nodes_;
};

}  // namespace minksurf
