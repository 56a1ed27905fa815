#pragma once

#include <cmath>

#include "minksurf/catalog.hpp"
#include "minksurf/errors.hpp"
#include "minksurf/solution_types.hpp"

namespace minksurf {

/// Moving-hyperboloid shape values in orthonormal parametrization.
struct HyperboloidPoint {
    double r;
    double z_plus;
    double z_minus;
};

/// Orthonormal-gauge closed form of the moving hyperboloids.
///
/// As printed, the radicand of r repeats the "+1" of z, which makes
/// r identical to |z| and breaks both the defining level set
/// t^2 + x^2 + y^2 = z^2 and the gauge constraints. The repaired form
/// (default) uses "-1" in r; the printed variant stays available as a
/// negative control.
class HyperboloidPhysical {
public:
    explicit HyperboloidPhysical(double E = 1.0, bool repaired = true, int z_branch = +1)
        : E_(E), repaired_(repaired), sign_z_(z_branch >= 0 ? 1.0 : -1.0) {
        if (!(E > 0)) throw EvalError("hyperboloid physical: E must be positive");
    }

    double E() const { return E_; }
    bool repaired() const { return repaired_; }

    bool valid(double t, double) const { return t != 0.0; }

    /// Values only; fine on the axis phi = 0 where r vanishes.
    HyperboloidPoint point(double t, double phi) const {
        if (t == 0.0) throw EvalError("hyperboloid physical: t = 0 is singular");
        const double w = E_ * phi;
        const double t4 = std::pow(t, 4);
        const double S = std::sqrt(1.0 + 8.0 * w * w / t4);
        const double zp = sign_z_ * t * std::sqrt((S + 1.0) / 2.0);
        // (S-1)/2 written as 4 w^2 / (t^4 (S+1)) to avoid cancellation near phi = 0
        const double radicand =
            repaired_ ? 4.0 * w * w / (t4 * (S + 1.0)) : (S + 1.0) / 2.0;
        const double r = std::abs(t) * std::sqrt(radicand);
        return {r, zp, -zp};
    }

    /// t^2 + r^2 - z^2; identically zero for the repaired branch.
    double level_set(double t, double phi) const {
        const auto p = point(t, phi);
        return t * t + p.r * p.r - p.z_plus * p.z_plus;
    }

    struct Jets {
        Jet2 r;
        Jet2 z;
    };

    /// Second-order jets of (r, z) in (t, phi). The radius has a kink at
    /// phi = 0 (repaired branch), so derivative charts must exclude it.
    Jets jets(double t, double phi) const {
        if (t == 0.0) throw EvalError("hyperboloid physical: t = 0 is singular");
        const double w = E_ * phi;
        if (repaired_ && w == 0.0)
            throw EvalError("hyperboloid physical: derivatives singular at phi = 0");

        const double t4 = std::pow(t, 4), t5 = t4 * t, t6 = t5 * t;
        const double S = std::sqrt(1.0 + 8.0 * w * w / t4);
        const double St = -16.0 * w * w / (S * t5);
        const double Sw = 8.0 * w / (S * t4);
        const double Stt = 16.0 * w * w * St / (S * S * t5) + 80.0 * w * w / (S * t6);
        const double Sww = 8.0 / (S * t4) - 8.0 * w * Sw / (S * S * t4);
        const double Stw = -32.0 * w / (S * t5) + 16.0 * w * w * Sw / (S * S * t5);

        const auto sheet = [&](double sign_inner) {
            const double P = std::sqrt((S + sign_inner) / 2.0);
            const double Pt = St / (4.0 * P);
            const double Pw = Sw / (4.0 * P);
            const double P3 = P * P * P;
            const double Ptt = Stt / (4.0 * P) - St * St / (16.0 * P3);
            const double Pww = Sww / (4.0 * P) - Sw * Sw / (16.0 * P3);
            const double Ptw = Stw / (4.0 * P) - St * Sw / (16.0 * P3);
            return Jet2{P, Pt, Pw, Ptt, Ptw, Pww};
        };

        const Jet2 P = sheet(+1.0);
        const Jet2 Q = sheet(repaired_ ? -1.0 : +1.0);

        Jets out;
        out.z = combine(t, P, sign_z_);
        out.r = combine(t, Q, t >= 0.0 ? 1.0 : -1.0);
        // chain rule for w = E*phi
        for (Jet2* f : {&out.r, &out.z}) {
            f->d2 *= E_;
            f->d12 *= E_;
            f->d22 *= E_ * E_;
        }
        return out;
    }

private:
    // g = sign * t * P(t, w) and its jets from P's.
    static Jet2 combine(double t, const Jet2& P, double sign) {
        Jet2 g;
        g.v = sign * t * P.v;
        g.d1 = sign * (P.v + t * P.d1);
        g.d2 = sign * t * P.d2;
        g.d11 = sign * (2.0 * P.d1 + t * P.d11);
        g.d12 = sign * (P.d2 + t * P.d12);
        g.d22 = sign * t * P.d22;
        return g;
    }

    double E_;
    bool repaired_;
    double sign_z_;
};

/// Closed-form hyperboloid shape (repaired branch by default).
inline HyperboloidPoint hyperboloid_physical(double t, double phi, double E = 1.0,
                                             bool repaired = true) {
    return HyperboloidPhysical(E, repaired).point(t, phi);
}

}  // namespace minksurf
