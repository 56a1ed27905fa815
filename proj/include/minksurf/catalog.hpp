#pragma once

#include <cmath>
#include <memory>
#include <string>
#include <vector>

#include <json.hpp>

#include "minksurf/elliptic.hpp"
#include "minksurf/errors.hpp"
#include "minksurf/grid.hpp"
#include "minksurf/solution_types.hpp"

namespace minksurf {

/// Second-order jet of a scalar in two variables: value, both first
/// partials (d1 = first axis, d2 = second axis) and the second partials.
struct Jet2 {
    double v = 0, d1 = 0, d2 = 0, d11 = 0, d12 = 0, d22 = 0;
};

/// First-order jet.
struct Jet1 {
    double v = 0, d1 = 0, d2 = 0;
};

struct LightconeJets {
    Jet2 R;
    Jet2 zeta;
    Jet1 kappa;
};

/// A closed-form solution family in light-cone gauge: exact evaluators for
/// R, zeta, kappa and their partial derivatives on the family's valid chart.
///
/// Families are written down for eta = 1; a general eta enters through the
/// substitution mu -> eta*mu, which maps solutions to solutions.
class AnalyticSolution {
public:
    virtual ~AnalyticSolution() = default;

    virtual std::string family() const = 0;
    virtual nlohmann::json params() const = 0;
    virtual bool valid(double tau, double mu) const = 0;
    virtual std::vector<SingularLine> singular_lines() const = 0;
    virtual LightconeJets jets(double tau, double mu) const = 0;
    virtual double eta() const = 0;

    double R(double tau, double mu) const { return jets(tau, mu).R.v; }
    double zeta(double tau, double mu) const { return jets(tau, mu).zeta.v; }
    double kappa(double tau, double mu) const { return jets(tau, mu).kappa.v; }
};

namespace detail {

// Chain rule for the substitution mu -> eta*mu applied to eta = 1 jets.
inline void apply_eta(LightconeJets& j, double eta) {
    for (Jet2* f : {&j.R, &j.zeta}) {
        f->d2 *= eta;
        f->d12 *= eta;
        f->d22 *= eta * eta;
    }
    j.kappa.d2 *= eta;
}

inline void require_eta(double eta) {
    if (!(eta > 0)) throw EvalError("catalog: eta must be positive");
}

}  // namespace detail

/// R = sqrt(2) mu / tau — the moving-hyperboloid (light cone) family.
class HyperboloidSolution final : public AnalyticSolution {
public:
    explicit HyperboloidSolution(double eta = 1.0) : eta_(eta) { detail::require_eta(eta); }

    std::string family() const override { return "hyperboloid"; }
    nlohmann::json params() const override { return {{"eta", eta_}}; }
    double eta() const override { return eta_; }

    bool valid(double tau, double) const override { return tau != 0.0; }
    std::vector<SingularLine> singular_lines() const override { return {{0, 0.0}}; }

    LightconeJets jets(double tau, double mu) const override {
        if (!valid(tau, mu)) throw EvalError("hyperboloid: tau = 0 is singular");
        const double m = eta_ * mu;
        const double s2 = std::sqrt(2.0);
        const double t2 = tau * tau, t3 = t2 * tau, t4 = t3 * tau, t5 = t4 * tau;
        LightconeJets j;
        j.R = {s2 * m / tau, -s2 * m / t2, s2 / tau, 2.0 * s2 * m / t3, -s2 / t2, 0.0};
        j.zeta = {-m * m / t3,     3.0 * m * m / t4, -2.0 * m / t3,
                  -12.0 * m * m / t5, 6.0 * m / t4,  -2.0 / t3};
        j.kappa = {m * m * m / t4, -4.0 * m * m * m / t5, 3.0 * m * m / t4};
        detail::apply_eta(j, eta_);
        return j;
    }

private:
    double eta_;
};

/// R = sqrt(2) sqrt(mu^2 + eps) / tau — the polynomial level-set family
/// deforming the light cone.
class EpsilonFamilySolution final : public AnalyticSolution {
public:
    explicit EpsilonFamilySolution(double epsilon, double eta = 1.0)
        : epsilon_(epsilon), eta_(eta) {
        detail::require_eta(eta);
    }

    std::string family() const override { return "epsilon_family"; }
    nlohmann::json params() const override {
        return {{"epsilon", epsilon_}, {"eta", eta_}};
    }
    double eta() const override { return eta_; }
    double epsilon() const { return epsilon_; }

    bool valid(double tau, double mu) const override {
        const double m = eta_ * mu;
        return tau != 0.0 && m * m + epsilon_ > 0.0;
    }
    std::vector<SingularLine> singular_lines() const override { return {{0, 0.0}}; }

    LightconeJets jets(double tau, double mu) const override {
        const double m = eta_ * mu;
        if (tau == 0.0) throw EvalError("epsilon_family: tau = 0 is singular");
        if (!(m * m + epsilon_ > 0.0))
            throw EvalError("epsilon_family: mu^2 + epsilon must be positive");
        const double s2 = std::sqrt(2.0);
        const double W = std::sqrt(m * m + epsilon_);
        const double t2 = tau * tau, t3 = t2 * tau, t4 = t3 * tau, t5 = t4 * tau;
        LightconeJets j;
        j.R = {s2 * W / tau,       -s2 * W / t2,
               s2 * m / (W * tau), 2.0 * s2 * W / t3,
               -s2 * m / (W * t2), s2 * epsilon_ / (W * W * W * tau)};
        const double p = m * m + epsilon_ / 3.0;
        j.zeta = {-p / t3, 3.0 * p / t4, -2.0 * m / t3, -12.0 * p / t5, 6.0 * m / t4,
                  -2.0 / t3};
        const double q = m * m * m + epsilon_ * m;
        j.kappa = {q / t4, -4.0 * q / t5, (3.0 * m * m + epsilon_) / t4};
        detail::apply_eta(j, eta_);
        return j;
    }

private:
    double epsilon_;
    double eta_;
};

/// R = beta tau sqrt(mu) — the degree-six level-set family.
class TauSqrtMuSolution final : public AnalyticSolution {
public:
    explicit TauSqrtMuSolution(double beta = 1.0, double eta = 1.0)
        : beta_(beta), eta_(eta) {
        detail::require_eta(eta);
        if (!(beta > 0)) throw EvalError("tau_sqrt_mu: beta must be positive");
    }

    std::string family() const override { return "tau_sqrt_mu"; }
    nlohmann::json params() const override { return {{"beta", beta_}, {"eta", eta_}}; }
    double eta() const override { return eta_; }
    double beta() const { return beta_; }

    bool valid(double, double mu) const override { return eta_ * mu > 0.0; }
    std::vector<SingularLine> singular_lines() const override { return {{1, 0.0}}; }

    LightconeJets jets(double tau, double mu) const override {
        const double m = eta_ * mu;
        if (!(m > 0.0)) throw EvalError("tau_sqrt_mu: mu must be positive");
        const double b = beta_, b2 = b * b, b4 = b2 * b2;
        const double rm = std::sqrt(m);
        const double t2 = tau * tau, t3 = t2 * tau, t4 = t3 * tau, t5 = t4 * tau;
        LightconeJets j;
        j.R = {b * tau * rm, b * rm,  b * tau / (2.0 * rm), 0.0, b / (2.0 * rm),
               -b * tau / (4.0 * m * rm)};
        j.zeta = {b2 * m * tau / 2.0 + b4 * t5 / 40.0,
                  b2 * m / 2.0 + b4 * t4 / 8.0,
                  b2 * tau / 2.0,
                  b4 * t3 / 2.0,
                  b2 / 2.0,
                  0.0};
        j.kappa = {b4 * t4 * m / 8.0 + b2 * m * m / 4.0, b4 * t3 * m / 2.0,
                   b4 * t4 / 8.0 + b2 * m / 2.0};
        detail::apply_eta(j, eta_);
        return j;
    }

private:
    double beta_;
    double eta_;
};

/// R = sqrt(2) F(tau) mu with the elliptic-type profile F; both this and
/// its coordinate/potential swap are self-similar.
class EllipticFamilySolution final : public AnalyticSolution {
public:
    explicit EllipticFamilySolution(std::shared_ptr<const EllipticF> F, double eta = 1.0)
        : F_(std::move(F)), eta_(eta) {
        detail::require_eta(eta);
        if (!F_) throw EvalError("elliptic: missing profile");
    }

    std::string family() const override { return "elliptic"; }
    nlohmann::json params() const override { return {{"eta", eta_}}; }
    double eta() const override { return eta_; }

    const EllipticF& profile() const { return *F_; }

    bool valid(double tau, double) const override { return std::abs(tau) <= F_->range(); }
    std::vector<SingularLine> singular_lines() const override { return {}; }

    LightconeJets jets(double tau, double mu) const override {
        const double m = eta_ * mu;
        const auto [f, fd] = F_->eval(tau);  // throws beyond the horizon
        const double f2 = f * f, f3 = f2 * f, f4 = f2 * f2;
        const double s2 = std::sqrt(2.0);
        LightconeJets j;
        j.R = {s2 * f * m, s2 * fd * m, s2 * f, 2.0 * s2 * f3 * m, s2 * fd, 0.0};
        j.zeta = {f * fd * m * m,
                  (fd * fd + 2.0 * f4) * m * m,
                  2.0 * f * fd * m,
                  12.0 * f3 * fd * m * m,
                  2.0 * (fd * fd + 2.0 * f4) * m,
                  2.0 * f * fd};
        j.kappa = {(f4 + 1.0 / 3.0) * m * m * m, 4.0 * f3 * fd * m * m * m,
                   (3.0 * f4 + 1.0) * m * m};
        detail::apply_eta(j, eta_);
        return j;
    }

private:
    std::shared_ptr<const EllipticF> F_;
    double eta_;
};

/// View of another solution under the two-parameter scaling symmetry
/// R -> alpha R(alpha gamma tau, gamma mu); exact, composable.
class ScaledSolution final : public AnalyticSolution {
public:
    ScaledSolution(std::shared_ptr<const AnalyticSolution> inner, double alpha,
                   double gamma)
        : inner_(std::move(inner)), alpha_(alpha), gamma_(gamma) {
        if (!inner_) throw EvalError("scaled: missing inner solution");
        if (alpha_ == 0.0 || gamma_ == 0.0)
            throw EvalError("scaled: alpha and gamma must be nonzero");
    }

    std::string family() const override { return inner_->family(); }
    nlohmann::json params() const override {
        nlohmann::json j = inner_->params();
        j["alpha"] = alpha_;
        j["gamma"] = gamma_;
        return j;
    }
    double eta() const override { return inner_->eta(); }
    double alpha() const { return alpha_; }
    double gamma() const { return gamma_; }

    bool valid(double tau, double mu) const override {
        return inner_->valid(alpha_ * gamma_ * tau, gamma_ * mu);
    }

    std::vector<SingularLine> singular_lines() const override {
        auto lines = inner_->singular_lines();
        for (auto& ln : lines) ln.value /= (ln.axis == 0 ? alpha_ * gamma_ : gamma_);
        return lines;
    }

    LightconeJets jets(double tau, double mu) const override {
        const double ag = alpha_ * gamma_;
        LightconeJets j = inner_->jets(ag * tau, gamma_ * mu);
        scale_jet2(j.R, alpha_, ag, gamma_);
        scale_jet2(j.zeta, alpha_ * alpha_ * alpha_ * gamma_, ag, gamma_);
        const double fk = alpha_ * alpha_ * alpha_ * alpha_ * gamma_;
        j.kappa.v *= fk;
        j.kappa.d1 *= fk * ag;
        j.kappa.d2 *= fk * gamma_;
        return j;
    }

private:
    static void scale_jet2(Jet2& f, double value_factor, double ag, double g) {
        f.v *= value_factor;
        f.d1 *= value_factor * ag;
        f.d2 *= value_factor * g;
        f.d11 *= value_factor * ag * ag;
        f.d12 *= value_factor * ag * g;
        f.d22 *= value_factor * g * g;
    }

    std::shared_ptr<const AnalyticSolution> inner_;
    double alpha_;
    double gamma_;
};

/// Radius of the coordinate/potential-swap image of the elliptic family, as
/// a function of the new chart coordinates (a, b) = (old zeta, old kappa).
///
/// By homogeneity the image is a^{1/2} G(b a^{-3/2}) where the profile G is
/// pinned down by the family itself: along s(tau) = (F^4+1/3)/(F Fdot)^{3/2}
/// (strictly decreasing in tau) it takes the value sqrt(2 F / Fdot). G obeys
/// the first integral G'^2 (9 s^2 - 4 G^2) = G^2, which is not of the
/// quartic-conservation type of F itself; the often-quoted form with F in
/// place of G fails by O(1) and is kept below only as a negative control.
inline double elliptic_image_radius(double a, double b, const EllipticF& F) {
    if (!(a > 0.0))
        throw EvalError("elliptic_image_radius: needs a positive first coordinate");
    const double s = b * std::pow(a, -1.5);
    auto s_of = [&F](double tau) {
        const auto [f, fd] = F.eval(tau);
        return (f * f * f * f + 1.0 / 3.0) / std::pow(f * fd, 1.5);
    };
    double lo = 1e-9, hi = F.range() * (1.0 - 1e-12);
    if (s > s_of(lo) || s < s_of(hi))
        throw EvalError("elliptic_image_radius: similarity value out of range");
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        (s_of(mid) >= s ? lo : hi) = mid;
        if (hi - lo < 1e-15 * hi) break;
    }
    const auto [f, fd] = F.eval(0.5 * (lo + hi));
    return std::sqrt(a) * std::sqrt(2.0 * f / fd);
}

/// The as-printed variant (the profile replaced by F itself); not a
/// solution of the swapped system, retained for comparison runs.
inline double elliptic_image_radius_printed(double a, double b, const EllipticF& F) {
    if (!(a > 0.0))
        throw EvalError("elliptic_image_radius_printed: needs a positive first coordinate");
    return std::sqrt(a) * F.eval(b * std::pow(a, -1.5)).f;
}

/// Catalog entry: family name plus its parameter schema.
struct FamilyInfo {
    std::string name;
    nlohmann::json schema;
};

inline std::vector<FamilyInfo> list_catalog() {
    const nlohmann::json eta = {{"type", "number"}, {"minimum_exclusive", 0.0},
                                {"default", 1.0}};
    return {
        {"hyperboloid", {{"eta", eta}}},
        {"epsilon_family",
         {{"epsilon", {{"type", "number"}, {"required", true}}}, {"eta", eta}}},
        {"tau_sqrt_mu",
         {{"beta", {{"type", "number"}, {"minimum_exclusive", 0.0}, {"default", 1.0}}},
          {"eta", eta}}},
        {"elliptic", {{"eta", eta}}},
    };
}

/// The elliptic profile is expensive to build; share one per process.
inline std::shared_ptr<const EllipticF> shared_elliptic_profile() {
    static const std::shared_ptr<const EllipticF> profile = std::make_shared<EllipticF>();
    return profile;
}

inline std::shared_ptr<const AnalyticSolution> make_solution(const std::string& name,
                                                             const nlohmann::json& raw) {
    const nlohmann::json params = raw.is_null() ? nlohmann::json::object() : raw;
    const double eta = params.value("eta", 1.0);
    std::shared_ptr<const AnalyticSolution> sol;
    if (name == "hyperboloid") {
        sol = std::make_shared<HyperboloidSolution>(eta);
    } else if (name == "epsilon_family") {
        if (!params.contains("epsilon"))
            throw EvalError("epsilon_family: parameter 'epsilon' is required");
        sol = std::make_shared<EpsilonFamilySolution>(params.at("epsilon").get<double>(),
                                                      eta);
    } else if (name == "tau_sqrt_mu") {
        sol = std::make_shared<TauSqrtMuSolution>(params.value("beta", 1.0), eta);
    } else if (name == "elliptic") {
        sol = std::make_shared<EllipticFamilySolution>(shared_elliptic_profile(), eta);
    } else {
        throw EvalError("unknown catalog family: " + name);
    }
    if (params.contains("alpha") || params.contains("gamma"))
        sol = std::make_shared<ScaledSolution>(sol, params.value("alpha", 1.0),
                                               params.value("gamma", 1.0));
    return sol;
}

/// Sample a family on a chart. The chart must avoid the family's singular
/// loci; the sampled radius must be positive everywhere.
inline LightconeTriple sample_triple(const AnalyticSolution& sol, const GridDomain& d) {
    std::vector<double> r(d.size()), z(d.size()), k(d.size());
    for (int i = 0; i < d.count(0); ++i)
        for (int j = 0; j < d.count(1); ++j) {
            const LightconeJets jets = sol.jets(d.coord(0, i), d.coord(1, j));
            if (!(jets.R.v > 0.0))
                throw EvalError("sample_triple: R must be positive on the chart");
            r[d.index(i, j)] = jets.R.v;
            z[d.index(i, j)] = jets.zeta.v;
            k[d.index(i, j)] = jets.kappa.v;
        }
    return {d, ScalarField::from_values(d, std::move(r)),
            ScalarField::from_values(d, std::move(z)),
            ScalarField::from_values(d, std::move(k)), sol.eta()};
}

}  // namespace minksurf
