#pragma once

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "minksurf/catalog.hpp"
#include "minksurf/errors.hpp"
#include "minksurf/field_io.hpp"
#include "minksurf/mesh_obj.hpp"
#include "minksurf/physical.hpp"
#include "minksurf/potentials.hpp"
#include "minksurf/residuals.hpp"
#include "minksurf/selfsim.hpp"
#include "minksurf/transform.hpp"

namespace minksurf::cli {

/// Everything a run needs; flags map onto this 1:1.
struct RunConfig {
    std::string command;  // catalog|eval|transform|scale|verify|selfsim|export|convergence|pipeline
    std::string family = "hyperboloid";
    nlohmann::json params = nlohmann::json::object();  // epsilon, beta, eta, ...
    std::array<double, 4> bounds{1.0, 2.0, 0.5, 1.5};  // lo0 hi0 lo1 hi1
    std::array<int, 2> counts{65, 65};
    double alpha = 1.0, gamma = 1.0;   // scale / export
    double tau = 1.0, mu = 1.0;        // eval point
    std::string check;                 // transform: "eq37" | "closure" | ""
    double C = -1.0;                   // selfsim
    double z_min = 0.8, z_max = 3.0;
    int samples = 400;
    std::string out_dir = ".";
    std::string format = "json";  // json|csv|obj
    int theta_samples = 64;
    int t_slices = 5;
    std::vector<std::string> steps;  // pipeline: "transform" or "scale:A:G"
    double tol_factor = 25.0;        // residual gates scale as tol_factor * h^2
};

struct CheckLine {
    std::string name;
    double max = 0.0;
    double l2 = 0.0;
    std::optional<double> order;
    double tol = 0.0;
    bool pass = false;
};

struct Report {
    std::string command;
    nlohmann::json params;
    std::vector<CheckLine> checks;
    nlohmann::json extra = nlohmann::json::object();  // non-gating diagnostics

    bool all_pass() const {
        for (const auto& c : checks)
            if (!c.pass) return false;
        return true;
    }
};

namespace detail {

inline void add_check(Report& rep, const std::string& name, double mx, double l2,
                      double tol, std::optional<double> order = std::nullopt) {
    rep.checks.push_back({name, mx, l2, order, tol, mx <= tol});
}

/// tol_base is multiplied by each equation's own magnitude scale
inline void add_residuals(Report& rep, const std::vector<ResidualReport>& rr,
                          double tol_base, const std::string& prefix = "") {
    for (const auto& r : rr)
        add_check(rep, prefix + r.equation, r.max_norm, r.l2_norm, tol_base * r.scale,
                  r.order);
}

inline GridDomain chart_from(const RunConfig& cfg,
                             const AnalyticSolution& sol,
                             std::array<std::string, 2> names = {"tau", "mu"}) {
    const auto lines = sol.singular_lines();
    return GridDomain::make(names, {cfg.bounds[0], cfg.bounds[2]},
                            {cfg.bounds[1], cfg.bounds[3]}, cfg.counts, lines);
}

inline nlohmann::json to_json(const Report& rep) {
    nlohmann::json checks = nlohmann::json::array();
    for (const auto& c : rep.checks) {
        nlohmann::json jc{{"name", c.name}, {"max", c.max},     {"l2", c.l2},
                          {"tol", c.tol},   {"pass", c.pass}};
        jc["order"] = c.order ? nlohmann::json(*c.order) : nlohmann::json();
        checks.push_back(jc);
    }
    return {{"command", rep.command},
            {"params", rep.params},
            {"checks", checks},
            {"diagnostics", rep.extra}};
}

inline void write_text_file(const std::filesystem::path& path, const std::string& text) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw IoError("cannot open " + path.string() + " for writing");
    os << text;
    if (!os) throw IoError("failed writing " + path.string());
}

inline void write_json_file(const std::filesystem::path& path, const nlohmann::json& j) {
    write_text_file(path, j.dump(2) + "\n");
}

inline void write_field(const RunConfig& cfg, const std::filesystem::path& dir,
                        const std::string& stem, const ScalarField& f) {
    if (cfg.format == "csv") {
        std::ostringstream os;
        write_csv(os, f);
        write_text_file(dir / (stem + ".csv"), os.str());
    } else {
        write_json_file(dir / (stem + ".json"), minksurf::to_json(f));
    }
}

// ---------- subcommands ----------

inline Report run_catalog(const RunConfig& cfg, const std::filesystem::path& dir) {
    Report rep{"catalog", cfg.params, {}, {}};
    nlohmann::json fams = nlohmann::json::array();
    for (const auto& f : list_catalog()) {
        fams.push_back({{"name", f.name}, {"schema", f.schema}});
        std::cout << f.name << '\n';
    }
    write_json_file(dir / "catalog.json", fams);
    rep.extra["families"] = fams;
    return rep;
}

inline Report run_eval(const RunConfig& cfg, const std::filesystem::path& dir) {
    const auto sol = make_solution(cfg.family, cfg.params);
    const LightconeJets j = sol->jets(cfg.tau, cfg.mu);
    Report rep{"eval", sol->params(), {}, {}};
    rep.params["family"] = cfg.family;
    rep.params["tau"] = cfg.tau;
    rep.params["mu"] = cfg.mu;
    std::cout << "R=" << format_double(j.R.v) << " zeta=" << format_double(j.zeta.v)
              << " kappa=" << format_double(j.kappa.v) << '\n';
    const nlohmann::json values{
        {"R", j.R.v},       {"zeta", j.zeta.v},     {"kappa", j.kappa.v},
        {"R_tau", j.R.d1},  {"R_mu", j.R.d2},       {"zeta_tau", j.zeta.d1},
        {"zeta_mu", j.zeta.d2}, {"kappa_tau", j.kappa.d1}, {"kappa_mu", j.kappa.d2}};
    write_json_file(dir / "eval.json", values);
    rep.extra["values"] = values;
    // the first-order system at the evaluated point, from exact derivatives
    const double eta = sol->eta();
    const double r4a =
        std::abs(j.zeta.d1 -
                 0.5 * (j.R.d1 * j.R.d1 + j.R.v * j.R.v * j.R.d2 * j.R.d2 / (eta * eta)));
    const double r4b = std::abs(j.zeta.d2 - j.R.d1 * j.R.d2);
    add_check(rep, "gauge-point", std::max(r4a, r4b), std::max(r4a, r4b), 1e-10);
    return rep;
}

inline Report run_transform(const RunConfig& cfg, const std::filesystem::path& dir) {
    const auto sol = make_solution(cfg.family, cfg.params);
    const GridDomain chart = chart_from(cfg, *sol);
    const LightconeTriple in = sample_triple(*sol, chart);
    const BianchiResult res = bianchi_transform(in);

    Report rep{"transform", sol->params(), {}, {}};
    rep.params["family"] = cfg.family;
    const double h = std::max(chart.spacing(0), chart.spacing(1));

    const auto pid = product_identity(in, res.out);
    add_check(rep, pid.equation, pid.max_norm, pid.l2_norm, cfg.tol_factor * h * h);

    const auto out_res = residual_lightcone(res.out);
    for (const auto& r : out_res)
        if (r.equation == "R-wave")
            add_check(rep, "out-" + r.equation, r.max_norm, r.l2_norm,
                      8.0 * cfg.tol_factor * h * h * r.scale);

    if (cfg.check == "eq37") {
        const auto& F = *shared_elliptic_profile();
        double worst = 0.0, worst_printed = 0.0;
        const GridDomain& od = res.out.domain;
        for (int i = 0; i < od.count(0); ++i)
            for (int j = 0; j < od.count(1); ++j) {
                const double a = od.coord(0, i), b = od.coord(1, j);
                worst = std::max(
                    worst, std::abs(res.out.R(i, j) - elliptic_image_radius(a, b, F)));
                worst_printed =
                    std::max(worst_printed, std::abs(res.out.R(i, j) -
                                                     elliptic_image_radius_printed(
                                                         a, b, F)));
            }
        add_check(rep, "eq37", worst, worst, 5e-4);
        rep.extra["eq37_printed_deviation"] = worst_printed;
    } else if (cfg.check == "closure") {
        // the light-cone family maps onto itself: |R*| = sqrt(2) |kappa/zeta|
        double worst = 0.0;
        const GridDomain& od = res.out.domain;
        for (int i = 0; i < od.count(0); ++i)
            for (int j = 0; j < od.count(1); ++j)
                worst = std::max(worst, std::abs(std::abs(res.out.R(i, j)) -
                                                 std::sqrt(2.0) *
                                                     std::abs(od.coord(1, j) /
                                                              od.coord(0, i))));
        add_check(rep, "closure", worst, worst, 1e-4);
    } else if (!cfg.check.empty()) {
        throw EvalError("unknown transform check: " + cfg.check);
    }

    write_field(cfg, dir, "out_R", res.out.R);
    write_field(cfg, dir, "out_zeta", res.out.zeta);
    write_field(cfg, dir, "out_kappa", res.out.kappa);
    rep.extra["diagnostics"] = {
        {"min_abs_lag", res.diag.min_abs_lag},
        {"median_abs_lag", res.diag.median_abs_lag},
        {"max_newton_iterations", res.diag.max_newton_iterations},
        {"mean_newton_iterations", res.diag.mean_newton_iterations},
        {"output_bounds", res.diag.output_bounds}};
    write_json_file(dir / "diagnostics.json", rep.extra["diagnostics"]);
    return rep;
}

inline Report run_scale(const RunConfig& cfg, const std::filesystem::path& dir) {
    const auto sol = make_solution(cfg.family, cfg.params);
    const GridDomain chart = chart_from(cfg, *sol);
    const LightconeTriple in = sample_triple(*sol, chart);
    const LightconeTriple out = scale(in, {cfg.alpha, cfg.gamma});

    Report rep{"scale", sol->params(), {}, {}};
    rep.params["family"] = cfg.family;
    rep.params["alpha"] = cfg.alpha;
    rep.params["gamma"] = cfg.gamma;
    const double h = std::max(out.domain.spacing(0), out.domain.spacing(1));
    add_residuals(rep, residual_lightcone(out), cfg.tol_factor * h * h);
    write_field(cfg, dir, "scaled_R", out.R);
    write_field(cfg, dir, "scaled_zeta", out.zeta);
    write_field(cfg, dir, "scaled_kappa", out.kappa);
    return rep;
}

inline Report run_verify(const RunConfig& cfg, const std::filesystem::path& dir) {
    const auto sol = make_solution(cfg.family, cfg.params);
    const GridDomain chart = chart_from(cfg, *sol);

    Report rep{"verify", sol->params(), {}, {}};
    rep.params["family"] = cfg.family;

    add_residuals(rep, residual_lightcone_analytic(*sol, chart), 1e-9, "analytic-");

    const LightconeTriple triple = sample_triple(*sol, chart);
    const double h = std::max(chart.spacing(0), chart.spacing(1));
    add_residuals(rep, residual_lightcone(triple), cfg.tol_factor * h * h, "sampled-");

    if (cfg.family == "epsilon_family") {
        const double eps = cfg.params.value("epsilon", 0.0);
        const auto ls =
            level_set_check(*sol, chart, LevelSet::eq26, {.epsilon = eps});
        add_check(rep, ls.equation, ls.max_norm, ls.l2_norm, 1e-10);
    } else if (cfg.family == "tau_sqrt_mu") {
        const double beta = cfg.params.value("beta", 1.0);
        const auto ls = level_set_check(*sol, chart, LevelSet::eq33, {.beta = beta});
        add_check(rep, ls.equation, ls.max_norm, ls.l2_norm, 1e-10);
    }

    std::cout << "equation                        max          l2    order  pass\n";
    for (const auto& c : rep.checks) {
        if (c.order)
            std::printf("%-28s %12.4e %12.4e %6.2f  %s\n", c.name.c_str(), c.max, c.l2,
                        *c.order, c.pass ? "yes" : "NO");
        else
            std::printf("%-28s %12.4e %12.4e      -  %s\n", c.name.c_str(), c.max, c.l2,
                        c.pass ? "yes" : "NO");
    }
    (void)dir;
    return rep;
}

inline Report run_convergence(const RunConfig& cfg, const std::filesystem::path& dir) {
    const auto sol = make_solution(cfg.family, cfg.params);
    Report rep{"convergence", sol->params(), {}, {}};
    rep.params["family"] = cfg.family;

    std::vector<ResidualReport> r5, r6;
    for (int level = 0; level < 3; ++level) {
        RunConfig c = cfg;
        c.counts = {((cfg.counts[0] - 1) << level) + 1, ((cfg.counts[1] - 1) << level) + 1};
        const GridDomain chart = chart_from(c, *sol);
        const auto reps = residual_lightcone(sample_triple(*sol, chart));
        for (const auto& r : reps) {
            if (r.equation == "R-wave") r5.push_back(r);
            if (r.equation == "zeta-wave") r6.push_back(r);
        }
    }
    const double o5 = convergence_order(r5);
    const double o6 = convergence_order(r6);
    // order checks gate from below: tol is the minimum acceptable order
    rep.checks.push_back({"R-wave-order", r5.back().max_norm, r5.back().l2_norm, o5,
                          1.8, o5 >= 1.8});
    rep.checks.push_back({"zeta-wave-order", r6.back().max_norm, r6.back().l2_norm, o6,
                          1.8, o6 >= 1.8});
    std::cout << "equation        finest-max   order\n";
    for (const auto& c : rep.checks)
        std::printf("%-14s %12.4e  %6.3f\n", c.name.c_str(), c.max, *c.order);
    (void)dir;
    return rep;
}

inline Report run_selfsim(const RunConfig& cfg, const std::filesystem::path& dir) {
    const auto profile = solve_profile(cfg.C, cfg.z_min, cfg.z_max, cfg.samples);
    Report rep{"selfsim", {{"C", cfg.C},
                           {"z_min", cfg.z_min},
                           {"z_max", cfg.z_max},
                           {"samples", cfg.samples}},
               {}, {}};

    std::ostringstream csv;
    csv << "z,g,f,xi\n";
    for (const auto& s : profile.samples)
        csv << format_double(s.z) << ',' << format_double(s.g) << ','
            << format_double(s.f) << ',' << format_double(s.xi) << '\n';
    write_text_file(dir / "profile.csv", csv.str());

    double worst_constraint = 0.0;
    for (const auto& s : profile.samples)
        worst_constraint =
            std::max(worst_constraint, std::abs(2.0 * std::pow(s.g, 3) +
                                                s.f * s.f * s.g * s.g - cfg.C));
    add_check(rep, "constraint", worst_constraint, worst_constraint, 1e-12);

    add_residuals(rep, residual_odes(profile), 1e-6);

    double worst_identity = 0.0, worst_root = 0.0;
    const std::size_t step = std::max<std::size_t>(1, profile.samples.size() / 50);
    for (std::size_t k = 0; k < profile.samples.size(); k += step) {
        const auto& s = profile.samples[k];
        const auto c = check47(s.z, cfg.C);
        const double scale = std::max(1.0, std::abs(c.target));
        worst_identity = std::max({worst_identity,
                                   std::abs(c.lhs_adopted - c.target) / scale,
                                   std::abs(c.rhs_adopted - c.target) / scale});
        const auto roots = poly48_roots(s.xi, cfg.C);
        double best = 1e300;
        for (double g : roots)
            best = std::min(best, std::abs(std::abs(g * g * g) - s.z));
        worst_root = std::max(worst_root, best / std::max(1.0, s.z));
    }
    add_check(rep, "branch-identity", worst_identity, worst_identity, 1e-9);
    add_check(rep, "similarity-roots", worst_root, worst_root, 1e-8);
    return rep;
}

inline Report run_export(const RunConfig& cfg, const std::filesystem::path& dir) {
    const auto sol = make_solution(cfg.family, cfg.params);
    const GridDomain chart = chart_from(cfg, *sol);
    const LightconeTriple in = sample_triple(*sol, chart);
    const auto phys = to_physical(in, {cfg.alpha, cfg.gamma});

    Report rep{"export", sol->params(), {}, {}};
    rep.params["family"] = cfg.family;
    rep.params["format"] = cfg.format;
    const double h =
        std::max(phys.pair.domain.spacing(0), phys.pair.domain.spacing(1));
    add_residuals(rep, residual_physical(phys.pair), 2.0 * cfg.tol_factor * h * h);

    if (cfg.format == "obj") {
        const auto slices = slices_from_pair(phys.pair, cfg.t_slices);
        std::ostringstream os;
        write_obj(os, slices, cfg.theta_samples);
        write_text_file(dir / "mesh.obj", os.str());
    } else {
        write_field(cfg, dir, "r", phys.pair.r);
        write_field(cfg, dir, "z", phys.pair.z);
        write_field(cfg, dir, "v", phys.pair.v);
    }
    return rep;
}

struct PipelineStep {
    bool is_transform = true;
    double alpha = 1.0, gamma = 1.0;
};

inline PipelineStep parse_step(const std::string& text) {
    if (text == "transform") return {true, 1.0, 1.0};
    if (text.rfind("scale:", 0) == 0) {
        const auto rest = text.substr(6);
        const auto colon = rest.find(':');
        if (colon == std::string::npos)
            throw EvalError("pipeline step needs scale:<alpha>:<gamma>");
        return {false, std::stod(rest.substr(0, colon)), std::stod(rest.substr(colon + 1))};
    }
    throw EvalError("unknown pipeline step: " + text);
}

inline Report run_pipeline(const RunConfig& cfg, const std::filesystem::path& dir) {
    const auto sol = make_solution(cfg.family, cfg.params);
    const GridDomain chart = chart_from(cfg, *sol);
    LightconeTriple current = sample_triple(*sol, chart);

    Report rep{"pipeline", sol->params(), {}, {}};
    rep.params["family"] = cfg.family;
    rep.params["steps"] = cfg.steps;

    nlohmann::json trail = nlohmann::json::array();
    for (const auto& text : cfg.steps) {
        const PipelineStep step = parse_step(text);
        if (step.is_transform) {
            const BianchiResult res = bianchi_transform(current);
            trail.push_back({{"step", "transform"},
                             {"min_abs_lag", res.diag.min_abs_lag},
                             {"bounds", res.diag.output_bounds}});
            current = res.out;
        } else {
            current = scale(current, {step.alpha, step.gamma});
            trail.push_back({{"step", "scale"},
                             {"alpha", step.alpha},
                             {"gamma", step.gamma}});
        }
    }
    rep.extra["trail"] = trail;

    // the error floor of the whole chain is set by the initial sampling
    const double h = std::max(chart.spacing(0), chart.spacing(1));
    const double tol = cfg.tol_factor * h * h;
    for (const auto& r : residual_lightcone(current))
        if (r.equation == "R-wave" || r.equation == "zeta-grad-tau" ||
            r.equation == "zeta-grad-mu")
            add_check(rep, "final-" + r.equation, r.max_norm, r.l2_norm,
                      8.0 * tol * r.scale);

    if (cfg.family == "tau_sqrt_mu" && !cfg.steps.empty()) {
        // certify the chain left the pure-scaling orbit of this family
        const auto fit = fit_tau_sqrt_mu_scaling(current);
        rep.extra["pure_scaling_fit"] = {{"beta", fit.beta},
                                         {"rms_residual", fit.rms_residual}};
        // gates from below: the fit residual must EXCEED tol to pass
        rep.checks.push_back({"non-scaling", fit.rms_residual, fit.rms_residual,
                              std::nullopt, 100.0 * tol, fit.rms_residual > 100.0 * tol});
    }

    write_field(cfg, dir, "final_R", current.R);
    write_field(cfg, dir, "final_zeta", current.zeta);
    write_field(cfg, dir, "final_kappa", current.kappa);
    return rep;
}

}  // namespace detail

/// Execute one run: dispatch, write report.json, map errors to distinct
/// exit codes with a one-line machine-parsable message on stderr.
/// Exit status is 0 exactly when every gating check passed.
inline int run(const RunConfig& cfg) {
    namespace fs = std::filesystem;
    auto fail = [](int code, const std::string& kind, const std::string& msg) {
        std::cerr << "error code=" << code << " kind=" << kind << " msg=\"" << msg
                  << "\"\n";
        return code;
    };
    try {
        const fs::path dir(cfg.out_dir);
        fs::create_directories(dir);

        Report rep;
        if (cfg.command == "catalog") rep = detail::run_catalog(cfg, dir);
        else if (cfg.command == "eval") rep = detail::run_eval(cfg, dir);
        else if (cfg.command == "transform") rep = detail::run_transform(cfg, dir);
        else if (cfg.command == "scale") rep = detail::run_scale(cfg, dir);
        else if (cfg.command == "verify") rep = detail::run_verify(cfg, dir);
        else if (cfg.command == "convergence") rep = detail::run_convergence(cfg, dir);
        else if (cfg.command == "selfsim") rep = detail::run_selfsim(cfg, dir);
        else if (cfg.command == "export") rep = detail::run_export(cfg, dir);
        else if (cfg.command == "pipeline") rep = detail::run_pipeline(cfg, dir);
        else throw EvalError("unknown command: " + cfg.command);

        detail::write_json_file(dir / "report.json", detail::to_json(rep));
        return rep.all_pass() ? 0 : 1;
    } catch (const EvalError& e) {
        return fail(2, "eval", e.what());
    } catch (const GridError& e) {
        return fail(3, "chart", e.what());
    } catch (const SingularError& e) {
        return fail(4, "singular", e.what());
    } catch (const NewtonError& e) {
        return fail(5, "newton", e.what());
    } catch (const IoError& e) {
        return fail(6, "io", e.what());
    } catch (const CompatibilityError& e) {
        return fail(7, "compatibility", e.what());
    } catch (const std::exception& e) {
        return fail(10, "internal", e.what());
    }
}

}  // namespace minksurf::cli
