#include <CLI11.hpp>

#include "minksurf/cli.hpp"

using minksurf::cli::RunConfig;

namespace {

// flags shared by every chart-based subcommand
void add_common(CLI::App* cmd, RunConfig& cfg, bool with_family = true) {
    if (with_family)
        cmd->add_option("--family", cfg.family,
                        "catalog family (hyperboloid|epsilon_family|tau_sqrt_mu|elliptic)");
    cmd->add_option("--bounds", cfg.bounds, "chart bounds: lo1 hi1 lo2 hi2");
    cmd->add_option("--counts", cfg.counts, "grid points per axis");
    cmd->add_option("--out", cfg.out_dir, "output directory (default .)");
    cmd->add_option("--tol-factor", cfg.tol_factor,
                    "residual gates scale as tol-factor * h^2");
}

void add_family_params(CLI::App* cmd, RunConfig& cfg) {
    static double eps, beta, eta, alpha, gamma;
    auto* oe = cmd->add_option("--eps,--epsilon", eps, "epsilon_family parameter");
    auto* ob = cmd->add_option("--beta", beta, "tau_sqrt_mu parameter");
    auto* on = cmd->add_option("--eta", eta, "boost constant (default 1)");
    auto* oa = cmd->add_option("--scale-alpha", alpha, "pre-scaling alpha");
    auto* og = cmd->add_option("--scale-gamma", gamma, "pre-scaling gamma");
    cmd->callback([&cfg, oe, ob, on, oa, og]() {
        if (*oe) cfg.params["epsilon"] = eps;
        if (*ob) cfg.params["beta"] = beta;
        if (*on) cfg.params["eta"] = eta;
        if (*oa) cfg.params["alpha"] = alpha;
        if (*og) cfg.params["gamma"] = gamma;
    });
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"generate and verify axially symmetric minimal hypersurfaces"};
    app.require_subcommand(1);

    RunConfig cfg;

    auto* catalog = app.add_subcommand("catalog", "list solution families");
    catalog->add_option("--out", cfg.out_dir, "output directory");

    auto* eval = app.add_subcommand("eval", "evaluate a family at one point");
    add_common(eval, cfg);
    add_family_params(eval, cfg);
    eval->add_option("--tau", cfg.tau, "first coordinate");
    eval->add_option("--mu", cfg.mu, "second coordinate");

    auto* transform = app.add_subcommand("transform", "apply the involutive transform");
    add_common(transform, cfg);
    add_family_params(transform, cfg);
    transform->add_option("--check", cfg.check, "extra check: eq37 | closure");

    auto* scale_cmd = app.add_subcommand("scale", "apply the scaling symmetry");
    add_common(scale_cmd, cfg);
    add_family_params(scale_cmd, cfg);
    scale_cmd->add_option("--alpha", cfg.alpha, "scaling alpha")->required();
    scale_cmd->add_option("--gamma", cfg.gamma, "scaling gamma")->required();

    auto* verify = app.add_subcommand("verify", "run the residual suite for a family");
    add_common(verify, cfg);
    add_family_params(verify, cfg);

    auto* convergence =
        app.add_subcommand("convergence", "wave-residual order under refinement");
    add_common(convergence, cfg);
    add_family_params(convergence, cfg);

    auto* selfsim = app.add_subcommand("selfsim", "self-similar branch and its checks");
    selfsim->add_option("--C", cfg.C, "branch constant (negative)");
    selfsim->add_option("--z-min", cfg.z_min, "lower end of the z range");
    selfsim->add_option("--z-max", cfg.z_max, "upper end of the z range");
    selfsim->add_option("--samples", cfg.samples, "number of samples");
    selfsim->add_option("--out", cfg.out_dir, "output directory");

    auto* exp = app.add_subcommand("export", "embedding mesh / physical fields");
    add_common(exp, cfg);
    add_family_params(exp, cfg);
    exp->add_option("--format", cfg.format, "json | csv | obj");
    exp->add_option("--alpha", cfg.alpha, "scaling alpha before export");
    exp->add_option("--gamma", cfg.gamma, "scaling gamma before export");
    exp->add_option("--theta-samples", cfg.theta_samples, "angular samples per ring");
    exp->add_option("--t-slices", cfg.t_slices, "number of fixed-t slices");

    auto* pipeline = app.add_subcommand("pipeline", "chain transform and scale steps");
    add_common(pipeline, cfg);
    add_family_params(pipeline, cfg);
    pipeline->add_option("--steps", cfg.steps,
                         "ordered steps: transform | scale:<alpha>:<gamma>");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    }

    for (auto* sub : {catalog, eval, transform, scale_cmd, verify, convergence, selfsim,
                      exp, pipeline}) {
        if (sub->parsed()) {
            cfg.command = sub->get_name();
            break;
        }
    }
    return minksurf::cli::run(cfg);
}
