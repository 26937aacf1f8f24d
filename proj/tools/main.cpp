#include "ciid/cli.hpp"

#include <CLI11.hpp>

#include <cstdlib>
#include <iostream>

using namespace ciid;

namespace {

std::string default_out_dir() {
    if (const char* env = std::getenv("CIID_OUT_DIR")) return env;
    return "ciid-out";
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Group-conditional modelling toolkit: mixture mean-estimator "
                 "verification and per-group classification experiments"};
    app.require_subcommand(1);

    GmmVerifyOptions gmm;
    auto* gmm_cmd = app.add_subcommand(
        "gmm-verify", "Check the analytic mean-estimator bias/variance table by Monte Carlo");
    gmm_cmd->add_option("--mu-priv", gmm.params.mu_priv, "Privileged component mean");
    gmm_cmd->add_option("--mu-dis", gmm.params.mu_dis, "Disadvantaged component mean");
    gmm_cmd->add_option("--sigma2-priv", gmm.params.sigma2_priv, "Privileged component variance");
    gmm_cmd->add_option("--sigma2-dis", gmm.params.sigma2_dis, "Disadvantaged component variance");
    gmm_cmd->add_option("--n-priv", gmm.params.n_priv, "Privileged sample count per draw");
    gmm_cmd->add_option("--n-dis", gmm.params.n_dis, "Disadvantaged sample count per draw");
    gmm_cmd->add_option("--replicates", gmm.mc.replicates, "Monte Carlo replicates (>= 2)");
    gmm_cmd->add_option("--seed", gmm.mc.seed, "Monte Carlo seed");
    gmm_cmd->add_option("--abs-tol", gmm.abs_tol, "Absolute tolerance per cell");
    gmm_cmd->add_option("--se-mult", gmm.se_mult, "Standard-error multiple per cell");
    gmm_cmd->add_option("--out", gmm.out_path, "Write the CSV report here instead of stdout");

    RunOptions run;
    run.out_dir = default_out_dir();
    auto* run_cmd =
        app.add_subcommand("run", "Run a classification experiment from a JSON config");
    run_cmd->add_option("config", run.config_path, "Experiment config file")->required();
    run_cmd->add_option("--out", run.out_dir,
                        "Output directory (default: $CIID_OUT_DIR or ./ciid-out)");

    std::string compose_dataset, compose_schema;
    auto* compose_cmd =
        app.add_subcommand("compose", "Print demographic composition of a dataset");
    compose_cmd->add_option("dataset", compose_dataset, "CSV file")->required();
    compose_cmd->add_option("schema", compose_schema, "Schema JSON file")->required();

    SynthOptions synth;
    auto* synth_cmd =
        app.add_subcommand("synth", "Emit a synthetic group-conditional dataset as CSV");
    synth_cmd->add_option("--n-priv", synth.params.n_priv, "Privileged rows");
    synth_cmd->add_option("--n-dis", synth.params.n_dis, "Disadvantaged rows");
    synth_cmd->add_option("--dims", synth.params.dims, "Feature dimensions");
    synth_cmd->add_option("--shift", synth.params.boundary_shift,
                          "Boundary rotation between the groups (0 = identical)");
    synth_cmd->add_option("--sigma-priv", synth.params.sigma_priv, "Privileged noise sigma");
    synth_cmd->add_option("--sigma-dis", synth.params.sigma_dis, "Disadvantaged noise sigma");
    synth_cmd->add_option("--seed", synth.params.seed, "Generator seed");
    synth_cmd->add_option("--out", synth.out_path, "Write the CSV here instead of stdout");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitConfig;
    }

    if (gmm_cmd->parsed()) return cmd_gmm_verify(gmm, std::cout, std::cerr);
    if (run_cmd->parsed()) return cmd_run(run, std::cout, std::cerr);
    if (compose_cmd->parsed()) return cmd_compose(compose_dataset, compose_schema, std::cout, std::cerr);
    if (synth_cmd->parsed()) return cmd_synth(synth, std::cout, std::cerr);
    return kExitConfig;
}
