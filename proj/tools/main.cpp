#include <CLI11.hpp>
#include <exception>
#include <iostream>
#include <optional>

#include "pervasive/commands.hpp"
#include "pervasive/version.hpp"

// Exit codes: 0 success, 1 check failure, 2 usage/config error.
int main(int argc, char** argv) {
    CLI::App app{"Spiked-covariance simulation, score-limit verification and "
                 "score-plot diagnostics"};
    app.set_version_flag("--version", pervasive::kVersion);
    app.require_subcommand(1);

    pervasive::commands::CommonOptions common;
    std::optional<std::uint64_t> seed;
    int threads = 1;

    auto add_common = [&](CLI::App* cmd, bool config_required) {
        cmd->add_option("--config", common.config_path, "JSON config file")
            ->required(config_required);
        cmd->add_option("--out", common.out_dir, "output directory")
            ->default_val(".");
        cmd->add_option("--seed", seed, "master seed (overrides the config)");
        cmd->add_option("--threads", threads, "worker threads for replicates")
            ->default_val(1)
            ->check(CLI::PositiveNumber);
    };

    CLI::App* sim = app.add_subcommand("simulate", "generate a dataset from a model config");
    add_common(sim, true);
    CLI::App* verify = app.add_subcommand(
        "verify", "run convergence / LLN / chi-squared checks against tolerances");
    add_common(verify, true);
    CLI::App* noise = app.add_subcommand(
        "noise", "Monte Carlo sweeps of the pairwise score-noise SD (figure data)");
    add_common(noise, true);

    pervasive::commands::DiagnoseOptions diag;
    CLI::App* diagnose = app.add_subcommand(
        "diagnose", "signal strengths, required sample sizes and score-pair transforms");
    diagnose->add_option("--config", diag.config_path, "JSON config file");
    diagnose->add_option("--matrix", diag.matrix_csv, "data matrix CSV");
    diagnose->add_option("--scree", diag.scree_csv, "eigenvalue list CSV");
    diagnose->add_option("--population-scores", diag.population_scores_csv,
                         "population score CSV (components in rows)");
    diagnose->add_option("--orientation", diag.orientation,
                         "matrix orientation: vars-rows | obs-rows")
        ->default_val("vars-rows")
        ->check(CLI::IsMember({"vars-rows", "obs-rows"}));
    diagnose->add_option("--centered", diag.centered,
                         "center the data matrix before PCA (true|false)")
        ->default_val(true);
    int diag_m = -1;
    diagnose->add_option("--m", diag_m, "spike count (omit for the scree heuristic)");
    int diag_p = -1;
    diagnose->add_option("--p", diag_p, "number of variables (needed with --scree)");
    std::vector<int> pair{1, 2};
    diagnose->add_option("--pair", pair, "component pair, e.g. --pair 1 2")
        ->expected(2);
    diagnose->add_option("--target-sd", diag.target_sd,
                         "noise SD target for the required sample size")
        ->default_val(0.15);
    diagnose->add_option("--out", diag.out_dir, "output directory")->default_val(".");
    diagnose->add_option("--threads", diag.threads, "worker threads")->default_val(1);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    common.seed = seed;
    common.threads = threads;

    try {
        if (sim->parsed()) return pervasive::commands::cmd_simulate(common);
        if (verify->parsed()) return pervasive::commands::cmd_verify(common);
        if (noise->parsed()) return pervasive::commands::cmd_noise(common);
        if (diagnose->parsed()) {
            if (diag_m >= 0) diag.m = diag_m;
            if (diag_p >= 0) diag.p = diag_p;
            diag.pair_j = pair[0];
            diag.pair_k = pair[1];
            return pervasive::commands::cmd_diagnose(diag);
        }
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 2;
}
