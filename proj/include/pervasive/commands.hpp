#pragma once

#include <cstdint>
#include <optional>
#include <string>

// Subcommand implementations behind the CLI front end. Each returns the
// process exit code: 0 on success, 1 when a configured check fails.
// Usage and configuration problems are thrown and mapped to exit code 2 by
// the caller.
namespace pervasive::commands {

struct CommonOptions {
    std::string config_path;
    std::string out_dir = ".";
    std::optional<std::uint64_t> seed;  // overrides the config seed
    int threads = 1;
};

int cmd_simulate(const CommonOptions& opts);
int cmd_verify(const CommonOptions& opts);
int cmd_noise(const CommonOptions& opts);

struct DiagnoseOptions {
    std::string config_path;            // optional
    std::string matrix_csv;             // data matrix input
    std::string scree_csv;              // one-column eigenvalue input
    std::string population_scores_csv;  // component-rows score matrix
    std::string orientation = "vars-rows";  // or "obs-rows"
    bool centered = true;
    std::optional<int> m;
    std::optional<int> p;  // required with scree input
    int pair_j = 1, pair_k = 2;
    double target_sd = 0.15;
    std::string out_dir = ".";
    int threads = 1;
};

int cmd_diagnose(const DiagnoseOptions& opts);

}  // namespace pervasive::commands
