#pragma once

#include <json.hpp>
#include <cstdint>
#include <string>
#include <vector>

// Every command drops a manifest.json next to its outputs: subcommand,
// config (echoed in full), seed, tool version and timestamp. Everything
// except the timestamp is deterministic, and config + seed + version pin the
// outputs bit for bit.
namespace pervasive::manifest {

struct RunManifest {
    std::string subcommand;
    std::string config_path;  // empty when options came from flags only
    nlohmann::json config;    // full echo of the effective configuration
    std::uint64_t seed = 0;
    std::string out_dir;
    int threads = 1;
    std::vector<std::string> outputs;  // files written, relative to out_dir
};

void write_manifest(const RunManifest& m);

}  // namespace pervasive::manifest
