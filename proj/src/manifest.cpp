#include "pervasive/manifest.hpp"

#include <chrono>
#include <ctime>
#include <filesystem>
#include <fstream>

#include "pervasive/version.hpp"

namespace pervasive::manifest {

namespace {

std::string utc_timestamp() {
    const auto now = std::chrono::system_clock::now();
    const std::time_t t = std::chrono::system_clock::to_time_t(now);
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

}  // namespace

void write_manifest(const RunManifest& m) {
    nlohmann::json j;
    j["tool"] = kToolName;
    j["version"] = kVersion;
    j["subcommand"] = m.subcommand;
    if (!m.config_path.empty()) j["config_path"] = m.config_path;
    j["config"] = m.config;
    j["seed"] = m.seed;
    j["out_dir"] = m.out_dir;
    j["threads"] = m.threads;
    j["outputs"] = m.outputs;
    j["timestamp_utc"] = utc_timestamp();

    const std::filesystem::path path = std::filesystem::path(m.out_dir) / "manifest.json";
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write manifest to '" + path.string() + "'");
    out << j.dump(2) << '\n';
}

}  // namespace pervasive::manifest
