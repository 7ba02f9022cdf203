#pragma once

#include <json.hpp>
#include <string>

#include "pervasive/experiments.hpp"
#include "pervasive/model.hpp"
#include "pervasive/simulate.hpp"

// Config parsing: human-editable JSON, every missing or ill-typed field
// reported by name, parse errors reported with line and column.
namespace pervasive::config {

using nlohmann::json;

json load_json_file(const std::string& path);

// Field access that names the offending key on error.
const json& require_field(const json& j, const std::string& key);

template <typename T>
T require(const json& j, const std::string& key) {
    try {
        return require_field(j, key).get<T>();
    } catch (const json::exception&) {
        throw std::invalid_argument("config field '" + key + "' has the wrong type");
    }
}

template <typename T>
T get_or(const json& j, const std::string& key, T fallback) {
    if (!j.contains(key)) return fallback;
    try {
        return j.at(key).get<T>();
    } catch (const json::exception&) {
        throw std::invalid_argument("config field '" + key + "' has the wrong type");
    }
}

simulate::ScoreDistribution parse_scores(const json& j);

model::SpikeSpec parse_spike_spec(const json& model);
model::BlockSpec parse_block_spec(const json& model);

// JSON echoes for manifests and dataset metadata.
json describe(const model::SpikeSpec& spec);
json describe(const model::BlockSpec& spec);
json describe(const simulate::ScoreDistribution& dist);

experiments::NoiseSweepConfig parse_noise_sweep(const json& cfg, std::uint64_t seed,
                                                int threads);
experiments::Sigma3SweepConfig parse_sigma3_sweep(const json& cfg, std::uint64_t seed,
                                                  int threads);

}  // namespace pervasive::config
