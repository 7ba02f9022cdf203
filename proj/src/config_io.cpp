#include "pervasive/config_io.hpp"

#include <fstream>
#include <stdexcept>

namespace pervasive::config {

json load_json_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::invalid_argument("cannot open config '" + path + "'");
    std::string text((std::istreambuf_iterator<char>(in)),
                     std::istreambuf_iterator<char>());
    try {
        return json::parse(text);
    } catch (const json::parse_error& err) {
        // err.byte is a 1-based offset into the text; convert to line/column.
        std::size_t line = 1, col = 1;
        const std::size_t limit = std::min<std::size_t>(err.byte, text.size());
        for (std::size_t i = 0; i + 1 < limit; ++i) {
            if (text[i] == '\n') {
                ++line;
                col = 1;
            } else {
                ++col;
            }
        }
        throw std::invalid_argument("config '" + path + "': parse error at line " +
                                    std::to_string(line) + ", column " +
                                    std::to_string(col) + ": " + err.what());
    }
}

const json& require_field(const json& j, const std::string& key) {
    if (!j.is_object() || !j.contains(key))
        throw std::invalid_argument("missing required config field '" + key + "'");
    return j.at(key);
}

simulate::ScoreDistribution parse_scores(const json& j) {
    const std::string kind = require<std::string>(j, "kind");
    if (kind == "standard-normal") return simulate::ScoreDistribution::standard_normal();
    if (kind == "student-t")
        return simulate::ScoreDistribution::student_t(require<int>(j, "df"));
    throw std::invalid_argument("scores.kind must be 'standard-normal' or 'student-t'");
}

model::SpikeSpec parse_spike_spec(const json& model_json) {
    const auto sigma2 = require<std::vector<double>>(model_json, "sigma2");
    const double tau2 = require<double>(model_json, "tau2");
    const int p = require<int>(model_json, "p");
    const int n = require<int>(model_json, "n");
    model::TailProfile tail = model::TailProfile::Flat;
    const std::string tail_name = get_or<std::string>(model_json, "tail", "flat");
    if (tail_name == "linear-decay")
        tail = model::TailProfile::LinearDecay;
    else if (tail_name != "flat")
        throw std::invalid_argument("model.tail must be 'flat' or 'linear-decay'");
    model::SpikeVectors vectors = model::SpikeVectors::DisjointBlocks;
    const std::string vec_name =
        get_or<std::string>(model_json, "vectors", "disjoint-blocks");
    if (vec_name == "random-orthonormal")
        vectors = model::SpikeVectors::RandomOrthonormal;
    else if (vec_name != "disjoint-blocks")
        throw std::invalid_argument(
            "model.vectors must be 'disjoint-blocks' or 'random-orthonormal'");
    const auto vector_seed = get_or<std::uint64_t>(model_json, "vector_seed", 0);
    return model::SpikeSpec(sigma2, tau2, p, n, tail, vectors, vector_seed);
}

model::BlockSpec parse_block_spec(const json& model_json) {
    const double sigma2 = require<double>(model_json, "sigma2");
    const int p = require<int>(model_json, "p");
    const json& blocks_json = require_field(model_json, "blocks");
    if (!blocks_json.is_array() || blocks_json.empty())
        throw std::invalid_argument("model.blocks must be a non-empty array");
    std::vector<model::Block> blocks;
    for (const json& b : blocks_json)
        blocks.push_back({require<double>(b, "fraction"), require<double>(b, "rho")});
    return model::BlockSpec(sigma2, std::move(blocks), p);
}

json describe(const model::SpikeSpec& spec) {
    json j;
    j["type"] = "spike";
    j["sigma2"] = spec.sigma2;
    j["tau2"] = spec.tau2;
    j["p"] = spec.p;
    j["n"] = spec.n;
    j["tail"] = spec.tail == model::TailProfile::Flat ? "flat" : "linear-decay";
    j["vectors"] = spec.vectors == model::SpikeVectors::DisjointBlocks
                       ? "disjoint-blocks"
                       : "random-orthonormal";
    if (spec.vectors == model::SpikeVectors::RandomOrthonormal)
        j["vector_seed"] = spec.vector_seed;
    return j;
}

json describe(const model::BlockSpec& spec) {
    json j;
    j["type"] = "block";
    j["sigma2"] = spec.sigma2;
    j["p"] = spec.p;
    j["blocks"] = json::array();
    for (const model::Block& b : spec.blocks)
        j["blocks"].push_back({{"fraction", b.fraction}, {"rho", b.rho}});
    return j;
}

json describe(const simulate::ScoreDistribution& dist) {
    json j;
    j["kind"] = dist.kind == simulate::ScoreKind::StandardNormal ? "standard-normal"
                                                                 : "student-t";
    if (dist.kind == simulate::ScoreKind::StudentT) j["df"] = dist.df;
    return j;
}

experiments::NoiseSweepConfig parse_noise_sweep(const json& cfg, std::uint64_t seed,
                                                int threads) {
    experiments::NoiseSweepConfig out;
    out.sigma2 = require<std::vector<double>>(cfg, "sigma2");
    const auto pair = get_or<std::vector<int>>(cfg, "pair", {1, 2});
    if (pair.size() != 2) throw std::invalid_argument("config field 'pair' must have two entries");
    out.j = pair[0];
    out.k = pair[1];
    out.n_grid = require<std::vector<int>>(cfg, "n_grid");
    out.sigma3_values = get_or<std::vector<double>>(cfg, "sigma3_values", {});
    out.replicates = require<int>(cfg, "replicates");
    out.fixed_scores = get_or<bool>(cfg, "fixed_scores", true);
    out.seed = seed;
    out.threads = threads;
    return out;
}

experiments::Sigma3SweepConfig parse_sigma3_sweep(const json& cfg, std::uint64_t seed,
                                                  int threads) {
    experiments::Sigma3SweepConfig out;
    out.sigma2 = require<std::vector<double>>(cfg, "sigma2");
    const auto pair = get_or<std::vector<int>>(cfg, "pair", {1, 2});
    if (pair.size() != 2) throw std::invalid_argument("config field 'pair' must have two entries");
    out.j = pair[0];
    out.k = pair[1];
    out.n = require<int>(cfg, "n");
    out.sigma3_grid = require<std::vector<double>>(cfg, "sigma3_grid");
    out.sigma2_2_values = get_or<std::vector<double>>(cfg, "sigma2_2_values", {});
    out.replicates = require<int>(cfg, "replicates");
    out.fixed_scores = get_or<bool>(cfg, "fixed_scores", true);
    out.seed = seed;
    out.threads = threads;
    return out;
}

}  // namespace pervasive::config
