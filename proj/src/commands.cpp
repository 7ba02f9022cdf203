#include "pervasive/commands.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numbers>

#include "pervasive/config_io.hpp"
#include "pervasive/csv.hpp"
#include "pervasive/diagnose.hpp"
#include "pervasive/experiments.hpp"
#include "pervasive/limit.hpp"
#include "pervasive/manifest.hpp"
#include "pervasive/pca.hpp"
#include "pervasive/rng.hpp"
#include "pervasive/simulate.hpp"

namespace pervasive::commands {

namespace fs = std::filesystem;
using config::json;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

void ensure_out_dir(const std::string& out_dir) {
    std::error_code ec;
    fs::create_directories(out_dir, ec);
    if (ec || !fs::is_directory(out_dir))
        throw std::invalid_argument("cannot create output directory '" + out_dir + "'");
}

std::string out_path(const std::string& out_dir, const std::string& name) {
    return (fs::path(out_dir) / name).string();
}

std::uint64_t effective_seed(const json& cfg, const std::optional<std::uint64_t>& cli) {
    if (cli.has_value()) return *cli;
    return config::get_or<std::uint64_t>(cfg, "seed", 0);
}

std::string fmt(double v) { return csv::format_double(v); }

// Accumulates named pass/fail checks for the verify report.
struct CheckSet {
    std::vector<std::vector<std::string>> rows;  // study, statistic, value, constraint, pass
    bool all_passed = true;

    void add(const std::string& study, const std::string& statistic, double value,
             const std::string& constraint, bool pass) {
        rows.push_back({study, statistic, fmt(value), constraint, pass ? "true" : "false"});
        std::cout << (pass ? "[PASS] " : "[FAIL] ") << study << ": " << statistic << " = "
                  << fmt(value) << " (" << constraint << ")\n";
        if (!pass) {
            all_passed = false;
            std::cerr << "check failed: " << study << "/" << statistic << " = "
                      << fmt(value) << " violates " << constraint << "\n";
        }
    }
};

}  // namespace

int cmd_simulate(const CommonOptions& opts) {
    const json cfg = config::load_json_file(opts.config_path);
    const json& model_json = config::require_field(cfg, "model");
    const simulate::ScoreDistribution dist =
        config::parse_scores(config::require_field(cfg, "scores"));
    const std::uint64_t seed = effective_seed(cfg, opts.seed);
    const std::string type = config::require<std::string>(model_json, "type");

    simulate::Dataset ds;
    json model_echo;
    if (type == "spike") {
        const model::SpikeSpec spec = config::parse_spike_spec(model_json);
        ds = simulate::generate_dataset(spec, dist, seed);
        model_echo = config::describe(spec);
    } else if (type == "block") {
        const model::BlockSpec spec = config::parse_block_spec(model_json);
        const int n = config::get_or<int>(model_json, "n", config::get_or<int>(cfg, "n", 0));
        if (n < 1)
            throw std::invalid_argument("missing required config field 'n' for block models");
        ds = simulate::generate_dataset(spec, n, dist, seed);
        model_echo = config::describe(spec);
        model_echo["n"] = n;
    } else {
        throw std::invalid_argument("model.type must be 'spike' or 'block'");
    }

    ensure_out_dir(opts.out_dir);
    csv::write_matrix(out_path(opts.out_dir, "X.csv"), ds.X, "obs_");
    csv::write_matrix(out_path(opts.out_dir, "scores.csv"), ds.Z, "obs_");

    manifest::RunManifest mf;
    mf.subcommand = "simulate";
    mf.config_path = opts.config_path;
    mf.config = {{"model", model_echo},
                 {"scores", config::describe(dist)},
                 {"seed", seed},
                 {"layout",
                  {{"X.csv", "variables-in-rows"}, {"scores.csv", "components-in-rows"}}}};
    mf.seed = seed;
    mf.out_dir = opts.out_dir;
    mf.threads = opts.threads;
    mf.outputs = {"X.csv", "scores.csv"};
    manifest::write_manifest(mf);

    std::cout << "simulate: wrote " << ds.p() << "x" << ds.n() << " dataset to "
              << opts.out_dir << "\n";
    return 0;
}

namespace {

void run_convergence_study(const json& cfg, std::uint64_t seed,
                           const std::string& out_dir, CheckSet& checks,
                           std::vector<std::string>& outputs) {
    experiments::ConvergenceConfig cc;
    cc.sigma2 = config::require<std::vector<double>>(cfg, "sigma2");
    cc.tau2 = config::require<double>(cfg, "tau2");
    cc.n = config::require<int>(cfg, "n");
    cc.p_grid = config::require<std::vector<int>>(cfg, "p_grid");
    cc.replicates = config::get_or<int>(cfg, "replicates", 1);
    cc.seed = rng::substream(seed, 0x434f4e56ULL);  // "CONV"
    if (cfg.contains("scores")) cc.dist = config::parse_scores(cfg.at("scores"));

    const auto points = experiments::convergence_study(cc);

    std::vector<std::vector<std::string>> rows;
    for (const auto& pt : points) {
        const auto base = [&](const std::string& stat, double value) {
            rows.push_back({std::to_string(pt.p), std::to_string(pt.replicate), stat,
                            fmt(value)});
        };
        base("score_rmse", pt.score_rmse);
        for (int j = 0; j < pt.eig_rel_err.size(); ++j)
            base("eig_rel_err_" + std::to_string(j + 1), pt.eig_rel_err[j]);
        base("tail_eig_median", pt.tail_eig_median);
        base("tail_eig_predicted", pt.tail_eig_predicted);
    }
    csv::write_table(out_path(out_dir, "convergence.csv"),
                     {"p", "replicate", "statistic", "value"}, rows);
    outputs.push_back("convergence.csv");

    // Mean across replicates per grid point, grid order preserved.
    std::vector<double> rmse(cc.p_grid.size(), 0.0);
    std::vector<VectorXd> eig_err(cc.p_grid.size());
    std::vector<double> tail_median(cc.p_grid.size(), 0.0);
    for (const auto& pt : points) {
        const auto gi = std::distance(
            cc.p_grid.begin(), std::find(cc.p_grid.begin(), cc.p_grid.end(), pt.p));
        rmse[gi] += pt.score_rmse / cc.replicates;
        tail_median[gi] += pt.tail_eig_median / cc.replicates;
        if (eig_err[gi].size() == 0) eig_err[gi] = VectorXd::Zero(pt.eig_rel_err.size());
        eig_err[gi] += pt.eig_rel_err / cc.replicates;
    }

    const double max_rmse = config::get_or<double>(cfg, "max_final_rmse", 0.05);
    const double max_eig = config::get_or<double>(cfg, "max_final_eig_rel_err", 0.05);
    const double max_tail = config::get_or<double>(cfg, "max_tail_median_rel_err", 0.10);
    const bool require_decreasing = config::get_or<bool>(cfg, "require_decreasing_rmse", true);

    checks.add("convergence", "final_score_rmse", rmse.back(),
               "< " + fmt(max_rmse) + " at p=" + std::to_string(cc.p_grid.back()),
               rmse.back() < max_rmse);
    if (require_decreasing && rmse.size() > 1) {
        bool decreasing = true;
        for (std::size_t i = 0; i + 1 < rmse.size(); ++i)
            decreasing = decreasing && rmse[i + 1] < rmse[i];
        checks.add("convergence", "rmse_decreasing_in_p", decreasing ? 1.0 : 0.0,
                   "strictly decreasing across the p grid", decreasing);
    }
    for (int j = 0; j < eig_err.back().size(); ++j)
        checks.add("convergence", "final_eig_rel_err_" + std::to_string(j + 1),
                   eig_err.back()[j], "< " + fmt(max_eig), eig_err.back()[j] < max_eig);
    const double tail_pred = cc.tau2 / cc.n;
    if (tail_pred > 0.0) {
        const double rel = std::abs(tail_median.back() - tail_pred) / tail_pred;
        checks.add("convergence", "tail_eig_median_rel_err", rel, "< " + fmt(max_tail),
                   rel < max_tail);
    }
}

void run_lln_study(const json& cfg, std::uint64_t seed, const std::string& out_dir,
                   CheckSet& checks, std::vector<std::string>& outputs) {
    experiments::LlnConfig lc;
    lc.tau2 = config::require<double>(cfg, "tau2");
    lc.m = config::get_or<int>(cfg, "m", 2);
    lc.n = config::require<int>(cfg, "n");
    lc.p_grid = config::require<std::vector<int>>(cfg, "p_grid");
    lc.replicates = config::get_or<int>(cfg, "replicates", 50);
    lc.seed = rng::substream(seed, 0x4c4c4eULL);  // "LLN"

    const auto points = experiments::lln_check(lc);

    std::vector<std::vector<std::string>> rows;
    for (const auto& pt : points) {
        rows.push_back({std::to_string(pt.p), "median_dev", fmt(pt.median_dev)});
        rows.push_back({std::to_string(pt.p), "mean_dev", fmt(pt.mean_dev)});
        rows.push_back({std::to_string(pt.p), "q95_dev", fmt(pt.q95_dev)});
    }
    csv::write_table(out_path(out_dir, "lln.csv"), {"p", "statistic", "value"}, rows);
    outputs.push_back("lln.csv");

    const double max_dev = config::get_or<double>(cfg, "max_final_median_dev", 0.1);
    checks.add("lln", "final_median_dev", points.back().median_dev,
               "< " + fmt(max_dev) + " at p=" + std::to_string(points.back().p),
               points.back().median_dev < max_dev);
    bool decreasing = true;
    for (std::size_t i = 0; i + 1 < points.size(); ++i)
        decreasing = decreasing && points[i + 1].median_dev < points[i].median_dev;
    checks.add("lln", "median_dev_decreasing_in_p", decreasing ? 1.0 : 0.0,
               "strictly decreasing across the p grid", decreasing);
}

void run_chisq_study(const json& cfg, std::uint64_t seed, const std::string& out_dir,
                     CheckSet& checks, std::vector<std::string>& outputs) {
    const double sigma1_2 = config::get_or<double>(cfg, "sigma1_2", 1.0);
    const int n = config::require<int>(cfg, "n");
    const int replicates = config::require<int>(cfg, "replicates");
    const auto report = experiments::chi_square_check(
        sigma1_2, n, replicates, rng::substream(seed, 0x434853ULL));  // "CHS"

    csv::write_table(out_path(out_dir, "chisq.csv"), {"statistic", "value"},
                     {{"mean", fmt(report.mean)},
                      {"variance", fmt(report.variance)},
                      {"ks", fmt(report.ks)},
                      {"ks_critical_5pct", fmt(report.ks_critical_5pct)}});
    outputs.push_back("chisq.csv");

    const auto mean_band = config::get_or<std::vector<double>>(
        cfg, "mean_band", {n - 0.02 * n, n + 0.02 * n});
    const auto var_band = config::get_or<std::vector<double>>(
        cfg, "variance_band", {2.0 * n * 0.95, 2.0 * n * 1.05});
    if (mean_band.size() != 2 || var_band.size() != 2)
        throw std::invalid_argument("chisq bands must have two entries");
    checks.add("chisq", "mean", report.mean,
               "in [" + fmt(mean_band[0]) + ", " + fmt(mean_band[1]) + "]",
               report.mean >= mean_band[0] && report.mean <= mean_band[1]);
    checks.add("chisq", "variance", report.variance,
               "in [" + fmt(var_band[0]) + ", " + fmt(var_band[1]) + "]",
               report.variance >= var_band[0] && report.variance <= var_band[1]);
}

}  // namespace

int cmd_verify(const CommonOptions& opts) {
    const json cfg = config::load_json_file(opts.config_path);
    const std::uint64_t seed = effective_seed(cfg, opts.seed);
    if (!cfg.contains("convergence") && !cfg.contains("lln") && !cfg.contains("chisq"))
        throw std::invalid_argument(
            "verify config needs at least one of 'convergence', 'lln', 'chisq'");

    ensure_out_dir(opts.out_dir);
    CheckSet checks;
    std::vector<std::string> outputs;
    if (cfg.contains("convergence"))
        run_convergence_study(cfg.at("convergence"), seed, opts.out_dir, checks, outputs);
    if (cfg.contains("lln"))
        run_lln_study(cfg.at("lln"), seed, opts.out_dir, checks, outputs);
    if (cfg.contains("chisq"))
        run_chisq_study(cfg.at("chisq"), seed, opts.out_dir, checks, outputs);

    csv::write_table(out_path(opts.out_dir, "summary.csv"),
                     {"study", "statistic", "value", "constraint", "pass"}, checks.rows);
    outputs.push_back("summary.csv");

    manifest::RunManifest mf;
    mf.subcommand = "verify";
    mf.config_path = opts.config_path;
    mf.config = cfg;
    mf.config["seed"] = seed;
    mf.seed = seed;
    mf.out_dir = opts.out_dir;
    mf.threads = opts.threads;
    mf.outputs = outputs;
    manifest::write_manifest(mf);
    return checks.all_passed ? 0 : 1;
}

int cmd_noise(const CommonOptions& opts) {
    const json cfg = config::load_json_file(opts.config_path);
    const std::uint64_t seed = effective_seed(cfg, opts.seed);
    const std::string sweep = config::require<std::string>(cfg, "sweep");
    const auto sigma2 = config::require<std::vector<double>>(cfg, "sigma2");
    if (sigma2.size() < 3)
        throw std::invalid_argument(
            "noise sweeps need at least three components: with m < 3 the pairwise "
            "noise is identically zero and there is nothing to sweep");

    ensure_out_dir(opts.out_dir);
    std::vector<experiments::NoisePoint> points;
    std::vector<std::string> header;
    std::string out_name;
    if (sweep == "n") {
        const auto sc = config::parse_noise_sweep(cfg, seed, opts.threads);
        points = experiments::noise_sd_sweep(sc);
        header = {"n", "sigma3_2", "component", "sd", "analytic_sd", "se_sd"};
        out_name = "noise_sd.csv";
    } else if (sweep == "sigma3") {
        const auto sc = config::parse_sigma3_sweep(cfg, seed, opts.threads);
        points = experiments::sigma3_sweep(sc);
        header = {"sigma3_2", "sigma2_2", "component", "sd", "analytic_sd", "se_sd"};
        out_name = "noise_sd_sigma3.csv";
    } else {
        throw std::invalid_argument("config field 'sweep' must be 'n' or 'sigma3'");
    }

    const auto pair = config::get_or<std::vector<int>>(cfg, "pair", {1, 2});
    const std::string comp_j = "eps" + std::to_string(pair[0]);
    const std::string comp_k = "eps" + std::to_string(pair[1]);
    std::vector<std::vector<std::string>> rows;
    for (const auto& pt : points) {
        const std::string lead1 =
            sweep == "n" ? std::to_string(pt.n) : fmt(pt.sigma3_2);
        const std::string lead2 = sweep == "n" ? fmt(pt.sigma3_2) : fmt(pt.sigma2_2);
        rows.push_back({lead1, lead2, comp_j, fmt(pt.sd_j), fmt(pt.analytic_sd_j),
                        fmt(pt.se_sd_j)});
        rows.push_back({lead1, lead2, comp_k, fmt(pt.sd_k), fmt(pt.analytic_sd_k),
                        fmt(pt.se_sd_k)});
    }
    csv::write_table(out_path(opts.out_dir, out_name), header, rows);

    manifest::RunManifest mf;
    mf.subcommand = "noise";
    mf.config_path = opts.config_path;
    mf.config = cfg;
    mf.config["seed"] = seed;
    mf.seed = seed;
    mf.out_dir = opts.out_dir;
    mf.threads = opts.threads;
    mf.outputs = {out_name};
    manifest::write_manifest(mf);

    std::cout << "noise: wrote " << rows.size() << " rows to "
              << out_path(opts.out_dir, out_name) << "\n";
    return 0;
}

int cmd_diagnose(const DiagnoseOptions& opts) {
    json cfg = json::object();
    if (!opts.config_path.empty()) cfg = config::load_json_file(opts.config_path);

    const std::string matrix_csv =
        !opts.matrix_csv.empty() ? opts.matrix_csv
                                 : config::get_or<std::string>(cfg, "matrix_csv", "");
    const std::string scree_csv =
        !opts.scree_csv.empty() ? opts.scree_csv
                                : config::get_or<std::string>(cfg, "scree_csv", "");
    const std::string pop_csv = !opts.population_scores_csv.empty()
                                    ? opts.population_scores_csv
                                    : config::get_or<std::string>(cfg, "population_scores_csv", "");
    const double target_sd = cfg.contains("target_sd") && opts.target_sd == 0.15
                                 ? cfg.at("target_sd").get<double>()
                                 : opts.target_sd;
    int pair_j = opts.pair_j, pair_k = opts.pair_k;
    if (cfg.contains("pair")) {
        const auto pair = config::require<std::vector<int>>(cfg, "pair");
        if (pair.size() != 2)
            throw std::invalid_argument("config field 'pair' must have two entries");
        pair_j = pair[0];
        pair_k = pair[1];
    }
    std::optional<int> m = opts.m;
    if (!m.has_value() && cfg.contains("m")) m = cfg.at("m").get<int>();

    json report;
    report["pair"] = {pair_j, pair_k};

    std::vector<double> sigma2_hat;
    MatrixXd sample_scores;  // filled on the matrix path
    bool have_sample_scores = false;

    if (cfg.contains("sigma2") && matrix_csv.empty() && scree_csv.empty()) {
        sigma2_hat = config::require<std::vector<double>>(cfg, "sigma2");
        report["signals"] = {{"sigma2_hat", sigma2_hat},
                             {"m", sigma2_hat.size()},
                             {"source", "config"}};
    } else if (!scree_csv.empty()) {
        const VectorXd eigs = csv::read_vector(scree_csv);
        std::optional<int> p = opts.p;
        if (!p.has_value() && cfg.contains("p")) p = cfg.at("p").get<int>();
        if (!p.has_value())
            throw std::invalid_argument(
                "missing required field 'p' (number of variables) for scree input");
        const auto est = diagnose::estimate_signals(eigs, *p, m);
        sigma2_hat = est.sigma2_hat;
        report["signals"] = {{"sigma2_hat", sigma2_hat},
                             {"m", est.m},
                             {"p", *p},
                             {"source", "scree"}};
        report["scree"] = std::vector<double>(eigs.data(), eigs.data() + eigs.size());
    } else if (!matrix_csv.empty()) {
        MatrixXd X = csv::read_matrix(matrix_csv);
        if (opts.orientation == "obs-rows")
            X = X.transpose().eval();
        else if (opts.orientation != "vars-rows")
            throw std::invalid_argument("orientation must be 'vars-rows' or 'obs-rows'");
        const int p = static_cast<int>(X.rows());
        const int n = static_cast<int>(X.cols());
        pca::PcaOptions popts;
        popts.centered = opts.centered;
        popts.divisor = pca::Divisor::NMinus1;
        const int k_needed = std::max(pair_j, pair_k);
        const int rank_cap = std::min(p, popts.centered ? n - 1 : n);
        if (k_needed > rank_cap)
            throw std::invalid_argument("requested pair exceeds the matrix rank");
        const auto res = pca::pca_decompose(X, k_needed, popts);
        const auto est = diagnose::estimate_signals(res.d, p, m);
        sigma2_hat = est.sigma2_hat;
        sample_scores = res.Zhat;
        have_sample_scores = true;
        report["signals"] = {{"sigma2_hat", sigma2_hat},
                             {"m", est.m},
                             {"p", p},
                             {"n", n},
                             {"centered", opts.centered},
                             {"divisor", "n-1"},
                             {"source", "matrix"}};
        report["scree"] = std::vector<double>(res.d.data(), res.d.data() + res.d.size());
    } else {
        throw std::invalid_argument(
            "diagnose needs one of: config 'sigma2', a scree CSV, or a data matrix CSV");
    }

    const int m_eff = static_cast<int>(sigma2_hat.size());
    if (pair_j < 1 || pair_k < 1 || pair_j == pair_k ||
        std::max(pair_j, pair_k) > std::max(m_eff, 2))
        throw std::invalid_argument("diagnose: bad component pair for the estimated m");

    json noise;
    noise["target_sd"] = target_sd;
    if (m_eff >= 2 && std::max(pair_j, pair_k) <= m_eff) {
        const auto [nj, nk] =
            diagnose::required_sample_size(sigma2_hat, pair_j, pair_k, target_sd);
        noise["required_n"] = {{"component_" + std::to_string(pair_j), nj},
                               {"component_" + std::to_string(pair_k), nk}};
        const auto nv_j = limit::noise_variance_asymptotic(sigma2_hat, nj, pair_j, pair_k);
        const auto nv_k = limit::noise_variance_asymptotic(sigma2_hat, nk, pair_j, pair_k);
        noise["sd_at_required_n"] = {{"component_" + std::to_string(pair_j), nv_j.sd_j},
                                     {"component_" + std::to_string(pair_k), nv_k.sd_k}};
        std::cout << "diagnose: required n for component " << pair_j << " = " << nj
                  << ", component " << pair_k << " = " << nk << " (target sd "
                  << fmt(target_sd) << ")\n";
    }
    report["noise"] = noise;

    if (!pop_csv.empty()) {
        if (!have_sample_scores)
            throw std::invalid_argument(
                "population scores were given but no data matrix was provided to "
                "compute sample scores from");
        const MatrixXd pop = csv::read_matrix(pop_csv);
        if (pop.cols() != sample_scores.cols())
            throw std::invalid_argument("population scores have a different number of "
                                        "observations than the data matrix");
        if (pop.rows() < std::max(pair_j, pair_k))
            throw std::invalid_argument("population scores are missing the requested pair");
        MatrixXd sample_pair(2, sample_scores.cols());
        sample_pair.row(0) = sample_scores.row(pair_j - 1);
        sample_pair.row(1) = sample_scores.row(pair_k - 1);
        MatrixXd pop_pair(2, pop.cols());
        pop_pair.row(0) = pop.row(pair_j - 1);
        pop_pair.row(1) = pop.row(pair_k - 1);

        // Sample score signs are arbitrary; align each row to the population
        // scores before fitting so only genuine rotation remains.
        std::vector<bool> flipped(2, false);
        for (int r = 0; r < 2; ++r) {
            if (sample_pair.row(r).dot(pop_pair.row(r)) < 0.0) {
                sample_pair.row(r) = -sample_pair.row(r);
                flipped[r] = true;
            }
        }
        const auto transform = diagnose::fit_pair_transform(sample_pair, pop_pair);
        const auto cls = diagnose::classify_transform(transform);
        report["transform"] = {
            {"scale_x", transform.scale_x},
            {"scale_y", transform.scale_y},
            {"angle_deg", transform.angle * 180.0 / std::numbers::pi},
            {"residual", transform.residual},
            {"reflection", transform.reflection},
            {"label", diagnose::to_string(cls.label)},
            {"evidence", cls.evidence},
            {"sign_flips", flipped},
        };
        std::cout << "diagnose: transform label = " << diagnose::to_string(cls.label)
                  << " (scales " << fmt(transform.scale_x) << ", "
                  << fmt(transform.scale_y) << "; angle "
                  << fmt(transform.angle * 180.0 / std::numbers::pi) << " deg)\n";
    }

    ensure_out_dir(opts.out_dir);
    {
        std::ofstream out(fs::path(opts.out_dir) / "report.json", std::ios::binary);
        if (!out) throw std::runtime_error("cannot write report.json");
        out << report.dump(2) << '\n';
    }

    manifest::RunManifest mf;
    mf.subcommand = "diagnose";
    mf.config_path = opts.config_path;
    mf.config = {{"matrix_csv", matrix_csv},
                 {"scree_csv", scree_csv},
                 {"population_scores_csv", pop_csv},
                 {"orientation", opts.orientation},
                 {"centered", opts.centered},
                 {"pair", {pair_j, pair_k}},
                 {"target_sd", target_sd}};
    if (m.has_value()) mf.config["m"] = *m;
    mf.seed = 0;
    mf.out_dir = opts.out_dir;
    mf.threads = opts.threads;
    mf.outputs = {"report.json"};
    manifest::write_manifest(mf);
    return 0;
}

}  // namespace pervasive::commands
