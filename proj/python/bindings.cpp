#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "pervasive/diagnose.hpp"
#include "pervasive/experiments.hpp"
#include "pervasive/limit.hpp"
#include "pervasive/model.hpp"
#include "pervasive/pca.hpp"
#include "pervasive/simulate.hpp"
#include "pervasive/version.hpp"

namespace py = pybind11;
using namespace pervasive;

namespace {

model::TailProfile tail_from_string(const std::string& name) {
    if (name == "flat") return model::TailProfile::Flat;
    if (name == "linear-decay") return model::TailProfile::LinearDecay;
    throw std::invalid_argument("tail must be 'flat' or 'linear-decay'");
}

model::SpikeVectors vectors_from_string(const std::string& name) {
    if (name == "disjoint-blocks") return model::SpikeVectors::DisjointBlocks;
    if (name == "random-orthonormal") return model::SpikeVectors::RandomOrthonormal;
    throw std::invalid_argument("vectors must be 'disjoint-blocks' or 'random-orthonormal'");
}

}  // namespace

PYBIND11_MODULE(_core, mod) {
    mod.doc() = "Spiked-covariance simulation, scaled-rotation score limits and "
                "score-plot diagnostics";
    mod.attr("__version__") = kVersion;

    // --- model ---------------------------------------------------------
    py::class_<model::SpikeSpec>(mod, "SpikeSpec")
        .def(py::init([](std::vector<double> sigma2, double tau2, int p, int n,
                         const std::string& tail, const std::string& vectors,
                         std::uint64_t vector_seed) {
                 return model::SpikeSpec(std::move(sigma2), tau2, p, n,
                                         tail_from_string(tail),
                                         vectors_from_string(vectors), vector_seed);
             }),
             py::arg("sigma2"), py::arg("tau2"), py::arg("p"), py::arg("n"),
             py::arg("tail") = "flat", py::arg("vectors") = "disjoint-blocks",
             py::arg("vector_seed") = 0)
        .def_readonly("sigma2", &model::SpikeSpec::sigma2)
        .def_readonly("tau2", &model::SpikeSpec::tau2)
        .def_readonly("p", &model::SpikeSpec::p)
        .def_readonly("n", &model::SpikeSpec::n)
        .def_property_readonly("m", &model::SpikeSpec::m);

    py::class_<model::Block>(mod, "Block")
        .def(py::init([](double fraction, double rho) {
                 return model::Block{fraction, rho};
             }),
             py::arg("fraction"), py::arg("rho"))
        .def_readonly("fraction", &model::Block::fraction)
        .def_readonly("rho", &model::Block::rho);

    py::class_<model::BlockSpec>(mod, "BlockSpec")
        .def(py::init([](double sigma2, std::vector<std::pair<double, double>> blocks,
                         int p) {
                 std::vector<model::Block> bs;
                 for (auto [fraction, rho] : blocks) bs.push_back({fraction, rho});
                 return model::BlockSpec(sigma2, std::move(bs), p);
             }),
             py::arg("sigma2"), py::arg("blocks"), py::arg("p"))
        .def_readonly("sigma2", &model::BlockSpec::sigma2)
        .def_readonly("p", &model::BlockSpec::p)
        .def_property_readonly("block_sizes", &model::BlockSpec::block_sizes);

    py::class_<model::FactorVector>(mod, "FactorVector")
        .def(py::init<Eigen::VectorXd, double>(), py::arg("coefficients"),
             py::arg("noise_sigma2"))
        .def_readonly("coefficients", &model::FactorVector::coefficients)
        .def_readonly("noise_sigma2", &model::FactorVector::noise_sigma2);

    mod.def("pervasiveness_ratio", &model::pervasiveness_ratio, py::arg("v"),
            py::arg("threshold") = 0.0);
    mod.def("spike_eigenvalue", &model::spike_eigenvalue, py::arg("v"));
    mod.def(
        "block_eigenvalues",
        [](const model::BlockSpec& spec) {
            const auto eig = model::block_eigenvalues(spec);
            py::dict out;
            out["spikes"] = eig.spikes;
            out["contrasts"] = eig.contrasts;
            out["tail"] = eig.tail;
            out["sizes"] = eig.sizes;
            out["spectrum"] = eig.spectrum;
            return out;
        },
        py::arg("spec"));
    mod.def("spike_eigenvectors", &model::spike_eigenvectors, py::arg("spec"));
    mod.def("materialize_covariance",
            py::overload_cast<const model::BlockSpec&, int>(&model::materialize_covariance),
            py::arg("spec"), py::arg("max_p") = 5000);
    mod.def("materialize_covariance",
            py::overload_cast<const model::SpikeSpec&, int>(&model::materialize_covariance),
            py::arg("spec"), py::arg("max_p") = 5000);

    // --- simulate ------------------------------------------------------
    py::class_<simulate::ScoreDistribution>(mod, "ScoreDistribution")
        .def_static("standard_normal", &simulate::ScoreDistribution::standard_normal)
        .def_static("student_t", &simulate::ScoreDistribution::student_t, py::arg("df"))
        .def_property_readonly("name", &simulate::ScoreDistribution::name);

    py::class_<simulate::Dataset>(mod, "Dataset")
        .def_readonly("X", &simulate::Dataset::X)
        .def_readonly("Z", &simulate::Dataset::Z)
        .def_readonly("lam", &simulate::Dataset::lambda)
        .def_readonly("m", &simulate::Dataset::m)
        .def_readonly("spike_sigma2", &simulate::Dataset::spike_sigma2)
        .def_readonly("tau2", &simulate::Dataset::tau2)
        .def_readonly("seed", &simulate::Dataset::seed)
        .def_property_readonly("p", &simulate::Dataset::p)
        .def_property_readonly("n", &simulate::Dataset::n)
        .def(
            "population_scores",
            [](const simulate::Dataset& ds, int j) {
                const auto scores = simulate::population_scores(ds, j);
                return py::make_tuple(scores.s, scores.z);
            },
            py::arg("j"), "Raw and standardized scores of component j (1-based)");

    mod.def("draw_scores", &simulate::draw_scores, py::arg("dist"), py::arg("p"),
            py::arg("n"), py::arg("seed"));
    mod.def("generate_dataset",
            py::overload_cast<const model::SpikeSpec&, const simulate::ScoreDistribution&,
                              std::uint64_t>(&simulate::generate_dataset),
            py::arg("spec"), py::arg("dist"), py::arg("seed"));
    mod.def("generate_dataset",
            py::overload_cast<const model::BlockSpec&, int,
                              const simulate::ScoreDistribution&, std::uint64_t>(
                &simulate::generate_dataset),
            py::arg("spec"), py::arg("n"), py::arg("dist"), py::arg("seed"));

    // --- pca -------------------------------------------------------------
    py::class_<pca::PcaResult>(mod, "PcaResult")
        .def_readonly("d", &pca::PcaResult::d)
        .def_readonly("U_hat", &pca::PcaResult::U_hat)
        .def_readonly("Zhat", &pca::PcaResult::Zhat)
        .def_readonly("Shat", &pca::PcaResult::Shat)
        .def_readonly("centered", &pca::PcaResult::centered)
        .def_readonly("zero_score_components", &pca::PcaResult::zero_score_components)
        .def_property_readonly("divisor", [](const pca::PcaResult& r) {
            return r.divisor == pca::Divisor::N ? "n" : "n-1";
        });

    auto parse_opts = [](bool centered, const std::string& divisor) {
        pca::PcaOptions opts;
        opts.centered = centered;
        if (divisor == "n")
            opts.divisor = pca::Divisor::N;
        else if (divisor == "n-1")
            opts.divisor = pca::Divisor::NMinus1;
        else
            throw std::invalid_argument("divisor must be 'n' or 'n-1'");
        return opts;
    };
    mod.def(
        "dual_gram",
        [parse_opts](const Eigen::MatrixXd& X, bool centered, const std::string& divisor) {
            return pca::dual_gram(X, parse_opts(centered, divisor));
        },
        py::arg("X"), py::arg("centered") = false, py::arg("divisor") = "n-1");
    mod.def(
        "pca_decompose",
        [parse_opts](const Eigen::MatrixXd& X, int k, bool centered,
                     const std::string& divisor) {
            return pca::pca_decompose(X, k, parse_opts(centered, divisor));
        },
        py::arg("X"), py::arg("k"), py::arg("centered") = false,
        py::arg("divisor") = "n-1");
    mod.def("primal_eigenvectors", &pca::primal_eigenvectors, py::arg("X"),
            py::arg("result"));

    // --- limit -----------------------------------------------------------
    py::class_<limit::WEigen>(mod, "WEigen")
        .def_readonly("W", &limit::WEigen::W)
        .def_readonly("d", &limit::WEigen::d)
        .def_readonly("V", &limit::WEigen::V)
        .def_readonly("n", &limit::WEigen::n)
        .def_property_readonly("m", &limit::WEigen::m);

    py::class_<limit::PairDecomposition>(mod, "PairDecomposition")
        .def_readonly("j", &limit::PairDecomposition::j)
        .def_readonly("k", &limit::PairDecomposition::k)
        .def_readonly("scaling", &limit::PairDecomposition::scaling)
        .def_readonly("rotation", &limit::PairDecomposition::rotation)
        .def_readonly("noise", &limit::PairDecomposition::noise);

    py::class_<limit::NoiseVariance>(mod, "NoiseVariance")
        .def_readonly("j", &limit::NoiseVariance::j)
        .def_readonly("k", &limit::NoiseVariance::k)
        .def_readonly("n", &limit::NoiseVariance::n)
        .def_readonly("var_j", &limit::NoiseVariance::var_j)
        .def_readonly("var_k", &limit::NoiseVariance::var_k)
        .def_readonly("sd_j", &limit::NoiseVariance::sd_j)
        .def_readonly("sd_k", &limit::NoiseVariance::sd_k)
        .def_readonly("components_j", &limit::NoiseVariance::components_j)
        .def_readonly("components_k", &limit::NoiseVariance::components_k);

    mod.def("build_w", &limit::build_w, py::arg("Z_top"), py::arg("sigma2"));
    mod.def("predict_scores", &limit::predict_scores, py::arg("we"), py::arg("Z_top"),
            py::arg("sigma2"));
    mod.def("predict_sample_eigenvalues", &limit::predict_sample_eigenvalues,
            py::arg("we"), py::arg("tau2"), py::arg("count"));
    mod.def("predict_dual_eigenvector", &limit::predict_dual_eigenvector, py::arg("we"),
            py::arg("Z_top"), py::arg("sigma2"), py::arg("j"));
    mod.def("pair_decomposition", &limit::pair_decomposition, py::arg("we"),
            py::arg("Z_top"), py::arg("sigma2"), py::arg("j"), py::arg("k"));
    mod.def("noise_variance_asymptotic", &limit::noise_variance_asymptotic,
            py::arg("sigma2"), py::arg("n"), py::arg("j"), py::arg("k"));
    mod.def(
        "wishart_asymptotics",
        [](const std::vector<double>& sigma2, int j) {
            const auto wa = limit::wishart_asymptotics(sigma2, j);
            return py::make_tuple(wa.eigvec_cov_diag, wa.eigval_var);
        },
        py::arg("sigma2"), py::arg("j"));

    // --- experiments -----------------------------------------------------
    py::class_<experiments::ChiSquareReport>(mod, "ChiSquareReport")
        .def_readonly("n", &experiments::ChiSquareReport::n)
        .def_readonly("replicates", &experiments::ChiSquareReport::replicates)
        .def_readonly("mean", &experiments::ChiSquareReport::mean)
        .def_readonly("variance", &experiments::ChiSquareReport::variance)
        .def_readonly("ks", &experiments::ChiSquareReport::ks)
        .def_readonly("ks_critical_5pct", &experiments::ChiSquareReport::ks_critical_5pct);

    mod.def("chi_square_check", &experiments::chi_square_check, py::arg("sigma1_2"),
            py::arg("n"), py::arg("replicates"), py::arg("seed"));

    auto noise_point_dict = [](const experiments::NoisePoint& pt) {
        py::dict d;
        d["n"] = pt.n;
        d["sigma3_2"] = pt.sigma3_2;
        d["sigma2_2"] = pt.sigma2_2;
        d["mean_j"] = pt.mean_j;
        d["mean_k"] = pt.mean_k;
        d["sd_j"] = pt.sd_j;
        d["sd_k"] = pt.sd_k;
        d["se_sd_j"] = pt.se_sd_j;
        d["se_sd_k"] = pt.se_sd_k;
        d["analytic_sd_j"] = pt.analytic_sd_j;
        d["analytic_sd_k"] = pt.analytic_sd_k;
        d["sd_defined"] = pt.sd_defined;
        return d;
    };

    mod.def(
        "noise_sd_sweep",
        [noise_point_dict](std::vector<double> sigma2, std::vector<int> n_grid,
                           std::vector<double> sigma3_values, int replicates,
                           std::uint64_t seed, std::pair<int, int> pair,
                           bool fixed_scores, int threads) {
            experiments::NoiseSweepConfig cfg;
            cfg.sigma2 = std::move(sigma2);
            cfg.n_grid = std::move(n_grid);
            cfg.sigma3_values = std::move(sigma3_values);
            cfg.replicates = replicates;
            cfg.seed = seed;
            cfg.j = pair.first;
            cfg.k = pair.second;
            cfg.fixed_scores = fixed_scores;
            cfg.threads = threads;
            py::list out;
            for (const auto& pt : experiments::noise_sd_sweep(cfg))
                out.append(noise_point_dict(pt));
            return out;
        },
        py::arg("sigma2"), py::arg("n_grid"), py::arg("sigma3_values") = std::vector<double>{},
        py::arg("replicates") = 10000, py::arg("seed") = 0,
        py::arg("pair") = std::pair<int, int>{1, 2}, py::arg("fixed_scores") = true,
        py::arg("threads") = 1);

    mod.def(
        "sigma3_sweep",
        [noise_point_dict](std::vector<double> sigma2, int n,
                           std::vector<double> sigma3_grid,
                           std::vector<double> sigma2_2_values, int replicates,
                           std::uint64_t seed, std::pair<int, int> pair,
                           bool fixed_scores, int threads) {
            experiments::Sigma3SweepConfig cfg;
            cfg.sigma2 = std::move(sigma2);
            cfg.n = n;
            cfg.sigma3_grid = std::move(sigma3_grid);
            cfg.sigma2_2_values = std::move(sigma2_2_values);
            cfg.replicates = replicates;
            cfg.seed = seed;
            cfg.j = pair.first;
            cfg.k = pair.second;
            cfg.fixed_scores = fixed_scores;
            cfg.threads = threads;
            py::list out;
            for (const auto& pt : experiments::sigma3_sweep(cfg))
                out.append(noise_point_dict(pt));
            return out;
        },
        py::arg("sigma2"), py::arg("n"), py::arg("sigma3_grid"),
        py::arg("sigma2_2_values") = std::vector<double>{}, py::arg("replicates") = 10000,
        py::arg("seed") = 0, py::arg("pair") = std::pair<int, int>{1, 2},
        py::arg("fixed_scores") = true, py::arg("threads") = 1);

    mod.def(
        "lln_check",
        [](double tau2, int m, int n, std::vector<int> p_grid, int replicates,
           std::uint64_t seed, const std::string& tail) {
            experiments::LlnConfig cfg;
            cfg.tau2 = tau2;
            cfg.m = m;
            cfg.n = n;
            cfg.p_grid = std::move(p_grid);
            cfg.replicates = replicates;
            cfg.seed = seed;
            cfg.tail = tail_from_string(tail);
            py::list out;
            for (const auto& pt : experiments::lln_check(cfg)) {
                py::dict d;
                d["p"] = pt.p;
                d["median_dev"] = pt.median_dev;
                d["mean_dev"] = pt.mean_dev;
                d["q95_dev"] = pt.q95_dev;
                out.append(d);
            }
            return out;
        },
        py::arg("tau2"), py::arg("m"), py::arg("n"), py::arg("p_grid"),
        py::arg("replicates") = 50, py::arg("seed") = 0, py::arg("tail") = "flat");

    mod.def(
        "convergence_study",
        [](std::vector<double> sigma2, double tau2, int n, std::vector<int> p_grid,
           int replicates, std::uint64_t seed) {
            experiments::ConvergenceConfig cfg;
            cfg.sigma2 = std::move(sigma2);
            cfg.tau2 = tau2;
            cfg.n = n;
            cfg.p_grid = std::move(p_grid);
            cfg.replicates = replicates;
            cfg.seed = seed;
            py::list out;
            for (const auto& pt : experiments::convergence_study(cfg)) {
                py::dict d;
                d["p"] = pt.p;
                d["replicate"] = pt.replicate;
                d["score_rmse"] = pt.score_rmse;
                d["eig_rel_err"] = pt.eig_rel_err;
                d["tail_eig_median"] = pt.tail_eig_median;
                d["tail_eig_predicted"] = pt.tail_eig_predicted;
                out.append(d);
            }
            return out;
        },
        py::arg("sigma2"), py::arg("tau2"), py::arg("n"), py::arg("p_grid"),
        py::arg("replicates") = 1, py::arg("seed") = 0);

    // --- diagnose ----------------------------------------------------------
    py::class_<diagnose::PairTransform>(mod, "PairTransform")
        .def_readonly("scale_x", &diagnose::PairTransform::scale_x)
        .def_readonly("scale_y", &diagnose::PairTransform::scale_y)
        .def_readonly("angle", &diagnose::PairTransform::angle)
        .def_readonly("residual", &diagnose::PairTransform::residual)
        .def_readonly("reflection", &diagnose::PairTransform::reflection)
        .def_readonly("matrix", &diagnose::PairTransform::matrix);

    mod.def("fit_pair_transform", &diagnose::fit_pair_transform, py::arg("sample_pair"),
            py::arg("population_pair"));
    mod.def(
        "classify_transform",
        [](const diagnose::PairTransform& t, double scale_tol, double angle_tol_deg) {
            diagnose::ClassifyThresholds thr;
            thr.scale_tol = scale_tol;
            thr.angle_tol = angle_tol_deg * std::numbers::pi / 180.0;
            const auto cls = diagnose::classify_transform(t, thr);
            return py::make_tuple(diagnose::to_string(cls.label), cls.evidence);
        },
        py::arg("transform"), py::arg("scale_tol") = 0.1, py::arg("angle_tol_deg") = 10.0);
    mod.def(
        "estimate_signals",
        [](const Eigen::VectorXd& eigenvalues, int p, std::optional<int> m,
           double min_gap) {
            const auto est = diagnose::estimate_signals(eigenvalues, p, m, min_gap);
            py::dict out;
            out["sigma2_hat"] = est.sigma2_hat;
            out["m"] = est.m;
            out["scree"] = est.scree;
            return out;
        },
        py::arg("eigenvalues"), py::arg("p"), py::arg("m") = std::nullopt,
        py::arg("min_gap") = 0.1);
    mod.def("required_sample_size", &diagnose::required_sample_size, py::arg("sigma2"),
            py::arg("j"), py::arg("k"), py::arg("target_sd"));
}
