#include "pervasive/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <mutex>
#include <stdexcept>
#include <thread>

#include "pervasive/limit.hpp"
#include "pervasive/pca.hpp"
#include "pervasive/rng.hpp"
#include "pervasive/stats.hpp"

namespace pervasive::experiments {

namespace {

using Eigen::MatrixXd;

// Run body(r) for r in [0, count) over the requested number of threads.
// Each index writes only its own slot, so the partition does not affect
// results. The first exception thrown by any worker is rethrown here.
template <typename Body>
void parallel_replicates(int count, int threads, const Body& body) {
    threads = std::max(1, std::min(threads, count));
    if (threads == 1) {
        for (int r = 0; r < count; ++r) body(r);
        return;
    }
    std::vector<std::thread> pool;
    pool.reserve(threads);
    std::exception_ptr error;
    std::mutex error_mutex;
    for (int t = 0; t < threads; ++t) {
        pool.emplace_back([&, t] {
            try {
                for (int r = t; r < count; r += threads) body(r);
            } catch (...) {
                const std::lock_guard<std::mutex> lock(error_mutex);
                if (!error) error = std::current_exception();
            }
        });
    }
    for (auto& th : pool) th.join();
    if (error) std::rethrow_exception(error);
}

struct EpsDraws {
    std::vector<double> eps_j;
    std::vector<double> eps_k;
};

// One grid cell of a noise sweep: R replicates of W from fresh normal
// scores, each yielding the pair of noise terms at pinned (or drawn)
// population scores.
EpsDraws simulate_noise_cell(const std::vector<double>& sigma2, int n, int j, int k,
                             int replicates, std::uint64_t seed, std::uint64_t cell,
                             bool fixed_scores, int threads) {
    const int m = static_cast<int>(sigma2.size());
    std::vector<double> sigma(m);
    for (int l = 0; l < m; ++l) sigma[l] = std::sqrt(sigma2[l]);

    EpsDraws draws;
    draws.eps_j.assign(replicates, 0.0);
    draws.eps_k.assign(replicates, 0.0);

    parallel_replicates(replicates, threads, [&](int r) {
        rng::Stream stream(rng::substream(seed, rng::kReplicateTag, cell, r));
        MatrixXd Z(n, m);
        for (int i = 0; i < n; ++i)
            for (int l = 0; l < m; ++l) Z(i, l) = stream.normal();
        const limit::WEigen we = limit::build_w(Z, sigma2);

        std::vector<double> score(m, 1.0);
        if (!fixed_scores)
            for (int l = 0; l < m; ++l) score[l] = stream.normal();

        double ej = 0.0, ek = 0.0;
        for (int l = 0; l < m; ++l) {
            if (l == j - 1 || l == k - 1) continue;
            ej += sigma[l] * score[l] * we.V(l, j - 1);
            ek += sigma[l] * score[l] * we.V(l, k - 1);
        }
        draws.eps_j[r] = std::sqrt(n / we.d[j - 1]) * ej;
        draws.eps_k[r] = std::sqrt(n / we.d[k - 1]) * ek;
    });
    return draws;
}

NoisePoint summarize_cell(const EpsDraws& draws, const std::vector<double>& sigma2,
                          int n, int j, int k) {
    NoisePoint pt;
    pt.n = n;
    pt.sigma2_2 = sigma2.size() > 1 ? sigma2[1] : 0.0;
    pt.sigma3_2 = sigma2.size() > 2 ? sigma2[2] : 0.0;
    pt.mean_j = stats::mean(draws.eps_j);
    pt.mean_k = stats::mean(draws.eps_k);
    const auto R = draws.eps_j.size();
    if (R >= 2) {
        pt.sd_j = stats::sample_sd(draws.eps_j);
        pt.sd_k = stats::sample_sd(draws.eps_k);
        // Normal-approximation error of an SD estimate: sd / sqrt(2(R-1)).
        const double f = 1.0 / std::sqrt(2.0 * (R - 1));
        pt.se_sd_j = pt.sd_j * f;
        pt.se_sd_k = pt.sd_k * f;
    } else {
        pt.sd_defined = false;
        pt.sd_j = pt.sd_k = std::numeric_limits<double>::quiet_NaN();
        pt.se_sd_j = pt.se_sd_k = std::numeric_limits<double>::quiet_NaN();
    }
    const limit::NoiseVariance nv = limit::noise_variance_asymptotic(sigma2, n, j, k);
    pt.analytic_sd_j = nv.sd_j;
    pt.analytic_sd_k = nv.sd_k;
    return pt;
}

void check_pair(const std::vector<double>& sigma2, int j, int k) {
    const int m = static_cast<int>(sigma2.size());
    if (m < 2) throw std::invalid_argument("noise sweep: needs at least two components");
    if (j < 1 || j > m || k < 1 || k > m || j == k)
        throw std::invalid_argument("noise sweep: bad component pair");
}

// W must be full rank for the eps scalings; validated before any replicate
// thread starts so failures surface as ordinary exceptions.
void check_n(int n, const std::vector<double>& sigma2) {
    if (n < static_cast<int>(sigma2.size()))
        throw std::invalid_argument("noise sweep: sample size n must be >= m");
}

// Component indices identify order statistics of W, so the substituted
// strengths must stay strictly decreasing.
void check_decreasing(const std::vector<double>& sigma2) {
    for (std::size_t l = 1; l < sigma2.size(); ++l)
        if (!(sigma2[l] < sigma2[l - 1]))
            throw std::invalid_argument(
                "noise sweep: substituted strengths are no longer strictly decreasing");
}

}  // namespace

std::vector<NoisePoint> noise_sd_sweep(const NoiseSweepConfig& cfg) {
    check_pair(cfg.sigma2, cfg.j, cfg.k);
    if (cfg.n_grid.empty()) throw std::invalid_argument("noise_sd_sweep: empty n grid");
    if (cfg.replicates < 1) throw std::invalid_argument("noise_sd_sweep: replicates < 1");
    for (int n : cfg.n_grid) check_n(n, cfg.sigma2);
    std::vector<double> sigma3_values = cfg.sigma3_values;
    if (sigma3_values.empty()) {
        if (cfg.sigma2.size() < 3)
            sigma3_values.push_back(0.0);  // single curve, no third component
        else
            sigma3_values.push_back(cfg.sigma2[2]);
    }

    std::vector<NoisePoint> out;
    std::uint64_t cell = 0;
    for (double s3 : sigma3_values) {
        std::vector<double> sigma2 = cfg.sigma2;
        if (sigma2.size() >= 3) sigma2[2] = s3;
        check_decreasing(sigma2);
        for (int n : cfg.n_grid) {
            const EpsDraws draws =
                simulate_noise_cell(sigma2, n, cfg.j, cfg.k, cfg.replicates, cfg.seed,
                                    cell, cfg.fixed_scores, cfg.threads);
            out.push_back(summarize_cell(draws, sigma2, n, cfg.j, cfg.k));
            ++cell;
        }
    }
    return out;
}

std::vector<NoisePoint> sigma3_sweep(const Sigma3SweepConfig& cfg) {
    check_pair(cfg.sigma2, cfg.j, cfg.k);
    if (cfg.sigma2.size() < 3)
        throw std::invalid_argument("sigma3_sweep: needs m >= 3 (no third component to sweep)");
    if (cfg.sigma3_grid.empty()) throw std::invalid_argument("sigma3_sweep: empty grid");
    check_n(cfg.n, cfg.sigma2);
    std::vector<double> sigma2_2_values = cfg.sigma2_2_values;
    if (sigma2_2_values.empty()) sigma2_2_values.push_back(cfg.sigma2[1]);

    std::vector<NoisePoint> out;
    std::uint64_t cell = 0;
    for (double s2 : sigma2_2_values) {
        for (double s3 : cfg.sigma3_grid) {
            std::vector<double> sigma2 = cfg.sigma2;
            sigma2[1] = s2;
            sigma2[2] = s3;
            check_decreasing(sigma2);
            const EpsDraws draws =
                simulate_noise_cell(sigma2, cfg.n, cfg.j, cfg.k, cfg.replicates,
                                    cfg.seed, cell, cfg.fixed_scores, cfg.threads);
            out.push_back(summarize_cell(draws, sigma2, cfg.n, cfg.j, cfg.k));
            ++cell;
        }
    }
    return out;
}

ChiSquareReport chi_square_check(double sigma1_2, int n, int replicates,
                                 std::uint64_t seed) {
    if (!(sigma1_2 > 0.0)) throw std::invalid_argument("chi_square_check: sigma1^2 <= 0");
    if (n < 1 || replicates < 2)
        throw std::invalid_argument("chi_square_check: needs n >= 1 and replicates >= 2");
    std::vector<double> draws(replicates);
    for (int r = 0; r < replicates; ++r) {
        rng::Stream stream(rng::substream(seed, rng::kReplicateTag, 0, r));
        // d_1(W) = sigma1^2 ||z_1||^2, so the standardized draw is ||z_1||^2.
        double ss = 0.0;
        for (int i = 0; i < n; ++i) {
            const double z = stream.normal();
            ss += z * z;
        }
        draws[r] = ss;
    }
    ChiSquareReport report;
    report.n = n;
    report.replicates = replicates;
    report.mean = stats::mean(draws);
    report.variance = stats::sample_variance(draws);
    report.ks = stats::ks_statistic_chi2(draws, n);
    report.ks_critical_5pct = 1.358 / std::sqrt(static_cast<double>(replicates));
    return report;
}

std::vector<LlnPoint> lln_check(const LlnConfig& cfg) {
    if (cfg.p_grid.empty()) throw std::invalid_argument("lln_check: empty p grid");
    if (cfg.tau2 < 0.0) throw std::invalid_argument("lln_check: tau2 < 0");
    if (cfg.n < 1 || cfg.m < 0 || cfg.replicates < 1)
        throw std::invalid_argument("lln_check: bad dimensions");
    for (int p : cfg.p_grid)
        if (p <= cfg.m) throw std::invalid_argument("lln_check: p grid must exceed m");

    std::vector<int> grid = cfg.p_grid;
    std::sort(grid.begin(), grid.end());

    const int n = cfg.n;
    std::vector<std::vector<double>> devs(grid.size());

    for (int rep = 0; rep < cfg.replicates; ++rep) {
        const std::uint64_t base = rng::substream(cfg.seed, rng::kReplicateTag, 0, rep);
        if (cfg.tail == model::TailProfile::Flat) {
            // Flat tails are nested across p: accumulate rows once and
            // snapshot the deviation at each grid point.
            MatrixXd G = MatrixXd::Zero(n, n);
            int rows_done = 0;
            for (std::size_t gi = 0; gi < grid.size(); ++gi) {
                const int tail_rows = grid[gi] - cfg.m;
                for (int i = rows_done; i < tail_rows; ++i) {
                    rng::Stream stream(rng::substream(base, rng::kRowTag, i));
                    Eigen::VectorXd z(n);
                    for (int t = 0; t < n; ++t) z[t] = stream.normal();
                    G.selfadjointView<Eigen::Lower>().rankUpdate(z, cfg.tau2);
                }
                rows_done = tail_rows;
                MatrixXd M = G.selfadjointView<Eigen::Lower>();
                M /= static_cast<double>(grid[gi]);
                M.diagonal().array() -= cfg.tau2;
                devs[gi].push_back(M.cwiseAbs().maxCoeff());
            }
        } else {
            for (std::size_t gi = 0; gi < grid.size(); ++gi) {
                const int tail_rows = grid[gi] - cfg.m;
                MatrixXd G = MatrixXd::Zero(n, n);
                for (int i = 0; i < tail_rows; ++i) {
                    rng::Stream stream(rng::substream(base, rng::kRowTag, i));
                    Eigen::VectorXd z(n);
                    for (int t = 0; t < n; ++t) z[t] = stream.normal();
                    const double lambda =
                        cfg.tau2 * 2.0 * (tail_rows - i) / (tail_rows + 1.0);
                    G.selfadjointView<Eigen::Lower>().rankUpdate(z, lambda);
                }
                MatrixXd M = G.selfadjointView<Eigen::Lower>();
                M /= static_cast<double>(grid[gi]);
                M.diagonal().array() -= cfg.tau2;
                devs[gi].push_back(M.cwiseAbs().maxCoeff());
            }
        }
    }

    std::vector<LlnPoint> out;
    for (std::size_t gi = 0; gi < grid.size(); ++gi) {
        LlnPoint pt;
        pt.p = grid[gi];
        pt.mean_dev = stats::mean(devs[gi]);
        pt.median_dev = stats::quantile(devs[gi], 0.5);
        pt.q95_dev = stats::quantile(devs[gi], 0.95);
        out.push_back(pt);
    }
    return out;
}

std::vector<ConvergencePoint> convergence_study(const ConvergenceConfig& cfg) {
    if (cfg.p_grid.empty()) throw std::invalid_argument("convergence_study: empty p grid");
    if (cfg.replicates < 1) throw std::invalid_argument("convergence_study: replicates < 1");
    const int m = static_cast<int>(cfg.sigma2.size());
    if (m < 1) throw std::invalid_argument("convergence_study: needs m >= 1");

    std::vector<ConvergencePoint> out;
    for (int rep = 0; rep < cfg.replicates; ++rep) {
        // One master per replicate; rows are keyed by (master, row), so all
        // p share the same spike scores and the W prediction is common.
        const std::uint64_t master = rng::substream(cfg.seed, rng::kReplicateTag, 0, rep);
        for (int p : cfg.p_grid) {
            const model::SpikeSpec spec(cfg.sigma2, cfg.tau2, p, cfg.n);
            const simulate::Dataset ds = simulate::generate_dataset(spec, cfg.dist, master);

            const MatrixXd Z_top = ds.Z.topRows(m).transpose();
            const limit::WEigen we = limit::build_w(Z_top, cfg.sigma2);
            const MatrixXd pred = limit::predict_scores(we, Z_top, cfg.sigma2);

            pca::PcaOptions opts;
            opts.centered = false;
            opts.divisor = pca::Divisor::N;
            const pca::PcaResult res = pca::pca_decompose(ds.X, m, opts);

            ConvergencePoint pt;
            pt.p = p;
            pt.replicate = rep;

            double ss = 0.0;
            for (int j = 0; j < m; ++j) {
                const double sign =
                    res.Zhat.row(j).dot(pred.row(j)) >= 0.0 ? 1.0 : -1.0;
                ss += (res.Zhat.row(j) - sign * pred.row(j)).squaredNorm();
            }
            pt.score_rmse = std::sqrt(ss / (static_cast<double>(m) * cfg.n));

            const VectorXd pred_eigs =
                limit::predict_sample_eigenvalues(we, cfg.tau2, static_cast<int>(res.d.size()));
            pt.eig_rel_err.resize(m);
            for (int j = 0; j < m; ++j) {
                const double observed = res.d[j] / p;
                pt.eig_rel_err[j] = std::abs(observed - pred_eigs[j]) / observed;
            }
            if (res.d.size() > m) {
                std::vector<double> tail;
                for (int j = m; j < res.d.size(); ++j) tail.push_back(res.d[j] / p);
                pt.tail_eig_median = stats::quantile(tail, 0.5);
                pt.tail_eig_predicted = cfg.tau2 / cfg.n;
            }
            out.push_back(pt);
        }
    }
    return out;
}

}  // namespace pervasive::experiments
