#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <random>
#include <vector>

#include "pervasive/limit.hpp"
#include "pervasive/model.hpp"
#include "pervasive/pca.hpp"
#include "pervasive/rng.hpp"
#include "pervasive/simulate.hpp"
#include "pervasive/stats.hpp"

using namespace pervasive;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

MatrixXd random_scores(int n, int m, std::uint64_t seed) {
    std::mt19937_64 gen(seed);
    std::normal_distribution<double> normal;
    MatrixXd Z(n, m);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < m; ++j) Z(i, j) = normal(gen);
    return Z;
}

}  // namespace

TEST_CASE("build_w basics") {
    SUBCASE("scalar case") {
        MatrixXd Z(3, 1);
        Z << 1, 1, 1;
        const auto we = limit::build_w(Z, {4.0});  // sigma_1 = 2
        CHECK(we.W(0, 0) == doctest::Approx(12.0));
        CHECK(we.d[0] == doctest::Approx(12.0));
        CHECK(we.V(0, 0) == doctest::Approx(1.0));
        CHECK(we.n == 3);
    }
    SUBCASE("orthogonal scores give a diagonal W") {
        MatrixXd Z(2, 2);
        Z << 1, 0, 0, 1;
        const auto we = limit::build_w(Z, {4.0, 1.0});
        CHECK(we.W.isApprox(Eigen::Vector2d(4.0, 1.0).asDiagonal().toDenseMatrix()));
        CHECK(we.V.isApprox(MatrixXd::Identity(2, 2)));
    }
    SUBCASE("trace identity") {
        const MatrixXd Z = random_scores(40, 3, 17);
        const std::vector<double> sigma2{9.0, 4.0, 1.0};
        const auto we = limit::build_w(Z, sigma2);
        double expected = 0.0;
        for (int j = 0; j < 3; ++j) expected += sigma2[j] * Z.col(j).squaredNorm();
        CHECK(we.W.trace() == doctest::Approx(expected).epsilon(1e-12));
        CHECK(we.d.sum() == doctest::Approx(expected).epsilon(1e-12));
    }
    SUBCASE("dimension mismatch") {
        CHECK_THROWS_AS(limit::build_w(random_scores(10, 2, 1), {1.0}),
                        std::invalid_argument);
    }
}

TEST_CASE("predicted scores") {
    SUBCASE("constant single-component scores predict exactly 1") {
        MatrixXd Z(3, 1);
        Z << 1, 1, 1;
        for (double s2 : {0.5, 4.0, 12.0}) {
            const auto we = limit::build_w(Z, {s2});
            const MatrixXd pred = limit::predict_scores(we, Z, {s2});
            for (int i = 0; i < 3; ++i) CHECK(pred(0, i) == doctest::Approx(1.0));
        }
    }
    SUBCASE("orthogonal two-component hand value") {
        MatrixXd Z(2, 2);
        Z << 1, 0, 0, 1;
        const auto we = limit::build_w(Z, {4.0, 1.0});
        const MatrixXd pred = limit::predict_scores(we, Z, {4.0, 1.0});
        CHECK(pred(0, 0) == doctest::Approx(std::sqrt(2.0)));
        CHECK(pred(0, 1) == doctest::Approx(0.0).scale(1.0));
        CHECK(pred(1, 1) == doctest::Approx(std::sqrt(2.0)));
    }
    SUBCASE("every predicted row has squared norm n") {
        const int n = 23;
        const MatrixXd Z = random_scores(n, 4, 5);
        const std::vector<double> sigma2{12.0, 8.0, 2.0, 0.5};
        const auto we = limit::build_w(Z, sigma2);
        const MatrixXd pred = limit::predict_scores(we, Z, sigma2);
        for (int j = 0; j < 4; ++j)
            CHECK(pred.row(j).squaredNorm() == doctest::Approx(n).epsilon(1e-10));
    }
}

TEST_CASE("predicted sample eigenvalues") {
    MatrixXd Z(4, 1);
    Z << 1, 1, 1, 1;
    const auto we = limit::build_w(Z, {3.0});  // d_1(W) = 12
    const VectorXd pred = limit::predict_sample_eigenvalues(we, 1.0, 6);
    CHECK(pred[0] == doctest::Approx(13.0 / 4));
    for (int i = 1; i < 6; ++i) CHECK(pred[i] == doctest::Approx(0.25));
    const VectorXd no_tail = limit::predict_sample_eigenvalues(we, 0.0, 4);
    for (int i = 1; i < 4; ++i) CHECK(no_tail[i] == 0.0);
}

TEST_CASE("predicted dual eigenvectors") {
    SUBCASE("constant scores give the normalized constant vector") {
        MatrixXd Z(4, 1);
        Z << 1, 1, 1, 1;
        const auto we = limit::build_w(Z, {2.0});
        const VectorXd u = limit::predict_dual_eigenvector(we, Z, {2.0}, 1);
        for (int i = 0; i < 4; ++i) CHECK(u[i] == doctest::Approx(0.5));
    }
    SUBCASE("orthogonal case gives unit vectors on the score support") {
        MatrixXd Z(2, 2);
        Z << 1, 0, 0, 1;
        const auto we = limit::build_w(Z, {4.0, 1.0});
        const VectorXd u1 = limit::predict_dual_eigenvector(we, Z, {4.0, 1.0}, 1);
        const VectorXd u2 = limit::predict_dual_eigenvector(we, Z, {4.0, 1.0}, 2);
        CHECK(std::abs(u1[0]) == doctest::Approx(1.0));
        CHECK(u1[1] == doctest::Approx(0.0).scale(1.0));
        CHECK(std::abs(u2[1]) == doctest::Approx(1.0));
    }
    SUBCASE("predicted dual eigenvectors are orthonormal") {
        const MatrixXd Z = random_scores(30, 4, 9);
        const std::vector<double> sigma2{12.0, 8.0, 2.0, 0.5};
        const auto we = limit::build_w(Z, sigma2);
        MatrixXd U(30, 4);
        for (int j = 1; j <= 4; ++j)
            U.col(j - 1) = limit::predict_dual_eigenvector(we, Z, sigma2, j);
        CHECK((U.transpose() * U - MatrixXd::Identity(4, 4)).cwiseAbs().maxCoeff() <
              1e-8);
    }
}

TEST_CASE("simulated HDLSS run approaches the predictions") {
    // One spike, large p: the sample dual eigenvector and scaled eigenvalue
    // should be close to their W-based limits computed from the same draw.
    const model::SpikeSpec spec({12.0}, 1.0, 20000, 20);
    const auto ds = simulate::generate_dataset(
        spec, simulate::ScoreDistribution::standard_normal(), 606);
    const MatrixXd Z_top = ds.Z.topRows(1).transpose();
    const auto we = limit::build_w(Z_top, spec.sigma2);

    pca::PcaOptions opts;
    opts.divisor = pca::Divisor::N;
    const auto res = pca::pca_decompose(ds.X, 1, opts);

    const double observed = res.d[0] / spec.p;
    const double predicted = (we.d[0] + spec.tau2) / spec.n;
    CHECK(std::abs(observed - predicted) / observed < 0.05);

    const VectorXd u_pred = limit::predict_dual_eigenvector(we, Z_top, spec.sigma2, 1);
    CHECK(std::abs(u_pred.dot(res.U_hat.col(0))) > 0.99);
}

TEST_CASE("pair decomposition") {
    SUBCASE("m = 2 has identically zero noise") {
        const MatrixXd Z = random_scores(15, 2, 3);
        const std::vector<double> sigma2{12.0, 8.0};
        const auto we = limit::build_w(Z, sigma2);
        const auto pd = limit::pair_decomposition(we, Z, sigma2, 1, 2);
        CHECK(pd.noise.cwiseAbs().maxCoeff() == 0.0);
    }
    SUBCASE("orthogonal three-component scores leak only through component 3") {
        // Scores supported on disjoint observations: z_l = e_l * sqrt(3).
        MatrixXd Z = MatrixXd::Zero(3, 3);
        Z(0, 0) = Z(1, 1) = Z(2, 2) = std::sqrt(3.0);
        const std::vector<double> sigma2{9.0, 4.0, 1.0};
        const auto we = limit::build_w(Z, sigma2);
        const auto pd = limit::pair_decomposition(we, Z, sigma2, 1, 2);
        // The noise at observation i is gated by z_i3, which vanishes off the
        // support of the third score vector (observations 1 and 2 here).
        CHECK(pd.noise(0, 0) == doctest::Approx(0.0).scale(1.0));
        CHECK(pd.noise(0, 1) == doctest::Approx(0.0).scale(1.0));
        CHECK(pd.noise(1, 0) == doctest::Approx(0.0).scale(1.0));
        CHECK(pd.noise(1, 1) == doctest::Approx(0.0).scale(1.0));
        const MatrixXd pred = limit::predict_scores(we, Z, sigma2);
        for (int i = 0; i < 3; ++i) {
            const Eigen::Vector2d lhs(pred(0, i), pred(1, i));
            const Eigen::Vector2d scores(std::sqrt(sigma2[0]) * Z(i, 0),
                                         std::sqrt(sigma2[1]) * Z(i, 1));
            const Eigen::Vector2d rhs = pd.scaling.asDiagonal() * pd.rotation * scores +
                                        pd.noise.col(i);
            CHECK((lhs - rhs).cwiseAbs().maxCoeff() < 1e-12);
        }
    }
    SUBCASE("recomposition identity holds for every pair at m = 5") {
        const int n = 40;
        const MatrixXd Z = random_scores(n, 5, 77);
        const std::vector<double> sigma2{12.0, 8.0, 0.7, 0.1, 0.02};
        const auto we = limit::build_w(Z, sigma2);
        const MatrixXd pred = limit::predict_scores(we, Z, sigma2);
        for (int j = 1; j <= 5; ++j) {
            for (int k = 1; k <= 5; ++k) {
                if (j == k) continue;
                const auto pd = limit::pair_decomposition(we, Z, sigma2, j, k);
                for (int i = 0; i < n; ++i) {
                    const Eigen::Vector2d lhs(pred(j - 1, i), pred(k - 1, i));
                    const Eigen::Vector2d scores(std::sqrt(sigma2[j - 1]) * Z(i, j - 1),
                                                 std::sqrt(sigma2[k - 1]) * Z(i, k - 1));
                    const Eigen::Vector2d rhs =
                        pd.scaling.asDiagonal() * pd.rotation * scores + pd.noise.col(i);
                    CHECK((lhs - rhs).cwiseAbs().maxCoeff() < 1e-10);
                }
            }
        }
    }
    SUBCASE("j = k is rejected") {
        const MatrixXd Z = random_scores(10, 3, 1);
        const std::vector<double> sigma2{4.0, 2.0, 1.0};
        const auto we = limit::build_w(Z, sigma2);
        CHECK_THROWS_AS(limit::pair_decomposition(we, Z, sigma2, 2, 2),
                        std::invalid_argument);
    }
}

TEST_CASE("asymptotic noise variance") {
    SUBCASE("five-component setup, frozen against the brute-force sum") {
        const std::vector<double> sigma2{12.0, 8.0, 0.7, 0.1, 0.02};
        const int n = 60;
        // Brute-force oracle: direct evaluation of the strength-ratio sum.
        double S1 = 0.0, S2 = 0.0;
        for (int l = 3; l <= 5; ++l) {
            S1 += std::pow(sigma2[0] / sigma2[l - 1] - 1.0, -2.0);
            S2 += std::pow(sigma2[1] / sigma2[l - 1] - 1.0, -2.0);
        }
        const auto nv = limit::noise_variance_asymptotic(sigma2, n, 1, 2);
        CHECK(nv.sd_j == doctest::Approx(std::sqrt(S1 / n)).epsilon(1e-12));
        CHECK(nv.sd_k == doctest::Approx(std::sqrt(S2 / n)).epsilon(1e-12));
        // Frozen value from the oracle; magnitude 1e-2.
        CHECK(nv.sd_j == doctest::Approx(0.0080735).epsilon(1e-4));
        CHECK(nv.sd_j > 0.003);
        CHECK(nv.sd_j < 0.03);
    }
    SUBCASE("gene-expression strengths") {
        const std::vector<double> sigma2{0.133, 0.068, 0.044, 0.033, 0.031};
        const auto nv = limit::noise_variance_asymptotic(sigma2, 100, 1, 2);
        CHECK(nv.var_j * 100 == doctest::Approx(0.4457).epsilon(1e-3));
        CHECK(nv.sd_j == doctest::Approx(0.0668).epsilon(2e-3));
    }
    SUBCASE("m = 2 gives zero variance") {
        const auto nv = limit::noise_variance_asymptotic({12.0, 8.0}, 60, 1, 2);
        CHECK(nv.var_j == 0.0);
        CHECK(nv.var_k == 0.0);
    }
    SUBCASE("tied strengths are rejected") {
        CHECK_THROWS_AS(limit::noise_variance_asymptotic({4.0, 2.0, 4.0}, 10, 1, 2),
                        std::invalid_argument);
    }
    SUBCASE("matches the delta-method form sum sigma_l^4 / (sigma_j^2-sigma_l^2)^2") {
        std::mt19937_64 gen(10);
        for (int trial = 0; trial < 20; ++trial) {
            std::vector<double> sigma2;
            double value = 20.0;
            for (int l = 0; l < 5; ++l) {
                value *= 0.3 + 0.6 * std::generate_canonical<double, 53>(gen);
                sigma2.push_back(value);
            }
            const auto nv = limit::noise_variance_asymptotic(sigma2, 50, 1, 2);
            double tau11 = 0.0;
            for (int l = 3; l <= 5; ++l) {
                const double gap = sigma2[0] - sigma2[l - 1];
                tau11 += std::pow(sigma2[l - 1], 2) / (gap * gap);
            }
            CHECK(nv.var_j == doctest::Approx(tau11 / 50).epsilon(1e-12));
        }
    }
}

TEST_CASE("Wishart large-n asymptotics") {
    SUBCASE("frozen two-component example") {
        const auto wa = limit::wishart_asymptotics({4.0, 1.0}, 1);
        CHECK(wa.eigvec_cov_diag[0] == 0.0);
        CHECK(wa.eigvec_cov_diag[1] == doctest::Approx(4.0 / 9.0));
        CHECK(limit::wishart_asymptotics({3.0}, 1).eigval_var == doctest::Approx(18.0));
    }
    SUBCASE("Monte Carlo cross-check of eigenvector and eigenvalue variances") {
        const std::vector<double> sigma2{4.0, 1.0};
        const int n = 2000, R = 2000;
        std::vector<double> v12(R), dvar(R);
        for (int r = 0; r < R; ++r) {
            rng::Stream stream(rng::substream(99, rng::kReplicateTag, 0, r));
            MatrixXd Z(n, 2);
            for (int i = 0; i < n; ++i)
                for (int l = 0; l < 2; ++l) Z(i, l) = stream.normal();
            const auto we = limit::build_w(Z, sigma2);
            v12[r] = std::sqrt(static_cast<double>(n)) * we.V(1, 0);
            dvar[r] = std::sqrt(static_cast<double>(n)) * (we.d[0] / n - sigma2[0]);
        }
        const auto wa = limit::wishart_asymptotics(sigma2, 1);
        CHECK(stats::sample_variance(v12) ==
              doctest::Approx(wa.eigvec_cov_diag[1]).epsilon(0.10));
        CHECK(stats::sample_variance(dvar) == doctest::Approx(wa.eigval_var).epsilon(0.10));
    }
}

TEST_CASE("limit prediction bundle flags weakly separated components") {
    MatrixXd Z(2, 2);
    Z << 1, 0, 0, 1;
    const auto close = limit::build_w(Z, {1.0, 0.99});
    const auto lp = limit::make_limit_prediction(close, Z, {1.0, 0.99}, 0.5, 4);
    REQUIRE(lp.weakly_separated.size() == 1);
    CHECK(lp.weakly_separated[0] == 1);
    CHECK(lp.pairs.size() == 1);
    CHECK(lp.predicted_eigenvalues.size() == 4);
}
