#include <doctest.h>

#include <Eigen/Dense>
#include <algorithm>
#include <random>

#include "pervasive/pca.hpp"

using namespace pervasive;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

MatrixXd random_matrix(int p, int n, std::uint64_t seed) {
    std::mt19937_64 gen(seed);
    std::normal_distribution<double> normal;
    MatrixXd X(p, n);
    for (int i = 0; i < p; ++i)
        for (int j = 0; j < n; ++j) X(i, j) = normal(gen);
    return X;
}

// Dense p x p oracle: eigenvalues of the covariance route, descending.
VectorXd covariance_spectrum(const MatrixXd& X, const pca::PcaOptions& opts) {
    MatrixXd Xw = X;
    if (opts.centered) Xw = X.colwise() - X.rowwise().mean();
    const double div =
        opts.divisor == pca::Divisor::N ? X.cols() : X.cols() - 1;
    const MatrixXd S = Xw * Xw.transpose() / div;
    Eigen::SelfAdjointEigenSolver<MatrixXd> solver(S);
    return solver.eigenvalues().reverse();
}

}  // namespace

TEST_CASE("dual gram hand examples") {
    MatrixXd X(2, 2);
    X << 1, -1, 1, -1;
    SUBCASE("uncentered, divisor n-1") {
        const MatrixXd G = pca::dual_gram(X);
        CHECK(G(0, 0) == doctest::Approx(2));
        CHECK(G(0, 1) == doctest::Approx(-2));
        CHECK(G(1, 0) == doctest::Approx(-2));
        CHECK(G(1, 1) == doctest::Approx(2));
    }
    SUBCASE("zero matrix maps to zero") {
        CHECK(pca::dual_gram(MatrixXd::Zero(3, 4)).cwiseAbs().maxCoeff() == 0.0);
    }
    SUBCASE("non-finite entries are rejected") {
        X(0, 0) = std::numeric_limits<double>::quiet_NaN();
        CHECK_THROWS_AS(pca::dual_gram(X), std::invalid_argument);
    }
    SUBCASE("single observation is rejected") {
        CHECK_THROWS_AS(pca::dual_gram(MatrixXd::Ones(3, 1)), std::invalid_argument);
    }
}

TEST_CASE("dual route matches the dense covariance route") {
    struct Size {
        int p, n;
    };
    for (const Size size : {Size{50, 10}, Size{200, 50}}) {
        const MatrixXd X = random_matrix(size.p, size.n, 19 + size.p);
        for (const bool centered : {false, true}) {
            pca::PcaOptions opts;
            opts.centered = centered;
            const MatrixXd G = pca::dual_gram(X, opts);
            Eigen::SelfAdjointEigenSolver<MatrixXd> solver(G);
            const VectorXd dual = solver.eigenvalues().reverse();
            const VectorXd primal = covariance_spectrum(X, opts);
            const int nonzero = centered ? size.n - 1 : size.n;
            for (int i = 0; i < nonzero; ++i)
                CHECK(std::abs(dual[i] - primal[i]) / std::max(1.0, primal[i]) < 1e-9);
        }
    }
}

TEST_CASE("pca_decompose hand example") {
    MatrixXd X(2, 2);
    X << 1, -1, 1, -1;
    const auto res = pca::pca_decompose(X, 1);
    CHECK(res.d[0] == doctest::Approx(4.0));
    CHECK(res.Zhat(0, 0) == doctest::Approx(std::sqrt(2.0) / 2));
    CHECK(res.Zhat(0, 1) == doctest::Approx(-std::sqrt(2.0) / 2));
    CHECK(res.d.size() == 2);
    CHECK(res.d[1] == doctest::Approx(0.0).scale(1.0));
}

TEST_CASE("orthogonal rows with norms 2 and 1") {
    const int n = 8;
    MatrixXd X = MatrixXd::Zero(2, n);
    // Two orthogonal unit rows scaled by 2 and 1.
    VectorXd a = VectorXd::Zero(n), b = VectorXd::Zero(n);
    a[0] = a[1] = 1.0 / std::sqrt(2.0);
    b[2] = b[3] = 1.0 / std::sqrt(2.0);
    X.row(0) = 2.0 * a.transpose();
    X.row(1) = 1.0 * b.transpose();
    const auto res = pca::pca_decompose(X, 2);
    CHECK(res.d[0] == doctest::Approx(4.0 / (n - 1)));
    CHECK(res.d[1] == doctest::Approx(1.0 / (n - 1)));
}

TEST_CASE("full decomposition reconstructs X") {
    const MatrixXd X = random_matrix(6, 9, 4);
    const int k = 6;
    const auto res = pca::pca_decompose(X, k);
    const MatrixXd V = pca::primal_eigenvectors(X, res);
    MatrixXd rebuilt = MatrixXd::Zero(6, 9);
    for (int j = 0; j < k; ++j)
        rebuilt += std::sqrt(res.d[j]) * V.col(j) * res.Zhat.row(j);
    CHECK((rebuilt - X).cwiseAbs().maxCoeff() < 1e-8);
}

TEST_CASE("orthonormality of dual and primal eigenvectors") {
    const MatrixXd X = random_matrix(40, 12, 8);
    const auto res = pca::pca_decompose(X, 12);
    const MatrixXd V = pca::primal_eigenvectors(X, res);
    CHECK((res.U_hat.transpose() * res.U_hat - MatrixXd::Identity(12, 12))
              .cwiseAbs()
              .maxCoeff() < 1e-10);
    CHECK((V.transpose() * V - MatrixXd::Identity(12, 12)).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("standardized scores have norm^2 equal to the divisor") {
    const MatrixXd X = random_matrix(30, 10, 21);
    pca::PcaOptions opts;
    opts.divisor = pca::Divisor::N;
    const auto res_n = pca::pca_decompose(X, 3, opts);
    for (int j = 0; j < 3; ++j)
        CHECK(res_n.Zhat.row(j).squaredNorm() == doctest::Approx(10.0).epsilon(1e-8));
    opts.divisor = pca::Divisor::NMinus1;
    opts.centered = true;
    const auto res_c = pca::pca_decompose(X, 3, opts);
    for (int j = 0; j < 3; ++j)
        CHECK(res_c.Zhat.row(j).squaredNorm() == doctest::Approx(9.0).epsilon(1e-8));
}

TEST_CASE("scale equivariance") {
    const MatrixXd X = random_matrix(25, 8, 3);
    const double c = 2.5;
    const auto base = pca::pca_decompose(X, 4);
    const auto scaled = pca::pca_decompose(c * X, 4);
    for (int j = 0; j < 4; ++j) {
        CHECK(scaled.d[j] == doctest::Approx(c * c * base.d[j]).epsilon(1e-10));
        const double sign =
            base.Zhat.row(j).dot(scaled.Zhat.row(j)) >= 0 ? 1.0 : -1.0;
        CHECK((scaled.Zhat.row(j) - sign * base.Zhat.row(j)).cwiseAbs().maxCoeff() <
              1e-9);
    }
}

TEST_CASE("scores are invariant under variable permutation") {
    const MatrixXd X = random_matrix(25, 8, 14);
    Eigen::PermutationMatrix<Eigen::Dynamic> P(25);
    P.setIdentity();
    std::mt19937_64 gen(5);
    std::shuffle(P.indices().data(), P.indices().data() + 25, gen);
    const auto base = pca::pca_decompose(X, 3);
    const auto permuted = pca::pca_decompose(P * X, 3);
    for (int j = 0; j < 3; ++j) {
        const double sign =
            base.Zhat.row(j).dot(permuted.Zhat.row(j)) >= 0 ? 1.0 : -1.0;
        CHECK((permuted.Zhat.row(j) - sign * base.Zhat.row(j)).cwiseAbs().maxCoeff() <
              1e-9);
    }
}

TEST_CASE("zero eigenvalues flag instead of failing") {
    MatrixXd X(3, 4);
    X.setZero();
    X.row(0) << 1, 2, 3, 4;  // rank 1
    const auto res = pca::pca_decompose(X, 3);
    CHECK(res.zero_score_components.size() == 2);
    CHECK(res.Zhat.row(1).cwiseAbs().maxCoeff() == 0.0);
    CHECK(res.Zhat.row(2).cwiseAbs().maxCoeff() == 0.0);
    CHECK(res.Zhat.row(0).cwiseAbs().maxCoeff() > 0.0);
}

TEST_CASE("k bounds are validated") {
    const MatrixXd X = random_matrix(5, 4, 2);
    CHECK_THROWS_AS(pca::pca_decompose(X, 0), std::invalid_argument);
    CHECK_THROWS_AS(pca::pca_decompose(X, 5), std::invalid_argument);
    pca::PcaOptions opts;
    opts.centered = true;
    CHECK_THROWS_AS(pca::pca_decompose(X, 4, opts), std::invalid_argument);
    CHECK_NOTHROW(pca::pca_decompose(X, 3, opts));
}
