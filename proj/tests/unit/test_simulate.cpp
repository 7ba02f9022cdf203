#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>

#include "pervasive/model.hpp"
#include "pervasive/simulate.hpp"

using namespace pervasive;
using Eigen::MatrixXd;
using Eigen::VectorXd;

TEST_CASE("draw_scores: unit variance, determinism, row-keyed streams") {
    const auto normal = simulate::ScoreDistribution::standard_normal();

    SUBCASE("normal rows have sample variance near 1") {
        const MatrixXd Z = simulate::draw_scores(normal, 2, 100000, 42);
        for (int j = 0; j < 2; ++j) {
            const double var = Z.row(j).squaredNorm() / Z.cols() -
                               std::pow(Z.row(j).mean(), 2);
            CHECK(var > 0.98);
            CHECK(var < 1.02);
        }
    }
    SUBCASE("student-t scores are rescaled to unit variance") {
        const auto t5 = simulate::ScoreDistribution::student_t(5);
        const MatrixXd Z = simulate::draw_scores(t5, 1, 1000000, 7);
        const double var = Z.row(0).squaredNorm() / Z.cols() -
                           std::pow(Z.row(0).mean(), 2);
        CHECK(var == doctest::Approx(1.0).epsilon(0.05));
    }
    SUBCASE("same seed gives identical matrices") {
        const MatrixXd a = simulate::draw_scores(normal, 20, 30, 99);
        const MatrixXd b = simulate::draw_scores(normal, 20, 30, 99);
        CHECK(a == b);
    }
    SUBCASE("row j does not depend on how many rows are drawn") {
        const MatrixXd small = simulate::draw_scores(normal, 3, 25, 5);
        const MatrixXd big = simulate::draw_scores(normal, 200, 25, 5);
        CHECK(small == big.topRows(3));
    }
    SUBCASE("df <= 4 is rejected") {
        CHECK_THROWS_AS(simulate::ScoreDistribution::student_t(4), std::invalid_argument);
    }
}

TEST_CASE("generated datasets satisfy the eigen-representation exactly") {
    const auto normal = simulate::ScoreDistribution::standard_normal();

    auto check_reconstruction = [](const simulate::Dataset& ds,
                                   const simulate::EigenBasis& basis) {
        const MatrixXd Q = basis.dense_eigenvectors();
        MatrixXd X = MatrixXd::Zero(ds.p(), ds.n());
        for (int j = 0; j < ds.p(); ++j)
            X += std::sqrt(ds.lambda[j]) * Q.col(j) * ds.Z.row(j);
        CHECK((X - ds.X).cwiseAbs().maxCoeff() < 1e-12 * std::max(1.0, X.cwiseAbs().maxCoeff()));
        // The basis really is an orthonormal eigenbasis.
        CHECK((Q.transpose() * Q - MatrixXd::Identity(ds.p(), ds.p())).cwiseAbs().maxCoeff() <
              1e-12);
    };

    SUBCASE("spike model, flat tail") {
        const model::SpikeSpec spec({12.0, 8.0}, 1.0, 23, 9);
        const auto ds = simulate::generate_dataset(spec, normal, 31);
        check_reconstruction(ds, simulate::eigenbasis(spec));
    }
    SUBCASE("spike model, decaying tail") {
        const model::SpikeSpec spec({12.0, 8.0}, 1.0, 23, 9,
                                    model::TailProfile::LinearDecay);
        const auto ds = simulate::generate_dataset(spec, normal, 31);
        check_reconstruction(ds, simulate::eigenbasis(spec));
        // Tail eigenvalues decay but keep mean tau2.
        const VectorXd tail = ds.lambda.tail(21);
        CHECK(tail.mean() == doctest::Approx(1.0));
        CHECK(tail[0] > tail[20]);
    }
    SUBCASE("spike model, random orthonormal vectors") {
        const model::SpikeSpec spec({5.0}, 0.5, 17, 6, model::TailProfile::Flat,
                                    model::SpikeVectors::RandomOrthonormal, 3);
        const auto ds = simulate::generate_dataset(spec, normal, 31);
        check_reconstruction(ds, simulate::eigenbasis(spec));
    }
    SUBCASE("block model with leftover coordinates") {
        const model::BlockSpec spec(1.5, {{0.4, 0.8}, {0.3, 0.4}}, 21);
        const auto ds = simulate::generate_dataset(spec, 8, normal, 77);
        check_reconstruction(ds, simulate::eigenbasis(spec));
        CHECK(ds.Z.rows() == 21);
        CHECK(ds.Z.cols() == 8);
    }
    SUBCASE("student-t scores reconstruct the same way") {
        const model::SpikeSpec spec({12.0, 8.0}, 1.0, 23, 9);
        const auto ds = simulate::generate_dataset(
            spec, simulate::ScoreDistribution::student_t(6), 31);
        check_reconstruction(ds, simulate::eigenbasis(spec));
    }
}

TEST_CASE("noise-free rank-1 model") {
    const model::SpikeSpec spec({1.0}, 0.0, 4, 3);
    const auto ds = simulate::generate_dataset(
        spec, simulate::ScoreDistribution::standard_normal(), 11);
    const Eigen::JacobiSVD<MatrixXd> svd(ds.X);
    CHECK(svd.singularValues()[0] > 0.0);
    for (int i = 1; i < svd.singularValues().size(); ++i)
        CHECK(svd.singularValues()[i] < 1e-12 * svd.singularValues()[0]);
    // Stored Z row 1 is exactly the generating score vector.
    const auto scores = simulate::population_scores(ds, 1);
    CHECK((scores.z.transpose() - ds.Z.row(0)).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("sample covariance approaches the materialized covariance") {
    SUBCASE("entrywise on the spike blocks") {
        const model::SpikeSpec spec({12.0, 8.0}, 1.0, 5, 100000);
        const auto ds = simulate::generate_dataset(
            spec, simulate::ScoreDistribution::standard_normal(), 1234);
        const MatrixXd sigma_hat = ds.X * ds.X.transpose() / ds.n();
        const MatrixXd sigma = model::materialize_covariance(spec);
        // Spike blocks: coordinates {0,1} belong to spike 1, {2,3} to spike 2.
        for (int i = 0; i < 4; ++i)
            for (int j = 0; j < 4; ++j) {
                if (i / 2 != j / 2) continue;
                CHECK(sigma_hat(i, j) ==
                      doctest::Approx(sigma(i, j)).epsilon(0.05));
            }
    }
    SUBCASE("max-norm over the whole matrix") {
        const model::SpikeSpec spec({4.0, 2.0}, 1.0, 30, 100000);
        const auto ds = simulate::generate_dataset(
            spec, simulate::ScoreDistribution::standard_normal(), 77);
        const MatrixXd sigma_hat = ds.X * ds.X.transpose() / ds.n();
        const MatrixXd sigma = model::materialize_covariance(spec);
        const double rel = (sigma_hat - sigma).cwiseAbs().maxCoeff() /
                           sigma.cwiseAbs().maxCoeff();
        CHECK(rel < 0.05);
    }
}

TEST_CASE("population scores") {
    const model::BlockSpec spec(1.0, {{0.3, 0.9}, {0.3, 0.6}, {0.3, 0.3}}, 100);
    const auto ds = simulate::generate_dataset(
        spec, 40, simulate::ScoreDistribution::standard_normal(), 2);

    SUBCASE("raw scores have variance lambda_j") {
        const auto huge = simulate::generate_dataset(
            spec, 10000, simulate::ScoreDistribution::standard_normal(), 3);
        const auto scores = simulate::population_scores(huge, 1);
        const double var = scores.s.squaredNorm() / scores.s.size() -
                           std::pow(scores.s.mean(), 2);
        CHECK(var == doctest::Approx(huge.lambda[0]).epsilon(0.10));
    }
    SUBCASE("index is 1-based and validated") {
        CHECK_THROWS_AS(simulate::population_scores(ds, 0), std::invalid_argument);
        CHECK_THROWS_AS(simulate::population_scores(ds, 101), std::invalid_argument);
        CHECK_NOTHROW(simulate::population_scores(ds, 100));
    }
}

TEST_CASE("dataset shapes and metadata") {
    const model::BlockSpec spec(1.0, {{0.3, 0.9}, {0.3, 0.6}, {0.3, 0.3}}, 100);
    const auto ds = simulate::generate_dataset(
        spec, 50, simulate::ScoreDistribution::standard_normal(), 50);
    CHECK(ds.p() == 100);
    CHECK(ds.n() == 50);
    CHECK(ds.m == 3);
    // Effective strengths lambda_j / p.
    CHECK(ds.spike_sigma2[0] == doctest::Approx(27.1 / 100));
    CHECK(ds.tau2 == doctest::Approx(ds.lambda.tail(97).sum() / 100));
}
