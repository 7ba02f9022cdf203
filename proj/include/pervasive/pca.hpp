#pragma once

#include <Eigen/Dense>
#include <vector>

// Sample PCA through the n x n dual Gram matrix, the only route that is
// practical when p >> n. Eigenvalue and score conventions are explicit:
// centering and the variance divisor are independent knobs, carried in the
// result so downstream reports always state which convention produced them.
// The asymptotic checks use uncentered data with divisor n; the real-data
// path defaults to centered with divisor n - 1.
namespace pervasive::pca {

using Eigen::MatrixXd;
using Eigen::VectorXd;

enum class Divisor { N, NMinus1 };

struct PcaOptions {
    bool centered = false;
    Divisor divisor = Divisor::NMinus1;
};

// X^T X / divisor (columns mean-centered first when centered). Errors on
// non-finite entries or n < 2.
MatrixXd dual_gram(const MatrixXd& X, const PcaOptions& opts = {});

struct PcaResult {
    VectorXd d;        // sample eigenvalues, descending, length min(p, n_eff)
    MatrixXd U_hat;    // n x k dual eigenvectors, orthonormal, sign-fixed
    MatrixXd Zhat;     // k x n standardized scores, row j = s_j / sqrt(d_j)
    MatrixXd Shat;     // k x n raw scores v_hat_j^T X
    bool centered = false;
    Divisor divisor = Divisor::NMinus1;
    // Components whose eigenvalue was numerically zero: their standardized
    // scores are set to zero instead of failing the decomposition.
    std::vector<int> zero_score_components;

    double divisor_value(int n) const {
        return divisor == Divisor::N ? static_cast<double>(n)
                                     : static_cast<double>(n - 1);
    }
};

// Top-k eigensystem of the dual Gram matrix. Sign convention: each dual
// eigenvector is flipped so its largest-magnitude entry (first such index on
// ties) is positive.
PcaResult pca_decompose(const MatrixXd& X, int k, const PcaOptions& opts = {});

// Primal eigenvectors v_hat_j = X u_hat_j / ||X u_hat_j|| recovered on
// demand (p x k). Uses centered X when the result was centered.
MatrixXd primal_eigenvectors(const MatrixXd& X, const PcaResult& result);

}  // namespace pervasive::pca
