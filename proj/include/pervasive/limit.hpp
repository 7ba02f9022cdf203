#pragma once

#include <Eigen/Dense>
#include <vector>

// Asymptotic (p -> infinity, n fixed) behavior of sample PCA under linearly
// growing spike eigenvalues: the stochastic m x m matrix W built from scaled
// population scores, the scaled-rotation limit of the standardized sample
// scores, the limiting sample eigenvalues and dual eigenvectors, the pairwise
// scaling / rotation / noise decomposition, and the large-n noise variance.
namespace pervasive::limit {

using Eigen::MatrixXd;
using Eigen::Matrix2d;
using Eigen::Vector2d;
using Eigen::VectorXd;

// Eigensystem of W = Ztilde^T Ztilde where Ztilde has columns sigma_j z_j.
struct WEigen {
    MatrixXd W;        // m x m, positive semidefinite
    VectorXd d;        // eigenvalues, descending
    MatrixXd V;        // m x m; column j is the eigenvector for d[j], sign-fixed
    int n = 0;         // number of observations behind W

    int m() const { return static_cast<int>(d.size()); }
};

// Z_top is n x m (column j holds the scores of spike j); sigma2 holds the
// signal strengths sigma_j^2.
WEigen build_w(const MatrixXd& Z_top, const std::vector<double>& sigma2);

// Limiting standardized sample scores, m x n:
// row j, entry i = sqrt(n / d_j(W)) * sum_l sigma_l z_il v_j[l](W).
MatrixXd predict_scores(const WEigen& we, const MatrixXd& Z_top,
                        const std::vector<double>& sigma2);

// Limits of the scaled sample eigenvalues p^{-1} d_j: (d_j(W) + tau2) / n for
// j <= m, tau2 / n afterwards; `count` values in total.
VectorXd predict_sample_eigenvalues(const WEigen& we, double tau2, int count);

// Limit of the j-th dual eigenvector (unit length-n vector), 1-based j <= m.
VectorXd predict_dual_eigenvector(const WEigen& we, const MatrixXd& Z_top,
                                  const std::vector<double>& sigma2, int j);

// Pairwise decomposition of the limiting scores of components (j, k):
// [pred_j; pred_k] = scaling * rotation * [sigma_j z_j; sigma_k z_k] + noise.
struct PairDecomposition {
    int j = 0, k = 0;        // 1-based component indices
    Vector2d scaling;        // sqrt(n / d_j(W)), sqrt(n / d_k(W))
    Matrix2d rotation;       // rows: components of v_j(W), v_k(W) at (j, k)
    MatrixXd noise;          // 2 x n leakage from the other m-2 components
};

PairDecomposition pair_decomposition(const WEigen& we, const MatrixXd& Z_top,
                                     const std::vector<double>& sigma2, int j, int k);

// Large-n variance of the pairwise noise terms,
// var(eps_j) = (1/n) sum_{l != j,k} (sigma_j^2 / sigma_l^2 - 1)^{-2}.
struct NoiseVariance {
    int j = 0, k = 0;
    int n = 0;
    double var_j = 0.0, var_k = 0.0;
    double sd_j = 0.0, sd_k = 0.0;
    // Per-l summands (l = 1..m, zero at l = j and l = k).
    VectorXd components_j;
    VectorXd components_k;
};

NoiseVariance noise_variance_asymptotic(const std::vector<double>& sigma2, int n,
                                        int j, int k);

// Large-n Wishart limits for W/n: the covariance of sqrt(n)(v_j(W) - e_j)
// (diagonal, entry i = sigma_j^2 sigma_i^2 / (sigma_j^2 - sigma_i^2)^2, zero
// at i = j) and the variance 2 sigma_j^4 of sqrt(n)(d_j(W/n) - sigma_j^2).
struct WishartAsymptotics {
    VectorXd eigvec_cov_diag;
    double eigval_var = 0.0;
};

WishartAsymptotics wishart_asymptotics(const std::vector<double>& sigma2, int j);

// Bundle of everything the limit predicts for one draw of population scores.
struct LimitPrediction {
    MatrixXd predicted_scores;          // m x n
    VectorXd predicted_eigenvalues;     // `count` limiting scaled eigenvalues
    std::vector<PairDecomposition> pairs;  // all j < k pairs
    // Components j with d_j(W)/d_{j+1}(W) < 1.05: the rotation block mixes
    // them strongly and pointwise predictions are unreliable.
    std::vector<int> weakly_separated;
};

LimitPrediction make_limit_prediction(const WEigen& we, const MatrixXd& Z_top,
                                      const std::vector<double>& sigma2,
                                      double tau2, int eigenvalue_count);

}  // namespace pervasive::limit
