#include "pervasive/pca.hpp"

#include <cmath>
#include <stdexcept>

namespace pervasive::pca {

namespace {

MatrixXd centered_copy(const MatrixXd& X) {
    return X.colwise() - X.rowwise().mean();
}

void flip_to_positive_max(Eigen::Ref<Eigen::VectorXd> u) {
    Eigen::Index imax = 0;
    u.cwiseAbs().maxCoeff(&imax);
    if (u[imax] < 0.0) u = -u;
}

}  // namespace

MatrixXd dual_gram(const MatrixXd& X, const PcaOptions& opts) {
    const int n = static_cast<int>(X.cols());
    if (n < 2) throw std::invalid_argument("dual_gram: needs at least two observations");
    if (!X.allFinite()) throw std::invalid_argument("dual_gram: non-finite entries");
    const double div = opts.divisor == Divisor::N ? n : n - 1;
    MatrixXd G;
    if (opts.centered) {
        const MatrixXd Xc = centered_copy(X);
        G.noalias() = Xc.transpose() * Xc;
    } else {
        G.noalias() = X.transpose() * X;
    }
    G /= div;
    // Symmetrize away round-off so the eigensolver sees an exact symmetric input.
    G = 0.5 * (G + G.transpose()).eval();
    return G;
}

PcaResult pca_decompose(const MatrixXd& X, int k, const PcaOptions& opts) {
    const int p = static_cast<int>(X.rows());
    const int n = static_cast<int>(X.cols());
    const int n_eff = opts.centered ? n - 1 : n;
    const int rank_cap = std::min(p, n_eff);
    if (k < 1 || k > rank_cap)
        throw std::invalid_argument("pca_decompose: k must lie in [1, min(p, n_eff)]");

    const MatrixXd G = dual_gram(X, opts);
    Eigen::SelfAdjointEigenSolver<MatrixXd> solver(G);
    if (solver.info() != Eigen::Success)
        throw std::runtime_error("pca_decompose: eigendecomposition failed");

    PcaResult result;
    result.centered = opts.centered;
    result.divisor = opts.divisor;

    // Eigen returns ascending order; we want descending.
    result.d.resize(rank_cap);
    for (int j = 0; j < rank_cap; ++j) result.d[j] = solver.eigenvalues()[n - 1 - j];

    result.U_hat.resize(n, k);
    for (int j = 0; j < k; ++j) {
        result.U_hat.col(j) = solver.eigenvectors().col(n - 1 - j);
        flip_to_positive_max(result.U_hat.col(j));
    }

    // With v_hat_j = X u_j / ||X u_j|| and X^T X u_j = div * d_j u_j, the raw
    // scores collapse to s_j = sqrt(div * d_j) u_j and the standardized
    // scores to z_j = sqrt(div) u_j.
    const double div = result.divisor_value(n);
    result.Shat.resize(k, n);
    result.Zhat.resize(k, n);
    const double zero_tol = 1e-12 * std::max(1.0, result.d.size() > 0 ? result.d[0] : 0.0);
    for (int j = 0; j < k; ++j) {
        const double dj = result.d[j];
        if (dj <= zero_tol) {
            result.Shat.row(j).setZero();
            result.Zhat.row(j).setZero();
            result.zero_score_components.push_back(j + 1);
            continue;
        }
        result.Shat.row(j) = std::sqrt(div * dj) * result.U_hat.col(j).transpose();
        result.Zhat.row(j) = std::sqrt(div) * result.U_hat.col(j).transpose();
    }
    return result;
}

MatrixXd primal_eigenvectors(const MatrixXd& X, const PcaResult& result) {
    const MatrixXd Xw = result.centered ? centered_copy(X) : X;
    const int k = static_cast<int>(result.U_hat.cols());
    MatrixXd V(X.rows(), k);
    for (int j = 0; j < k; ++j) {
        VectorXd w = Xw * result.U_hat.col(j);
        const double norm = w.norm();
        if (norm == 0.0)
            throw std::runtime_error("primal_eigenvectors: zero image for component " +
                                     std::to_string(j + 1));
        V.col(j) = w / norm;
    }
    return V;
}

}  // namespace pervasive::pca
