#include "pervasive/limit.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace pervasive::limit {

namespace {

MatrixXd scaled_scores(const MatrixXd& Z_top, const std::vector<double>& sigma2) {
    const int m = static_cast<int>(sigma2.size());
    if (Z_top.cols() != m)
        throw std::invalid_argument("scaled scores: Z_top must have one column per spike");
    if (Z_top.rows() < 1)
        throw std::invalid_argument("scaled scores: empty score matrix");
    MatrixXd Zt = Z_top;
    for (int j = 0; j < m; ++j) {
        if (!(sigma2[j] > 0.0))
            throw std::invalid_argument("scaled scores: signal strengths must be positive");
        Zt.col(j) *= std::sqrt(sigma2[j]);
    }
    return Zt;
}

void check_component(const WEigen& we, int j, const char* where) {
    if (j < 1 || j > we.m())
        throw std::invalid_argument(std::string(where) + ": component index out of range");
    if (!(we.d[j - 1] > 0.0))
        throw std::invalid_argument(std::string(where) + ": degenerate eigenvalue d_" +
                                    std::to_string(j) + "(W) = 0");
}

}  // namespace

WEigen build_w(const MatrixXd& Z_top, const std::vector<double>& sigma2) {
    if (sigma2.empty()) throw std::invalid_argument("build_w: needs m >= 1");
    const MatrixXd Zt = scaled_scores(Z_top, sigma2);
    const int m = static_cast<int>(sigma2.size());

    WEigen we;
    we.n = static_cast<int>(Z_top.rows());
    we.W.noalias() = Zt.transpose() * Zt;
    we.W = 0.5 * (we.W + we.W.transpose()).eval();

    Eigen::SelfAdjointEigenSolver<MatrixXd> solver(we.W);
    if (solver.info() != Eigen::Success)
        throw std::runtime_error("build_w: eigendecomposition failed");
    we.d.resize(m);
    we.V.resize(m, m);
    for (int j = 0; j < m; ++j) {
        we.d[j] = solver.eigenvalues()[m - 1 - j];
        we.V.col(j) = solver.eigenvectors().col(m - 1 - j);
        Eigen::Index imax = 0;
        we.V.col(j).cwiseAbs().maxCoeff(&imax);
        if (we.V(imax, j) < 0.0) we.V.col(j) = -we.V.col(j);
    }
    return we;
}

MatrixXd predict_scores(const WEigen& we, const MatrixXd& Z_top,
                        const std::vector<double>& sigma2) {
    const MatrixXd Zt = scaled_scores(Z_top, sigma2);
    const int m = we.m();
    const int n = static_cast<int>(Z_top.rows());
    MatrixXd pred(m, n);
    for (int j = 1; j <= m; ++j) {
        check_component(we, j, "predict_scores");
        pred.row(j - 1) =
            std::sqrt(n / we.d[j - 1]) * (Zt * we.V.col(j - 1)).transpose();
    }
    return pred;
}

VectorXd predict_sample_eigenvalues(const WEigen& we, double tau2, int count) {
    if (count < 0) throw std::invalid_argument("predict_sample_eigenvalues: count < 0");
    if (tau2 < 0.0) throw std::invalid_argument("predict_sample_eigenvalues: tau2 < 0");
    const int m = we.m();
    const double n = we.n;
    VectorXd out(count);
    for (int i = 0; i < count; ++i)
        out[i] = i < m ? (we.d[i] + tau2) / n : tau2 / n;
    return out;
}

VectorXd predict_dual_eigenvector(const WEigen& we, const MatrixXd& Z_top,
                                  const std::vector<double>& sigma2, int j) {
    check_component(we, j, "predict_dual_eigenvector");
    const MatrixXd Zt = scaled_scores(Z_top, sigma2);
    return Zt * we.V.col(j - 1) / std::sqrt(we.d[j - 1]);
}

PairDecomposition pair_decomposition(const WEigen& we, const MatrixXd& Z_top,
                                     const std::vector<double>& sigma2, int j, int k) {
    if (j == k) throw std::invalid_argument("pair_decomposition: j and k must differ");
    check_component(we, j, "pair_decomposition");
    check_component(we, k, "pair_decomposition");
    const MatrixXd Zt = scaled_scores(Z_top, sigma2);
    const int m = we.m();
    const int n = static_cast<int>(Z_top.rows());

    PairDecomposition pd;
    pd.j = j;
    pd.k = k;
    pd.scaling << std::sqrt(n / we.d[j - 1]), std::sqrt(n / we.d[k - 1]);
    // Row r of the rotation block holds the (j, k) components of v_r(W); the
    // recomposition identity below pins this orientation.
    pd.rotation << we.V(j - 1, j - 1), we.V(k - 1, j - 1),
                   we.V(j - 1, k - 1), we.V(k - 1, k - 1);

    pd.noise = MatrixXd::Zero(2, n);
    for (int l = 1; l <= m; ++l) {
        if (l == j || l == k) continue;
        pd.noise.row(0) += we.V(l - 1, j - 1) * Zt.col(l - 1).transpose();
        pd.noise.row(1) += we.V(l - 1, k - 1) * Zt.col(l - 1).transpose();
    }
    pd.noise.row(0) *= pd.scaling[0];
    pd.noise.row(1) *= pd.scaling[1];
    return pd;
}

NoiseVariance noise_variance_asymptotic(const std::vector<double>& sigma2, int n,
                                        int j, int k) {
    const int m = static_cast<int>(sigma2.size());
    if (m < 1) throw std::invalid_argument("noise_variance_asymptotic: needs m >= 1");
    if (n < 1) throw std::invalid_argument("noise_variance_asymptotic: needs n >= 1");
    if (j < 1 || j > m || k < 1 || k > m || j == k)
        throw std::invalid_argument("noise_variance_asymptotic: bad component pair");

    NoiseVariance nv;
    nv.j = j;
    nv.k = k;
    nv.n = n;
    nv.components_j = VectorXd::Zero(m);
    nv.components_k = VectorXd::Zero(m);
    for (int l = 1; l <= m; ++l) {
        if (l == j || l == k) continue;
        for (auto [target, comps] :
             {std::pair{j, &nv.components_j}, std::pair{k, &nv.components_k}}) {
            const double ratio = sigma2[target - 1] / sigma2[l - 1] - 1.0;
            if (ratio == 0.0)
                throw std::invalid_argument(
                    "noise_variance_asymptotic: equal signal strengths make the "
                    "variance formula singular (l=" + std::to_string(l) + ")");
            (*comps)[l - 1] = 1.0 / (ratio * ratio);
        }
    }
    nv.var_j = nv.components_j.sum() / n;
    nv.var_k = nv.components_k.sum() / n;
    nv.sd_j = std::sqrt(nv.var_j);
    nv.sd_k = std::sqrt(nv.var_k);
    return nv;
}

WishartAsymptotics wishart_asymptotics(const std::vector<double>& sigma2, int j) {
    const int m = static_cast<int>(sigma2.size());
    if (j < 1 || j > m)
        throw std::invalid_argument("wishart_asymptotics: component index out of range");
    WishartAsymptotics wa;
    wa.eigvec_cov_diag = VectorXd::Zero(m);
    const double sj = sigma2[j - 1];
    for (int i = 1; i <= m; ++i) {
        if (i == j) continue;
        const double si = sigma2[i - 1];
        const double gap = sj - si;
        if (gap == 0.0)
            throw std::invalid_argument("wishart_asymptotics: tied signal strengths");
        wa.eigvec_cov_diag[i - 1] = sj * si / (gap * gap);
    }
    wa.eigval_var = 2.0 * sj * sj;
    return wa;
}

LimitPrediction make_limit_prediction(const WEigen& we, const MatrixXd& Z_top,
                                      const std::vector<double>& sigma2,
                                      double tau2, int eigenvalue_count) {
    LimitPrediction lp;
    lp.predicted_scores = predict_scores(we, Z_top, sigma2);
    lp.predicted_eigenvalues = predict_sample_eigenvalues(we, tau2, eigenvalue_count);
    const int m = we.m();
    for (int j = 1; j <= m; ++j)
        for (int k = j + 1; k <= m; ++k)
            lp.pairs.push_back(pair_decomposition(we, Z_top, sigma2, j, k));
    for (int j = 0; j + 1 < m; ++j)
        if (we.d[j + 1] > 0.0 && we.d[j] / we.d[j + 1] < 1.05)
            lp.weakly_separated.push_back(j + 1);
    return lp;
}

}  // namespace pervasive::limit
