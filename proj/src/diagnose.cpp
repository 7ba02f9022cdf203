#include "pervasive/diagnose.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "pervasive/limit.hpp"

namespace pervasive::diagnose {

PairTransform fit_pair_transform(const MatrixXd& sample_pair,
                                 const MatrixXd& population_pair) {
    if (sample_pair.rows() != 2 || population_pair.rows() != 2)
        throw std::invalid_argument("fit_pair_transform: score pairs must be 2 x n");
    const auto n = sample_pair.cols();
    if (population_pair.cols() != n)
        throw std::invalid_argument("fit_pair_transform: pair lengths differ");
    if (n < 3)
        throw std::invalid_argument("fit_pair_transform: needs at least 3 observations");
    if (!sample_pair.allFinite() || !population_pair.allFinite())
        throw std::invalid_argument("fit_pair_transform: non-finite scores");

    const Matrix2d PPt = population_pair * population_pair.transpose();
    Eigen::JacobiSVD<Matrix2d> rank_check(PPt);
    const double smax = rank_check.singularValues()[0];
    const double smin = rank_check.singularValues()[1];
    if (smax <= 0.0 || smin <= smax * 1e-12)
        throw std::invalid_argument("fit_pair_transform: population pair is rank deficient");

    const Matrix2d A = (sample_pair * population_pair.transpose()) * PPt.inverse();

    // Left polar decomposition A = H R from the SVD A = U S V^T:
    // H = U S U^T is SPD, R = U V^T is orthogonal.
    Eigen::JacobiSVD<Matrix2d> svd(A, Eigen::ComputeFullU | Eigen::ComputeFullV);
    const Matrix2d U = svd.matrixU();
    const Matrix2d V = svd.matrixV();
    const Matrix2d H = U * svd.singularValues().asDiagonal() * U.transpose();
    Matrix2d R = U * V.transpose();

    PairTransform t;
    t.matrix = A;
    t.scale_x = H(0, 0);
    t.scale_y = H(1, 1);
    t.reflection = R.determinant() < 0.0;
    if (t.reflection) R = R * Eigen::Vector2d(1.0, -1.0).asDiagonal();
    t.angle = std::atan2(R(1, 0), R(0, 0));
    t.residual = (sample_pair - A * population_pair).norm() /
                 std::sqrt(2.0 * static_cast<double>(n));
    return t;
}

std::string to_string(TransformLabel label) {
    switch (label) {
        case TransformLabel::ScalingOutward: return "scaling-outward";
        case TransformLabel::ScalingInward: return "scaling-inward";
        case TransformLabel::Rotation: return "rotation";
        case TransformLabel::Saddle: return "saddle";
        case TransformLabel::Fault: return "fault";
        case TransformLabel::NearIdentity: return "near-identity";
        case TransformLabel::Mixed: return "mixed";
    }
    return "mixed";
}

TransformClass classify_transform(const PairTransform& t,
                                  const ClassifyThresholds& thr) {
    const double lo = 1.0 - thr.scale_tol;
    const double hi = 1.0 + thr.scale_tol;
    const bool x_up = t.scale_x > hi, x_down = t.scale_x < lo;
    const bool y_up = t.scale_y > hi, y_down = t.scale_y < lo;
    const bool x_unit = !x_up && !x_down, y_unit = !y_up && !y_down;
    const bool rotated = std::abs(t.angle) > thr.angle_tol;

    TransformClass c;
    auto set = [&](TransformLabel label, std::string evidence) {
        c.label = label;
        c.evidence = std::move(evidence);
    };
    const std::string scales = "scales=(" + std::to_string(t.scale_x) + ", " +
                               std::to_string(t.scale_y) + ")";
    const std::string angle = "angle=" + std::to_string(t.angle * 180.0 / std::numbers::pi) + "deg";

    if (x_up && y_up && !rotated)
        set(TransformLabel::ScalingOutward, scales + " both above band, " + angle + " small");
    else if (x_down && y_down && !rotated)
        set(TransformLabel::ScalingInward, scales + " both below band, " + angle + " small");
    else if (x_unit && y_unit && rotated)
        set(TransformLabel::Rotation, scales + " inside band, " + angle + " large");
    else if (((x_up && y_down) || (x_down && y_up)) && !rotated)
        set(TransformLabel::Saddle, scales + " split, " + angle + " small");
    else if (((x_up && y_down) || (x_down && y_up)) && rotated)
        set(TransformLabel::Fault, scales + " split, " + angle + " large");
    else if (x_unit && y_unit && !rotated)
        set(TransformLabel::NearIdentity, scales + " inside band, " + angle + " small");
    else
        set(TransformLabel::Mixed, scales + ", " + angle);
    if (t.reflection) c.evidence += ", reflected";
    return c;
}

SignalEstimate estimate_signals(const VectorXd& eigenvalues, int p,
                                std::optional<int> m, double min_gap) {
    const int len = static_cast<int>(eigenvalues.size());
    if (len < 1) throw std::invalid_argument("estimate_signals: empty eigenvalue list");
    if (p < len) throw std::invalid_argument("estimate_signals: p smaller than the list");
    for (int i = 1; i < len; ++i)
        if (eigenvalues[i] > eigenvalues[i - 1] * (1.0 + 1e-12))
            throw std::invalid_argument("estimate_signals: eigenvalues must be descending");

    SignalEstimate est;
    est.scree = eigenvalues;

    int m_hat;
    if (m.has_value()) {
        m_hat = *m;
        if (m_hat < 0 || m_hat > len)
            throw std::invalid_argument("estimate_signals: m out of range");
    } else {
        // Largest relative gap on the scree sequence; no gap above min_gap
        // means no spikes.
        m_hat = 0;
        double best = min_gap;
        for (int i = 0; i + 1 < len; ++i) {
            if (eigenvalues[i + 1] <= 0.0) {
                if (eigenvalues[i] > 0.0) m_hat = i + 1;
                break;
            }
            const double gap = eigenvalues[i] / eigenvalues[i + 1] - 1.0;
            if (gap > best) {
                best = gap;
                m_hat = i + 1;
            }
        }
    }
    est.m = m_hat;
    est.sigma2_hat.resize(m_hat);
    for (int i = 0; i < m_hat; ++i) est.sigma2_hat[i] = eigenvalues[i] / p;
    return est;
}

std::pair<int, int> required_sample_size(const std::vector<double>& sigma2,
                                         int j, int k, double target_sd) {
    if (!(target_sd > 0.0))
        throw std::invalid_argument("required_sample_size: target_sd must be positive");
    const int m = static_cast<int>(sigma2.size());
    if (j < 1 || j > m || k < 1 || k > m || j == k)
        throw std::invalid_argument("required_sample_size: bad component pair");

    // var(eps) = S / n with S the strength-ratio sum; reuse the asymptotic
    // variance at n = 1 to obtain S for both components (this also validates
    // distinctness of the strengths involved).
    const limit::NoiseVariance nv = limit::noise_variance_asymptotic(sigma2, 1, j, k);
    auto minimal_n = [&](double S) {
        if (S == 0.0) return 1;
        return static_cast<int>(std::floor(S / (target_sd * target_sd))) + 1;
    };
    return {minimal_n(nv.var_j), minimal_n(nv.var_k)};
}

}  // namespace pervasive::diagnose
