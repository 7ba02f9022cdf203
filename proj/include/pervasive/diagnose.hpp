#pragma once

#include <Eigen/Dense>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

// Practitioner-facing diagnostics: fit the 2x2 map that carries a population
// score pair onto the sample pair, classify the distortion it represents,
// estimate signal strengths from an eigenvalue sequence, and compute the
// sample size needed to keep the pairwise score noise below a target.
namespace pervasive::diagnose {

using Eigen::Matrix2d;
using Eigen::MatrixXd;
using Eigen::VectorXd;

struct PairTransform {
    double scale_x = 1.0;   // per-axis stretch (diagonal of the symmetric factor)
    double scale_y = 1.0;
    double angle = 0.0;     // rotation angle in (-pi, pi]
    double residual = 0.0;  // RMS of the part the linear map cannot explain
    bool reflection = false;
    Matrix2d matrix = Matrix2d::Identity();  // fitted least-squares map
};

// Least-squares 2x2 map A with sample ~ A * population, polar-decomposed as
// A = H * R with H symmetric positive definite (scales = diag H) and R a
// rotation (det -1 fits are flagged and the angle reported for R composed
// with a y-flip). Errors when the population pair is rank deficient.
PairTransform fit_pair_transform(const MatrixXd& sample_pair,
                                 const MatrixXd& population_pair);

enum class TransformLabel {
    ScalingOutward,
    ScalingInward,
    Rotation,
    Saddle,
    Fault,
    NearIdentity,
    Mixed,
};

std::string to_string(TransformLabel label);

struct TransformClass {
    TransformLabel label = TransformLabel::NearIdentity;
    std::string evidence;  // which thresholds triggered
};

struct ClassifyThresholds {
    double scale_tol = 0.1;  // scales within 1 +- tol count as unit
    double angle_tol = 10.0 * std::numbers::pi / 180.0;  // radians
};

// Total classification: every finite transform gets exactly one label.
TransformClass classify_transform(const PairTransform& t,
                                  const ClassifyThresholds& thresholds = {});

struct SignalEstimate {
    std::vector<double> sigma2_hat;  // d_j / p for the chosen spikes
    int m = 0;
    VectorXd scree;                  // the input eigenvalues
};

// Signal strengths from a descending eigenvalue sequence: sigma2_hat_j =
// d_j / p. When m is not given, the largest relative gap picks it (m = 0
// when no gap exceeds min_gap).
SignalEstimate estimate_signals(const VectorXd& eigenvalues, int p,
                                std::optional<int> m = std::nullopt,
                                double min_gap = 0.1);

// Smallest sample sizes keeping the asymptotic noise SD of components j and
// k below target_sd. Returns (1, 1) when there are no other components.
std::pair<int, int> required_sample_size(const std::vector<double>& sigma2,
                                         int j, int k, double target_sd);

}  // namespace pervasive::diagnose
