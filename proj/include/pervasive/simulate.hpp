#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <variant>
#include <vector>

#include "pervasive/model.hpp"
#include "pervasive/rng.hpp"

// Dataset generation through the eigen-representation X = sum_j sqrt(lambda_j)
// v_j z_j^T: population scores are drawn first and the data matrix is
// synthesized from them, so the true standardized scores are known exactly
// and no p x p matrix is ever formed.
namespace pervasive::simulate {

using Eigen::MatrixXd;
using Eigen::VectorXd;

enum class ScoreKind { StandardNormal, StudentT };

struct ScoreDistribution {
    ScoreKind kind = ScoreKind::StandardNormal;
    int df = 0;

    static ScoreDistribution standard_normal() { return {ScoreKind::StandardNormal, 0}; }
    static ScoreDistribution student_t(int df);

    // One unit-variance draw (Student-t is rescaled by sqrt((df-2)/df)).
    double draw(rng::Stream& stream) const;
    std::string name() const;
};

// Closed-form eigenbasis of a covariance spec, stored structurally: constant
// blocks, within-block Helmert contrasts and unit coordinates, each tied to
// the row of Z that carries its score. Row order is eigenvalue-descending.
struct EigenBasis {
    int p = 0;
    int m = 0;              // number of spike components (rows 0..m-1)
    VectorXd lambda;        // all p eigenvalues, non-increasing

    struct SpikeBlock { int row; int offset; int size; };
    struct ContrastGroup { int row0; int offset; int size; };  // size-1 rows
    struct UnitRun { int row0; int coord0; int count; };
    std::vector<SpikeBlock> spikes;
    std::vector<ContrastGroup> groups;
    std::vector<UnitRun> units;

    // Dense fallback used for the random-orthonormal spike option.
    bool dense = false;
    MatrixXd Q;  // p x p orthonormal columns when dense

    // Materialize all eigenvectors as columns (guarded; test/diagnostic use).
    MatrixXd dense_eigenvectors(int max_p = 5000) const;
};

EigenBasis eigenbasis(const model::SpikeSpec& spec);
EigenBasis eigenbasis(const model::BlockSpec& spec);

struct Dataset {
    MatrixXd X;          // p x n observations in columns
    MatrixXd Z;          // p x n standardized population scores, row j = z_j
    VectorXd lambda;     // population eigenvalues, descending
    int m = 0;           // spike count
    std::vector<double> spike_sigma2;  // strengths with lambda_j ~ sigma2_j * p
    double tau2 = 0.0;   // limiting mean of the non-spike eigenvalues
    std::uint64_t seed = 0;
    ScoreDistribution dist;
    std::variant<std::monostate, model::SpikeSpec, model::BlockSpec> spec;

    int p() const { return static_cast<int>(X.rows()); }
    int n() const { return static_cast<int>(X.cols()); }
};

// i.i.d. unit-variance scores, p x n. Row j is drawn from its own substream
// keyed by (seed, row), so it does not depend on p or on evaluation order.
MatrixXd draw_scores(const ScoreDistribution& dist, int p, int n, std::uint64_t seed);

Dataset generate_dataset(const model::SpikeSpec& spec, const ScoreDistribution& dist,
                         std::uint64_t seed);
// Block models carry no sample size of their own, so n is explicit.
Dataset generate_dataset(const model::BlockSpec& spec, int n,
                         const ScoreDistribution& dist, std::uint64_t seed);

struct PopulationScores {
    VectorXd s;  // raw scores v_j^T X
    VectorXd z;  // standardized scores s / sqrt(lambda_j)
};

// Scores of the j-th population component, 1-based, j in [1, p].
PopulationScores population_scores(const Dataset& ds, int j);

}  // namespace pervasive::simulate
