#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <vector>

// Covariance models whose eigenstructure is known in closed form: the
// m-spike factor model with eigenvalues growing linearly in the dimension,
// and block-equicorrelated covariance matrices. All types are immutable
// after construction and all operations are pure.
namespace pervasive::model {

using Eigen::MatrixXd;
using Eigen::VectorXd;

// Tail eigenvalue profile for SpikeSpec: "flat" keeps every non-spike
// eigenvalue at tau2; "linear decay" tapers them linearly while keeping
// their average at tau2, to exercise a genuinely non-constant tail.
enum class TailProfile { Flat, LinearDecay };

// How the spike eigenvectors are chosen when only signal strengths are
// given. DisjointBlocks assigns each spike a constant-coefficient vector on
// its own run of floor(p/m) coordinates (pervasive by construction);
// RandomOrthonormal draws a seeded Haar-ish basis via QR and is intended
// for small p.
enum class SpikeVectors { DisjointBlocks, RandomOrthonormal };

// m-spike model: spike j has population eigenvalue sigma2[j] * p (plus the
// tau2 ridge), the remaining eigenvalues average tau2.
struct SpikeSpec {
    std::vector<double> sigma2;  // signal strengths, strictly decreasing
    double tau2 = 1.0;           // limiting mean of the non-spike eigenvalues
    int p = 0;                   // dimension
    int n = 0;                   // sample size
    TailProfile tail = TailProfile::Flat;
    SpikeVectors vectors = SpikeVectors::DisjointBlocks;
    std::uint64_t vector_seed = 0;  // only used for RandomOrthonormal

    SpikeSpec(std::vector<double> sigma2_, double tau2_, int p_, int n_,
              TailProfile tail_ = TailProfile::Flat,
              SpikeVectors vectors_ = SpikeVectors::DisjointBlocks,
              std::uint64_t vector_seed_ = 0);

    int m() const { return static_cast<int>(sigma2.size()); }
};

struct Block {
    double fraction = 0.0;  // r_j, share of the p coordinates
    double rho = 0.0;       // within-block correlation
};

// Block-diagonal equicorrelation model: block j covers round(fraction_j * p)
// coordinates with covariance sigma2 * ((1-rho_j) I + rho_j 11^T); leftover
// coordinates are independent with variance sigma2.
struct BlockSpec {
    double sigma2 = 1.0;
    std::vector<Block> blocks;
    int p = 0;

    BlockSpec(double sigma2_, std::vector<Block> blocks_, int p_);

    // Integer block sizes round(fraction * p) actually used everywhere.
    std::vector<int> block_sizes() const;
};

// Loading vector of the one-factor model x = v z + eps, var(eps) = sigma2 I.
struct FactorVector {
    VectorXd coefficients;
    double noise_sigma2 = 1.0;

    FactorVector(VectorXd coefficients_, double noise_sigma2_);
    int p() const { return static_cast<int>(coefficients.size()); }
};

// Share of non-zero loadings. The default is an exact zero test; a positive
// threshold treats |v_i| <= threshold as zero (for noisy loadings).
double pervasiveness_ratio(const FactorVector& v, double threshold = 0.0);

// Top eigenvalue of v v^T + sigma2 I, i.e. sum(v_i^2) + sigma2.
// Errors on an all-zero loading vector.
double spike_eigenvalue(const FactorVector& v);

struct BlockEigenvalues {
    VectorXd spikes;        // one per block, in block order
    VectorXd contrasts;     // within-block remainder eigenvalue, per block
    double tail = 0.0;      // eigenvalue of the identity remainder
    std::vector<int> sizes; // integer block sizes
    VectorXd spectrum;      // all p eigenvalues, descending
};

// Closed-form spectrum of a BlockSpec. Spike j equals
// sigma2 * (rho_j * k_j + 1 - rho_j) with k_j = round(fraction_j * p), which
// is exact for the assembled finite matrix.
BlockEigenvalues block_eigenvalues(const BlockSpec& spec);

// Spike eigenvectors chosen for a SpikeSpec (p x m, orthonormal columns).
MatrixXd spike_eigenvectors(const SpikeSpec& spec);

// Assemble the p x p covariance matrix. Guarded because the library
// otherwise never forms p x p objects.
MatrixXd materialize_covariance(const BlockSpec& spec, int max_p = 5000);
MatrixXd materialize_covariance(const SpikeSpec& spec, int max_p = 5000);

}  // namespace pervasive::model
