#include "pervasive/model.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "pervasive/rng.hpp"

namespace pervasive::model {

SpikeSpec::SpikeSpec(std::vector<double> sigma2_, double tau2_, int p_, int n_,
                     TailProfile tail_, SpikeVectors vectors_,
                     std::uint64_t vector_seed_)
    : sigma2(std::move(sigma2_)),
      tau2(tau2_),
      p(p_),
      n(n_),
      tail(tail_),
      vectors(vectors_),
      vector_seed(vector_seed_) {
    if (p < 1) throw std::invalid_argument("SpikeSpec: p must be >= 1");
    if (n < 1) throw std::invalid_argument("SpikeSpec: n must be >= 1");
    if (tau2 < 0.0) throw std::invalid_argument("SpikeSpec: tau2 must be >= 0");
    if (m() > std::min(p, n))
        throw std::invalid_argument("SpikeSpec: m must be <= min(p, n)");
    for (std::size_t j = 0; j < sigma2.size(); ++j) {
        if (!(sigma2[j] > 0.0))
            throw std::invalid_argument("SpikeSpec: signal strengths must be positive");
        if (j > 0 && !(sigma2[j] < sigma2[j - 1]))
            throw std::invalid_argument(
                "SpikeSpec: signal strengths must be strictly decreasing");
    }
}

BlockSpec::BlockSpec(double sigma2_, std::vector<Block> blocks_, int p_)
    : sigma2(sigma2_), blocks(std::move(blocks_)), p(p_) {
    if (p < 1) throw std::invalid_argument("BlockSpec: p must be >= 1");
    if (!(sigma2 > 0.0)) throw std::invalid_argument("BlockSpec: sigma2 must be positive");
    if (blocks.empty()) throw std::invalid_argument("BlockSpec: needs at least one block");
    double total_fraction = 0.0;
    for (const Block& b : blocks) {
        if (!(b.fraction > 0.0 && b.fraction <= 1.0))
            throw std::invalid_argument("BlockSpec: fractions must lie in (0, 1]");
        if (!(b.rho >= 0.0 && b.rho < 1.0))
            throw std::invalid_argument("BlockSpec: correlations must lie in [0, 1)");
        total_fraction += b.fraction;
    }
    if (total_fraction > 1.0 + 1e-12)
        throw std::invalid_argument("BlockSpec: block fractions must sum to at most 1");
    int total = 0;
    for (int k : block_sizes()) {
        if (k < 1)
            throw std::invalid_argument("BlockSpec: a block rounds to size 0");
        total += k;
    }
    if (total > p)
        throw std::invalid_argument("BlockSpec: rounded block sizes exceed p");
}

std::vector<int> BlockSpec::block_sizes() const {
    std::vector<int> sizes;
    sizes.reserve(blocks.size());
    for (const Block& b : blocks)
        sizes.push_back(static_cast<int>(std::llround(b.fraction * p)));
    return sizes;
}

FactorVector::FactorVector(VectorXd coefficients_, double noise_sigma2_)
    : coefficients(std::move(coefficients_)), noise_sigma2(noise_sigma2_) {
    if (coefficients.size() == 0)
        throw std::invalid_argument("FactorVector: needs at least one coefficient");
    if (!(noise_sigma2 > 0.0))
        throw std::invalid_argument("FactorVector: noise variance must be positive");
}

double pervasiveness_ratio(const FactorVector& v, double threshold) {
    if (threshold < 0.0)
        throw std::invalid_argument("pervasiveness_ratio: threshold must be >= 0");
    const auto p = v.coefficients.size();
    Eigen::Index nonzero = 0;
    for (Eigen::Index i = 0; i < p; ++i)
        if (std::abs(v.coefficients[i]) > threshold) ++nonzero;
    return static_cast<double>(nonzero) / static_cast<double>(p);
}

double spike_eigenvalue(const FactorVector& v) {
    const double ss = v.coefficients.squaredNorm();
    if (ss == 0.0)
        throw std::invalid_argument("spike_eigenvalue: loading vector is all zero");
    return ss + v.noise_sigma2;
}

BlockEigenvalues block_eigenvalues(const BlockSpec& spec) {
    BlockEigenvalues out;
    out.sizes = spec.block_sizes();
    const int nblocks = static_cast<int>(spec.blocks.size());
    out.spikes.resize(nblocks);
    out.contrasts.resize(nblocks);
    out.tail = spec.sigma2;

    int used = 0;
    for (int j = 0; j < nblocks; ++j) {
        const double rho = spec.blocks[j].rho;
        const int k = out.sizes[j];
        out.spikes[j] = spec.sigma2 * (rho * k + 1.0 - rho);
        out.contrasts[j] = spec.sigma2 * (1.0 - rho);
        used += k;
    }

    std::vector<double> all;
    all.reserve(spec.p);
    for (int j = 0; j < nblocks; ++j) {
        all.push_back(out.spikes[j]);
        all.insert(all.end(), out.sizes[j] - 1, out.contrasts[j]);
    }
    all.insert(all.end(), spec.p - used, out.tail);
    std::sort(all.begin(), all.end(), std::greater<double>());
    out.spectrum = Eigen::Map<const VectorXd>(all.data(), spec.p);
    return out;
}

MatrixXd spike_eigenvectors(const SpikeSpec& spec) {
    const int m = spec.m();
    MatrixXd V = MatrixXd::Zero(spec.p, m);
    if (m == 0) return V;
    if (spec.vectors == SpikeVectors::DisjointBlocks) {
        const int k = spec.p / m;
        const double coef = 1.0 / std::sqrt(static_cast<double>(k));
        for (int j = 0; j < m; ++j) V.col(j).segment(j * k, k).setConstant(coef);
        return V;
    }
    // Seeded random orthonormal frame via QR of a Gaussian matrix. Column
    // signs are fixed so the frame does not depend on the QR implementation's
    // sign choices.
    rng::Stream stream(rng::substream(spec.vector_seed, 0x564543ULL));
    MatrixXd G(spec.p, m);
    for (int j = 0; j < m; ++j)
        for (int i = 0; i < spec.p; ++i) G(i, j) = stream.normal();
    Eigen::HouseholderQR<MatrixXd> qr(G);
    MatrixXd Q = qr.householderQ() * MatrixXd::Identity(spec.p, m);
    for (int j = 0; j < m; ++j) {
        Eigen::Index imax = 0;
        Q.col(j).cwiseAbs().maxCoeff(&imax);
        if (Q(imax, j) < 0.0) Q.col(j) = -Q.col(j);
    }
    return Q;
}

namespace {

void check_materialize_guard(int p, int max_p) {
    if (p > max_p)
        throw std::invalid_argument("materialize_covariance: p=" + std::to_string(p) +
                                    " exceeds the materialization guard " +
                                    std::to_string(max_p));
}

}  // namespace

MatrixXd materialize_covariance(const BlockSpec& spec, int max_p) {
    check_materialize_guard(spec.p, max_p);
    MatrixXd sigma = MatrixXd::Zero(spec.p, spec.p);
    const auto sizes = spec.block_sizes();
    int offset = 0;
    for (std::size_t j = 0; j < spec.blocks.size(); ++j) {
        const int k = sizes[j];
        const double rho = spec.blocks[j].rho;
        sigma.block(offset, offset, k, k).setConstant(spec.sigma2 * rho);
        offset += k;
    }
    sigma.diagonal().setConstant(spec.sigma2);
    return sigma;
}

MatrixXd materialize_covariance(const SpikeSpec& spec, int max_p) {
    check_materialize_guard(spec.p, max_p);
    const MatrixXd V = spike_eigenvectors(spec);
    MatrixXd sigma = spec.tau2 * MatrixXd::Identity(spec.p, spec.p);
    for (int j = 0; j < spec.m(); ++j)
        sigma.noalias() += (spec.sigma2[j] * spec.p) * V.col(j) * V.col(j).transpose();
    return sigma;
}

}  // namespace pervasive::model
