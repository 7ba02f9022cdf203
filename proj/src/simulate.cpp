#include "pervasive/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace pervasive::simulate {

ScoreDistribution ScoreDistribution::student_t(int df) {
    if (df <= 4)
        throw std::invalid_argument(
            "ScoreDistribution: student-t needs df > 4 (finite fourth moment)");
    return {ScoreKind::StudentT, df};
}

double ScoreDistribution::draw(rng::Stream& stream) const {
    if (kind == ScoreKind::StandardNormal) return stream.normal();
    return stream.student_t(df) * std::sqrt((df - 2.0) / df);
}

std::string ScoreDistribution::name() const {
    if (kind == ScoreKind::StandardNormal) return "standard-normal";
    return "student-t(" + std::to_string(df) + ")";
}

namespace {

// Tail eigenvalues in canonical (descending) order. Flat: all tau2. Linear
// decay: lambda_i = tau2 * 2(t-i)/(t+1), mean exactly tau2.
VectorXd tail_lambdas(const model::SpikeSpec& spec) {
    const int t = spec.p - spec.m();
    VectorXd lam(t);
    if (spec.tail == model::TailProfile::Flat) {
        lam.setConstant(spec.tau2);
    } else {
        for (int i = 0; i < t; ++i)
            lam[i] = spec.tau2 * 2.0 * (t - i) / (t + 1.0);
    }
    return lam;
}

}  // namespace

EigenBasis eigenbasis(const model::SpikeSpec& spec) {
    EigenBasis basis;
    basis.p = spec.p;
    basis.m = spec.m();
    basis.lambda.resize(spec.p);

    const int m = basis.m;
    for (int j = 0; j < m; ++j)
        basis.lambda[j] = spec.sigma2[j] * spec.p + spec.tau2;
    const VectorXd tail = tail_lambdas(spec);
    basis.lambda.tail(spec.p - m) = tail;
    if (m > 0 && spec.p > m && tail[0] > basis.lambda[m - 1])
        throw std::invalid_argument(
            "SpikeSpec: tail profile overtakes the smallest spike eigenvalue");

    if (spec.vectors == model::SpikeVectors::RandomOrthonormal) {
        constexpr int kDenseGuard = 2000;
        if (spec.p > kDenseGuard)
            throw std::invalid_argument(
                "random-orthonormal spike vectors need a full dense basis; "
                "p is limited to " + std::to_string(kDenseGuard));
        basis.dense = true;
        const MatrixXd V = model::spike_eigenvectors(spec);
        Eigen::HouseholderQR<MatrixXd> qr(V);
        MatrixXd full = qr.householderQ() * MatrixXd::Identity(spec.p, spec.p);
        basis.Q.resize(spec.p, spec.p);
        basis.Q.leftCols(m) = V;
        basis.Q.rightCols(spec.p - m) = full.rightCols(spec.p - m);
        return basis;
    }

    // Disjoint constant-coefficient spikes: spike j owns coordinates
    // [j*k, (j+1)*k); its within-block contrasts and the leftover coordinates
    // make up the tail, in that canonical order.
    const int k = m > 0 ? spec.p / m : 0;
    int row = m;
    for (int j = 0; j < m; ++j) {
        basis.spikes.push_back({j, j * k, k});
        if (k > 1) {
            basis.groups.push_back({row, j * k, k});
            row += k - 1;
        }
    }
    const int leftover = spec.p - m * k;
    if (leftover > 0) {
        basis.units.push_back({row, m * k, leftover});
        row += leftover;
    }
    return basis;
}

EigenBasis eigenbasis(const model::BlockSpec& spec) {
    const model::BlockEigenvalues eig = model::block_eigenvalues(spec);
    const int nblocks = static_cast<int>(spec.blocks.size());

    std::vector<int> offsets(nblocks);
    int used = 0;
    for (int j = 0; j < nblocks; ++j) {
        offsets[j] = used;
        used += eig.sizes[j];
    }

    // Spikes sorted by eigenvalue (descending, stable in block order), then
    // the identity remainder at sigma2, then per-block contrasts at
    // sigma2 * (1 - rho), largest first.
    std::vector<int> spike_order(nblocks);
    std::iota(spike_order.begin(), spike_order.end(), 0);
    std::stable_sort(spike_order.begin(), spike_order.end(), [&](int a, int b) {
        return eig.spikes[a] > eig.spikes[b];
    });
    std::vector<int> contrast_order = spike_order;
    std::stable_sort(contrast_order.begin(), contrast_order.end(), [&](int a, int b) {
        return eig.contrasts[a] > eig.contrasts[b];
    });

    EigenBasis basis;
    basis.p = spec.p;
    basis.m = nblocks;
    basis.lambda.resize(spec.p);

    int row = 0;
    for (int idx : spike_order) {
        basis.lambda[row] = eig.spikes[idx];
        basis.spikes.push_back({row, offsets[idx], eig.sizes[idx]});
        ++row;
    }
    if (used < spec.p) {
        basis.units.push_back({row, used, spec.p - used});
        for (int i = 0; i < spec.p - used; ++i) basis.lambda[row + i] = eig.tail;
        row += spec.p - used;
    }
    for (int idx : contrast_order) {
        const int k = eig.sizes[idx];
        if (k < 2) continue;
        basis.groups.push_back({row, offsets[idx], k});
        for (int i = 0; i < k - 1; ++i) basis.lambda[row + i] = eig.contrasts[idx];
        row += k - 1;
    }
    return basis;
}

namespace {

// Helmert contrast vectors of a size-k block: w_i has entries 1/sqrt(i(i+1))
// on the first i coordinates, -i/sqrt(i(i+1)) on coordinate i+1, zero after
// (i = 1..k-1). Orthonormal and orthogonal to the constant vector.
void add_contrasts_dense(MatrixXd& Q, const EigenBasis::ContrastGroup& g) {
    const int k = g.size;
    for (int i = 1; i < k; ++i) {
        const double f = 1.0 / std::sqrt(static_cast<double>(i) * (i + 1));
        for (int c = 0; c < i; ++c) Q(g.offset + c, g.row0 + i - 1) = f;
        Q(g.offset + i, g.row0 + i - 1) = -i * f;
    }
}

}  // namespace

MatrixXd EigenBasis::dense_eigenvectors(int max_p) const {
    if (p > max_p)
        throw std::invalid_argument("dense_eigenvectors: p exceeds the guard");
    if (dense) return Q;
    MatrixXd out = MatrixXd::Zero(p, p);
    for (const SpikeBlock& s : spikes)
        out.col(s.row).segment(s.offset, s.size)
            .setConstant(1.0 / std::sqrt(static_cast<double>(s.size)));
    for (const ContrastGroup& g : groups) add_contrasts_dense(out, g);
    for (const UnitRun& u : units)
        for (int i = 0; i < u.count; ++i) out(u.coord0 + i, u.row0 + i) = 1.0;
    return out;
}

MatrixXd draw_scores(const ScoreDistribution& dist, int p, int n, std::uint64_t seed) {
    if (p < 1 || n < 1) throw std::invalid_argument("draw_scores: p and n must be >= 1");
    if (dist.kind == ScoreKind::StudentT && dist.df <= 4)
        throw std::invalid_argument("draw_scores: student-t needs df > 4");
    MatrixXd Z(p, n);
    for (int j = 0; j < p; ++j) {
        rng::Stream stream(rng::substream(seed, rng::kRowTag, j));
        for (int t = 0; t < n; ++t) Z(j, t) = dist.draw(stream);
    }
    return Z;
}

namespace {

// X = sum_j sqrt(lambda_j) v_j z_j^T evaluated blockwise in O(p n) using the
// structure of the basis; contrast synthesis runs a suffix-sum pass per
// column instead of touching the O(k^2) nonzeros of the Helmert vectors.
MatrixXd synthesize(const EigenBasis& basis, const MatrixXd& Z) {
    const int n = static_cast<int>(Z.cols());
    if (basis.dense)
        return basis.Q * (basis.lambda.array().sqrt().matrix().asDiagonal() * Z);

    MatrixXd X = MatrixXd::Zero(basis.p, n);
    for (const EigenBasis::SpikeBlock& s : basis.spikes) {
        const double coef = std::sqrt(basis.lambda[s.row] / s.size);
        X.middleRows(s.offset, s.size).rowwise() += coef * Z.row(s.row);
    }
    for (const EigenBasis::UnitRun& u : basis.units)
        for (int i = 0; i < u.count; ++i)
            X.row(u.coord0 + i) += std::sqrt(basis.lambda[u.row0 + i]) * Z.row(u.row0 + i);

    std::vector<double> suffix;
    for (const EigenBasis::ContrastGroup& g : basis.groups) {
        const int k = g.size;
        suffix.assign(k, 0.0);
        for (int t = 0; t < n; ++t) {
            // suffix[c] = sum_{i >= c} y_i / sqrt(i(i+1)), y_i the scaled score
            // of contrast i (1-based).
            for (int i = k - 1; i >= 1; --i) {
                const double y = std::sqrt(basis.lambda[g.row0 + i - 1]) * Z(g.row0 + i - 1, t);
                suffix[i] = (i + 1 < k ? suffix[i + 1] : 0.0) +
                            y / std::sqrt(static_cast<double>(i) * (i + 1));
            }
            for (int c = 1; c <= k; ++c) {
                double value = 0.0;
                if (c >= 2) {
                    const double y = std::sqrt(basis.lambda[g.row0 + c - 2]) * Z(g.row0 + c - 2, t);
                    value -= (c - 1) * y / std::sqrt(static_cast<double>(c - 1) * c);
                }
                if (c <= k - 1) value += suffix[c];
                X(g.offset + c - 1, t) += value;
            }
        }
    }
    return X;
}

}  // namespace

Dataset generate_dataset(const model::SpikeSpec& spec, const ScoreDistribution& dist,
                         std::uint64_t seed) {
    const EigenBasis basis = eigenbasis(spec);
    Dataset ds;
    ds.Z = draw_scores(dist, spec.p, spec.n, seed);
    ds.X = synthesize(basis, ds.Z);
    ds.lambda = basis.lambda;
    ds.m = basis.m;
    ds.spike_sigma2 = spec.sigma2;
    ds.tau2 = spec.tau2;
    ds.seed = seed;
    ds.dist = dist;
    ds.spec = spec;
    return ds;
}

Dataset generate_dataset(const model::BlockSpec& spec, int n,
                         const ScoreDistribution& dist, std::uint64_t seed) {
    if (n < 1) throw std::invalid_argument("generate_dataset: n must be >= 1");
    const EigenBasis basis = eigenbasis(spec);
    Dataset ds;
    ds.Z = draw_scores(dist, spec.p, n, seed);
    ds.X = synthesize(basis, ds.Z);
    ds.lambda = basis.lambda;
    ds.m = basis.m;
    ds.spike_sigma2.resize(basis.m);
    for (int j = 0; j < basis.m; ++j)
        ds.spike_sigma2[j] = basis.lambda[j] / spec.p;
    ds.tau2 = basis.p > basis.m
                  ? basis.lambda.tail(basis.p - basis.m).sum() / spec.p
                  : 0.0;
    ds.seed = seed;
    ds.dist = dist;
    ds.spec = spec;
    return ds;
}

PopulationScores population_scores(const Dataset& ds, int j) {
    if (j < 1 || j > ds.p())
        throw std::invalid_argument("population_scores: component index out of range");
    PopulationScores out;
    out.z = ds.Z.row(j - 1);
    out.s = std::sqrt(ds.lambda[j - 1]) * out.z;
    return out;
}

}  // namespace pervasive::simulate
