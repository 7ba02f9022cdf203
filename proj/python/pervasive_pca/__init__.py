"""Spiked-covariance simulation, scaled-rotation score limits and score-plot
diagnostics.

The heavy lifting lives in the C++ extension ``pervasive_pca._core``; this
package re-exports its public surface.
"""

from ._core import (  # noqa: F401
    Block,
    BlockSpec,
    ChiSquareReport,
    Dataset,
    FactorVector,
    NoiseVariance,
    PairDecomposition,
    PairTransform,
    PcaResult,
    ScoreDistribution,
    SpikeSpec,
    WEigen,
    __version__,
    block_eigenvalues,
    build_w,
    chi_square_check,
    classify_transform,
    convergence_study,
    draw_scores,
    dual_gram,
    estimate_signals,
    fit_pair_transform,
    generate_dataset,
    lln_check,
    materialize_covariance,
    noise_sd_sweep,
    noise_variance_asymptotic,
    pair_decomposition,
    pca_decompose,
    pervasiveness_ratio,
    predict_dual_eigenvector,
    predict_sample_eigenvalues,
    predict_scores,
    primal_eigenvectors,
    required_sample_size,
    sigma3_sweep,
    spike_eigenvalue,
    spike_eigenvectors,
    wishart_asymptotics,
)
