"""Smoke tests for the pervasive_pca extension module."""

import math

import numpy as np
import pytest

import pervasive_pca as pp


def test_version():
    assert pp.__version__


def test_model_basics():
    v = pp.FactorVector(coefficients=np.array([1.0, 0.0, 1.0, 0.0]), noise_sigma2=1.0)
    assert pp.pervasiveness_ratio(v) == 0.5
    dense = pp.FactorVector(coefficients=np.ones(4), noise_sigma2=1.0)
    assert pp.spike_eigenvalue(dense) == pytest.approx(5.0)

    spec = pp.BlockSpec(sigma2=1.0, blocks=[(0.3, 0.9), (0.3, 0.6), (0.3, 0.3)], p=100)
    eig = pp.block_eigenvalues(spec)
    assert eig["spikes"] == pytest.approx([27.1, 18.4, 9.7])
    sigma = pp.materialize_covariance(spec)
    assert sigma.shape == (100, 100)
    oracle = np.linalg.eigvalsh(sigma)[::-1]
    assert np.allclose(oracle, eig["spectrum"], atol=1e-9)


def test_generate_and_pca_roundtrip():
    spec = pp.SpikeSpec(sigma2=[12.0, 8.0], tau2=1.0, p=400, n=30)
    dist = pp.ScoreDistribution.standard_normal()
    ds = pp.generate_dataset(spec, dist, seed=11)
    assert ds.X.shape == (400, 30)
    assert ds.Z.shape == (400, 30)

    again = pp.generate_dataset(spec, dist, seed=11)
    assert np.array_equal(ds.X, again.X)

    res = pp.pca_decompose(ds.X, k=2, centered=False, divisor="n")
    assert res.d.shape == (30,)
    assert res.Zhat.shape == (2, 30)
    # Standardized scores carry the divisor normalization.
    assert res.Zhat[0] @ res.Zhat[0] == pytest.approx(30.0)


def test_limit_predictions_track_sample_scores():
    spec = pp.SpikeSpec(sigma2=[12.0, 8.0], tau2=1.0, p=20000, n=40)
    ds = pp.generate_dataset(spec, pp.ScoreDistribution.standard_normal(), seed=5)
    Z_top = ds.Z[:2].T
    we = pp.build_w(Z_top, [12.0, 8.0])
    pred = pp.predict_scores(we, Z_top, [12.0, 8.0])
    res = pp.pca_decompose(ds.X, k=2, centered=False, divisor="n")
    for j in range(2):
        sign = 1.0 if pred[j] @ res.Zhat[j] >= 0 else -1.0
        rmse = np.sqrt(np.mean((res.Zhat[j] - sign * pred[j]) ** 2))
        assert rmse < 0.05
    d_pred = pp.predict_sample_eigenvalues(we, tau2=1.0, count=2)
    assert res.d[0] / 20000 == pytest.approx(d_pred[0], rel=0.05)

    pd = pp.pair_decomposition(we, Z_top, [12.0, 8.0], 1, 2)
    assert pd.noise.shape == (2, 40)
    assert np.abs(pd.noise).max() == 0.0  # m = 2: no other components


def test_noise_variance_and_required_n():
    sigma2 = [0.133, 0.068, 0.044, 0.033, 0.031]
    nv = pp.noise_variance_asymptotic(sigma2, 100, 1, 2)
    assert nv.sd_j == pytest.approx(math.sqrt(0.4457 / 100), rel=1e-3)
    assert pp.required_sample_size(sigma2, 1, 2, 0.15) == (20, 221)


def test_transform_fit_and_classify():
    rng = np.random.default_rng(7)
    pop = rng.standard_normal((2, 100))
    saddle = np.diag([1.4, 0.6]) @ pop
    t = pp.fit_pair_transform(saddle, pop)
    assert t.scale_x == pytest.approx(1.4)
    assert t.scale_y == pytest.approx(0.6)
    assert t.residual < 1e-10
    label, _ = pp.classify_transform(t)
    assert label == "saddle"


def test_estimate_signals():
    est = pp.estimate_signals(np.array([399.0, 204.0, 132.0, 99.0, 93.0]), p=3000, m=5)
    assert est["sigma2_hat"] == pytest.approx([0.133, 0.068, 0.044, 0.033, 0.031])


def test_chi_square_check():
    rep = pp.chi_square_check(1.0, 10, 20000, 3)
    assert rep.mean == pytest.approx(10.0, rel=0.02)
    assert rep.variance == pytest.approx(20.0, rel=0.10)


def test_experiment_sweeps():
    pts = pp.noise_sd_sweep(
        [12.0, 8.0, 0.7, 0.1, 0.02], n_grid=[40, 80], replicates=300, seed=4
    )
    assert len(pts) == 2
    assert pts[1]["sd_j"] < pts[0]["sd_j"]
    assert pts[0]["analytic_sd_j"] > 0

    lln = pp.lln_check(tau2=1.0, m=2, n=8, p_grid=[100, 1000], replicates=5, seed=6)
    assert lln[1]["median_dev"] < lln[0]["median_dev"]

    conv = pp.convergence_study([12.0, 8.0], tau2=1.0, n=20, p_grid=[200, 2000], seed=9)
    assert conv[1]["score_rmse"] < conv[0]["score_rmse"]


def test_invalid_arguments_raise():
    with pytest.raises(ValueError):
        pp.SpikeSpec(sigma2=[8.0, 12.0], tau2=1.0, p=100, n=10)
    with pytest.raises(ValueError):
        pp.ScoreDistribution.student_t(4)
    with pytest.raises(ValueError):
        pp.required_sample_size([4.0, 2.0, 4.0], 1, 2, 0.1)
