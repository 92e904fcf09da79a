import numpy as np
import pytest

from eafd.erasure import (
    EraserConfig,
    EraserDivergence,
    HsicConfig,
    HsicEraser,
    eraser_objective,
    fit_eraser,
    hsic,
    hsic_from_grams,
    median_bandwidth,
    permutation_null,
)


def test_hsic_n2_closed_form():
    # with two samples, HSIC reduces to (1-a)(1-b) for kernel values a, b
    rng = np.random.default_rng(0)
    for _ in range(20):
        x = rng.normal(size=(2, 3))
        s = rng.normal(size=(2, 2))
        bw_x, bw_s = rng.uniform(0.5, 3.0, size=2)
        cfg = HsicConfig(bandwidth_x=bw_x, bandwidth_s=bw_s)
        a = np.exp(-np.sum((x[0] - x[1]) ** 2) / (2 * bw_x**2))
        b = np.exp(-np.sum((s[0] - s[1]) ** 2) / (2 * bw_s**2))
        assert hsic(x, s, cfg) == pytest.approx((1 - a) * (1 - b), abs=1e-12)


def test_hsic_symmetry_exact():
    rng = np.random.default_rng(1)
    x = rng.normal(size=(64, 3))
    s = rng.normal(size=(64, 2))
    cfg = HsicConfig(bandwidth_x=1.3, bandwidth_s=1.3)
    assert hsic(x, s, cfg) == hsic(s, x, cfg)


def test_hsic_non_negative():
    rng = np.random.default_rng(2)
    for seed in range(10):
        x = rng.normal(size=(40, 2))
        s = rng.normal(size=(40, 1))
        assert hsic(x, s) >= -1e-12


def test_hsic_detects_dependence():
    rng = np.random.default_rng(3)
    x = rng.normal(size=(256, 2))
    observed, null = permutation_null(x, x.copy(), n_permutations=200, seed=0)
    assert observed > np.quantile(null, 0.99)


def test_hsic_independent_below_null_quantile_mostly():
    hits = 0
    n_runs = 30
    for seed in range(n_runs):
        rng = np.random.default_rng(seed)
        x = rng.normal(size=(128, 2))
        s = rng.normal(size=(128, 2))
        observed, null = permutation_null(x, s, n_permutations=100, seed=seed)
        hits += observed <= np.quantile(null, 0.95)
    assert hits >= int(0.85 * n_runs)


def test_median_bandwidth_examples():
    assert median_bandwidth(np.array([[0.0], [3.0]])) == 3.0
    assert median_bandwidth(np.zeros((5, 2))) == 1.0


def test_median_bandwidth_subsample_deterministic():
    rng = np.random.default_rng(4)
    x = rng.normal(size=(5000, 3))
    assert median_bandwidth(x, seed=7) == median_bandwidth(x, seed=7)


def test_zero_variance_warns_and_falls_back():
    x = np.ones((10, 2))
    s = np.random.default_rng(5).normal(size=(10, 1))
    with pytest.warns(UserWarning, match="bandwidth 1.0"):
        value = hsic(x, s)
    assert value == pytest.approx(0.0, abs=1e-12)


# --- analytic gradient vs central finite differences -------------------------


def _numeric_grad(fn, W, eps=1e-6):
    g = np.zeros_like(W)
    for i in range(W.shape[0]):
        for j in range(W.shape[1]):
            E = np.zeros_like(W)
            E[i, j] = eps
            g[i, j] = (fn(W + E) - fn(W - E)) / (2 * eps)
    return g


def test_eraser_gradient_matches_finite_differences():
    rng = np.random.default_rng(6)
    for trial in range(20):
        Z = rng.normal(size=(16, 8))
        S = rng.normal(size=(16, 2))
        W = np.eye(8) + 0.1 * rng.normal(size=(8, 8))
        lam = float(rng.uniform(0.5, 5.0))
        bw_z = float(rng.uniform(0.8, 2.0))
        bw_s = float(rng.uniform(0.8, 2.0))
        _, analytic = eraser_objective(Z, S, W, lam, bw_z, bw_s)
        numeric = _numeric_grad(lambda w: eraser_objective(Z, S, w, lam, bw_z, bw_s)[0], W)
        rel = np.linalg.norm(analytic - numeric) / max(np.linalg.norm(numeric), 1e-12)
        assert rel <= 1e-4, f"trial {trial}: relative gradient error {rel}"


# --- eraser behavior ----------------------------------------------------------


def test_lambda_zero_keeps_identity():
    rng = np.random.default_rng(7)
    Z = rng.normal(size=(100, 6))
    S = rng.normal(size=(100, 1))
    Zp, W, trace = fit_eraser(Z, S, EraserConfig(lam=0.0, steps=50))
    np.testing.assert_allclose(W, np.eye(6), atol=1e-9)
    np.testing.assert_allclose(Zp, Z, atol=1e-9)
    assert all(t["fidelity"] == 0.0 for t in trace)


def test_eraser_reduces_dependence_on_planted_coordinate():
    rng = np.random.default_rng(8)
    n, d = 400, 6
    s = rng.normal(size=(n, 1))
    Z = rng.normal(size=(n, d))
    Z[:, 0] = s[:, 0]
    est = HsicEraser(lam=20.0, steps=200, seed=0).fit(Z, s)
    before = hsic(Z, s, HsicConfig(seed=0))
    after = est.residual_dependence(Z, s)
    assert after < 0.3 * before
    # untouched coordinates stay close to the original
    Zp = est.transform(Z)
    for j in range(1, d):
        corr = np.corrcoef(Zp[:, j], Z[:, j])[0, 1]
        assert corr > 0.9


def test_larger_lambda_means_less_residual_dependence():
    wins = 0
    for seed in range(10):
        rng = np.random.default_rng(100 + seed)
        n, d = 300, 5
        s = rng.normal(size=(n, 1))
        Z = rng.normal(size=(n, d))
        Z[:, 1] = 0.9 * s[:, 0] + 0.1 * rng.normal(size=n)
        small = HsicEraser(lam=2.0, steps=150, seed=seed).fit(Z, s)
        large = HsicEraser(lam=20.0, steps=150, seed=seed).fit(Z, s)
        if large.residual_dependence(Z, s) <= small.residual_dependence(Z, s):
            wins += 1
    assert wins >= 8


def test_divergence_aborts_with_trace():
    rng = np.random.default_rng(9)
    Z = rng.normal(size=(80, 4))
    S = rng.normal(size=(80, 1))
    Z[:, 0] = S[:, 0]
    with pytest.raises(EraserDivergence) as info:
        fit_eraser(Z, S, EraserConfig(lam=50.0, steps=200, step_size=500.0))
    assert len(info.value.trace) >= 1


def test_fit_eraser_deterministic():
    rng = np.random.default_rng(10)
    Z = rng.normal(size=(150, 5))
    S = rng.normal(size=(150, 2))
    cfg = EraserConfig(lam=5.0, steps=80)
    _, W1, _ = fit_eraser(Z, S, cfg)
    _, W2, _ = fit_eraser(Z, S, cfg)
    np.testing.assert_array_equal(W1, W2)
