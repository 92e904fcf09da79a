"""Post-hoc linear attribute eraser for frozen embeddings.

Learns a square transform W (initialized to the identity) minimizing

    ||Z W - Z||_F^2 / (n d)  +  lambda * HSIC(Z W, S)

by gradient descent with analytic gradients: the first term keeps the
transformed embedding close to the original, the second decorrelates it
from the sensitive columns S. Kernel bandwidths are frozen at their
initial values so the objective is a fixed differentiable function of W
(the gradient check against finite differences depends on this).
HSIC is minibatched during optimization and reported full-batch.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin

from ..validation import as_float_matrix, check_aligned_rows
from .hsic import HsicConfig, hsic, hsic_value_and_grad, median_bandwidth, rbf_gram, _resolve_bandwidth


class EraserDivergence(RuntimeError):
    def __init__(self, message: str, trace: list[dict]):
        super().__init__(message)
        self.trace = trace


@dataclass(frozen=True)
class EraserConfig:
    lam: float = 10.0
    steps: int = 300
    step_size: float = 0.5
    step_decay: float = 0.01
    hsic: HsicConfig = field(default_factory=HsicConfig)

    def __post_init__(self):
        if self.lam < 0:
            raise ValueError("lambda must be >= 0")
        if self.steps < 1:
            raise ValueError("steps must be >= 1")
        if not self.step_size > 0:
            raise ValueError("step_size must be > 0")

    def to_json(self) -> dict:
        return {
            "lam": self.lam,
            "steps": self.steps,
            "step_size": self.step_size,
            "step_decay": self.step_decay,
            "hsic": self.hsic.to_json(),
        }


def fidelity_and_grad(Z: np.ndarray, W: np.ndarray) -> tuple[float, np.ndarray]:
    """Mean squared deviation of ZW from Z, and its gradient in W."""
    n, d = Z.shape
    R = Z @ W - Z
    value = float(np.sum(R * R) / (n * d))
    grad = 2.0 * (Z.T @ R) / (n * d)
    return value, grad


def eraser_objective(
    Z: np.ndarray,
    S: np.ndarray,
    W: np.ndarray,
    lam: float,
    bandwidth_z: float,
    bandwidth_s: float,
) -> tuple[float, np.ndarray]:
    """Full-batch objective and analytic dJ/dW (the gradient-check oracle)."""
    fid, grad_fid = fidelity_and_grad(Z, W)
    L = rbf_gram(S, bandwidth_s)
    h, grad_y = hsic_value_and_grad(Z @ W, L, bandwidth_z)
    grad = grad_fid + lam * (Z.T @ grad_y)
    return fid + lam * h, grad


def fit_eraser(Z, S, config: EraserConfig = EraserConfig()):
    """Minimize fidelity + lambda * HSIC by seeded minibatch descent.

    Returns (Z_transformed, W, trace) where trace holds both loss terms
    per step. Raises EraserDivergence (with the trace attached) if the
    objective exceeds 10x its initial value.
    """
    Z = as_float_matrix(Z, "Z")
    S = as_float_matrix(S, "S")
    check_aligned_rows(Z, S, names=("Z", "S"))
    n, d = Z.shape
    bw_z = _resolve_bandwidth(Z, config.hsic.bandwidth_x, config.hsic.seed, "Z")
    bw_s = _resolve_bandwidth(S, config.hsic.bandwidth_s, config.hsic.seed, "S")
    m = min(config.hsic.minibatch, n)
    rng = np.random.default_rng(config.hsic.seed)

    W = np.eye(d)
    trace: list[dict] = []
    initial_total: float | None = None
    for step in range(config.steps):
        idx = np.sort(rng.choice(n, size=m, replace=False)) if n > m else np.arange(n)
        Zb = Z[idx]
        fid, grad_fid = fidelity_and_grad(Z, W)
        L = rbf_gram(S[idx], bw_s)
        h, grad_y = hsic_value_and_grad(Zb @ W, L, bw_z)
        total = fid + config.lam * h
        trace.append({"step": step, "fidelity": fid, "hsic_minibatch": h, "total": total})
        if initial_total is None:
            initial_total = max(total, 1e-12)
        elif total > 10.0 * initial_total:
            raise EraserDivergence(
                f"objective diverged at step {step}: {total:.3g} > 10x initial", trace
            )
        if config.lam > 0.0:
            grad = grad_fid + config.lam * (Zb.T @ grad_y)
        else:
            grad = grad_fid
        lr = config.step_size / (1.0 + config.step_decay * step)
        W = W - lr * grad
    return Z @ W, W, trace


class HsicEraser(BaseEstimator, TransformerMixin):
    """Scikit-learn transformer wrapping fit_eraser.

    fit(Z, S) learns the transform; transform(Z) applies it to any
    row-aligned embedding matrix.
    """

    def __init__(self, lam=10.0, steps=300, step_size=0.5, step_decay=0.01,
                 minibatch=256, seed=0, bandwidth_z=None, bandwidth_s=None):
        self.lam = lam
        self.steps = steps
        self.step_size = step_size
        self.step_decay = step_decay
        self.minibatch = minibatch
        self.seed = seed
        self.bandwidth_z = bandwidth_z
        self.bandwidth_s = bandwidth_s

    def _config(self) -> EraserConfig:
        return EraserConfig(
            lam=self.lam,
            steps=self.steps,
            step_size=self.step_size,
            step_decay=self.step_decay,
            hsic=HsicConfig(
                bandwidth_x=self.bandwidth_z,
                bandwidth_s=self.bandwidth_s,
                minibatch=self.minibatch,
                seed=self.seed,
            ),
        )

    def fit(self, Z, S=None):
        if S is None:
            raise ValueError("HsicEraser.fit requires sensitive columns S")
        _, self.W_, self.trace_ = fit_eraser(Z, S, self._config())
        self.n_features_in_ = np.asarray(Z).shape[1]
        return self

    def transform(self, Z):
        Z = as_float_matrix(Z, "Z")
        return Z @ self.W_

    def residual_dependence(self, Z, S) -> float:
        """Full-batch HSIC between the transformed embedding and S."""
        cfg = self._config().hsic
        return hsic(self.transform(Z), S, cfg)


def standardize_sensitive(columns: np.ndarray) -> np.ndarray:
    """Sensitive feature columns -> finite, zero-mean, unit-variance matrix.

    Missing cells become 0 after centering (the column mean), constant
    columns stay zero.
    """
    S = np.array(columns, dtype=np.float64)
    if S.ndim == 1:
        S = S.reshape(-1, 1)
    for j in range(S.shape[1]):
        col = S[:, j]
        finite = np.isfinite(col)
        if not finite.any():
            S[:, j] = 0.0
            continue
        mu = col[finite].mean()
        sd = col[finite].std()
        col = np.where(finite, col - mu, 0.0)
        S[:, j] = col / sd if sd > 0 else 0.0
    return S
