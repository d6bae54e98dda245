"""Economy SVD and the weighted nuclear norm proximal operators.

Two shrinkage rules live here: the classical closed form with an explicit
non-descending weight vector (used by the baseline variants), and the
self-referential reweighted rule where each singular value is shrunk by a
weight inversely proportional to its own shrunk value (used inside the ADMM
Z-update).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

DEFAULT_EPS = 1e-6


@dataclass(frozen=True)
class SvdFactors:
    U: np.ndarray  # (d, r), orthonormal columns
    S: np.ndarray  # (r,), non-increasing, >= 0
    V: np.ndarray  # (M, r), orthonormal columns

    def compose(self, S=None) -> np.ndarray:
        s = self.S if S is None else S
        return (self.U * s) @ self.V.T


def default_scale(M: int) -> float:
    """Weight scale constant for a group of M patches: sqrt(2M)."""
    return float(np.sqrt(2.0 * M))


def svd(A: np.ndarray) -> SvdFactors:
    """Thin SVD with deterministic singular-vector signs.

    The largest-magnitude entry of each left singular vector is made
    nonnegative so repeated runs and transposed inputs agree exactly.
    """
    A = np.asarray(A, dtype=np.float64)
    if not np.all(np.isfinite(A)):
        raise ValueError("svd input contains non-finite values")
    U, S, Vt = np.linalg.svd(A, full_matrices=False)
    V = Vt.T
    flip = U[np.abs(U).argmax(axis=0), np.arange(U.shape[1])] < 0
    U[:, flip] *= -1.0
    V[:, flip] *= -1.0
    return SvdFactors(U=U, S=S, V=V)


def soft_threshold_weighted(S: np.ndarray, halfweights: np.ndarray) -> np.ndarray:
    """Elementwise max(S_i - w_i/2, 0)."""
    S = np.asarray(S, dtype=np.float64)
    hw = np.asarray(halfweights, dtype=np.float64)
    if S.shape != hw.shape:
        raise ValueError(f"length mismatch: {S.shape} vs {hw.shape}")
    if np.any(hw < 0):
        raise ValueError("halfweights must be >= 0")
    return np.maximum(S - hw, 0.0)


def wnnm_closed_form(Y: np.ndarray, weights: np.ndarray) -> np.ndarray:
    """Weighted singular value thresholding with a non-descending weight vector."""
    w = np.asarray(weights, dtype=np.float64)
    if np.any(np.diff(w) < 0):
        raise ValueError("weights must be non-descending")
    f = svd(Y)
    if w.shape != f.S.shape:
        raise ValueError(f"expected {f.S.shape[0]} weights, got {w.shape[0]}")
    return f.compose(soft_threshold_weighted(f.S, w / 2.0))


def reweighted_sv_solve(S: np.ndarray, rho: float, C: float,
                        eps: float = DEFAULT_EPS) -> np.ndarray:
    """Closed-form shrinkage for the self-referential weight rule.

    Per singular value: with c1 = s - eps and c2 = c1^2 - 8C/rho, the shrunk
    value is 0 when c2 < 0 and (c1 + sqrt(c2))/2 otherwise.
    """
    if rho <= 0:
        raise ValueError("rho must be > 0")
    if C <= 0:
        raise ValueError("C must be > 0")
    if eps < 0:
        raise ValueError("eps must be >= 0")
    S = np.asarray(S, dtype=np.float64)
    c1 = S - eps
    c2 = c1 * c1 - 8.0 * C / rho
    out = np.where(c2 < 0, 0.0, (c1 + np.sqrt(np.maximum(c2, 0.0))) / 2.0)
    out = np.maximum(out, 0.0)
    if np.all(np.diff(S) <= 0) and np.any(np.diff(out) > 1e-12):
        raise AssertionError("shrinkage broke singular value ordering")
    return out


def wnn_prox(Q: np.ndarray, rho: float, C: float,
             eps: float = DEFAULT_EPS) -> np.ndarray:
    """Weighted nuclear norm proximal step: shrink the singular values of Q."""
    f = svd(Q)
    return f.compose(reweighted_sv_solve(f.S, rho, C, eps))


def baseline_weights(S: np.ndarray, sigma: float, C: float,
                     eps: float = DEFAULT_EPS) -> np.ndarray:
    """Non-descending weight vector for the single-pass baseline solvers.

    Derived so that the closed-form thresholding reproduces the reweighted
    shrinkage at data-term scale 1/sigma^2, keeping one proximal kernel for
    every variant.
    """
    if sigma <= 0:
        raise ValueError("sigma must be > 0")
    S = np.asarray(S, dtype=np.float64)
    shrunk = reweighted_sv_solve(S, 2.0 / sigma ** 2, C, eps)
    w = 2.0 * (S - shrunk)
    return np.maximum.accumulate(w)


def baseline_solve(Y: np.ndarray, sigma: float, C: float | None = None,
                   eps: float = DEFAULT_EPS) -> np.ndarray:
    """One-shot weighted SVT of a patch group at noise level sigma."""
    f = svd(Y)
    if C is None:
        C = default_scale(Y.shape[1])
    w = baseline_weights(f.S, sigma, C, eps)
    return f.compose(soft_threshold_weighted(f.S, w / 2.0))
