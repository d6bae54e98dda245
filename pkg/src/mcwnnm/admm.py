"""ADMM solver for the channel-weighted low-rank group subproblem.

Minimizes ||W(Y - X)||_F^2 + ||Z||_w,* subject to X = Z, where W is the
block-diagonal channel weight matrix with per-channel entries 1/sigma_c.
The X-step is a per-channel scalar blend (W^T W is diagonal), the Z-step is
the weighted nuclear norm proximal operator, and the penalty grows
geometrically as rho_k = rho0 * mu^k.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import lowrank
from .image import ChannelSigmas, SIGMA_MIN


class DivergenceError(RuntimeError):
    pass


@dataclass(frozen=True)
class ChannelWeightMatrix:
    """Diagonal weights blockdiag(1/sigma_r I, 1/sigma_g I, 1/sigma_b I).

    Stored as three reciprocals plus the patch size defining the p^2 block
    extents; never materialized as a dense matrix.
    """

    inv_sigma_r: float
    inv_sigma_g: float
    inv_sigma_b: float
    p: int

    def __post_init__(self):
        for v in (self.inv_sigma_r, self.inv_sigma_g, self.inv_sigma_b):
            if not (np.isfinite(v) and v > 0):
                raise ValueError(f"weight reciprocals must be finite and > 0, got {v}")

    def inv_sigmas(self) -> np.ndarray:
        return np.array([self.inv_sigma_r, self.inv_sigma_g, self.inv_sigma_b])

    def row_weights(self) -> np.ndarray:
        """The 3p^2 diagonal entries of W as a column vector."""
        return np.repeat(self.inv_sigmas(), self.p * self.p)[:, None]


def build_weight_matrix(sigmas: ChannelSigmas, p: int,
                        floor: float = SIGMA_MIN) -> ChannelWeightMatrix:
    """Channel weight matrix from noise levels, sigmas clamped at floor."""
    s = sigmas.clamped(floor)
    return ChannelWeightMatrix(1.0 / s.sigma_r, 1.0 / s.sigma_g,
                               1.0 / s.sigma_b, p)


def uniform_weight_matrix(sigma: float, p: int,
                          floor: float = SIGMA_MIN) -> ChannelWeightMatrix:
    """W = sigma^-1 I, the equal-noise reduction."""
    s = max(sigma, floor)
    return ChannelWeightMatrix(1.0 / s, 1.0 / s, 1.0 / s, p)


@dataclass(frozen=True)
class AdmmConfig:
    mu: float = 1.001       # penalty growth, > 1
    rho0: float = 3.0       # initial penalty
    K1: int = 10            # iteration cap
    tol: float | None = None  # None -> 1e-8 * sqrt(d * M)
    eq13_verbatim: bool = False  # evaluate the X-step in its halved printed form

    def __post_init__(self):
        if self.mu <= 1:
            raise ValueError("mu must be > 1")
        if self.rho0 <= 0:
            raise ValueError("rho0 must be > 0")
        if self.K1 < 1:
            raise ValueError("K1 must be >= 1")
        if self.tol is not None and self.tol <= 0:
            raise ValueError("tol must be > 0")

    def tolerance(self, shape) -> float:
        if self.tol is not None:
            return self.tol
        return 1e-8 * float(np.sqrt(shape[0] * shape[1]))


@dataclass
class AdmmState:
    X: np.ndarray
    Z: np.ndarray
    A: np.ndarray
    rho: float
    k: int
    # per-iteration (||X - Z||_F, ||dX||_F, ||dZ||_F)
    residuals: list[tuple[float, float, float]] = field(default_factory=list)
    rhos: list[float] = field(default_factory=list)


def x_update(Y: np.ndarray, Z: np.ndarray, A: np.ndarray, rho: float,
             W: ChannelWeightMatrix, eq13_verbatim: bool = False) -> np.ndarray:
    """Closed-form least squares step, a per-channel-block scalar blend.

    Solves (2 W^T W + rho I) X = 2 W^T W Y + rho Z - A.  The eq13_verbatim
    flag evaluates the algebraically identical halved form
    (W^T W + rho/2 I)^-1 (W^T W Y + rho/2 Z - A/2).
    """
    if rho <= 0:
        raise ValueError("rho must be > 0")
    if not (Y.shape == Z.shape == A.shape):
        raise ValueError("shape mismatch in x_update")
    w2 = W.row_weights() ** 2
    if eq13_verbatim:
        return (w2 * Y + (rho / 2.0) * Z - 0.5 * A) / (w2 + rho / 2.0)
    return (2.0 * w2 * Y + rho * Z - A) / (2.0 * w2 + rho)


def z_update(X: np.ndarray, A: np.ndarray, rho: float, C: float,
             eps: float = lowrank.DEFAULT_EPS) -> np.ndarray:
    """Weighted nuclear norm proximal step on X + rho^-1 A."""
    return lowrank.wnn_prox(X + A / rho, rho, C, eps)


def multiplier_update(A: np.ndarray, rho: float, X: np.ndarray,
                      Z: np.ndarray) -> np.ndarray:
    return A + rho * (X - Z)


def admm_solve(Y: np.ndarray, W: ChannelWeightMatrix, cfg: AdmmConfig,
               C: float | None = None,
               eps: float = lowrank.DEFAULT_EPS) -> AdmmState:
    """Run the X/Z/A/rho updates from zero initialization.

    Terminates when all three residuals drop below the tolerance or after K1
    iterations; returns the final state with the residual history.
    """
    Y = np.asarray(Y, dtype=np.float64)
    if not np.all(np.isfinite(Y)):
        raise ValueError("group matrix contains non-finite values")
    if C is None:
        C = lowrank.default_scale(Y.shape[1])
    tol = cfg.tolerance(Y.shape)

    X = np.zeros_like(Y)
    Z = np.zeros_like(Y)
    A = np.zeros_like(Y)
    state = AdmmState(X=X, Z=Z, A=A, rho=cfg.rho0, k=0)
    for k in range(cfg.K1):
        rho = cfg.rho0 * cfg.mu ** k
        Xn = x_update(Y, Z, A, rho, W, cfg.eq13_verbatim)
        Zn = z_update(Xn, A, rho, C, eps)
        A = multiplier_update(A, rho, Xn, Zn)
        if not (np.all(np.isfinite(Xn)) and np.all(np.isfinite(Zn))
                and np.all(np.isfinite(A))):
            raise DivergenceError(f"divergence at iteration {k}")
        res = (float(np.linalg.norm(Xn - Zn)),
               float(np.linalg.norm(Xn - X)),
               float(np.linalg.norm(Zn - Z)))
        X, Z = Xn, Zn
        state.residuals.append(res)
        state.rhos.append(rho)
        state.k = k + 1
        if max(res) <= tol:
            break
    state.X, state.Z, state.A, state.rho = X, Z, A, state.rhos[-1]
    return state
