"""Full-image denoising loop and the four method variants.

The outer loop feeds each denoised estimate back as the next iteration's
input.  Within one iteration reference patches are processed independently
against a read-only patch table, so they can be farmed out to worker
threads; results are collected in reference order, which makes the output
independent of the worker count.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass, field

import numpy as np

from . import lowrank
from .admm import AdmmConfig, admm_solve, build_weight_matrix, uniform_weight_matrix
from .image import ChannelSigmas, ImagePlanes, SIGMA_MIN
from .patches import PatchTable, aggregate, aggregate_planes, assemble_reference_origins

VARIANTS = ("mcwnnm", "wnnm1", "wnnm2", "wnnm3")

_THREADS_ENV = "MCWNNM_THREADS"

# Group subproblems are solved in noise-normalized units: intensities are
# divided by the Euclidean norm of the sigma vector (the root-sum-square
# noise level of a concatenated patch column), so the data term 2/sigma_c^2
# and the stock penalty schedule (rho0 of a few units, C = sqrt(2M)) are
# commensurate at every noise level.  The normalizer is floored so that in
# the near-noiseless regime the data term dominates and the solver returns
# the input unchanged.  Images, PSNR and sigma I/O stay in [0, 255].
NORM_FLOOR = 5.0


def group_scale(sigmas: ChannelSigmas) -> float:
    """Intensity normalizer for the group solves (floored sigma-vector norm)."""
    return max(math.sqrt(sum(s * s for s in sigmas.as_tuple())), NORM_FLOOR)


@dataclass(frozen=True)
class DenoiseConfig:
    p: int = 6                 # patch side length
    M: int = 70                # group size
    window: int = 40           # search window side (candidate origins)
    stride: int = 4            # reference grid step
    K2: int = 8                # outer iterations
    admm: AdmmConfig = field(default_factory=AdmmConfig)
    variant: str = "mcwnnm"
    resigma: str = "reestimate"  # or "fixed"
    eps: float = lowrank.DEFAULT_EPS
    C: float | None = None     # None -> sqrt(2M)
    workers: int | None = None  # None -> MCWNNM_THREADS or cpu count

    def __post_init__(self):
        if self.p < 1 or self.M < 1 or self.K2 < 1:
            raise ValueError("p, M and K2 must be >= 1")
        if self.window < self.p:
            raise ValueError("window must be >= p")
        if self.variant not in VARIANTS:
            raise ValueError(f"unknown variant {self.variant!r}")
        if self.resigma not in ("fixed", "reestimate"):
            raise ValueError(f"unknown resigma mode {self.resigma!r}")

    def scale_constant(self) -> float:
        return self.C if self.C is not None else lowrank.default_scale(self.M)


def preset_config(variant: str = "mcwnnm", preset: str = "synthetic",
                  **overrides) -> DenoiseConfig:
    """Default parameter sets for the synthetic-noise and real-image regimes."""
    if preset == "synthetic":
        k2, rho0 = 8, {"mcwnnm": 3.0, "wnnm3": 10.0}.get(variant, 3.0)
    elif preset == "real":
        k2, rho0 = 2, {"mcwnnm": 6.0, "wnnm3": 8.0}.get(variant, 6.0)
    else:
        raise ValueError(f"unknown preset {preset!r}")
    admm_over = {k[5:]: overrides.pop(k) for k in list(overrides)
                 if k.startswith("admm_")}
    admm_over.setdefault("rho0", rho0)
    overrides.setdefault("K2", k2)
    return DenoiseConfig(variant=variant, admm=AdmmConfig(**admm_over),
                         **overrides)


def average_sigma(sigmas: ChannelSigmas) -> float:
    """Single-channel equivalent noise level: root mean square of the sigmas."""
    r, g, b = sigmas.as_tuple()
    return math.sqrt((r * r + g * g + b * b) / 3.0)


def reestimate_sigmas(original_sigmas: ChannelSigmas, noisy: ImagePlanes,
                      current_estimate: ImagePlanes) -> ChannelSigmas:
    """Shrink the noise levels by the energy already removed from the image."""
    out = []
    for c, sigma in enumerate(original_sigmas.as_tuple()):
        removed = float(np.mean(
            (noisy.planes[c] - current_estimate.planes[c]) ** 2))
        out.append(max(math.sqrt(max(sigma * sigma - removed, 0.0)), SIGMA_MIN))
    return ChannelSigmas(*out)


def _worker_count(cfg: DenoiseConfig, njobs: int) -> int:
    if cfg.workers is not None:
        n = cfg.workers
    else:
        n = os.cpu_count() or 1
        env = os.environ.get(_THREADS_ENV)
        if env:
            n = min(n, max(int(env), 1))
    return max(1, min(n, njobs))


def _map_ordered(fn, items, workers: int):
    if workers <= 1:
        return [fn(x) for x in items]
    from concurrent.futures import ThreadPoolExecutor
    with ThreadPoolExecutor(max_workers=workers) as ex:
        return list(ex.map(fn, items))


def _iterate_joint(y: ImagePlanes, sig: ChannelSigmas,
                   cfg: DenoiseConfig) -> ImagePlanes:
    """One outer iteration for the concatenated-RGB variants."""
    table = PatchTable(y.planes, cfg.p)
    refs = assemble_reference_origins((y.height, y.width), cfg.p, cfg.stride)
    C = cfg.scale_constant()

    scale = group_scale(sig)
    norm_sig = ChannelSigmas(*(s / scale for s in sig.as_tuple()))
    if cfg.variant == "mcwnnm":
        W = build_weight_matrix(norm_sig, cfg.p, floor=SIGMA_MIN / scale)
    elif cfg.variant == "wnnm3":
        W = uniform_weight_matrix(average_sigma(norm_sig), cfg.p,
                                  floor=SIGMA_MIN / scale)
    else:  # wnnm2
        W = None
        sbar = max(average_sigma(norm_sig), SIGMA_MIN / scale)

    def solve(ref):
        g = table.match(ref, cfg.M, cfg.window)
        Yn = g.Y / scale
        if W is None:
            X = lowrank.baseline_solve(Yn, sbar, C, cfg.eps)
        else:
            X = admm_solve(Yn, W, cfg.admm, C, cfg.eps).X
        return X * scale, g.origins

    groups = _map_ordered(solve, refs, _worker_count(cfg, len(refs)))
    return aggregate(groups, (y.height, y.width), cfg.p)


def _iterate_per_channel(y: ImagePlanes, sig: ChannelSigmas,
                         cfg: DenoiseConfig) -> ImagePlanes:
    """One outer iteration denoising each channel independently (WNNM-1)."""
    refs = assemble_reference_origins((y.height, y.width), cfg.p, cfg.stride)
    C = cfg.scale_constant()
    planes = []
    for c, sigma in enumerate(sig.as_tuple()):
        table = PatchTable(y.planes[c], cfg.p)
        scale = max(sigma, NORM_FLOOR)
        s = max(sigma, SIGMA_MIN) / scale

        def solve(ref):
            g = table.match(ref, cfg.M, cfg.window)
            X = lowrank.baseline_solve(g.Y / scale, s, C, cfg.eps)
            return X * scale, g.origins

        groups = _map_ordered(solve, refs, _worker_count(cfg, len(refs)))
        planes.append(
            aggregate_planes(groups, (y.height, y.width), cfg.p, nchannels=1)[0])
    return ImagePlanes(np.stack(planes))


def denoise(noisy: ImagePlanes, sigmas: ChannelSigmas,
            cfg: DenoiseConfig | None = None) -> ImagePlanes:
    """Denoise a color image with the configured variant.

    Deterministic: identical inputs and configuration produce bit-identical
    outputs regardless of worker count.
    """
    if cfg is None:
        cfg = DenoiseConfig()
    if noisy.height < cfg.p or noisy.width < cfg.p:
        raise ValueError(f"image {noisy.height}x{noisy.width} smaller than "
                         f"patch size {cfg.p}")
    sig = sigmas.clamped(SIGMA_MIN)
    x = noisy
    for _ in range(cfg.K2):
        if cfg.variant == "wnnm1":
            x = _iterate_per_channel(x, sig, cfg)
        else:
            x = _iterate_joint(x, sig, cfg)
        if cfg.resigma == "reestimate":
            sig = reestimate_sigmas(sigmas.clamped(SIGMA_MIN), noisy, x)
    return x
