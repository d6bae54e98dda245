"""Planar color image container, patch vectorization, noise injection and metrics.

Images are kept as three float64 planes (R, G, B) in the [0, 255] intensity
range.  All operations are pure; planes are marked read-only so images can be
shared freely across worker threads.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

SIGMA_MIN = 0.1  # clamp applied wherever a sigma enters a denominator


class ImageError(ValueError):
    pass


@dataclass(frozen=True)
class ImagePlanes:
    """A 3-channel image stored as a (3, H, W) float64 array, order R, G, B."""

    planes: np.ndarray

    def __post_init__(self):
        a = np.asarray(self.planes, dtype=np.float64)
        if a.ndim != 3 or a.shape[0] != 3:
            raise ImageError(f"expected (3, H, W) planes, got shape {a.shape}")
        if not np.all(np.isfinite(a)):
            raise ImageError("image contains non-finite values")
        a = np.ascontiguousarray(a)
        a.setflags(write=False)
        object.__setattr__(self, "planes", a)

    @property
    def height(self) -> int:
        return self.planes.shape[1]

    @property
    def width(self) -> int:
        return self.planes.shape[2]

    @classmethod
    def from_planes(cls, r, g, b) -> "ImagePlanes":
        return cls(np.stack([np.asarray(r, dtype=np.float64),
                             np.asarray(g, dtype=np.float64),
                             np.asarray(b, dtype=np.float64)]))

    def permuted(self, order) -> "ImagePlanes":
        """Return a copy with channels reordered, e.g. order=(1, 2, 0)."""
        return ImagePlanes(self.planes[list(order)])


@dataclass(frozen=True)
class PatchVector:
    """A vectorized p x p x 3 patch: [r; g; b], each block column-major."""

    p: int
    data: np.ndarray
    origin: tuple[int, int]

    def __post_init__(self):
        if self.data.shape != (3 * self.p * self.p,):
            raise ImageError(
                f"patch vector must have length 3p^2={3 * self.p * self.p}, "
                f"got {self.data.shape}")


@dataclass(frozen=True)
class ChannelSigmas:
    """Per-channel noise standard deviations, intensity units."""

    sigma_r: float
    sigma_g: float
    sigma_b: float

    def __post_init__(self):
        for s in self.as_tuple():
            if not (math.isfinite(s) and s >= 0):
                raise ImageError(f"sigma must be finite and >= 0, got {s}")

    def as_tuple(self) -> tuple[float, float, float]:
        return (self.sigma_r, self.sigma_g, self.sigma_b)

    def clamped(self, floor: float = SIGMA_MIN) -> "ChannelSigmas":
        return ChannelSigmas(*(max(s, floor) for s in self.as_tuple()))

    def permuted(self, order) -> "ChannelSigmas":
        t = self.as_tuple()
        return ChannelSigmas(*(t[i] for i in order))


def extract_patch(img: ImagePlanes, row: int, col: int, p: int) -> PatchVector:
    """Extract the p x p patch at (row, col) as a concatenated RGB vector.

    Patches are only taken fully inside the image; there is no padding.
    """
    if not (0 <= row <= img.height - p and 0 <= col <= img.width - p):
        raise ImageError(
            f"patch exceeds image bounds: origin ({row}, {col}), p={p}, "
            f"image {img.height}x{img.width}")
    block = img.planes[:, row:row + p, col:col + p]
    # column-major raster order within each channel block
    data = block.transpose(0, 2, 1).reshape(-1).copy()
    return PatchVector(p=p, data=data, origin=(row, col))


def _channel_rng(seed: int, channel: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence([int(seed), channel]))


def add_awgn_with_seeds(img: ImagePlanes, sigmas: ChannelSigmas,
                        rngs) -> ImagePlanes:
    """Add per-channel white Gaussian noise drawn from the given generators."""
    out = np.array(img.planes)
    for c, (sigma, rng) in enumerate(zip(sigmas.as_tuple(), rngs)):
        if sigma > 0:
            out[c] += rng.normal(0.0, sigma, size=out[c].shape)
    return ImagePlanes(out)


def add_awgn(img: ImagePlanes, sigmas: ChannelSigmas, seed: int) -> ImagePlanes:
    """Corrupt with AWGN, independent across channels, deterministic per seed.

    Values are not clipped so that sample statistics match the noise model;
    clipping to [0, 255] is a CLI option.
    """
    rngs = [_channel_rng(seed, c) for c in range(3)]
    return add_awgn_with_seeds(img, sigmas, rngs)


def psnr(clean: ImagePlanes, test: ImagePlanes) -> float:
    """Peak signal-to-noise ratio in dB over all 3*H*W samples, peak 255.

    Returns +inf when the images are identical.
    """
    if clean.planes.shape != test.planes.shape:
        raise ImageError(
            f"dimension mismatch: {clean.planes.shape} vs {test.planes.shape}")
    mse = float(np.mean((clean.planes - test.planes) ** 2))
    if mse == 0.0:
        return math.inf
    return 10.0 * math.log10(255.0 ** 2 / mse)


def estimate_sigmas(img: ImagePlanes) -> ChannelSigmas:
    """Rough per-channel noise estimate from horizontal first differences.

    Uses 1.4826 * MAD of the differences divided by sqrt(2).  Approximate;
    the harness prefers user-supplied sigmas.
    """
    if img.height < 16 or img.width < 16:
        raise ImageError(f"image too small to estimate noise: "
                         f"{img.height}x{img.width}, need at least 16x16")
    est = []
    for c in range(3):
        d = np.diff(img.planes[c], axis=1)
        mad = float(np.median(np.abs(d - np.median(d))))
        est.append(max(1.4826 * mad / math.sqrt(2.0), SIGMA_MIN))
    return ChannelSigmas(*est)
