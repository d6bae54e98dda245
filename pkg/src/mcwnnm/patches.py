"""Non-local block matching, patch-group assembly and image aggregation.

The matcher works on a precomputed table of vectorized patches so that the
full-image denoising loop extracts every patch exactly once per outer
iteration.  Distances between concatenated RGB vectors are accumulated per
channel and the three partial sums are combined in ascending order, which
makes the totals invariant to channel permutations (important for the
equivariance guarantees of the denoiser).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .image import ImageError, ImagePlanes


class MatchError(ValueError):
    pass


class AggregationError(ValueError):
    pass


@dataclass(frozen=True)
class PatchGroup:
    """Matrix of similar patches: columns are patch vectors, column 0 the reference."""

    Y: np.ndarray            # (d, M) with d = nchannels * p^2
    origins: np.ndarray      # (M, 2) int, (row, col) per column
    p: int

    @property
    def M(self) -> int:
        return self.Y.shape[1]


class PatchTable:
    """All valid patch vectors of an image, indexed by origin.

    vectors[r, c] is the concatenated per-channel patch vector at origin
    (r, c), channel blocks contiguous, each block in column-major raster
    order within the patch.
    """

    def __init__(self, planes: np.ndarray, p: int):
        planes = np.asarray(planes, dtype=np.float64)
        if planes.ndim == 2:
            planes = planes[None]
        nc, H, W = planes.shape
        if H < p or W < p:
            raise ImageError(f"image {H}x{W} smaller than patch size {p}")
        per_channel = []
        for c in range(nc):
            w = np.lib.stride_tricks.sliding_window_view(planes[c], (p, p))
            # transpose each p x p window to get column-major flattening
            per_channel.append(w.transpose(0, 1, 3, 2).reshape(H - p + 1, W - p + 1, p * p))
        self.vectors = np.ascontiguousarray(np.concatenate(per_channel, axis=2))
        self.p = p
        self.nchannels = nc
        self.max_row = H - p
        self.max_col = W - p

    def match(self, ref_origin: tuple[int, int], M: int, window: int) -> PatchGroup:
        """The M nearest in-window patches to the reference, nearest first.

        The candidate-origin region is a window x window square centered on
        the reference, clipped to valid origins; it grows symmetrically until
        at least M candidates exist.  Ties are broken by raster order.
        """
        r, c = ref_origin
        if not (0 <= r <= self.max_row and 0 <= c <= self.max_col):
            raise MatchError(f"reference origin {ref_origin} out of bounds")
        total = (self.max_row + 1) * (self.max_col + 1)
        if total < M:
            raise MatchError(
                f"search window too small: {total} candidate origins, need {M}")
        while True:
            half = window // 2
            r0, r1 = max(0, r - half), min(self.max_row, r + half)
            c0, c1 = max(0, c - half), min(self.max_col, c + half)
            if (r1 - r0 + 1) * (c1 - c0 + 1) >= M:
                break
            window += 2

        cand = self.vectors[r0:r1 + 1, c0:c1 + 1]
        h, w, d = cand.shape
        ref = self.vectors[r, c]
        diff = cand.reshape(-1, d) - ref
        p2 = self.p * self.p
        partial = np.empty((h * w, self.nchannels))
        for ch in range(self.nchannels):
            partial[:, ch] = np.einsum(
                "ij,ij->i", diff[:, ch * p2:(ch + 1) * p2], diff[:, ch * p2:(ch + 1) * p2])
        # channel-order-independent total: add partial sums smallest first
        partial.sort(axis=1)
        dist = partial[:, 0]
        for ch in range(1, self.nchannels):
            dist = dist + partial[:, ch]

        rows = np.repeat(np.arange(r0, r1 + 1), w)
        cols = np.tile(np.arange(c0, c1 + 1), h)
        order = np.lexsort((cols, rows, dist))[:M]
        Y = np.ascontiguousarray(cand.reshape(-1, d)[order].T)
        origins = np.stack([rows[order], cols[order]], axis=1)
        return PatchGroup(Y=Y, origins=origins, p=self.p)


def block_match(img: ImagePlanes, ref_origin: tuple[int, int], p: int, M: int,
                window: int) -> PatchGroup:
    """One-off block matching against a fresh patch table."""
    return PatchTable(img.planes, p).match(ref_origin, M, window)


def assemble_reference_origins(dims: tuple[int, int], p: int,
                               stride: int) -> list[tuple[int, int]]:
    """Reference origins on a stride grid, last valid row/column appended.

    With stride <= p every pixel is inside at least one reference patch's
    own footprint.
    """
    if stride < 1:
        raise ValueError("stride must be >= 1")
    H, W = dims
    if H < p or W < p:
        raise ImageError(f"image {H}x{W} smaller than patch size {p}")

    def axis(n):
        xs = list(range(0, n - p + 1, stride))
        if xs[-1] != n - p:
            xs.append(n - p)
        return xs

    return [(r, c) for r in axis(H) for c in axis(W)]


def aggregate_planes(groups, dims: tuple[int, int], p: int,
                     nchannels: int = 3) -> np.ndarray:
    """Average patch contributions into an image; every pixel must be covered.

    groups is an iterable of (X, origins) with X of shape (nchannels*p^2, M).
    """
    H, W = dims
    acc = np.zeros((nchannels, H, W))
    count = np.zeros((H, W))
    ones = np.ones((p, p))
    for X, origins in groups:
        d, M = X.shape
        if d != nchannels * p * p:
            raise AggregationError(f"group row count {d} != {nchannels}*{p}^2")
        if len(origins) != M:
            raise AggregationError("origin count does not match column count")
        # (nchannels, p, p, M): invert the column-major vectorization
        patches = X.reshape(nchannels, p, p, M).transpose(0, 2, 1, 3)
        for m, (r, c) in enumerate(origins):
            if not (0 <= r <= H - p and 0 <= c <= W - p):
                raise AggregationError(f"patch origin ({r}, {c}) out of bounds")
            acc[:, r:r + p, c:c + p] += patches[..., m]
            count[r:r + p, c:c + p] += ones
    if np.any(count == 0):
        raise AggregationError("aggregation hole: some pixels never covered")
    return acc / count


def aggregate(groups, dims: tuple[int, int], p: int) -> ImagePlanes:
    """3-channel aggregation of denoised patch groups."""
    return ImagePlanes(aggregate_planes(groups, dims, p, nchannels=3))
