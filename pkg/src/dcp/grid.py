"""Dense 2-D grid primitives shared by every other module.

Grids are plain numpy arrays with fixed dtypes and conventions:

  image  -- uint8, shape (H, W, 3) or (H, W, 4), row-major RGB(A)
  depth  -- float32, shape (H, W), finite, scale-free relative depth
            (larger value = farther; the engine only uses relative statistics
            but the sign convention must be consistent across assets)
  mask   -- uint8, shape (H, W), values strictly in {0, 1}

All grids are treated as immutable after construction; operations return new
arrays and never mutate their inputs.  IntegralTable provides O(1) rectangle
sum / sum-of-squares queries used by the visibility and placement modules.
"""

from __future__ import annotations

import numpy as np
from scipy import ndimage

from .errors import (
    DimensionMismatchError,
    EmptyGridError,
    EmptyMaskError,
)

# 4-connectivity: conservative, avoids diagonal leakage through thin occluders.
_CONNECT_4 = np.array([[0, 1, 0], [1, 1, 1], [0, 1, 0]], dtype=bool)


def ensure_depth(depth: np.ndarray) -> np.ndarray:
    """Validate a depth grid: 2-D, non-empty, finite float32."""
    arr = np.asarray(depth)
    if arr.ndim != 2:
        raise DimensionMismatchError(f"depth must be 2-D, got shape {arr.shape}")
    if arr.shape[0] == 0 or arr.shape[1] == 0:
        raise EmptyGridError(f"depth grid has empty dimension: {arr.shape}")
    arr = arr.astype(np.float32, copy=False)
    if not np.isfinite(arr).all():
        bad = int(np.flatnonzero(~np.isfinite(arr))[0])
        raise ValueError(f"depth contains non-finite value at index {bad}")
    return arr


def ensure_mask(mask: np.ndarray) -> np.ndarray:
    """Validate a binary mask grid: 2-D, non-empty, values in {0, 1}."""
    arr = np.asarray(mask)
    if arr.ndim != 2:
        raise DimensionMismatchError(f"mask must be 2-D, got shape {arr.shape}")
    if arr.shape[0] == 0 or arr.shape[1] == 0:
        raise EmptyGridError(f"mask grid has empty dimension: {arr.shape}")
    arr = arr.astype(np.uint8, copy=False)
    if arr.max(initial=0) > 1:
        raise ValueError("mask values must be in {0, 1}")
    return arr


def ensure_image(image: np.ndarray) -> np.ndarray:
    """Validate an image buffer: uint8, (H, W, 3) or (H, W, 4)."""
    arr = np.asarray(image)
    if arr.ndim != 3 or arr.shape[2] not in (3, 4):
        raise DimensionMismatchError(
            f"image must have shape (H, W, 3|4), got {arr.shape}"
        )
    if arr.shape[0] == 0 or arr.shape[1] == 0:
        raise EmptyGridError(f"image has empty dimension: {arr.shape}")
    if arr.dtype != np.uint8:
        raise ValueError(f"image dtype must be uint8, got {arr.dtype}")
    return arr


def mask_area(mask: np.ndarray) -> int:
    """Number of foreground (value 1) pixels."""
    return int(np.count_nonzero(mask))


def mask_and(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Pixelwise AND of two binary masks of identical dimensions."""
    a = ensure_mask(a)
    b = ensure_mask(b)
    if a.shape != b.shape:
        raise DimensionMismatchError(f"mask shapes differ: {a.shape} vs {b.shape}")
    return (a & b).astype(np.uint8)


def largest_component(mask: np.ndarray) -> np.ndarray:
    """Keep only the largest 4-connected component of a non-empty mask.

    Ties between equal-sized components are broken by the smallest row-major
    index of each component's first pixel, so the result is deterministic.
    """
    mask = ensure_mask(mask)
    if mask_area(mask) == 0:
        raise EmptyMaskError("largest_component requires a non-empty mask")
    labels, count = ndimage.label(mask, structure=_CONNECT_4)
    if count == 1:
        return mask.copy()
    flat = labels.ravel()
    sizes = np.bincount(flat)
    sizes[0] = 0
    best_size = sizes.max()
    candidates = np.flatnonzero(sizes == best_size)
    # scipy assigns labels in raster order, but tie-break on the explicit
    # first-pixel index rather than relying on that.
    first_index = {lab: int(np.flatnonzero(flat == lab)[0]) for lab in candidates}
    winner = min(candidates, key=lambda lab: first_index[lab])
    return (labels == winner).astype(np.uint8)


def rescale_unit(depth: np.ndarray) -> np.ndarray:
    """Min-max rescale a depth grid to [0, 1]; constant input maps to zeros."""
    arr = np.asarray(depth, dtype=np.float64)
    lo = float(arr.min())
    hi = float(arr.max())
    if hi == lo:
        return np.zeros_like(arr)
    return (arr - lo) / (hi - lo)


class IntegralTable:
    """Prefix-sum tables for O(1) rectangle sum / sum-of-squares queries.

    Both tables are (H+1, W+1) float64 with a zero first row and column, so a
    rectangle of rows [x, x+h) and cols [y, y+w) costs four lookups.  64-bit
    accumulation bounds cancellation in variance queries over large windows
    even when the payload is float32.
    """

    def __init__(self, grid: np.ndarray) -> None:
        g = np.asarray(grid, dtype=np.float64)
        if g.ndim != 2:
            raise DimensionMismatchError(f"grid must be 2-D, got shape {g.shape}")
        if g.shape[0] == 0 or g.shape[1] == 0:
            raise EmptyGridError(f"grid has empty dimension: {g.shape}")
        self.height, self.width = g.shape
        self.sums = np.zeros((self.height + 1, self.width + 1), dtype=np.float64)
        self.sums[1:, 1:] = g.cumsum(axis=0).cumsum(axis=1)
        self.sq_sums = np.zeros_like(self.sums)
        self.sq_sums[1:, 1:] = (g * g).cumsum(axis=0).cumsum(axis=1)

    def _check_window(self, x: int, y: int, h: int, w: int) -> None:
        if h <= 0 or w <= 0:
            raise EmptyGridError(f"window dims must be positive, got {h}x{w}")
        if x < 0 or y < 0 or x + h > self.height or y + w > self.width:
            raise DimensionMismatchError(
                f"window ({x},{y},{h},{w}) exceeds grid {self.height}x{self.width}"
            )

    def window_sum(self, x: int, y: int, h: int, w: int) -> float:
        self._check_window(x, y, h, w)
        t = self.sums
        return float(t[x + h, y + w] - t[x, y + w] - t[x + h, y] + t[x, y])

    def window_mean_std(self, x: int, y: int, h: int, w: int) -> tuple[float, float]:
        """Population mean and std over the rectangle."""
        self._check_window(x, y, h, w)
        n = h * w
        s = self.window_sum(x, y, h, w)
        t = self.sq_sums
        sq = float(t[x + h, y + w] - t[x, y + w] - t[x + h, y] + t[x, y])
        mean = s / n
        # E[x^2] - E[x]^2 can go slightly negative in floating point.
        var = max(0.0, sq / n - mean * mean)
        return mean, float(np.sqrt(var))

    def grid_sums(self, xs: np.ndarray, ys: np.ndarray, h: int, w: int) -> np.ndarray:
        """Rectangle sums for every (x, y) in the outer product xs x ys."""
        t = self.sums
        return (
            t[np.ix_(xs + h, ys + w)]
            - t[np.ix_(xs, ys + w)]
            - t[np.ix_(xs + h, ys)]
            + t[np.ix_(xs, ys)]
        )

    def grid_mean_std(
        self, xs: np.ndarray, ys: np.ndarray, h: int, w: int
    ) -> tuple[np.ndarray, np.ndarray]:
        """Population mean and std grids for every window on the lattice."""
        n = h * w
        s = self.grid_sums(xs, ys, h, w)
        t = self.sq_sums
        sq = (
            t[np.ix_(xs + h, ys + w)]
            - t[np.ix_(xs, ys + w)]
            - t[np.ix_(xs + h, ys)]
            + t[np.ix_(xs, ys)]
        )
        mean = s / n
        var = np.maximum(0.0, sq / n - mean * mean)
        return mean, np.sqrt(var)


def resize_bilinear(grid: np.ndarray, out_h: int, out_w: int) -> np.ndarray:
    """Bilinear resample with pixel-center alignment; identity at same dims.

    Works on (H, W) or (H, W, C) float input; returns float64.
    """
    arr = np.asarray(grid, dtype=np.float64)
    in_h, in_w = arr.shape[:2]
    if out_h <= 0 or out_w <= 0:
        raise EmptyGridError(f"target dims must be positive, got {out_h}x{out_w}")
    if (out_h, out_w) == (in_h, in_w):
        return arr.copy()
    sy = (np.arange(out_h) + 0.5) * (in_h / out_h) - 0.5
    sx = (np.arange(out_w) + 0.5) * (in_w / out_w) - 0.5
    y0 = np.clip(np.floor(sy), 0, in_h - 1).astype(np.intp)
    x0 = np.clip(np.floor(sx), 0, in_w - 1).astype(np.intp)
    y1 = np.minimum(y0 + 1, in_h - 1)
    x1 = np.minimum(x0 + 1, in_w - 1)
    wy = np.clip(sy - y0, 0.0, 1.0)[:, None]
    wx = np.clip(sx - x0, 0.0, 1.0)[None, :]
    if arr.ndim == 3:
        wy = wy[:, :, None]
        wx = wx[:, :, None]
    top = arr[np.ix_(y0, x0)] * (1 - wx) + arr[np.ix_(y0, x1)] * wx
    bot = arr[np.ix_(y1, x0)] * (1 - wx) + arr[np.ix_(y1, x1)] * wx
    return top * (1 - wy) + bot * wy


def resize_nearest(grid: np.ndarray, out_h: int, out_w: int) -> np.ndarray:
    """Nearest-neighbor resample; preserves the input dtype and value set."""
    arr = np.asarray(grid)
    in_h, in_w = arr.shape[:2]
    if out_h <= 0 or out_w <= 0:
        raise EmptyGridError(f"target dims must be positive, got {out_h}x{out_w}")
    if (out_h, out_w) == (in_h, in_w):
        return arr.copy()
    sy = np.minimum((np.arange(out_h) + 0.5) * (in_h / out_h), in_h - 1).astype(np.intp)
    sx = np.minimum((np.arange(out_w) + 0.5) * (in_w / out_w), in_w - 1).astype(np.intp)
    return arr[np.ix_(sy, sx)].copy()
