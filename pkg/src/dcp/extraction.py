"""Occlusion-aware foreground extraction.

A segmentation mask delineates the subject but says nothing about which of
its pixels are actually visible.  Occluders sit at a different depth than
the subject around them, so visibility is estimated per pixel from the local
depth deviation: the absolute difference between a pixel's depth and the
mean depth of its square neighborhood (center excluded, clipped at borders).
Pixels whose deviation stays strictly below tau are visible; the final
foreground mask is the intersection of the segmentation with that
visibility mask, optionally cleaned to its largest connected component.

Deviation is computed on min-max rescaled depth in [0, 1], never raw depth,
so one tau works across depth sources with arbitrary output scales.  The
deviation field is evaluated over the full image and then intersected with
the segmentation: neighborhood means near the silhouette legitimately
include non-subject pixels, which is exactly where occlusion borders live.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatchError, EmptyForegroundError
from .grid import (
    IntegralTable,
    ensure_depth,
    ensure_image,
    ensure_mask,
    largest_component,
    mask_and,
    mask_area,
    rescale_unit,
)

DEFAULT_TAU = 0.05
DEFAULT_RADIUS = 2


@dataclass(frozen=True)
class VisibilityParams:
    """Depth-consistency threshold and square neighborhood half-width."""

    tau: float = DEFAULT_TAU
    radius: int = DEFAULT_RADIUS

    def __post_init__(self) -> None:
        if self.tau < 0.0:
            raise ValueError(f"tau must be >= 0, got {self.tau}")
        if self.radius < 1:
            raise ValueError(f"radius must be >= 1, got {self.radius}")


@dataclass(frozen=True)
class Rect:
    """Axis-aligned rectangle: x = row, y = col, w = cols, h = rows."""

    x: int
    y: int
    w: int
    h: int

    def __post_init__(self) -> None:
        if self.w <= 0 or self.h <= 0:
            raise ValueError(f"rectangle extents must be positive: {self}")


@dataclass(frozen=True)
class ForegroundAsset:
    """Image, segmentation mask, depth map and face box of one foreground."""

    image: np.ndarray
    seg_mask: np.ndarray
    depth: np.ndarray
    face_box: Rect

    def __post_init__(self) -> None:
        image = ensure_image(self.image)
        mask = ensure_mask(self.seg_mask)
        depth = ensure_depth(self.depth)
        h, w = image.shape[:2]
        if mask.shape != (h, w) or depth.shape != (h, w):
            raise DimensionMismatchError(
                f"asset grids disagree: image {image.shape[:2]}, "
                f"mask {mask.shape}, depth {depth.shape}"
            )
        box = self.face_box
        if box.x < 0 or box.y < 0 or box.x + box.h > h or box.y + box.w > w:
            raise ValueError(f"face box {box} exceeds image bounds {h}x{w}")


def local_depth_deviation(depth: np.ndarray, params: VisibilityParams) -> np.ndarray:
    """Per-pixel |depth - neighborhood mean| on min-max rescaled depth.

    The neighborhood is the (2r+1)^2 square around each pixel, minus the
    pixel itself, clipped at the image border (no padding).  Constant input
    rescales to all zeros, so the deviation is zero everywhere.
    """
    depth = ensure_depth(depth)
    scaled = rescale_unit(depth)
    h, w = scaled.shape
    r = params.radius

    table = IntegralTable(scaled)
    rows = np.arange(h)
    cols = np.arange(w)
    x0 = np.maximum(rows - r, 0)
    x1 = np.minimum(rows + r + 1, h)
    y0 = np.maximum(cols - r, 0)
    y1 = np.minimum(cols + r + 1, w)

    t = table.sums
    window_sum = (
        t[np.ix_(x1, y1)] - t[np.ix_(x0, y1)] - t[np.ix_(x1, y0)] + t[np.ix_(x0, y0)]
    )
    counts = np.outer(x1 - x0, y1 - y0).astype(np.float64)

    neighbor_count = counts - 1.0
    deviation = np.zeros_like(scaled)
    nonempty = neighbor_count > 0  # 1x1 grids have no neighborhood at all
    neighbor_mean = np.zeros_like(scaled)
    neighbor_mean[nonempty] = (window_sum[nonempty] - scaled[nonempty]) / neighbor_count[nonempty]
    deviation[nonempty] = np.abs(scaled[nonempty] - neighbor_mean[nonempty])
    return deviation


def visibility_mask(depth: np.ndarray, params: VisibilityParams) -> np.ndarray:
    """1 where local depth deviation is strictly below tau, else 0.

    The inequality is strict, so tau = 0 marks every pixel occluded.
    """
    deviation = local_depth_deviation(depth, params)
    return (deviation < params.tau).astype(np.uint8)


def extract_foreground(
    asset: ForegroundAsset,
    params: VisibilityParams | None = None,
    cleanup: bool = True,
) -> tuple[np.ndarray, np.ndarray]:
    """Cut the visible foreground as (RGBA image, final mask).

    The final mask is segmentation AND visibility, reduced to its largest
    4-connected component when cleanup is on (fragments produce floating
    pixels when pasted).  The RGBA output keeps RGB under the mask, zeroes
    it elsewhere, and sets alpha to exactly mask * 255.

    Raises EmptyForegroundError when nothing remains; callers treat that as
    a per-asset skip, not a fatal failure.
    """
    params = params or VisibilityParams()
    seg = ensure_mask(asset.seg_mask)
    if mask_area(seg) == 0:
        raise EmptyForegroundError("segmentation mask is empty")
    visible = visibility_mask(asset.depth, params)
    mask = mask_and(seg, visible)
    if mask_area(mask) == 0:
        raise EmptyForegroundError("no visible pixels remain after intersection")
    if cleanup:
        mask = largest_component(mask)

    image = ensure_image(asset.image)
    rgba = np.zeros((image.shape[0], image.shape[1], 4), dtype=np.uint8)
    keep = mask.astype(bool)
    rgba[keep, :3] = image[keep, :3]
    rgba[:, :, 3] = mask * np.uint8(255)
    return rgba, mask
