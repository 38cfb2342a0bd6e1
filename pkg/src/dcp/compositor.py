"""Compositing and annotation emission.

paste() alpha-blends a (possibly rescaled) foreground into a background at a
window origin: out = a * fg + (1 - a) * bg per channel, where a is the
feathered mask, with a fixed half-up rounding to 8 bits so composites are
bit-reproducible.  Where a = 0 the background bytes pass through untouched;
where a = 1 with no feathering the foreground bytes land verbatim.

Feathering softens the binary matte by iterating a 3x3 box blur; borders use
clipped-window normalization (sum over in-bounds neighbors divided by their
count) so a solid mask stays exactly 1 everywhere and no depth values are
fabricated outside the image.

transform_annotation maps a face box through the placement (offset + scale),
clips it to the composite, and measures its visible fraction under the
foreground mask; fully clipped or fully occluded boxes are dropped, heavily
occluded ones are flagged difficult rather than discarded.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import DimensionMismatchError, OutOfBoundsPasteError
from .extraction import Rect
from .grid import ensure_image, ensure_mask, resize_bilinear, resize_nearest
from .placement import PlacementResult, scaled_size

DEFAULT_DIFFICULT_THRESHOLD = 0.2


@dataclass(frozen=True)
class Annotation:
    """One face box in composite coordinates (x = row, y = col)."""

    label: str
    x: float
    y: float
    w: float
    h: float
    source_foreground_id: str
    visible_fraction: float
    difficult: bool

    def bbox_coco(self) -> list[float]:
        """COCO order: [col, row, width, height]."""
        return [self.y, self.x, self.w, self.h]


@dataclass(frozen=True)
class Provenance:
    foreground_id: str
    background_id: str
    placement: PlacementResult
    config_hash: str


@dataclass(frozen=True)
class CompositeSample:
    image: np.ndarray
    annotations: list[Annotation]
    provenance: Provenance


def feather_mask(mask: np.ndarray, radius: int = 0) -> np.ndarray:
    """Binary mask -> float matte in [0, 1] by `radius` passes of 3x3 box blur.

    radius 0 is an exact {0.0, 1.0} cast.  Interior pixels farther than
    `radius` (L-inf) from any zero stay exactly 1.
    """
    mask = ensure_mask(mask)
    if radius < 0:
        raise ValueError(f"feather radius must be >= 0, got {radius}")
    matte = mask.astype(np.float64)
    if radius == 0:
        return matte
    h, w = matte.shape

    def in_bounds_counts(n: int) -> np.ndarray:
        idx = np.arange(n)
        return (np.minimum(idx + 1, n - 1) - np.maximum(idx - 1, 0) + 1).astype(np.float64)

    # per-pixel count of in-bounds 3x3 neighbors (window is separable)
    norm = np.outer(in_bounds_counts(h), in_bounds_counts(w))
    for _ in range(radius):
        padded = np.pad(matte, 1)
        acc = np.zeros_like(matte)
        for dx in (0, 1, 2):
            for dy in (0, 1, 2):
                acc += padded[dx : dx + h, dy : dy + w]
        matte = acc / norm
    return np.clip(matte, 0.0, 1.0)


def paste(
    background: np.ndarray,
    fg_rgba: np.ndarray,
    fg_mask: np.ndarray,
    at: tuple[int, int],
    scale: float = 1.0,
    feather_radius: int = 0,
) -> np.ndarray:
    """Composite the foreground into the background at window origin `at`.

    The foreground RGB is rescaled bilinearly and the mask nearest-neighbor
    (interpolating a binary mask would fabricate invalid values); the mask is
    then feathered and used as the blend matte.  Rounding is half-up.
    """
    background = ensure_image(background)
    fg_rgba = ensure_image(fg_rgba)
    fg_mask = ensure_mask(fg_mask)
    if fg_rgba.shape[:2] != fg_mask.shape:
        raise DimensionMismatchError(
            f"foreground {fg_rgba.shape[:2]} vs mask {fg_mask.shape}"
        )
    if scale <= 0:
        raise ValueError(f"scale must be positive, got {scale}")

    out_h, out_w = scaled_size(fg_mask.shape, scale)
    x, y = at
    bg_h, bg_w = background.shape[:2]
    if x < 0 or y < 0 or x + out_h > bg_h or y + out_w > bg_w:
        raise OutOfBoundsPasteError(
            f"paste of {out_h}x{out_w} at ({x},{y}) exceeds background {bg_h}x{bg_w}"
        )

    rgb = fg_rgba[:, :, :3]
    if (out_h, out_w) == fg_mask.shape:
        rgb_s = rgb.astype(np.float64)
        mask_s = fg_mask
    else:
        rgb_s = resize_bilinear(rgb, out_h, out_w)
        mask_s = resize_nearest(fg_mask, out_h, out_w)
    matte = feather_mask(mask_s, feather_radius)[:, :, None]

    out = background.copy()
    region = out[x : x + out_h, y : y + out_w, :3].astype(np.float64)
    blended = matte * rgb_s + (1.0 - matte) * region
    out[x : x + out_h, y : y + out_w, :3] = np.floor(blended + 0.5).astype(np.uint8)
    return out


def transform_annotation(
    face_box: Rect,
    mask: np.ndarray,
    at: tuple[int, int],
    scale: float,
    composite_dims: tuple[int, int],
    source_foreground_id: str = "",
    difficult_threshold: float = DEFAULT_DIFFICULT_THRESHOLD,
) -> Optional[Annotation]:
    """Map a face box through a placement; None means the box was dropped.

    The box scales and translates as (x, y) -> (at_x + scale*x, at_y +
    scale*y) with extents scale*(w, h), then clips to the composite.  The
    visible fraction is measured on the unscaled foreground mask inside the
    original box; zero visibility or a fully clipped box drops the
    annotation, visibility below the threshold flags it difficult.
    """
    mask = ensure_mask(mask)
    box_slice = mask[
        face_box.x : face_box.x + face_box.h,
        face_box.y : face_box.y + face_box.w,
    ]
    if box_slice.size != face_box.h * face_box.w:
        raise ValueError(f"face box {face_box} exceeds foreground mask {mask.shape}")
    visible_fraction = float(np.count_nonzero(box_slice)) / box_slice.size
    if visible_fraction == 0.0:
        return None

    comp_h, comp_w = composite_dims
    x0 = at[0] + scale * face_box.x
    y0 = at[1] + scale * face_box.y
    x1 = x0 + scale * face_box.h
    y1 = y0 + scale * face_box.w
    cx0 = max(x0, 0.0)
    cy0 = max(y0, 0.0)
    cx1 = min(x1, float(comp_h))
    cy1 = min(y1, float(comp_w))
    if cx1 <= cx0 or cy1 <= cy0:
        return None

    return Annotation(
        label="face",
        x=cx0,
        y=cy0,
        w=cy1 - cy0,
        h=cx1 - cx0,
        source_foreground_id=source_foreground_id,
        visible_fraction=visible_fraction,
        difficult=visible_fraction < difficult_threshold,
    )


def composite_filename(
    background_id: str, foreground_id: str, x: int, y: int, scale: float
) -> str:
    return f"{background_id}__{foreground_id}__{x}_{y}_{scale:g}.png"


def coco_document(
    images: list[dict],
    annotations: list[dict],
) -> dict:
    """Assemble a COCO-style document with the single `face` category."""
    return {
        "images": images,
        "annotations": annotations,
        "categories": [{"id": 1, "name": "face"}],
    }


def coco_annotation(
    annotation: Annotation, annotation_id: int, image_id: int
) -> dict:
    return {
        "id": annotation_id,
        "image_id": image_id,
        "category_id": 1,
        "bbox": annotation.bbox_coco(),
        "area": annotation.w * annotation.h,
        "iscrowd": 0,
        "visible_fraction": annotation.visible_fraction,
        "difficult": annotation.difficult,
        "source_foreground_id": annotation.source_foreground_id,
    }
