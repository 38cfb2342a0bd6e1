"""Deterministic synthetic asset generation.

Produces complete foreground/background asset trees — images, depth maps,
masks, embeddings, manifests — from a single seed, so every pipeline stage
can be exercised and benchmarked without any neural model in the loop.
Identical seeds yield bit-identical trees.

Depth fields are sums of a few low-frequency 2-D cosines: smooth enough that
the default visibility threshold keeps the segmentation box intact, yet
non-constant so depth statistics are informative.  With planted_patch
enabled, one background gets a rectangular region whose normalized depth
statistics match the first foreground's masked statistics exactly (fixed
point of the plant-then-renormalize loop), and the location is recorded in a
ground-truth sidecar for placement recovery tests.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .extraction import Rect
from .formats import save_depth, save_embedding, save_image, save_mask
from .placement import foreground_depth_stats, normalize_depth

EMBEDDING_DIM = 32
_PLANT_ITERATIONS = 30


@dataclass(frozen=True)
class SyntheticAssets:
    """Paths produced by gen_synthetic_assets."""

    root: Path
    foreground_manifest: Path
    background_manifest: Path
    ground_truth: Path | None


def _cosine_field(rng: np.random.Generator, h: int, w: int) -> np.ndarray:
    """Smooth positive depth field from three random low-frequency cosines."""
    rows = np.arange(h, dtype=np.float64)[:, None] / h
    cols = np.arange(w, dtype=np.float64)[None, :] / w
    field = np.zeros((h, w), dtype=np.float64)
    for _ in range(3):
        amp = rng.uniform(0.5, 1.5)
        freq_r = rng.uniform(0.3, 2.0)
        freq_c = rng.uniform(0.3, 2.0)
        phase = rng.uniform(0.0, 2.0 * np.pi)
        field += amp * np.cos(2.0 * np.pi * (freq_r * rows + freq_c * cols) + phase)
    return (field + rng.uniform(4.0, 8.0)).astype(np.float32)


def _unit_embedding(rng: np.random.Generator, dim: int) -> np.ndarray:
    vec = rng.standard_normal(dim)
    return (vec / np.linalg.norm(vec)).astype(np.float32)


def _box_mask(h: int, w: int) -> tuple[np.ndarray, Rect]:
    """Rectangular segmentation box with a margin the visibility band spares."""
    margin_r = max(2, h // 8)
    margin_c = max(2, w // 8)
    mask = np.zeros((h, w), dtype=np.uint8)
    mask[margin_r : h - margin_r, margin_c : w - margin_c] = 1
    box = Rect(x=margin_r, y=margin_c, w=w - 2 * margin_c, h=h - 2 * margin_r)
    return mask, box


def _face_box(seg_box: Rect) -> Rect:
    """Small box in the upper third of the segmentation box."""
    h = max(1, seg_box.h // 3)
    w = max(1, seg_box.w // 3)
    return Rect(x=seg_box.x, y=seg_box.y + (seg_box.w - w) // 2, w=w, h=h)


def _plant_patch(
    bg_depth: np.ndarray,
    fg_depth: np.ndarray,
    fg_mask: np.ndarray,
    rng: np.random.Generator,
) -> tuple[np.ndarray, tuple[int, int]]:
    """Embed a window statistically identical to the foreground depth.

    The window must match the foreground's masked statistics *after* the
    background is z-scored, but planting raw values shifts the background's
    own mean/std; iterating plant -> restat converges geometrically (the
    window is a small fraction of the map).
    """
    stats = foreground_depth_stats(normalize_depth(fg_depth), fg_mask)
    fg_h, fg_w = fg_depth.shape
    bg_h, bg_w = bg_depth.shape

    rows = np.arange(fg_h, dtype=np.float64)[:, None] / fg_h
    cols = np.arange(fg_w, dtype=np.float64)[None, :] / fg_w
    pattern = np.cos(2.0 * np.pi * (1.7 * rows + 0.4) ) * np.cos(
        2.0 * np.pi * (1.3 * cols + 0.9)
    )
    pattern = (pattern - pattern.mean()) / pattern.std()

    x = int(rng.integers(0, bg_h - fg_h + 1))
    y = int(rng.integers(0, bg_w - fg_w + 1))
    planted = bg_depth.astype(np.float64)
    target = stats.mean + stats.std * pattern
    for _ in range(_PLANT_ITERATIONS):
        mu = planted.mean()
        sigma = planted.std()
        planted[x : x + fg_h, y : y + fg_w] = target * sigma + mu
    return planted.astype(np.float32), (x, y)


def gen_synthetic_assets(
    out_dir: str | Path,
    seed: int,
    count: int,
    dims: tuple[int, int] = (96, 96),
    planted_patch: bool = False,
    embedding_dim: int = EMBEDDING_DIM,
) -> SyntheticAssets:
    """Write `count` foregrounds and backgrounds plus manifests under out_dir.

    Backgrounds use the requested dims; foregrounds are a quarter size
    (floor 8) so they always fit.  Requires dims >= 8x8.
    """
    if count < 0:
        raise ValueError(f"count must be >= 0, got {count}")
    if dims[0] < 8 or dims[1] < 8:
        raise ValueError(f"dims must be at least 8x8, got {dims}")
    root = Path(out_dir)
    root.mkdir(parents=True, exist_ok=True)
    rng = np.random.default_rng(seed)

    bg_h, bg_w = dims
    fg_h = max(8, bg_h // 4)
    fg_w = max(8, bg_w // 4)

    fg_dir = root / "fg"
    bg_dir = root / "bg"
    if count > 0:
        fg_dir.mkdir(exist_ok=True)
        bg_dir.mkdir(exist_ok=True)

    fg_entries = []
    fg_depths: list[np.ndarray] = []
    fg_masks: list[np.ndarray] = []
    for i in range(count):
        name = f"fg_{i:03d}"
        image = rng.integers(0, 256, size=(fg_h, fg_w, 3), dtype=np.uint8)
        depth = _cosine_field(rng, fg_h, fg_w)
        mask, seg_box = _box_mask(fg_h, fg_w)
        face = _face_box(seg_box)
        save_image(image, fg_dir / f"{name}.png")
        save_mask(mask, fg_dir / f"{name}_mask.png")
        save_depth(depth, fg_dir / f"{name}.dmap")
        save_embedding(_unit_embedding(rng, embedding_dim), fg_dir / f"{name}_v.emb1")
        save_embedding(_unit_embedding(rng, embedding_dim), fg_dir / f"{name}_t.emb1")
        fg_depths.append(depth)
        fg_masks.append(mask)
        fg_entries.append(
            {
                "id": name,
                "image": f"fg/{name}.png",
                "mask": f"fg/{name}_mask.png",
                "depth": f"fg/{name}.dmap",
                "faceBox": {"x": face.x, "y": face.y, "w": face.w, "h": face.h},
                "visualEmbedding": f"fg/{name}_v.emb1",
                "textEmbedding": f"fg/{name}_t.emb1",
            }
        )

    ground_truth_path: Path | None = None
    bg_entries = []
    for i in range(count):
        name = f"bg_{i:03d}"
        image = rng.integers(0, 256, size=(bg_h, bg_w, 3), dtype=np.uint8)
        depth = _cosine_field(rng, bg_h, bg_w)
        if planted_patch and i == 0:
            depth, (px, py) = _plant_patch(depth, fg_depths[0], fg_masks[0], rng)
            ground_truth_path = root / "ground_truth.json"
            ground_truth_path.write_text(
                json.dumps(
                    {
                        "backgroundId": name,
                        "foregroundId": fg_entries[0]["id"],
                        "x": px,
                        "y": py,
                    },
                    indent=2,
                    sort_keys=True,
                )
                + "\n"
            )
        save_image(image, bg_dir / f"{name}.png")
        save_depth(depth, bg_dir / f"{name}.dmap")
        save_embedding(_unit_embedding(rng, embedding_dim), bg_dir / f"{name}.emb1")
        bg_entries.append(
            {
                "id": name,
                "embedding": f"bg/{name}.emb1",
                "image": f"bg/{name}.png",
                "depth": f"bg/{name}.dmap",
            }
        )

    fg_manifest = root / "fg.json"
    bg_manifest = root / "bg.json"
    fg_manifest.write_text(json.dumps(fg_entries, indent=2, sort_keys=True) + "\n")
    bg_manifest.write_text(json.dumps(bg_entries, indent=2, sort_keys=True) + "\n")
    return SyntheticAssets(root, fg_manifest, bg_manifest, ground_truth_path)
