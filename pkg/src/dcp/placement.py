"""Depth-guided sliding-window placement.

Foreground and background depth live on unrelated scales, so both maps are
first z-scored (population statistics; a near-constant map becomes all
zeros).  Every window of the foreground's size is then scored on the
background's normalized depth by three cues:

  depth level      |window mean - foreground mean|
  depth spread     |window std  - foreground std|
  surface clutter  mean gradient magnitude inside the window

Each cue is divided by its maximum over the candidate set and inverted, so
the combined score alpha*a + beta*b + gamma*c lies in [0, 1] once the
weights are renormalized to sum to one.  A cue whose maximum is zero means
every window is equally perfect on it and contributes its full weight.

Window statistics come from three prefix-sum tables (values, squares,
gradient magnitude), making a stride-1 scan linear in the background size.
score_windows_naive recomputes every window directly; it exists both as the
benchmark baseline and as an always-available cross-check of the fast path.
The argmax tie-break is smallest row, then smallest column, so serial and
parallel callers agree bit-for-bit.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import (
    DimensionMismatchError,
    EmptyMaskError,
    ForegroundTooLargeError,
    PlacementInfeasibleError,
)
from .grid import IntegralTable, ensure_depth, ensure_mask, resize_bilinear, resize_nearest

NORMALIZE_STD_FLOOR = 1e-8


@dataclass(frozen=True)
class PlacementWeights:
    """Cue weights (depth level, depth spread, smoothness), renormalized to sum 1."""

    alpha: float = 1.0 / 3.0
    beta: float = 1.0 / 3.0
    gamma: float = 1.0 / 3.0

    def __post_init__(self) -> None:
        if self.alpha < 0 or self.beta < 0 or self.gamma < 0:
            raise ValueError("weights must be non-negative")
        total = self.alpha + self.beta + self.gamma
        if total <= 0:
            raise ValueError("at least one weight must be positive")
        a = self.alpha / total
        b = self.beta / total
        object.__setattr__(self, "alpha", a)
        object.__setattr__(self, "beta", b)
        object.__setattr__(self, "gamma", 1.0 - a - b)


@dataclass(frozen=True)
class ForegroundDepthStats:
    """Mean and population std of normalized foreground depth under its mask."""

    mean: float
    std: float

    def __post_init__(self) -> None:
        if self.std < 0:
            raise ValueError(f"std must be >= 0, got {self.std}")


@dataclass(frozen=True)
class PlacementResult:
    """Best window origin (x = row, y = col) plus the full candidate score grid."""

    x: int
    y: int
    scale: float
    score: float
    score_grid: np.ndarray = field(repr=False)


def normalize_depth(depth: np.ndarray) -> np.ndarray:
    """Z-score a depth map with population statistics.

    Computed in float64 and stored as float32.  Maps with std below 1e-8
    normalize to all zeros instead of exploding.
    """
    depth = ensure_depth(depth)
    values = depth.astype(np.float64)
    mean = values.mean()
    std = values.std()
    if std < NORMALIZE_STD_FLOOR:
        return np.zeros_like(depth, dtype=np.float32)
    return ((values - mean) / std).astype(np.float32)


def foreground_depth_stats(
    depth_n: np.ndarray, mask: np.ndarray
) -> ForegroundDepthStats:
    """Mean and population std of normalized depth over mask=1 pixels."""
    depth_n = ensure_depth(depth_n)
    mask = ensure_mask(mask)
    if depth_n.shape != mask.shape:
        raise DimensionMismatchError(
            f"depth {depth_n.shape} vs mask {mask.shape}"
        )
    selected = depth_n[mask.astype(bool)].astype(np.float64)
    if selected.size == 0:
        raise EmptyMaskError("foreground stats need at least one mask pixel")
    return ForegroundDepthStats(float(selected.mean()), float(selected.std()))


def gradient_magnitude(depth_n: np.ndarray) -> np.ndarray:
    """Per-pixel gradient magnitude: central differences in the interior,
    one-sided at borders."""
    depth_n = ensure_depth(depth_n)
    if depth_n.shape[0] < 2 or depth_n.shape[1] < 2:
        raise DimensionMismatchError(
            f"gradient needs at least 2x2, got {depth_n.shape}"
        )
    gx, gy = np.gradient(depth_n.astype(np.float64))
    return np.hypot(gx, gy)


def _candidate_lattice(
    bg_shape: tuple[int, int], fg_size: tuple[int, int], stride: int
) -> tuple[np.ndarray, np.ndarray]:
    bg_h, bg_w = bg_shape
    fg_h, fg_w = fg_size
    if fg_h <= 0 or fg_w <= 0:
        raise ValueError(f"foreground size must be positive, got {fg_size}")
    if stride < 1:
        raise ValueError(f"stride must be >= 1, got {stride}")
    if fg_h > bg_h or fg_w > bg_w:
        raise ForegroundTooLargeError(
            f"foreground {fg_h}x{fg_w} exceeds background {bg_h}x{bg_w}"
        )
    xs = np.arange(0, bg_h - fg_h + 1, stride)
    ys = np.arange(0, bg_w - fg_w + 1, stride)
    return xs, ys


def _combine_terms(
    d_mean: np.ndarray,
    d_std: np.ndarray,
    clutter: np.ndarray,
    weights: PlacementWeights,
) -> np.ndarray:
    score = np.zeros_like(d_mean)
    for weight, term in ((weights.alpha, d_mean), (weights.beta, d_std),
                         (weights.gamma, clutter)):
        peak = term.max()
        if peak > 0.0:
            score += weight * (1.0 - term / peak)
        else:
            # all windows equally perfect on this cue
            score += weight
    # the three-term sum can overshoot 1 by an ulp
    return np.clip(score, 0.0, 1.0)


def _argmax_first(score: np.ndarray) -> tuple[int, int]:
    # C-order argmax = smallest row first, then smallest column.
    flat = int(np.argmax(score))
    return flat // score.shape[1], flat % score.shape[1]


def score_windows(
    bg_n: np.ndarray,
    fg_stats: ForegroundDepthStats,
    fg_size: tuple[int, int],
    weights: PlacementWeights | None = None,
    stride: int = 1,
) -> PlacementResult:
    """Score every candidate window on the stride lattice and return the best.

    Window mean/std come from prefix-sum tables of the normalized background
    depth; window clutter is the prefix-sum mean of its gradient magnitude.
    """
    bg_n = ensure_depth(bg_n)
    weights = weights or PlacementWeights()
    fg_h, fg_w = fg_size
    xs, ys = _candidate_lattice(bg_n.shape, (fg_h, fg_w), stride)

    table = IntegralTable(bg_n)
    mean, std = table.grid_mean_std(xs, ys, fg_h, fg_w)
    grad_table = IntegralTable(gradient_magnitude(bg_n))
    clutter = grad_table.grid_sums(xs, ys, fg_h, fg_w) / (fg_h * fg_w)

    d_mean = np.abs(mean - fg_stats.mean)
    d_std = np.abs(std - fg_stats.std)
    score = _combine_terms(d_mean, d_std, clutter, weights)

    i, j = _argmax_first(score)
    return PlacementResult(
        x=int(xs[i]), y=int(ys[j]), scale=1.0,
        score=float(score[i, j]), score_grid=score,
    )


def score_windows_naive(
    bg_n: np.ndarray,
    fg_stats: ForegroundDepthStats,
    fg_size: tuple[int, int],
    weights: PlacementWeights | None = None,
    stride: int = 1,
) -> PlacementResult:
    """Reference implementation: per-window double loop, no prefix sums."""
    bg_n = ensure_depth(bg_n)
    weights = weights or PlacementWeights()
    fg_h, fg_w = fg_size
    xs, ys = _candidate_lattice(bg_n.shape, (fg_h, fg_w), stride)

    grad = gradient_magnitude(bg_n)
    values = bg_n.astype(np.float64)
    d_mean = np.empty((len(xs), len(ys)))
    d_std = np.empty_like(d_mean)
    clutter = np.empty_like(d_mean)
    for i, x in enumerate(xs):
        for j, y in enumerate(ys):
            window = values[x : x + fg_h, y : y + fg_w]
            d_mean[i, j] = abs(window.mean() - fg_stats.mean)
            d_std[i, j] = abs(window.std() - fg_stats.std)
            clutter[i, j] = grad[x : x + fg_h, y : y + fg_w].mean()
    score = _combine_terms(d_mean, d_std, clutter, weights)

    i, j = _argmax_first(score)
    return PlacementResult(
        x=int(xs[i]), y=int(ys[j]), scale=1.0,
        score=float(score[i, j]), score_grid=score,
    )


def scaled_size(fg_size: tuple[int, int], scale: float) -> tuple[int, int]:
    """Foreground dims after scaling; each extent rounds half-up, floor 1."""
    fg_h, fg_w = fg_size
    return (
        max(1, int(np.floor(fg_h * scale + 0.5))),
        max(1, int(np.floor(fg_w * scale + 0.5))),
    )


def place_with_scales(
    bg_n: np.ndarray,
    fg_depth_n: np.ndarray,
    fg_mask: np.ndarray,
    weights: PlacementWeights | None = None,
    stride: int = 1,
    scales: list[float] | None = None,
) -> PlacementResult:
    """Run the window search at each scale and keep the globally best score.

    Per scale, the foreground mask is resampled nearest-neighbor and its
    normalized depth bilinearly, and the masked stats are recomputed; scale
    1.0 bypasses resampling entirely, so scales=[1.0] reproduces
    score_windows exactly.  Scores are comparable across scales because each
    scale normalizes its own cue maxima; ties keep the earliest scale in the
    list.  Infeasible scales (scaled foreground exceeding the background)
    are skipped; if none fits, PlacementInfeasibleError is raised.
    """
    scales = [1.0] if scales is None else scales
    if not scales:
        raise ValueError("scales must be non-empty")
    if any(s <= 0 for s in scales):
        raise ValueError(f"scales must be positive, got {scales}")
    bg_n = ensure_depth(bg_n)
    fg_depth_n = ensure_depth(fg_depth_n)
    fg_mask = ensure_mask(fg_mask)
    if fg_depth_n.shape != fg_mask.shape:
        raise DimensionMismatchError(
            f"fg depth {fg_depth_n.shape} vs mask {fg_mask.shape}"
        )

    best: PlacementResult | None = None
    for scale in scales:
        size = scaled_size(fg_mask.shape, scale)
        if size[0] > bg_n.shape[0] or size[1] > bg_n.shape[1]:
            continue
        if size == fg_mask.shape:
            depth_s = fg_depth_n
            mask_s = fg_mask
        else:
            depth_s = resize_bilinear(fg_depth_n, *size).astype(np.float32)
            mask_s = resize_nearest(fg_mask, *size)
        if not mask_s.any():
            continue  # resampling can starve a sparse mask
        stats = foreground_depth_stats(depth_s, mask_s)
        result = score_windows(bg_n, stats, size, weights, stride)
        result = PlacementResult(
            x=result.x, y=result.y, scale=float(scale),
            score=result.score, score_grid=result.score_grid,
        )
        if best is None or result.score > best.score:
            best = result
    if best is None:
        raise PlacementInfeasibleError(
            f"no scale in {scales} fits foreground {fg_mask.shape} "
            f"into background {bg_n.shape}"
        )
    return best


def render_heatmap(score_grid: np.ndarray) -> np.ndarray:
    """Min-max map a score grid to an 8-bit grayscale image (constant -> 0)."""
    grid = np.asarray(score_grid, dtype=np.float64)
    lo = grid.min()
    hi = grid.max()
    if hi == lo:
        return np.zeros(grid.shape, dtype=np.uint8)
    return np.floor((grid - lo) / (hi - lo) * 255.0 + 0.5).astype(np.uint8)
