from __future__ import annotations

import numpy as np
import pytest

from dcp import (
    EmptyMaskError,
    ForegroundTooLargeError,
    PlacementInfeasibleError,
    PlacementWeights,
    foreground_depth_stats,
    gradient_magnitude,
    normalize_depth,
    place_with_scales,
    render_heatmap,
    scaled_size,
    score_windows,
    score_windows_naive,
)


def test_normalize_depth_known_values() -> None:
    out = normalize_depth(np.array([[1.0, 2.0], [3.0, 4.0]], dtype=np.float32))
    expected = [[-1.3416408, -0.4472136], [0.4472136, 1.3416408]]
    np.testing.assert_allclose(out, expected, atol=1e-4)


def test_normalize_depth_contract_over_random_maps() -> None:
    rng = np.random.default_rng(0)
    for _ in range(50):
        h = int(rng.integers(2, 33))
        w = int(rng.integers(2, 33))
        depth = (rng.normal(size=(h, w)) * rng.uniform(0.1, 100)).astype(np.float32)
        out = normalize_depth(depth).astype(np.float64)
        assert abs(out.mean()) <= 1e-6
        assert abs(out.std() - 1.0) <= 1e-5


def test_normalize_depth_constant_map_is_all_zero() -> None:
    out = normalize_depth(np.full((6, 9), 123.0, dtype=np.float32))
    assert np.array_equal(out, np.zeros((6, 9), dtype=np.float32))
    near = np.full((4, 4), 5.0, dtype=np.float32)
    near[0, 0] += 1e-9
    assert np.array_equal(normalize_depth(near), np.zeros((4, 4), dtype=np.float32))


def test_foreground_depth_stats_matches_numpy() -> None:
    rng = np.random.default_rng(1)
    for _ in range(20):
        depth = rng.normal(size=(15, 12)).astype(np.float32)
        mask = (rng.random((15, 12)) < 0.5).astype(np.uint8)
        if mask.sum() == 0:
            mask[0, 0] = 1
        stats = foreground_depth_stats(depth, mask)
        selected = depth[mask.astype(bool)].astype(np.float64)
        assert stats.mean == pytest.approx(selected.mean(), abs=1e-12)
        assert stats.std == pytest.approx(selected.std(), abs=1e-12)


def test_foreground_depth_stats_rejects_empty_mask() -> None:
    with pytest.raises(EmptyMaskError):
        foreground_depth_stats(np.ones((4, 4), dtype=np.float32),
                               np.zeros((4, 4), dtype=np.uint8))


def test_gradient_magnitude_of_row_ramp_is_one() -> None:
    depth = np.tile(np.arange(10, dtype=np.float32)[:, None], (1, 8))
    grad = gradient_magnitude(depth)
    assert np.allclose(grad, 1.0, atol=1e-12)


def test_score_windows_matches_naive_oracle() -> None:
    rng = np.random.default_rng(2)
    for _ in range(20):
        bg_h = int(rng.integers(8, 41))
        bg_w = int(rng.integers(8, 41))
        fg_h = int(rng.integers(2, min(10, bg_h) + 1))
        fg_w = int(rng.integers(2, min(10, bg_w) + 1))
        stride = int(rng.integers(1, 3))
        bg = normalize_depth(rng.normal(size=(bg_h, bg_w)).astype(np.float32))
        weights = PlacementWeights(*rng.uniform(0.05, 1.0, size=3))
        stats_src = rng.normal(size=(fg_h, fg_w)).astype(np.float32)
        stats = foreground_depth_stats(
            normalize_depth(stats_src), np.ones((fg_h, fg_w), dtype=np.uint8)
        )
        fast = score_windows(bg, stats, (fg_h, fg_w), weights, stride)
        naive = score_windows_naive(bg, stats, (fg_h, fg_w), weights, stride)
        assert fast.score_grid.shape == naive.score_grid.shape
        assert np.max(np.abs(fast.score_grid - naive.score_grid)) <= 1e-9
        assert (fast.x, fast.y) == (naive.x, naive.y)


def test_score_windows_score_range_and_lattice() -> None:
    rng = np.random.default_rng(3)
    bg = normalize_depth(rng.normal(size=(30, 30)).astype(np.float32))
    stats = foreground_depth_stats(bg[:8, :8], np.ones((8, 8), dtype=np.uint8))
    result = score_windows(bg, stats, (8, 8), stride=3)
    assert result.score_grid.min() >= 0.0
    assert result.score_grid.max() <= 1.0
    assert result.score_grid.shape == (8, 8)  # ceil(23 / 3)
    assert result.x % 3 == 0 and result.y % 3 == 0


def test_score_windows_constant_background_picks_origin() -> None:
    # every window identical -> full tie -> smallest row, then column
    bg = np.zeros((12, 12), dtype=np.float32)
    stats = foreground_depth_stats(np.zeros((4, 4), dtype=np.float32),
                                   np.ones((4, 4), dtype=np.uint8))
    for impl in (score_windows, score_windows_naive):
        result = impl(bg, stats, (4, 4))
        assert (result.x, result.y) == (0, 0)
        assert result.score == pytest.approx(1.0)


def test_score_windows_rejects_oversized_foreground() -> None:
    bg = np.zeros((8, 8), dtype=np.float32)
    stats = foreground_depth_stats(np.zeros((2, 2), dtype=np.float32),
                                   np.ones((2, 2), dtype=np.uint8))
    with pytest.raises(ForegroundTooLargeError):
        score_windows(bg, stats, (9, 4))


def test_scaled_size_rounding() -> None:
    assert scaled_size((10, 7), 0.5) == (5, 4)
    assert scaled_size((10, 7), 1.0) == (10, 7)
    assert scaled_size((10, 7), 0.01) == (1, 1)
    assert scaled_size((3, 3), 1.5) == (5, 5)


def test_place_with_scales_unit_scale_reproduces_score_windows() -> None:
    rng = np.random.default_rng(4)
    bg = normalize_depth(rng.normal(size=(40, 40)).astype(np.float32))
    fg = normalize_depth(rng.normal(size=(9, 9)).astype(np.float32))
    mask = np.ones((9, 9), dtype=np.uint8)
    direct = score_windows(bg, foreground_depth_stats(fg, mask), (9, 9))
    via_scales = place_with_scales(bg, fg, mask, scales=[1.0])
    assert (via_scales.x, via_scales.y, via_scales.scale) == (direct.x, direct.y, 1.0)
    assert via_scales.score == direct.score
    assert np.array_equal(via_scales.score_grid, direct.score_grid)


def test_place_with_scales_skips_infeasible_scales() -> None:
    rng = np.random.default_rng(5)
    bg = normalize_depth(rng.normal(size=(30, 30)).astype(np.float32))
    fg = normalize_depth(rng.normal(size=(20, 20)).astype(np.float32))
    mask = np.ones((20, 20), dtype=np.uint8)
    result = place_with_scales(bg, fg, mask, scales=[2.0, 1.0])
    assert result.scale == 1.0
    with pytest.raises(PlacementInfeasibleError):
        place_with_scales(bg, fg, mask, scales=[2.0])


def _plant(bg: np.ndarray, target: np.ndarray, x: int, y: int,
           iterations: int = 40) -> np.ndarray:
    """Fix a window so it equals `target` after the map is z-scored."""
    h, w = target.shape
    planted = bg.astype(np.float64).copy()
    for _ in range(iterations):
        mu, sigma = planted.mean(), planted.std()
        planted[x : x + h, y : y + w] = target * sigma + mu
    return planted.astype(np.float32)


def test_place_with_scales_finds_downscaled_replica() -> None:
    from dcp.grid import resize_bilinear

    rng = np.random.default_rng(6)
    fg = rng.normal(size=(16, 16)).astype(np.float32)
    fg_n = normalize_depth(fg)
    mask = np.ones((16, 16), dtype=np.uint8)

    # the scorer will compare against stats of this exact resampled map
    half = resize_bilinear(fg_n, 8, 8).astype(np.float32)
    bg = _plant(rng.normal(size=(48, 48)), half, 13, 21)
    bg_n = normalize_depth(bg)

    weights = PlacementWeights(0.5, 0.5, 0.0)
    result = place_with_scales(bg_n, fg_n, mask, weights=weights,
                               scales=[1.0, 0.5])
    assert result.scale == 0.5
    assert (result.x, result.y) == (13, 21)


def test_render_heatmap_bounds_and_constant() -> None:
    grid = np.array([[0.0, 0.5], [0.25, 1.0]])
    heat = render_heatmap(grid)
    assert heat.dtype == np.uint8
    assert heat[0, 0] == 0
    assert heat[1, 1] == 255
    assert np.array_equal(render_heatmap(np.full((3, 3), 0.7)),
                          np.zeros((3, 3), dtype=np.uint8))


def test_placement_weights_renormalize_and_validate() -> None:
    weights = PlacementWeights(2.0, 1.0, 1.0)
    assert weights.alpha + weights.beta + weights.gamma == 1.0
    assert weights.alpha == pytest.approx(0.5)
    with pytest.raises(ValueError):
        PlacementWeights(-0.1, 0.5, 0.5)
    with pytest.raises(ValueError):
        PlacementWeights(0.0, 0.0, 0.0)
