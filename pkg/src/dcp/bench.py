"""Timing harness for the window-scoring implementations.

Runs the summed-area-table scorer and the reference double loop on the same
seeded instance, checks they pick the same window, and reports wall times.
The naive path exists precisely so the fast path has something honest to be
compared against; keep both on the same inputs.
"""

from __future__ import annotations

import time
from dataclasses import dataclass

import numpy as np

from .placement import (
    PlacementWeights,
    normalize_depth,
    foreground_depth_stats,
    score_windows,
    score_windows_naive,
)


@dataclass(frozen=True)
class BenchResult:
    background_size: int
    window_size: int
    stride: int
    fast_seconds: float
    naive_seconds: float
    speedup: float
    same_argmax: bool

    def to_json_dict(self) -> dict:
        return {
            "backgroundSize": self.background_size,
            "windowSize": self.window_size,
            "stride": self.stride,
            "fastSeconds": self.fast_seconds,
            "naiveSeconds": self.naive_seconds,
            "speedup": self.speedup,
            "sameArgmax": self.same_argmax,
        }


def benchmark_placement(
    bg_size: int = 512,
    window: int = 64,
    stride: int = 1,
    seed: int = 0,
) -> BenchResult:
    rng = np.random.default_rng(seed)
    bg = normalize_depth(rng.normal(size=(bg_size, bg_size)).astype(np.float32))
    fg_depth = normalize_depth(rng.normal(size=(window, window)).astype(np.float32))
    fg_mask = np.ones((window, window), dtype=np.uint8)
    stats = foreground_depth_stats(fg_depth, fg_mask)
    weights = PlacementWeights(1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0)

    start = time.perf_counter()
    fast = score_windows(bg, stats, (window, window), weights, stride=stride)
    fast_seconds = time.perf_counter() - start

    start = time.perf_counter()
    naive = score_windows_naive(bg, stats, (window, window), weights, stride=stride)
    naive_seconds = time.perf_counter() - start

    return BenchResult(
        background_size=bg_size,
        window_size=window,
        stride=stride,
        fast_seconds=fast_seconds,
        naive_seconds=naive_seconds,
        speedup=naive_seconds / fast_seconds if fast_seconds > 0 else float("inf"),
        same_argmax=(fast.x, fast.y) == (naive.x, naive.y),
    )
