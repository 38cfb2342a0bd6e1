from __future__ import annotations

from pathlib import Path

import pytest

from dcp import SyntheticAssets, gen_synthetic_assets


@pytest.fixture
def asset_tree(tmp_path: Path):
    """Factory for seeded synthetic asset trees under this test's tmp dir."""

    def make(
        seed: int = 0,
        count: int = 3,
        dims: tuple[int, int] = (64, 64),
        planted_patch: bool = False,
        name: str | None = None,
    ) -> SyntheticAssets:
        root = tmp_path / (name or f"assets_s{seed}_c{count}")
        return gen_synthetic_assets(
            root, seed=seed, count=count, dims=dims, planted_patch=planted_patch
        )

    return make
