from __future__ import annotations

import json
from pathlib import Path

import numpy as np
import pytest

from dcp import (
    ConfigError,
    DatasetManifest,
    FormatError,
    ManifestError,
    PipelineConfig,
    load_foreground_manifest,
    mix_manifest,
    run_pipeline,
    save_mask,
)


def _config(out_dir: Path, **overrides) -> PipelineConfig:
    base = dict(k=2, stride=2, scales=(1.0,), output_dir=str(out_dir))
    base.update(overrides)
    return PipelineConfig(**base)


def test_config_validation() -> None:
    PipelineConfig()  # defaults are legal
    with pytest.raises(ConfigError):
        PipelineConfig(lam=1.5)
    with pytest.raises(ConfigError):
        PipelineConfig(k=0)
    with pytest.raises(ConfigError):
        PipelineConfig(tau=-0.1)
    with pytest.raises(ConfigError):
        PipelineConfig(stride=0)
    with pytest.raises(ConfigError):
        PipelineConfig(scales=())
    with pytest.raises(ConfigError):
        PipelineConfig(scales=(0.5, -1.0))
    with pytest.raises(ConfigError):
        PipelineConfig(alpha=-0.2)
    with pytest.raises(ConfigError):
        PipelineConfig(difficult_threshold=2.0)


def test_config_json_round_trip() -> None:
    config = PipelineConfig(lam=0.7, k=3, scales=(1.0, 0.5), seed=9,
                            output_dir="somewhere")
    raw = config.to_json_dict()
    assert raw["lambda"] == 0.7
    assert raw["featherRadius"] == 0
    assert PipelineConfig.from_json_dict(raw) == config


def test_config_rejects_unknown_keys() -> None:
    with pytest.raises(ConfigError):
        PipelineConfig.from_json_dict({"lambda": 0.5, "bogus": 1})


def test_config_hash_ignores_key_order_and_output_dir() -> None:
    config = PipelineConfig(lam=0.25, k=4, output_dir="a")
    raw = config.to_json_dict()
    reordered = dict(reversed(list(raw.items())))
    assert PipelineConfig.from_json_dict(reordered).config_hash() == config.config_hash()
    assert PipelineConfig(lam=0.25, k=4, output_dir="b").config_hash() == config.config_hash()
    assert PipelineConfig(lam=0.25, k=4, seed=1).config_hash() != config.config_hash()


def test_load_foreground_manifest(asset_tree) -> None:
    assets = asset_tree(count=2)
    entries = load_foreground_manifest(assets.foreground_manifest)
    assert [e.foreground_id for e in entries] == ["fg_000", "fg_001"]
    assert entries[0].image_path.exists()
    assert entries[0].face_box.w > 0


def test_load_foreground_manifest_rejects_duplicates(tmp_path: Path) -> None:
    entry = {
        "id": "fg_0", "image": "i.png", "mask": "m.png", "depth": "d.dmap",
        "faceBox": {"x": 0, "y": 0, "w": 1, "h": 1},
        "visualEmbedding": "v.emb1", "textEmbedding": "t.emb1",
    }
    manifest = tmp_path / "fg.json"
    manifest.write_text(json.dumps([entry, entry]))
    with pytest.raises(ManifestError):
        load_foreground_manifest(manifest)
    manifest.write_text(json.dumps([{"id": "fg_0"}]))
    with pytest.raises(ManifestError, match="entry 0"):
        load_foreground_manifest(manifest)


def test_run_pipeline_produces_count_times_k_composites(asset_tree, tmp_path: Path) -> None:
    assets = asset_tree(count=3, dims=(48, 48))
    out = tmp_path / "out"
    result = run_pipeline(_config(out), assets.foreground_manifest,
                          assets.background_manifest)
    manifest = result.manifest
    assert len(manifest.entries) == 6  # 3 foregrounds x k=2
    assert manifest.mix_ratio == 1.0
    assert manifest.skips == []
    keys = [(e["provenance"]["foregroundId"], e["rank"]) for e in manifest.entries]
    assert keys == sorted(keys)
    for entry in manifest.entries:
        assert (out / entry["imagePath"]).is_file()
        assert entry["origin"] == "synthetic"
    coco = json.loads(result.annotations_path.read_text())
    assert len(coco["images"]) == 6
    assert coco["categories"] == [{"id": 1, "name": "face"}]
    for ann in coco["annotations"]:
        assert ann["bbox"][2] > 0 and ann["bbox"][3] > 0
    log_lines = result.log_path.read_text().splitlines()
    assert len(log_lines) == 6
    assert all(json.loads(line)["event"] == "composite" for line in log_lines)


def test_run_pipeline_skips_empty_foreground(asset_tree, tmp_path: Path) -> None:
    assets = asset_tree(count=2, dims=(48, 48))
    entry = json.loads(assets.foreground_manifest.read_text())[0]
    mask_path = assets.root / entry["mask"]
    save_mask(np.zeros((12, 12), dtype=np.uint8), mask_path)  # fg dims at 48x48

    result = run_pipeline(_config(tmp_path / "out"), assets.foreground_manifest,
                          assets.background_manifest)
    assert len(result.manifest.entries) == 2  # only fg_001 composited
    assert [s["foregroundId"] for s in result.manifest.skips] == ["fg_000"]
    skip_events = [json.loads(line) for line in
                   result.log_path.read_text().splitlines()
                   if json.loads(line)["event"] == "skip"]
    assert skip_events and skip_events[0]["foregroundId"] == "fg_000"


def test_run_pipeline_fails_fast_on_corrupt_asset(asset_tree, tmp_path: Path) -> None:
    assets = asset_tree(count=1, dims=(48, 48))
    entry = json.loads(assets.foreground_manifest.read_text())[0]
    (assets.root / entry["depth"]).write_bytes(b"JUNKJUNKJUNKJUNK")
    with pytest.raises(FormatError):
        run_pipeline(_config(tmp_path / "out"), assets.foreground_manifest,
                     assets.background_manifest)


def test_run_pipeline_is_thread_count_invariant(asset_tree, tmp_path: Path,
                                                monkeypatch) -> None:
    assets = asset_tree(count=3, dims=(48, 48))
    monkeypatch.setenv("DCP_THREADS", "1")
    serial = run_pipeline(_config(tmp_path / "serial"),
                          assets.foreground_manifest, assets.background_manifest)
    monkeypatch.setenv("DCP_THREADS", "4")
    threaded = run_pipeline(_config(tmp_path / "threaded"),
                            assets.foreground_manifest, assets.background_manifest)
    assert serial.manifest_path.read_bytes() == threaded.manifest_path.read_bytes()
    assert serial.annotations_path.read_bytes() == threaded.annotations_path.read_bytes()
    for path in sorted(serial.images_dir.iterdir()):
        twin = threaded.images_dir / path.name
        assert path.read_bytes() == twin.read_bytes()


def test_run_pipeline_rejects_bad_thread_env(asset_tree, tmp_path: Path,
                                             monkeypatch) -> None:
    assets = asset_tree(count=1, dims=(48, 48))
    monkeypatch.setenv("DCP_THREADS", "many")
    with pytest.raises(ConfigError):
        run_pipeline(_config(tmp_path / "out"), assets.foreground_manifest,
                     assets.background_manifest)


def _entries(prefix: str, n: int) -> list[dict]:
    return [{"imagePath": f"{prefix}_{i}.png", "annotations": []} for i in range(n)]


def test_mix_manifest_counting_formula() -> None:
    real = DatasetManifest(entries=_entries("real", 80), mix_ratio=0.0)
    synth = DatasetManifest(entries=_entries("synth", 400), mix_ratio=1.0)
    mixed = mix_manifest(real, synth, ratio=0.2, seed=0)
    assert len(mixed.entries) == 100  # 80 real + 20 synthetic
    assert mixed.mix_ratio == 0.2
    assert mixed.entries[:80] == real.entries


def test_mix_manifest_ratio_zero_keeps_real_only() -> None:
    real = DatasetManifest(entries=_entries("real", 10), mix_ratio=0.0)
    synth = DatasetManifest(entries=_entries("synth", 5), mix_ratio=1.0)
    mixed = mix_manifest(real, synth, ratio=0.0, seed=0)
    assert mixed.entries == real.entries


def test_mix_manifest_is_seed_deterministic() -> None:
    real = DatasetManifest(entries=_entries("real", 30), mix_ratio=0.0)
    synth = DatasetManifest(entries=_entries("synth", 50), mix_ratio=1.0)
    once = mix_manifest(real, synth, ratio=0.4, seed=7)
    again = mix_manifest(real, synth, ratio=0.4, seed=7)
    other = mix_manifest(real, synth, ratio=0.4, seed=8)
    assert once.entries == again.entries
    assert once.entries != other.entries


def test_mix_manifest_rejects_bad_ratios_and_shortage() -> None:
    real = DatasetManifest(entries=_entries("real", 10), mix_ratio=0.0)
    synth = DatasetManifest(entries=_entries("synth", 3), mix_ratio=1.0)
    with pytest.raises(ManifestError):
        mix_manifest(real, synth, ratio=1.0, seed=0)
    with pytest.raises(ManifestError):
        mix_manifest(real, synth, ratio=-0.1, seed=0)
    with pytest.raises(ManifestError):
        mix_manifest(real, synth, ratio=0.5, seed=0)  # needs 10, pool has 3


def test_dataset_manifest_json_round_trip(tmp_path: Path) -> None:
    manifest = DatasetManifest(entries=_entries("e", 3), mix_ratio=0.25,
                               skips=[{"event": "skip", "foregroundId": "f"}])
    path = tmp_path / "m.json"
    manifest.save(path)
    loaded = DatasetManifest.from_json_file(path)
    assert loaded.entries == manifest.entries
    assert loaded.mix_ratio == 0.25
    assert loaded.skips == manifest.skips
    (tmp_path / "bad.json").write_text("{nope")
    with pytest.raises(ManifestError):
        DatasetManifest.from_json_file(tmp_path / "bad.json")
