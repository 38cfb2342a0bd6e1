"""Orchestration: config, manifests, the end-to-end flow, dataset mixing.

run_pipeline drives, per foreground: background ranking (Top-K), occlusion
aware extraction, depth-guided placement against each retained background,
compositing, and annotation emission.  Foregrounds whose extraction comes up
empty are skipped and logged; unreadable or malformed asset files fail fast
naming the offending path.

Determinism contract: two runs over identical config and assets produce
bit-identical manifests and images regardless of DCP_THREADS.  Work items
are pure, every image path is unique, and manifest entries are assembled
serially in (foregroundId, rank) order — never completion order.
"""

from __future__ import annotations

import hashlib
import json
import logging
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from threading import Lock
from typing import Any

import numpy as np

from .compositor import coco_document, composite_filename, transform_annotation
from .compositor import paste as paste_image
from .errors import ConfigError, EmptyForegroundError, ManifestError
from .extraction import ForegroundAsset, Rect, VisibilityParams, extract_foreground
from .formats import load_depth, load_embedding, load_image, load_mask, save_image
from .placement import PlacementWeights, normalize_depth, place_with_scales
from .retrieval import (
    PoolEntry,
    RetrievalQuery,
    load_pool_manifest,
    normalize_embedding,
    rank_backgrounds,
)

logger = logging.getLogger(__name__)

THREADS_ENV = "DCP_THREADS"


@dataclass(frozen=True)
class PipelineConfig:
    """Every knob of the end-to-end flow; hashed for provenance."""

    lam: float = 0.5
    k: int = 5
    tau: float = 0.05
    radius: int = 2
    alpha: float = 1.0 / 3.0
    beta: float = 1.0 / 3.0
    gamma: float = 1.0 / 3.0
    stride: int = 1
    scales: tuple[float, ...] = (1.0,)
    feather_radius: int = 0
    cleanup: bool = True
    difficult_threshold: float = 0.2
    seed: int = 0
    output_dir: str = "dcp-out"

    def __post_init__(self) -> None:
        if not 0.0 <= self.lam <= 1.0:
            raise ConfigError(f"lambda must be in [0, 1], got {self.lam}")
        if self.k < 1:
            raise ConfigError(f"k must be >= 1, got {self.k}")
        if self.tau < 0.0:
            raise ConfigError(f"tau must be >= 0, got {self.tau}")
        if self.radius < 1:
            raise ConfigError(f"radius must be >= 1, got {self.radius}")
        if min(self.alpha, self.beta, self.gamma) < 0:
            raise ConfigError("placement weights must be non-negative")
        if self.alpha + self.beta + self.gamma <= 0:
            raise ConfigError("at least one placement weight must be positive")
        if self.stride < 1:
            raise ConfigError(f"stride must be >= 1, got {self.stride}")
        if not self.scales or any(s <= 0 for s in self.scales):
            raise ConfigError(f"scales must be non-empty and positive: {self.scales}")
        if self.feather_radius < 0:
            raise ConfigError("feather radius must be >= 0")
        if not 0.0 <= self.difficult_threshold <= 1.0:
            raise ConfigError("difficult threshold must be in [0, 1]")

    # JSON field names are the stable external contract.
    _JSON_KEYS = {
        "lam": "lambda",
        "k": "k",
        "tau": "tau",
        "radius": "radius",
        "alpha": "alpha",
        "beta": "beta",
        "gamma": "gamma",
        "stride": "stride",
        "scales": "scales",
        "feather_radius": "featherRadius",
        "cleanup": "cleanup",
        "difficult_threshold": "difficultThreshold",
        "seed": "seed",
        "output_dir": "outputDir",
    }

    def to_json_dict(self) -> dict[str, Any]:
        out: dict[str, Any] = {}
        for attr, key in self._JSON_KEYS.items():
            value = getattr(self, attr)
            out[key] = list(value) if attr == "scales" else value
        return out

    @classmethod
    def from_json_dict(cls, raw: dict[str, Any]) -> "PipelineConfig":
        reverse = {key: attr for attr, key in cls._JSON_KEYS.items()}
        unknown = set(raw) - set(reverse)
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        kwargs: dict[str, Any] = {}
        for key, value in raw.items():
            attr = reverse[key]
            kwargs[attr] = tuple(value) if attr == "scales" else value
        return cls(**kwargs)

    @classmethod
    def from_json_file(cls, path: str | Path) -> "PipelineConfig":
        try:
            raw = json.loads(Path(path).read_text())
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}: invalid JSON ({exc})") from exc
        if not isinstance(raw, dict):
            raise ConfigError(f"{path}: config must be a JSON object")
        return cls.from_json_dict(raw)

    def config_hash(self) -> str:
        """SHA-256 of the canonical serialization of every effective parameter.

        outputDir is a location, not a parameter: it does not affect any
        generated byte and is excluded.
        """
        effective = {
            key: value
            for key, value in self.to_json_dict().items()
            if key != "outputDir"
        }
        canonical = json.dumps(effective, sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(canonical.encode("utf-8")).hexdigest()


@dataclass(frozen=True)
class ForegroundEntry:
    """One foreground in an asset manifest; paths resolved to the manifest."""

    foreground_id: str
    image_path: Path
    mask_path: Path
    depth_path: Path
    face_box: Rect
    visual_embedding_path: Path
    text_embedding_path: Path


@dataclass
class DatasetManifest:
    """Composite records plus real/synthetic mixing metadata."""

    entries: list[dict[str, Any]]
    mix_ratio: float
    skips: list[dict[str, Any]] = field(default_factory=list)

    def to_json_dict(self) -> dict[str, Any]:
        return {
            "entries": self.entries,
            "mixRatio": self.mix_ratio,
            "skips": self.skips,
        }

    @classmethod
    def from_json_dict(cls, raw: dict[str, Any]) -> "DatasetManifest":
        if not isinstance(raw, dict) or "entries" not in raw:
            raise ManifestError("dataset manifest must be an object with 'entries'")
        return cls(
            entries=list(raw["entries"]),
            mix_ratio=float(raw.get("mixRatio", 0.0)),
            skips=list(raw.get("skips", [])),
        )

    @classmethod
    def from_json_file(cls, path: str | Path) -> "DatasetManifest":
        try:
            raw = json.loads(Path(path).read_text())
        except json.JSONDecodeError as exc:
            raise ManifestError(f"{path}: invalid JSON ({exc})") from exc
        return cls.from_json_dict(raw)

    def save(self, path: str | Path) -> None:
        Path(path).write_text(
            json.dumps(self.to_json_dict(), indent=2, sort_keys=True) + "\n"
        )


def load_foreground_manifest(path: str | Path) -> list[ForegroundEntry]:
    path = Path(path)
    try:
        raw = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise ManifestError(f"{path}: invalid JSON ({exc})") from exc
    if not isinstance(raw, list):
        raise ManifestError(f"{path}: foreground manifest must be a JSON array")
    base = path.parent
    entries = []
    for i, item in enumerate(raw):
        try:
            box = item["faceBox"]
            entries.append(
                ForegroundEntry(
                    foreground_id=str(item["id"]),
                    image_path=base / item["image"],
                    mask_path=base / item["mask"],
                    depth_path=base / item["depth"],
                    face_box=Rect(
                        x=int(box["x"]), y=int(box["y"]),
                        w=int(box["w"]), h=int(box["h"]),
                    ),
                    visual_embedding_path=base / item["visualEmbedding"],
                    text_embedding_path=base / item["textEmbedding"],
                )
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise ManifestError(f"{path}: entry {i} is malformed ({exc})") from exc
    if len({e.foreground_id for e in entries}) != len(entries):
        raise ManifestError(f"{path}: duplicate foreground ids")
    return entries


def _thread_count() -> int:
    raw = os.environ.get(THREADS_ENV, "0")
    try:
        value = int(raw)
    except ValueError as exc:
        raise ConfigError(f"{THREADS_ENV} must be an integer, got {raw!r}") from exc
    if value < 0:
        raise ConfigError(f"{THREADS_ENV} must be >= 0, got {value}")
    return value if value > 0 else (os.cpu_count() or 1)


class _BackgroundCache:
    """Lazily loaded, thread-safe background assets (all read-only)."""

    def __init__(self, pool: list[PoolEntry]) -> None:
        self.by_id = {entry.background_id: entry for entry in pool}
        self._depth: dict[str, np.ndarray] = {}
        self._image: dict[str, np.ndarray] = {}
        self._lock = Lock()

    def depth_normalized(self, background_id: str) -> np.ndarray:
        with self._lock:
            cached = self._depth.get(background_id)
        if cached is not None:
            return cached
        value = normalize_depth(load_depth(self.by_id[background_id].depth_path))
        with self._lock:
            return self._depth.setdefault(background_id, value)

    def image(self, background_id: str) -> np.ndarray:
        with self._lock:
            cached = self._image.get(background_id)
        if cached is not None:
            return cached
        value = load_image(self.by_id[background_id].image_path)
        with self._lock:
            return self._image.setdefault(background_id, value)


@dataclass
class RunResult:
    manifest: DatasetManifest
    manifest_path: Path
    annotations_path: Path
    log_path: Path
    images_dir: Path


def _process_foreground(
    fg: ForegroundEntry,
    pool_embeddings: list[tuple[str, np.ndarray]],
    cache: _BackgroundCache,
    config: PipelineConfig,
    images_dir: Path,
) -> tuple[list[dict[str, Any]], dict[str, Any] | None]:
    """Produce this foreground's manifest entries, or a skip record."""
    query = RetrievalQuery(
        visual=normalize_embedding(load_embedding(fg.visual_embedding_path)),
        text=normalize_embedding(load_embedding(fg.text_embedding_path)),
        lam=config.lam,
        k=config.k,
    )
    ranked = rank_backgrounds(query, pool_embeddings)

    asset = ForegroundAsset(
        image=load_image(fg.image_path),
        seg_mask=load_mask(fg.mask_path),
        depth=load_depth(fg.depth_path),
        face_box=fg.face_box,
    )
    vis = VisibilityParams(tau=config.tau, radius=config.radius)
    try:
        rgba, fg_mask = extract_foreground(asset, vis, cleanup=config.cleanup)
    except EmptyForegroundError as exc:
        skip = {
            "event": "skip",
            "foregroundId": fg.foreground_id,
            "reason": str(exc),
        }
        return [], skip

    fg_depth_n = normalize_depth(asset.depth)
    weights = PlacementWeights(config.alpha, config.beta, config.gamma)
    config_hash = config.config_hash()

    entries = []
    for rank, candidate in enumerate(ranked):
        bg_n = cache.depth_normalized(candidate.background_id)
        placement = place_with_scales(
            bg_n, fg_depth_n, fg_mask,
            weights=weights, stride=config.stride, scales=list(config.scales),
        )
        background = cache.image(candidate.background_id)
        composite = paste_image(
            background, rgba, fg_mask,
            at=(placement.x, placement.y),
            scale=placement.scale,
            feather_radius=config.feather_radius,
        )
        annotation = transform_annotation(
            fg.face_box, fg_mask,
            at=(placement.x, placement.y),
            scale=placement.scale,
            composite_dims=composite.shape[:2],
            source_foreground_id=fg.foreground_id,
            difficult_threshold=config.difficult_threshold,
        )
        filename = composite_filename(
            candidate.background_id, fg.foreground_id,
            placement.x, placement.y, placement.scale,
        )
        save_image(composite, images_dir / filename)
        annotations = []
        if annotation is not None:
            annotations.append(
                {
                    "label": annotation.label,
                    "bbox": annotation.bbox_coco(),
                    "visibleFraction": annotation.visible_fraction,
                    "difficult": annotation.difficult,
                    "sourceForegroundId": annotation.source_foreground_id,
                }
            )
        entries.append(
            {
                "imagePath": f"images/{filename}",
                "imageDims": [composite.shape[0], composite.shape[1]],
                "annotations": annotations,
                "origin": "synthetic",
                "rank": rank,
                "provenance": {
                    "foregroundId": fg.foreground_id,
                    "backgroundId": candidate.background_id,
                    "placement": {
                        "x": placement.x,
                        "y": placement.y,
                        "scale": placement.scale,
                        "score": placement.score,
                    },
                    "retrieval": {
                        "score": candidate.score,
                        "visualScore": candidate.visual_score,
                        "textScore": candidate.text_score,
                    },
                    "configHash": config_hash,
                },
            }
        )
    return entries, None


def run_pipeline(
    config: PipelineConfig,
    foregrounds_path: str | Path,
    backgrounds_path: str | Path,
) -> RunResult:
    """Run the full flow and write images, manifest, annotations and log."""
    foregrounds = load_foreground_manifest(foregrounds_path)
    pool = load_pool_manifest(backgrounds_path)
    if not pool:
        raise ManifestError(f"{backgrounds_path}: background pool is empty")

    pool_embeddings = [
        (entry.background_id, normalize_embedding(load_embedding(entry.embedding_path)))
        for entry in pool
    ]
    cache = _BackgroundCache(pool)

    out_dir = Path(config.output_dir)
    images_dir = out_dir / "images"
    images_dir.mkdir(parents=True, exist_ok=True)

    def work(fg: ForegroundEntry) -> tuple[list[dict[str, Any]], dict[str, Any] | None]:
        return _process_foreground(fg, pool_embeddings, cache, config, images_dir)

    threads = _thread_count()
    if threads == 1 or len(foregrounds) <= 1:
        results = [work(fg) for fg in foregrounds]
    else:
        with ThreadPoolExecutor(max_workers=threads) as executor:
            results = list(executor.map(work, foregrounds))

    entries: list[dict[str, Any]] = []
    skips: list[dict[str, Any]] = []
    for fg, (fg_entries, skip) in zip(foregrounds, results):
        entries.extend(fg_entries)
        if skip is not None:
            skips.append(skip)
            logger.warning("skipped foreground %s: %s", fg.foreground_id,
                           skip["reason"])

    entries.sort(key=lambda e: (e["provenance"]["foregroundId"], e["rank"]))
    skips.sort(key=lambda s: s["foregroundId"])

    manifest = DatasetManifest(entries=entries, mix_ratio=1.0, skips=skips)
    manifest_path = out_dir / "manifest.json"
    manifest.save(manifest_path)

    images = []
    annotations = []
    for image_id, entry in enumerate(entries):
        images.append(
            {
                "id": image_id,
                "file_name": entry["imagePath"],
                "height": entry["imageDims"][0],
                "width": entry["imageDims"][1],
            }
        )
        for ann in entry["annotations"]:
            annotations.append(
                _coco_from_manifest_annotation(ann, len(annotations), image_id)
            )
    annotations_path = out_dir / "annotations.json"
    annotations_path.write_text(
        json.dumps(coco_document(images, annotations), indent=2, sort_keys=True) + "\n"
    )

    log_path = out_dir / "run_log.jsonl"
    with log_path.open("w") as handle:
        for skip in skips:
            handle.write(json.dumps(skip, sort_keys=True) + "\n")
        for entry in entries:
            handle.write(
                json.dumps(
                    {
                        "event": "composite",
                        "foregroundId": entry["provenance"]["foregroundId"],
                        "backgroundId": entry["provenance"]["backgroundId"],
                        "imagePath": entry["imagePath"],
                    },
                    sort_keys=True,
                )
                + "\n"
            )
    return RunResult(manifest, manifest_path, annotations_path, log_path, images_dir)


def _coco_from_manifest_annotation(ann: dict[str, Any], annotation_id: int,
                                   image_id: int) -> dict[str, Any]:
    return {
        "id": annotation_id,
        "image_id": image_id,
        "category_id": 1,
        "bbox": list(ann["bbox"]),
        "area": ann["bbox"][2] * ann["bbox"][3],
        "iscrowd": 0,
        "visible_fraction": ann["visibleFraction"],
        "difficult": ann["difficult"],
        "source_foreground_id": ann["sourceForegroundId"],
    }


def mix_manifest(
    real: DatasetManifest,
    synthetic: DatasetManifest,
    ratio: float,
    seed: int,
) -> DatasetManifest:
    """Blend synthetic entries into a real manifest at a target fraction.

    The synthetic count is round-half-up of ratio/(1-ratio) * |real| so the
    realized synthetic fraction of the final set lands within 1/|entries| of
    the request.  All real entries are retained; synthetic entries are
    sampled without replacement by a seeded shuffle.  ratio = 1 is rejected:
    a training set needs real data.
    """
    if not 0.0 <= ratio <= 1.0:
        raise ManifestError(f"ratio must be in [0, 1], got {ratio}")
    if ratio == 1.0:
        raise ManifestError("ratio 1.0 rejected: the mix must retain real data")
    if ratio == 0.0:
        needed = 0
    else:
        exact = ratio / (1.0 - ratio) * len(real.entries)
        needed = int(np.floor(exact + 0.5))
    if needed > len(synthetic.entries):
        raise ManifestError(
            f"need {needed} synthetic entries for ratio {ratio}, "
            f"pool has {len(synthetic.entries)}"
        )
    order = np.random.default_rng(seed).permutation(len(synthetic.entries))
    chosen = [synthetic.entries[int(i)] for i in order[:needed]]
    return DatasetManifest(
        entries=list(real.entries) + chosen,
        mix_ratio=ratio,
        skips=[],
    )
