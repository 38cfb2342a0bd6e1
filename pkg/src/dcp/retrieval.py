"""Multimodal background ranking.

Candidate backgrounds are scored against a foreground by two cosine
similarities — visual-to-visual and text-to-visual, both plain dot products
of L2-normalized embeddings — fused into a single score by an affine blend
weighted by lambda, then ranked Top-K.  Normalizing every embedding at load
makes the two dot products commensurable before fusion.

Ranking is deterministic: scores are computed independently per candidate
and ties are broken by ascending background id.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import DimensionMismatchError, ManifestError, ZeroVectorError

DEFAULT_LAMBDA = 0.5
DEFAULT_TOP_K = 5


@dataclass(frozen=True)
class RetrievalQuery:
    """Foreground embeddings plus fusion weight and result count."""

    visual: np.ndarray
    text: np.ndarray
    lam: float = DEFAULT_LAMBDA
    k: int = DEFAULT_TOP_K

    def __post_init__(self) -> None:
        if self.visual.shape != self.text.shape:
            raise DimensionMismatchError(
                f"visual dim {self.visual.shape} != text dim {self.text.shape}"
            )
        if not 0.0 <= self.lam <= 1.0:
            raise ValueError(f"lambda must be in [0, 1], got {self.lam}")
        if self.k < 1:
            raise ValueError(f"k must be >= 1, got {self.k}")


@dataclass(frozen=True)
class RankedBackground:
    background_id: str
    score: float
    visual_score: float
    text_score: float


@dataclass(frozen=True)
class PoolEntry:
    """One background in a pool manifest; paths are relative to the manifest."""

    background_id: str
    embedding_path: Path
    image_path: Path
    depth_path: Path


def normalize_embedding(vec: np.ndarray) -> np.ndarray:
    """Scale a vector to unit L2 norm; zero vectors are rejected."""
    arr = np.asarray(vec, dtype=np.float32)
    norm = float(np.linalg.norm(arr.astype(np.float64)))
    if norm == 0.0:
        raise ZeroVectorError("cannot normalize a zero vector")
    return (arr.astype(np.float64) / norm).astype(np.float32)


def similarity(a: np.ndarray, b: np.ndarray) -> float:
    """Dot product of two unit vectors (cosine similarity)."""
    if a.shape != b.shape:
        raise DimensionMismatchError(f"dims differ: {a.shape} vs {b.shape}")
    return float(np.dot(a.astype(np.float64), b.astype(np.float64)))


def fused_score(visual: float, text: float, lam: float) -> float:
    """Affine fusion lam * visual + (1 - lam) * text."""
    if not 0.0 <= lam <= 1.0:
        raise ValueError(f"lambda must be in [0, 1], got {lam}")
    return lam * visual + (1.0 - lam) * text


def rank_backgrounds(
    query: RetrievalQuery,
    pool: list[tuple[str, np.ndarray]],
) -> list[RankedBackground]:
    """Score every candidate and return the Top-K.

    Returns min(k, len(pool)) entries in descending score order; equal scores
    sort by ascending background id so parallel callers always agree.
    """
    if not pool:
        raise ManifestError("background pool is empty")
    ranked = []
    for background_id, emb in pool:
        if emb.shape != query.visual.shape:
            raise DimensionMismatchError(
                f"pool entry {background_id!r} dim {emb.shape} != query dim "
                f"{query.visual.shape}"
            )
        sv = similarity(query.visual, emb)
        st = similarity(query.text, emb)
        ranked.append(
            RankedBackground(background_id, fused_score(sv, st, query.lam), sv, st)
        )
    ranked.sort(key=lambda r: (-r.score, r.background_id))
    return ranked[: query.k]


def load_pool_manifest(path: str | Path) -> list[PoolEntry]:
    """Parse a background pool manifest (JSON array of id/embedding/image/depth)."""
    path = Path(path)
    try:
        raw = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise ManifestError(f"{path}: invalid JSON ({exc})") from exc
    if not isinstance(raw, list):
        raise ManifestError(f"{path}: pool manifest must be a JSON array")
    base = path.parent
    entries = []
    for i, item in enumerate(raw):
        try:
            entries.append(
                PoolEntry(
                    background_id=str(item["id"]),
                    embedding_path=base / item["embedding"],
                    image_path=base / item["image"],
                    depth_path=base / item["depth"],
                )
            )
        except (KeyError, TypeError) as exc:
            raise ManifestError(f"{path}: entry {i} is malformed ({exc})") from exc
    if len({e.background_id for e in entries}) != len(entries):
        raise ManifestError(f"{path}: duplicate background ids")
    return entries
