"""Depth-aware copy-paste compositing over prepared image assets.

The package turns pre-extracted assets (images, segmentation masks, depth
maps, embeddings) into composited training images with annotations: rank
compatible backgrounds, cut the visible part of the foreground, search depth
statistics for the best paste window, blend, and emit manifests.
"""

from .bench import BenchResult, benchmark_placement
from .compositor import (
    Annotation,
    CompositeSample,
    Provenance,
    coco_annotation,
    coco_document,
    composite_filename,
    feather_mask,
    paste,
    transform_annotation,
)
from .errors import (
    BadMagicError,
    ConfigError,
    DcpError,
    DimensionMismatchError,
    EmptyForegroundError,
    EmptyGridError,
    EmptyMaskError,
    ForegroundTooLargeError,
    FormatError,
    ManifestError,
    MaskValueError,
    NonFiniteValueError,
    OutOfBoundsPasteError,
    PlacementInfeasibleError,
    TruncatedFileError,
    UnsupportedVersionError,
    ZeroVectorError,
)
from .extraction import (
    ForegroundAsset,
    Rect,
    VisibilityParams,
    extract_foreground,
    local_depth_deviation,
    visibility_mask,
)
from .formats import (
    load_depth,
    load_embedding,
    load_image,
    load_mask,
    save_depth,
    save_embedding,
    save_image,
    save_mask,
)
from .grid import IntegralTable, largest_component, mask_and, rescale_unit
from .pipeline import (
    DatasetManifest,
    ForegroundEntry,
    PipelineConfig,
    RunResult,
    load_foreground_manifest,
    mix_manifest,
    run_pipeline,
)
from .placement import (
    ForegroundDepthStats,
    PlacementResult,
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
from .retrieval import (
    PoolEntry,
    RankedBackground,
    RetrievalQuery,
    fused_score,
    load_pool_manifest,
    normalize_embedding,
    rank_backgrounds,
    similarity,
)
from .synth import SyntheticAssets, gen_synthetic_assets

__version__ = "0.1.0"

__all__ = [
    "Annotation",
    "BadMagicError",
    "BenchResult",
    "CompositeSample",
    "ConfigError",
    "DatasetManifest",
    "DcpError",
    "DimensionMismatchError",
    "EmptyForegroundError",
    "EmptyGridError",
    "EmptyMaskError",
    "ForegroundAsset",
    "ForegroundDepthStats",
    "ForegroundEntry",
    "ForegroundTooLargeError",
    "FormatError",
    "IntegralTable",
    "ManifestError",
    "MaskValueError",
    "NonFiniteValueError",
    "OutOfBoundsPasteError",
    "PipelineConfig",
    "PlacementInfeasibleError",
    "PlacementResult",
    "PlacementWeights",
    "PoolEntry",
    "Provenance",
    "RankedBackground",
    "Rect",
    "RetrievalQuery",
    "RunResult",
    "SyntheticAssets",
    "TruncatedFileError",
    "UnsupportedVersionError",
    "VisibilityParams",
    "ZeroVectorError",
    "benchmark_placement",
    "coco_annotation",
    "coco_document",
    "composite_filename",
    "extract_foreground",
    "feather_mask",
    "foreground_depth_stats",
    "fused_score",
    "gen_synthetic_assets",
    "gradient_magnitude",
    "largest_component",
    "load_depth",
    "load_embedding",
    "load_foreground_manifest",
    "load_image",
    "load_mask",
    "load_pool_manifest",
    "local_depth_deviation",
    "mask_and",
    "mix_manifest",
    "normalize_depth",
    "normalize_embedding",
    "paste",
    "place_with_scales",
    "rank_backgrounds",
    "render_heatmap",
    "rescale_unit",
    "run_pipeline",
    "save_depth",
    "save_embedding",
    "save_image",
    "save_mask",
    "scaled_size",
    "score_windows",
    "score_windows_naive",
    "similarity",
    "transform_annotation",
    "visibility_mask",
]
