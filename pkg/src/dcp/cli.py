"""Command line front end.

One subcommand per stage (retrieve, extract, place, compose), plus the
end-to-end pipeline, dataset mixing, the synthetic asset generator, and the
placement benchmark.  Each handler is a thin adapter: parse arguments, call
the library, serialize the result.  Domain failures exit with status 2 and a
one-line message on stderr; bad invocations exit with argparse's usual 2.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from PIL import Image

from .bench import benchmark_placement
from .compositor import composite_filename
from .compositor import paste as paste_image
from .errors import DcpError
from .extraction import ForegroundAsset, Rect, VisibilityParams, extract_foreground
from .formats import (
    load_depth,
    load_embedding,
    load_image,
    load_mask,
    save_image,
    save_mask,
)
from .pipeline import (
    DatasetManifest,
    PipelineConfig,
    mix_manifest,
    run_pipeline,
)
from .placement import (
    PlacementWeights,
    foreground_depth_stats,
    normalize_depth,
    place_with_scales,
    render_heatmap,
)
from .retrieval import (
    RetrievalQuery,
    load_pool_manifest,
    normalize_embedding,
    rank_backgrounds,
)
from .synth import gen_synthetic_assets


def _parse_scales(text: str) -> list[float]:
    try:
        scales = [float(part) for part in text.split(",") if part.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"bad scale list {text!r}") from exc
    if not scales:
        raise argparse.ArgumentTypeError("scale list is empty")
    return scales


def _parse_dims(text: str) -> tuple[int, int]:
    parts = text.lower().split("x")
    if len(parts) != 2:
        raise argparse.ArgumentTypeError(f"dims must look like 96x128, got {text!r}")
    try:
        h, w = int(parts[0]), int(parts[1])
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"dims must be integers, got {text!r}") from exc
    return h, w


def _emit_json(payload: object, out: str | None) -> None:
    text = json.dumps(payload, indent=2, sort_keys=True) + "\n"
    if out is None:
        sys.stdout.write(text)
    else:
        Path(out).write_text(text)


def _cmd_retrieve(args: argparse.Namespace) -> int:
    pool = load_pool_manifest(args.pool)
    embeddings = [
        (entry.background_id, normalize_embedding(load_embedding(entry.embedding_path)))
        for entry in pool
    ]
    query = RetrievalQuery(
        visual=normalize_embedding(load_embedding(args.visual)),
        text=normalize_embedding(load_embedding(args.text)),
        lam=args.lam,
        k=args.k,
    )
    ranked = rank_backgrounds(query, embeddings)
    _emit_json(
        [
            {
                "backgroundId": r.background_id,
                "score": r.score,
                "visualScore": r.visual_score,
                "textScore": r.text_score,
            }
            for r in ranked
        ],
        args.out,
    )
    return 0


def _cmd_extract(args: argparse.Namespace) -> int:
    asset = ForegroundAsset(
        image=load_image(args.image),
        seg_mask=load_mask(args.mask),
        depth=load_depth(args.depth),
        face_box=Rect(0, 0, 1, 1),  # extraction does not consult the box
    )
    params = VisibilityParams(tau=args.tau, radius=args.radius)
    rgba, mask = extract_foreground(asset, params, cleanup=not args.no_cleanup)
    save_image(rgba, args.out_rgba)
    save_mask(mask, args.out_mask)
    return 0


def _cmd_place(args: argparse.Namespace) -> int:
    bg_n = normalize_depth(load_depth(args.bg_depth))
    fg_n = normalize_depth(load_depth(args.fg_depth))
    fg_mask = load_mask(args.fg_mask)
    weights = PlacementWeights(args.alpha, args.beta, args.gamma)
    result = place_with_scales(
        bg_n, fg_n, fg_mask,
        weights=weights, stride=args.stride, scales=args.scales,
    )
    _emit_json(
        {
            "x": result.x,
            "y": result.y,
            "scale": result.scale,
            "score": result.score,
        },
        args.out_json,
    )
    if args.heatmap is not None:
        Image.fromarray(render_heatmap(result.score_grid), mode="L").save(
            args.heatmap, format="PNG"
        )
    return 0


def _cmd_compose(args: argparse.Namespace) -> int:
    background = load_image(args.background)
    fg_rgba = load_image(args.fg_rgba)
    fg_mask = load_mask(args.fg_mask)
    composite = paste_image(
        background, fg_rgba, fg_mask,
        at=(args.x, args.y), scale=args.scale, feather_radius=args.feather,
    )
    out = args.out
    if out is None:
        out = composite_filename("bg", "fg", args.x, args.y, args.scale)
    save_image(composite, out)
    print(out)
    return 0


def _cmd_pipeline(args: argparse.Namespace) -> int:
    config = PipelineConfig.from_json_file(args.config)
    result = run_pipeline(config, args.foregrounds, args.backgrounds)
    print(result.manifest_path)
    return 0


def _cmd_mix(args: argparse.Namespace) -> int:
    mixed = mix_manifest(
        DatasetManifest.from_json_file(args.real),
        DatasetManifest.from_json_file(args.synthetic),
        ratio=args.ratio,
        seed=args.seed,
    )
    _emit_json(mixed.to_json_dict(), args.out)
    return 0


def _cmd_gen_synthetic(args: argparse.Namespace) -> int:
    assets = gen_synthetic_assets(
        args.out,
        seed=args.seed,
        count=args.count,
        dims=args.dims,
        planted_patch=args.planted_patch,
    )
    print(assets.root)
    return 0


def _cmd_bench_placement(args: argparse.Namespace) -> int:
    result = benchmark_placement(
        bg_size=args.bg_size,
        window=args.window,
        stride=args.stride,
        seed=args.seed,
    )
    _emit_json(result.to_json_dict(), None)
    return 0


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="dcp",
        description="Depth-aware copy-paste compositing over prepared assets.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("retrieve", help="rank pool backgrounds for a foreground")
    p.add_argument("--pool", required=True, help="background pool manifest (JSON)")
    p.add_argument("--visual", required=True, help="foreground visual embedding (EMB1)")
    p.add_argument("--text", required=True, help="foreground text embedding (EMB1)")
    p.add_argument("--lambda", dest="lam", type=float, default=0.5,
                   help="visual weight in the fused score (default 0.5)")
    p.add_argument("--k", type=int, default=5, help="results to keep (default 5)")
    p.add_argument("--out", default=None, help="write JSON here instead of stdout")
    p.set_defaults(func=_cmd_retrieve)

    p = sub.add_parser("extract", help="cut the visible foreground region")
    p.add_argument("--image", required=True, help="foreground image (PNG)")
    p.add_argument("--mask", required=True, help="segmentation mask (PNG)")
    p.add_argument("--depth", required=True, help="foreground depth (DMAP)")
    p.add_argument("--tau", type=float, default=0.05,
                   help="visibility threshold (default 0.05)")
    p.add_argument("--radius", type=int, default=2,
                   help="neighborhood radius (default 2)")
    p.add_argument("--no-cleanup", action="store_true",
                   help="keep all components instead of the largest")
    p.add_argument("--out-rgba", required=True, help="output RGBA cutout (PNG)")
    p.add_argument("--out-mask", required=True, help="output final mask (PNG)")
    p.set_defaults(func=_cmd_extract)

    p = sub.add_parser("place", help="pick the best paste window by depth")
    p.add_argument("--bg-depth", required=True, help="background depth (DMAP)")
    p.add_argument("--fg-depth", required=True, help="foreground depth (DMAP)")
    p.add_argument("--fg-mask", required=True, help="foreground mask (PNG)")
    p.add_argument("--alpha", type=float, default=1.0 / 3.0,
                   help="depth level weight")
    p.add_argument("--beta", type=float, default=1.0 / 3.0,
                   help="depth spread weight")
    p.add_argument("--gamma", type=float, default=1.0 / 3.0,
                   help="smoothness weight")
    p.add_argument("--stride", type=int, default=1, help="lattice stride")
    p.add_argument("--scales", type=_parse_scales, default=[1.0],
                   help="comma separated scale factors (default 1.0)")
    p.add_argument("--out-json", default=None,
                   help="write the placement here instead of stdout")
    p.add_argument("--heatmap", default=None,
                   help="also write the score grid as a grayscale PNG")
    p.set_defaults(func=_cmd_place)

    p = sub.add_parser("compose", help="paste a cutout into a background")
    p.add_argument("--background", required=True, help="background image (PNG)")
    p.add_argument("--fg-rgba", required=True, help="foreground cutout (PNG)")
    p.add_argument("--fg-mask", required=True, help="foreground mask (PNG)")
    p.add_argument("--x", type=int, required=True, help="window origin row")
    p.add_argument("--y", type=int, required=True, help="window origin column")
    p.add_argument("--scale", type=float, default=1.0, help="foreground scale")
    p.add_argument("--feather", type=int, default=0, help="feather radius")
    p.add_argument("--out", default=None,
                   help="output path (default: derived composite filename)")
    p.set_defaults(func=_cmd_compose)

    p = sub.add_parser("pipeline", help="run retrieval through compositing")
    p.add_argument("--config", required=True, help="pipeline config (JSON)")
    p.add_argument("--foregrounds", required=True, help="foreground manifest (JSON)")
    p.add_argument("--backgrounds", required=True, help="background pool (JSON)")
    p.set_defaults(func=_cmd_pipeline)

    p = sub.add_parser("mix", help="blend synthetic entries into a real manifest")
    p.add_argument("--real", required=True, help="real dataset manifest (JSON)")
    p.add_argument("--synthetic", required=True, help="synthetic manifest (JSON)")
    p.add_argument("--ratio", type=float, required=True,
                   help="synthetic fraction of the final set, in [0, 1)")
    p.add_argument("--seed", type=int, default=0, help="sampling seed")
    p.add_argument("--out", default=None, help="write JSON here instead of stdout")
    p.set_defaults(func=_cmd_mix)

    p = sub.add_parser("gen-synthetic", help="write seeded synthetic assets")
    p.add_argument("--seed", type=int, default=0, help="generator seed")
    p.add_argument("--count", type=int, required=True,
                   help="foregrounds and backgrounds to generate")
    p.add_argument("--dims", type=_parse_dims, default=(96, 96),
                   help="background dims as HxW (default 96x96)")
    p.add_argument("--planted-patch", action="store_true",
                   help="plant a known-best window in the first background")
    p.add_argument("--out", default="synthetic-assets", help="output directory")
    p.set_defaults(func=_cmd_gen_synthetic)

    p = sub.add_parser("bench-placement",
                       help="time the integral-table scorer against the naive loop")
    p.add_argument("--bg-size", type=int, default=512, help="background side")
    p.add_argument("--window", type=int, default=64, help="window side")
    p.add_argument("--stride", type=int, default=1, help="lattice stride")
    p.add_argument("--seed", type=int, default=0, help="instance seed")
    p.set_defaults(func=_cmd_bench_placement)

    return parser


def main(argv: list[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (DcpError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
