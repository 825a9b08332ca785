"""Command-line surface: dataset synthesis, evaluation, print prediction,
pseudo-albedo, print alignment, and TTA expand/merge.

Exit codes: 0 success, 1 data error, 2 usage error.
"""

from __future__ import annotations

import argparse
import json
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import fields
from pathlib import Path

import numpy as np

from . import fileio
from .albedo import compose_albedo, extract_palette, pseudo_albedo
from .errors import DataError, NumericalError
from .metric import EvalRecord, aggregate, best_match, predict_print
from .render import RenderParams, build_light_table, light_table_to_json, render
from .synthdepth import SynthDepthConfig, synth_variants
from .tps import Correspondences, average_and_threshold, fit_tps, warp_image
from .transforms import TransformSpec
from .tta import make_variants, merge_predictions

CATEGORY_TITLES = {"new-athletic": "New-Athletic", "formal": "Formal", "used": "Used"}


def load_config(path) -> dict:
    """Flat key = value config file; '#' starts a comment."""
    cfg: dict[str, float] = {}
    for line_no, raw in enumerate(open(path), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"{path}:{line_no}: expected key = value")
        key, val = (part.strip() for part in line.split("=", 1))
        cfg[key] = float(val)
    return cfg


def _synth_config(cfg: dict) -> SynthDepthConfig:
    names = {f.name for f in fields(SynthDepthConfig)}
    return SynthDepthConfig(**{k: v for k, v in cfg.items() if k in names})


def _render_params(cfg: dict) -> RenderParams:
    names = {f.name for f in fields(RenderParams)}
    picked = {k: v for k, v in cfg.items() if k in names}
    if "ao_window" in picked:
        picked["ao_window"] = int(picked["ao_window"])
    return RenderParams(**picked)


def _normalized(depth: np.ndarray, mask: np.ndarray) -> np.ndarray:
    inside = depth[mask]
    lo, hi = inside.min(), inside.max()
    if hi > lo:
        return (depth - lo) / (hi - lo)
    return depth - lo


def format_table(summary) -> str:
    cats = [c for c in CATEGORY_TITLES if c in summary.category_means]
    header = ["Category"] + [CATEGORY_TITLES[c] for c in cats] + ["mIoU"]
    means = ["mean IoU"] + [f"{summary.category_means[c] * 100:.1f}" for c in cats]
    means.append(f"{summary.overall * 100:.1f}")
    counts = ["count"] + [str(summary.category_counts[c]) for c in cats]
    counts.append(str(sum(summary.category_counts.values())))
    widths = [max(len(r[i]) for r in (header, means, counts)) for i in range(len(header))]
    lines = [
        "  ".join(cell.ljust(w) for cell, w in zip(row, widths)).rstrip()
        for row in (header, means, counts)
    ]
    return "\n".join(lines)


# ---------------------------------------------------------------------------
# synth

def cmd_synth(args) -> int:
    entries = fileio.load_manifest(args.manifest)
    if not entries:
        print("no entries", file=sys.stderr)
        return 2
    cfg = load_config(args.config) if args.config else {}
    base_cfg = _synth_config(cfg)
    render_params = _render_params(cfg)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    lights = build_light_table(ambient=cfg.get("ambient", 0.75))
    (out / "lights.json").write_text(light_table_to_json(lights))

    manifest_entries = []
    failures = 0
    base = Path(args.manifest).parent
    for entry in entries:
        try:
            img = fileio.load_image(base / entry.image_path)
            variants = synth_variants(img, args.variants, args.seed)
            mask = variants[0][1]
            palette = extract_palette(img, mask, bandwidth=cfg.get("palette_bandwidth", 0.08))
            shoe_dir = out / entry.shoe_id
            shoe_dir.mkdir(exist_ok=True)
            mask_rel = f"{entry.shoe_id}/mask.png"
            fileio.save_mask(out / mask_rel, mask)
            rng = np.random.default_rng(args.seed)
            for vi, (depth, _) in enumerate(variants):
                depth_rel = f"{entry.shoe_id}/depth_{vi:02d}.pfm"
                fileio.write_pfm(out / depth_rel, depth)
                alb = compose_albedo(depth, mask, palette, seed=args.seed + vi)
                fileio.save_image(shoe_dir / f"albedo_{vi:02d}.png", alb.rgb)
                for li in sorted(rng.choice(17, size=args.lights, replace=False)):
                    shaded = render(depth, alb.rgb, lights[li], mask, render_params)
                    rel = f"{entry.shoe_id}/render_{vi:02d}_light{li:02d}.png"
                    fileio.save_image(out / rel, shaded)
                    manifest_entries.append(
                        fileio.ManifestEntry(
                            shoe_id=f"{entry.shoe_id}_v{vi:02d}_l{li:02d}",
                            category=entry.category,
                            image_path=rel,
                            mask_path=mask_rel,
                            depth_path=depth_rel,
                        )
                    )
        except (DataError, OSError, ValueError) as e:
            print(f"error: {entry.shoe_id}: {e}", file=sys.stderr)
            failures += 1
    fileio.write_manifest(out / "manifest.jsonl", manifest_entries)
    return 1 if failures else 0


# ---------------------------------------------------------------------------
# eval

def _eval_entry(entry, base: Path, window: int, normalize: bool):
    depth = fileio.read_pfm(base / entry.depth_path)
    mask = fileio.load_mask(base / entry.mask_path)
    gt = fileio.load_print(base / entry.gt_print_path) >= 0.5
    if normalize:
        depth = _normalized(depth, mask)
    value, _, params = best_match(depth, gt, mask, window=window)
    return EvalRecord(entry.shoe_id, entry.category, value, params)


def cmd_eval(args) -> int:
    entries = fileio.load_manifest(args.manifest)
    if not entries:
        print("no entries", file=sys.stderr)
        return 2
    base = Path(args.manifest).parent
    results: dict[str, EvalRecord] = {}
    errors: list[str] = []

    def run(entry):
        if not entry.depth_path or not entry.gt_print_path:
            raise DataError("entry missing depth_path or gt_print_path")
        return _eval_entry(entry, base, args.window, args.normalize)

    with ThreadPoolExecutor(max_workers=args.threads) as pool:
        futures = {e.shoe_id: pool.submit(run, e) for e in entries}
        for e in entries:
            try:
                results[e.shoe_id] = futures[e.shoe_id].result()
            except (DataError, OSError, ValueError) as exc:
                errors.append(f"{e.shoe_id}: {exc}")

    records = [results[e.shoe_id] for e in entries if e.shoe_id in results]
    for msg in errors:
        print(f"error: {msg}", file=sys.stderr)
    if not records:
        print("no evaluable entries", file=sys.stderr)
        return 1
    summary = aggregate(records)
    fileio.write_report(args.report, records, summary)
    print(format_table(summary))
    return 1 if errors else 0


# ---------------------------------------------------------------------------
# small wrappers

def cmd_predict_print(args) -> int:
    depth = fileio.read_pfm(args.depth)
    mask = fileio.load_mask(args.mask)
    if args.normalize:
        depth = _normalized(depth, mask)
    pred = predict_print(depth, mask, window=args.window)
    fileio.save_print(args.out, pred)
    return 0


def cmd_pseudo_albedo(args) -> int:
    cfg = load_config(args.config) if args.config else {}
    img = fileio.load_image(args.image)
    mask = fileio.load_mask(args.mask)
    result = pseudo_albedo(
        img,
        mask,
        bandwidth=cfg.get("pseudo_bandwidth", 10.0),
        l_scale=cfg.get("l_scale", 0.15),
        min_segment=int(cfg.get("min_segment", 20)),
        merge_tol=cfg.get("merge_tol", 8.0),
    )
    fileio.save_image(args.out, result.rgb)
    return 0


def cmd_align_prints(args) -> int:
    if len(args.prints) != len(args.correspondences):
        raise ValueError("need one correspondence CSV per print")
    ref = fileio.load_image(args.image)
    out_size = ref.shape[:2]
    aligned = []
    for print_path, csv_path in zip(args.prints, args.correspondences):
        ink = fileio.load_print(print_path)
        warp = fit_tps(Correspondences.from_csv(csv_path), smoothness=args.smoothness)
        aligned.append(warp_image(ink, warp, out_size))
    gt = average_and_threshold(aligned, threshold=args.threshold)
    fileio.save_print(args.out, gt)
    return 0


# ---------------------------------------------------------------------------
# tta

def cmd_tta_expand(args) -> int:
    img = fileio.load_image(args.image)
    mask = fileio.load_mask(args.mask)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    manifest = []
    for i, (variant, vmask, spec) in enumerate(make_variants(img, mask)):
        img_name = f"variant_{i:02d}.png"
        mask_name = f"mask_{i:02d}.png"
        fileio.save_image(out / img_name, variant)
        fileio.save_mask(out / mask_name, vmask)
        manifest.append(
            {"image": img_name, "mask": mask_name, "depth": f"variant_{i:02d}.pfm",
             "spec": spec.to_json()}
        )
    (out / "manifest.json").write_text(json.dumps(manifest, indent=2))
    return 0


def cmd_tta_merge(args) -> int:
    out_dir = Path(args.dir)
    manifest = json.loads((out_dir / "manifest.json").read_text())
    original = fileio.read_pfm(args.original)
    mask = fileio.load_mask(args.mask)
    variant_depths = [
        (fileio.read_pfm(out_dir / entry["depth"]), TransformSpec.from_json(entry["spec"]))
        for entry in manifest
    ]
    merged = merge_predictions(original, variant_depths, mask)
    fileio.write_pfm(args.out, merged)
    return 0


# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="soleprint")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", help="generate a synthetic dataset from lab prints")
    p.add_argument("--manifest", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--variants", type=int, default=10)
    p.add_argument("--lights", type=int, default=1, help="light configs sampled per variant")
    p.add_argument("--config")
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("eval", help="best-match IoU evaluation over a manifest")
    p.add_argument("--manifest", required=True)
    p.add_argument("--report", required=True)
    p.add_argument("--normalize", action="store_true")
    p.add_argument("--window", type=int, default=45)
    p.add_argument("--threads", type=int, default=None)
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("predict-print", help="generic-threshold print prediction")
    p.add_argument("--depth", required=True)
    p.add_argument("--mask", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--normalize", action="store_true")
    p.add_argument("--window", type=int, default=45)
    p.set_defaults(func=cmd_predict_print)

    p = sub.add_parser("pseudo-albedo", help="piecewise-constant albedo from a photo")
    p.add_argument("--image", required=True)
    p.add_argument("--mask", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--config")
    p.set_defaults(func=cmd_pseudo_albedo)

    p = sub.add_parser("align-prints", help="TPS-align ink prints and threshold their mean")
    p.add_argument("--image", required=True, help="tread photo defining the output frame")
    p.add_argument("--prints", nargs="+", required=True)
    p.add_argument("--correspondences", nargs="+", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--smoothness", type=float, default=0.5)
    p.add_argument("--threshold", type=float, default=0.5)
    p.set_defaults(func=cmd_align_prints)

    p = sub.add_parser("tta", help="test-time augmentation plumbing")
    tta_sub = p.add_subparsers(dest="tta_command", required=True)
    pe = tta_sub.add_parser("expand", help="write the 23 variants + manifest")
    pe.add_argument("--image", required=True)
    pe.add_argument("--mask", required=True)
    pe.add_argument("--out", required=True)
    pe.set_defaults(func=cmd_tta_expand)
    pm = tta_sub.add_parser("merge", help="merge 24 predicted depth maps")
    pm.add_argument("--dir", required=True)
    pm.add_argument("--original", required=True)
    pm.add_argument("--mask", required=True)
    pm.add_argument("--out", required=True)
    pm.set_defaults(func=cmd_tta_merge)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (DataError, NumericalError, OSError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 1
    except ValueError as e:
        print(f"usage error: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
