"""End-to-end command-line tests (run in-process via cli.main)."""

import json
import subprocess
import sys

import numpy as np
import pytest

from soleprint import cli, fileio
from soleprint.metric import best_match

from conftest import disk_mask, draw_lab_print, smooth_depth


def make_eval_dataset(base, n_shoes=3, h=24, w=20, corrupt=None):
    """Small manifest with depth, mask, and gt print files per shoe."""
    rng = np.random.default_rng(42)
    cats = ["used", "formal", "new-athletic"]
    entries = []
    for i in range(n_shoes):
        sid = f"s{i:02d}"
        depth = rng.random((h, w))
        mask = np.ones((h, w), dtype=bool)
        gt = depth < rng.uniform(0.3, 0.6)
        fileio.write_pfm(base / f"{sid}.pfm", depth)
        fileio.save_mask(base / f"{sid}_mask.png", mask)
        fileio.save_print(base / f"{sid}_gt.png", gt)
        entries.append(
            fileio.ManifestEntry(
                shoe_id=sid,
                category=cats[i % 3],
                mask_path=f"{sid}_mask.png",
                gt_print_path=f"{sid}_gt.png",
                depth_path=f"{sid}.pfm",
            )
        )
    if corrupt is not None:
        (base / f"s{corrupt:02d}.pfm").write_bytes(b"Pf\n4 4\n-1.0\nxx")
    fileio.write_manifest(base / "manifest.jsonl", entries)
    return entries


# ---------------------------------------------------------------------------
# eval

def test_eval_writes_report_and_table(tmp_path, capsys):
    make_eval_dataset(tmp_path)
    rc = cli.main(
        ["eval", "--manifest", str(tmp_path / "manifest.jsonl"),
         "--report", str(tmp_path / "report.csv")]
    )
    assert rc == 0
    out = capsys.readouterr().out
    assert "mIoU" in out and "Used" in out
    records, summary = fileio.read_report(tmp_path / "report.csv")
    assert len(records) == 3
    # spot-check one record against a direct call
    e = records[0]
    depth = fileio.read_pfm(tmp_path / "s00.pfm")
    mask = fileio.load_mask(tmp_path / "s00_mask.png")
    gt = fileio.load_print(tmp_path / "s00_gt.png") >= 0.5
    v, _, params = best_match(depth, gt, mask)
    assert e.iou == v
    assert (e.params.s, e.params.t_nc, e.params.t_c) == (params.s, params.t_nc, params.t_c)


def test_eval_bad_entry_reports_and_exits_1(tmp_path, capsys):
    make_eval_dataset(tmp_path, corrupt=1)
    rc = cli.main(
        ["eval", "--manifest", str(tmp_path / "manifest.jsonl"),
         "--report", str(tmp_path / "report.csv")]
    )
    assert rc == 1
    assert "s01" in capsys.readouterr().err
    records, _ = fileio.read_report(tmp_path / "report.csv")
    assert {r.shoe_id for r in records} == {"s00", "s02"}


def test_eval_missing_manifest_exits_1(tmp_path):
    rc = cli.main(
        ["eval", "--manifest", str(tmp_path / "nope.jsonl"),
         "--report", str(tmp_path / "r.csv")]
    )
    assert rc == 1


def test_eval_empty_manifest_exits_2(tmp_path):
    (tmp_path / "m.jsonl").write_text("")
    rc = cli.main(
        ["eval", "--manifest", str(tmp_path / "m.jsonl"),
         "--report", str(tmp_path / "r.csv")]
    )
    assert rc == 2


# ---------------------------------------------------------------------------
# synth

def synth_manifest(tmp_path, name="prints.jsonl"):
    img = draw_lab_print()
    fileio.save_image(tmp_path / "print_a.png", img)
    entries = [
        fileio.ManifestEntry("shoeA", "new-athletic", image_path="print_a.png")
    ]
    fileio.write_manifest(tmp_path / name, entries)
    return tmp_path / name


def test_synth_end_to_end(tmp_path):
    manifest = synth_manifest(tmp_path)
    out = tmp_path / "out"
    rc = cli.main(
        ["synth", "--manifest", str(manifest), "--out", str(out),
         "--seed", "3", "--variants", "10", "--lights", "2"]
    )
    assert rc == 0
    lights = json.loads((out / "lights.json").read_text())
    assert len(lights) == 17
    entries = fileio.load_manifest(out / "manifest.jsonl")
    assert len(entries) == 10 * 2
    assert len({e.shoe_id for e in entries}) == 20
    # every referenced file exists and loads
    depth = fileio.read_pfm(out / entries[0].depth_path)
    mask = fileio.load_mask(out / entries[0].mask_path)
    assert depth.shape == mask.shape
    assert 0.0 <= depth.min() and depth.max() <= 1.0


def test_synth_rejects_bad_variant_count(tmp_path, capsys):
    manifest = synth_manifest(tmp_path)
    rc = cli.main(
        ["synth", "--manifest", str(manifest), "--out", str(tmp_path / "o"),
         "--variants", "5"]
    )
    assert rc == 1  # per-entry failure: reported on stderr, synth continues
    assert "variant count" in capsys.readouterr().err


def test_synth_config_file(tmp_path):
    manifest = synth_manifest(tmp_path)
    cfg = tmp_path / "synth.cfg"
    cfg.write_text("ambient = 0.6  # dimmer\nblur_sigma = 1.5\n")
    out = tmp_path / "out"
    rc = cli.main(
        ["synth", "--manifest", str(manifest), "--out", str(out),
         "--variants", "10", "--config", str(cfg)]
    )
    assert rc == 0
    lights = json.loads((out / "lights.json").read_text())
    assert lights[0]["ambient"] == 0.6


def test_config_parser_rejects_garbage(tmp_path):
    cfg = tmp_path / "bad.cfg"
    cfg.write_text("this is not a config\n")
    with pytest.raises(ValueError):
        cli.load_config(cfg)


# ---------------------------------------------------------------------------
# predict-print

def test_predict_print_cli(tmp_path):
    rng = np.random.default_rng(5)
    depth = rng.random((20, 20))
    mask = np.ones((20, 20), dtype=bool)
    fileio.write_pfm(tmp_path / "d.pfm", depth)
    fileio.save_mask(tmp_path / "m.png", mask)
    rc = cli.main(
        ["predict-print", "--depth", str(tmp_path / "d.pfm"),
         "--mask", str(tmp_path / "m.png"), "--out", str(tmp_path / "p.png")]
    )
    assert rc == 0
    pred = fileio.load_print(tmp_path / "p.png") >= 0.5
    assert pred.any() and not pred.all()


# ---------------------------------------------------------------------------
# pseudo-albedo

def test_pseudo_albedo_cli(tmp_path):
    img = np.zeros((60, 40, 3))
    img[:30] = (0.8, 0.2, 0.2)
    img[30:] = (0.2, 0.2, 0.8)
    fileio.save_image(tmp_path / "photo.png", img)
    fileio.save_mask(tmp_path / "m.png", np.ones((60, 40), bool))
    rc = cli.main(
        ["pseudo-albedo", "--image", str(tmp_path / "photo.png"),
         "--mask", str(tmp_path / "m.png"), "--out", str(tmp_path / "a.png")]
    )
    assert rc == 0
    alb = fileio.load_image(tmp_path / "a.png")
    assert alb.shape == img.shape
    assert len(np.unique(alb.reshape(-1, 3), axis=0)) <= 4


# ---------------------------------------------------------------------------
# align-prints

def test_align_prints_cli(tmp_path):
    ref = np.ones((40, 40, 3)) * 0.5
    fileio.save_image(tmp_path / "tread.png", ref)
    ink = np.zeros((40, 40))
    ink[10:30, 10:30] = 1.0
    corr = "src_x,src_y,dst_x,dst_y\n"
    for x, y in [(0, 0), (39, 0), (0, 39), (39, 39), (20, 10)]:
        corr += f"{x},{y},{x},{y}\n"
    for i in range(2):
        fileio.save_print(tmp_path / f"ink{i}.png", ink)
        (tmp_path / f"corr{i}.csv").write_text(corr)
    rc = cli.main(
        ["align-prints", "--image", str(tmp_path / "tread.png"),
         "--prints", str(tmp_path / "ink0.png"), str(tmp_path / "ink1.png"),
         "--correspondences", str(tmp_path / "corr0.csv"), str(tmp_path / "corr1.csv"),
         "--out", str(tmp_path / "gt.png")]
    )
    assert rc == 0
    gt = fileio.load_print(tmp_path / "gt.png") >= 0.5
    assert gt[15:25, 15:25].all()
    assert not gt[0:5, 0:5].any()


def test_align_prints_mismatched_args_exit_2(tmp_path):
    fileio.save_image(tmp_path / "t.png", np.ones((10, 10, 3)))
    rc = cli.main(
        ["align-prints", "--image", str(tmp_path / "t.png"),
         "--prints", "a.png", "b.png", "--correspondences", "c.csv",
         "--out", str(tmp_path / "o.png")]
    )
    assert rc == 2


# ---------------------------------------------------------------------------
# tta

def test_tta_expand_then_merge(tmp_path):
    depth = smooth_depth(48, 36)
    img = np.repeat(depth[..., None], 3, axis=-1)
    mask = disk_mask(48, 36)
    fileio.save_image(tmp_path / "img.png", img)
    fileio.save_mask(tmp_path / "mask.png", mask)
    var_dir = tmp_path / "variants"
    rc = cli.main(
        ["tta", "expand", "--image", str(tmp_path / "img.png"),
         "--mask", str(tmp_path / "mask.png"), "--out", str(var_dir)]
    )
    assert rc == 0
    manifest = json.loads((var_dir / "manifest.json").read_text())
    assert len(manifest) == 23

    # identity "predictor": depth = variant image luminance
    for entry in manifest:
        v = fileio.load_image(var_dir / entry["image"])
        fileio.write_pfm(var_dir / entry["depth"], v[..., 0])
    fileio.write_pfm(tmp_path / "orig.pfm", depth)
    rc = cli.main(
        ["tta", "merge", "--dir", str(var_dir),
         "--original", str(tmp_path / "orig.pfm"),
         "--mask", str(tmp_path / "mask.png"),
         "--out", str(tmp_path / "merged.pfm")]
    )
    assert rc == 0
    merged = fileio.read_pfm(tmp_path / "merged.pfm")
    assert merged.shape == depth.shape
    assert np.abs(merged - depth)[mask].mean() < 0.02


# ---------------------------------------------------------------------------
# console entry point

def test_console_script_usage_error():
    proc = subprocess.run(
        [sys.executable, "-m", "soleprint.cli"], capture_output=True, text=True
    )
    assert proc.returncode == 2


def test_console_script_runs():
    proc = subprocess.run(
        ["soleprint", "--help"], capture_output=True, text=True
    )
    assert proc.returncode == 0
    assert "synth" in proc.stdout and "eval" in proc.stdout
