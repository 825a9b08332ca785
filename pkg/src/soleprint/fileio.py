"""File formats: PFM depth maps, PNG images/masks/prints, JSONL dataset
manifests, CSV evaluation reports, and palette JSON."""

from __future__ import annotations

import csv
import json
import os
from dataclasses import dataclass, asdict
from pathlib import Path
from typing import Optional

import numpy as np
from PIL import Image

from .errors import DataError
from .metric import CATEGORIES, EvalRecord, EvalSummary, MatchParams, aggregate

__all__ = [
    "read_pfm",
    "write_pfm",
    "load_image",
    "save_image",
    "load_gray",
    "load_mask",
    "save_mask",
    "load_print",
    "save_print",
    "ManifestEntry",
    "load_manifest",
    "write_manifest",
    "write_report",
    "read_report",
]


# ---------------------------------------------------------------------------
# PFM (portable float map), little-endian, scale -1.0, rows bottom-up

def read_pfm(path) -> np.ndarray:
    with open(path, "rb") as f:
        header = f.readline().strip()
        if header not in (b"Pf", b"PF"):
            raise DataError(f"{path}: not a PFM file")
        dims = f.readline().split()
        width, height = int(dims[0]), int(dims[1])
        scale = float(f.readline())
        channels = 3 if header == b"PF" else 1
        count = width * height * channels
        raw = f.read(count * 4)
        if len(raw) != count * 4:
            raise DataError(f"{path}: truncated PFM data")
        data = np.frombuffer(raw, dtype="<f4" if scale < 0 else ">f4")
    shape = (height, width) if channels == 1 else (height, width, 3)
    return np.flipud(data.reshape(shape)).astype(np.float64)


def write_pfm(path, img: np.ndarray) -> None:
    img = np.asarray(img)
    if img.ndim == 2:
        header = b"Pf"
    elif img.ndim == 3 and img.shape[2] == 3:
        header = b"PF"
    else:
        raise ValueError(f"PFM needs a 2-D or (h, w, 3) array, got shape {img.shape}")
    h, w = img.shape[:2]
    with open(path, "wb") as f:
        f.write(header + b"\n")
        f.write(f"{w} {h}\n".encode())
        f.write(b"-1.0\n")
        f.write(np.flipud(img).astype("<f4").tobytes())


# ---------------------------------------------------------------------------
# PNG images, masks, prints

def load_image(path) -> np.ndarray:
    """8-bit sRGB PNG to float RGB in [0, 1]."""
    with Image.open(path) as im:
        arr = np.asarray(im.convert("RGB"), dtype=np.float64)
    return np.clip(arr / 255.0, 0.0, 1.0)


def save_image(path, img: np.ndarray) -> None:
    arr = np.clip(np.asarray(img), 0.0, 1.0)
    Image.fromarray((arr * 255.0).round().astype(np.uint8)).save(path)


def load_gray(path) -> np.ndarray:
    with Image.open(path) as im:
        arr = np.asarray(im.convert("L"), dtype=np.float64)
    return arr / 255.0


def load_mask(path) -> np.ndarray:
    return load_gray(path) >= 0.5


def save_mask(path, mask: np.ndarray) -> None:
    Image.fromarray(np.where(np.asarray(mask, dtype=bool), 255, 0).astype(np.uint8)).save(path)


def load_print(path) -> np.ndarray:
    """Grayscale print PNG to ink intensity in [0, 1] (ink is dark on paper)."""
    return 1.0 - load_gray(path)


def save_print(path, ink: np.ndarray) -> None:
    if ink.dtype == bool:
        ink = ink.astype(np.float64)
    save_image(path, np.repeat((1.0 - np.clip(ink, 0, 1))[..., None], 3, axis=-1))


# ---------------------------------------------------------------------------
# JSONL dataset manifests

@dataclass
class ManifestEntry:
    shoe_id: str
    category: str
    image_path: str = ""
    mask_path: str = ""
    gt_print_path: Optional[str] = None
    depth_path: Optional[str] = None

    def __post_init__(self):
        if self.category not in CATEGORIES:
            raise DataError(f"unknown category {self.category!r} for shoe {self.shoe_id}")


def load_manifest(path, check_files: bool = True) -> list[ManifestEntry]:
    path = Path(path)
    entries: list[ManifestEntry] = []
    seen: set[str] = set()
    base = path.parent
    with open(path) as f:
        for line_no, line in enumerate(f, 1):
            line = line.strip()
            if not line:
                continue
            try:
                raw = json.loads(line)
            except json.JSONDecodeError as e:
                raise DataError(f"{path}:{line_no}: invalid JSON ({e})") from e
            entry = ManifestEntry(**raw)
            if entry.shoe_id in seen:
                raise DataError(f"{path}: duplicate shoe_id {entry.shoe_id!r}")
            seen.add(entry.shoe_id)
            if check_files:
                for attr in ("image_path", "mask_path", "gt_print_path", "depth_path"):
                    rel = getattr(entry, attr)
                    if rel and not (base / rel).exists():
                        raise DataError(f"{path}: missing file {rel} for {entry.shoe_id}")
            entries.append(entry)
    return entries


def write_manifest(path, entries: list[ManifestEntry]) -> None:
    with open(path, "w") as f:
        for e in entries:
            d = {k: v for k, v in asdict(e).items() if v not in (None, "")}
            f.write(json.dumps(d, sort_keys=True) + "\n")


# ---------------------------------------------------------------------------
# CSV evaluation reports

def _fmt(v) -> str:
    return "" if v is None else repr(float(v))


def write_report(path, records: list[EvalRecord], summary: EvalSummary) -> None:
    with open(path, "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(["shoe_id", "category", "iou", "s", "t_nc", "t_c"])
        for r in records:
            w.writerow(
                [r.shoe_id, r.category, repr(r.iou), _fmt(r.params.s),
                 _fmt(r.params.t_nc), _fmt(r.params.t_c)]
            )
        f.write("# category,mean_iou,count\n")
        for cat, mean in summary.category_means.items():
            f.write(f"# {cat},{mean!r},{summary.category_counts[cat]}\n")
        f.write(f"# overall,{summary.overall!r},{sum(summary.category_counts.values())}\n")


def read_report(path):
    records: list[EvalRecord] = []
    with open(path) as f:
        lines = [ln for ln in f if ln.strip() and not ln.startswith("#")]
    for row in csv.DictReader(lines):
        params = MatchParams(
            s=float(row["s"]) if row["s"] else None,
            t_nc=float(row["t_nc"]) if row["t_nc"] else None,
            t_c=float(row["t_c"]) if row["t_c"] else None,
        )
        records.append(
            EvalRecord(row["shoe_id"], row["category"], float(row["iou"]), params)
        )
    return records, aggregate(records)
