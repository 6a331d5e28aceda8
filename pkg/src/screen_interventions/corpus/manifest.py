"""Corpus manifests, PNG frame I/O and ground-truth sidecars.

A manifest is a CSV with one row per screen::

    name,seed,layout,width,height,theme,chrome,kinds,shifts
    feed_twitter,11,feed,360,640,twitter,app,,40;40;-12

``kinds`` (``;``-separated element kinds, blank for all) restricts what is
planted; ``shifts`` turns the row into a scroll sequence. Each row is written
to ``<out>/<name>/frame_0000.png ...`` with ``ground_truth.csv`` describing
the first frame.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, List, Sequence, Tuple

import numpy as np
import pandas as pd
from PIL import Image

from ..core import Frame, PixelFormat, Region
from .elements import ElementKind, element_mask
from .generate import (
    FRAME_INTERVAL_US,
    GroundTruth,
    GroundTruthEntry,
    Layout,
    ScreenSpec,
    generate_scroll_sequence,
    generate_screen,
    random_spec,
)

logger = logging.getLogger(__name__)

MANIFEST_COLUMNS = ["name", "seed", "layout", "width", "height", "theme", "chrome", "kinds", "shifts"]
GROUND_TRUTH_COLUMNS = [
    "kind", "x", "y", "w", "h", "transcript", "colors", "text_x", "text_y", "text_w", "text_h",
]
FRAME_PATTERN = "frame_{:04d}.png"
GROUND_TRUTH_NAME = "ground_truth.csv"
# Mask sub-directories written by write_masks, keyed by intervention.
MASK_SETS: Dict[str, Tuple[ElementKind, ...]] = {
    "occlude": (ElementKind.STORIES_BAR,),
    "demetrify": (ElementKind.METRICS_BAR, ElementKind.BADGE),
}


@dataclass(frozen=True)
class ManifestEntry:
    name: str
    spec: ScreenSpec
    shifts: Tuple[int, ...] = ()
    kinds: Tuple[ElementKind, ...] = ()


def _split(value: str) -> List[str]:
    return [v.strip() for v in str(value).split(";") if v.strip()]


def load_manifest(path: str | Path) -> List[ManifestEntry]:
    """Parse a manifest CSV and lay out every screen with :func:`random_spec`."""
    df = pd.read_csv(path, dtype=str, keep_default_na=False)
    missing = [c for c in ("name", "seed", "layout") if c not in df.columns]
    if missing:
        raise ValueError(f"Manifest {path} lacks columns {missing}.")
    entries = []
    names = set()
    for row in df.to_dict("records"):
        name = row["name"].strip()
        if not name or name in names:
            raise ValueError(f"Manifest names must be unique and non-empty, got {name!r}.")
        names.add(name)
        kinds = tuple(ElementKind(k) for k in _split(row.get("kinds", "")))
        spec = random_spec(
            int(row["seed"]),
            Layout(row["layout"].strip()),
            width=int(row.get("width") or 360),
            height=int(row.get("height") or 640),
            theme=row.get("theme") or "twitter",
            chrome=row.get("chrome") or "app",
            kinds=kinds or None,
        )
        shifts = tuple(int(s) for s in _split(row.get("shifts", "")))
        entries.append(ManifestEntry(name, spec, shifts, kinds))
    return entries


def write_manifest(entries: Sequence[ManifestEntry], path: str | Path) -> Path:
    rows = [
        {
            "name": e.name,
            "seed": e.spec.seed,
            "layout": e.spec.layout.value,
            "width": e.spec.width,
            "height": e.spec.height,
            "theme": e.spec.theme,
            "chrome": e.spec.chrome,
            "kinds": ";".join(k.value for k in e.kinds),
            "shifts": ";".join(str(s) for s in e.shifts),
        }
        for e in entries
    ]
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    pd.DataFrame(rows, columns=MANIFEST_COLUMNS).to_csv(path, index=False)
    return path


def save_png(frame: Frame, path: str | Path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    px = frame.pixels()
    if frame.pixel_format is PixelFormat.GRAY8:
        px = px[..., 0]
    Image.fromarray(np.ascontiguousarray(px)).save(path, format="PNG")
    return path


def load_png(path: str | Path, frame_id: int = 0, timestamp_us: int = 0) -> Frame:
    with Image.open(path) as img:
        if img.mode == "L":
            px = np.asarray(img, dtype=np.uint8)
        else:
            px = np.asarray(img.convert("RGBA"), dtype=np.uint8)
    return Frame.from_array(px, frame_id, timestamp_us)


def frame_paths(directory: str | Path) -> List[Path]:
    """PNG files of a frames directory, in filename order."""
    directory = Path(directory)
    if not directory.is_dir():
        raise FileNotFoundError(f"Frames directory {directory} does not exist.")
    return sorted(p for p in directory.iterdir() if p.suffix.lower() == ".png")


def load_frames(directory: str | Path) -> List[Frame]:
    """Frames of a directory with ids in filename order and a 30 fps clock."""
    paths = frame_paths(directory)
    if not paths:
        raise FileNotFoundError(f"No PNG frames in {directory}.")
    return [load_png(p, i, i * FRAME_INTERVAL_US) for i, p in enumerate(paths)]


def _color_text(colors: Sequence[Tuple[int, int, int]]) -> str:
    return ";".join(",".join(str(int(c)) for c in rgb) for rgb in colors)


def ground_truth_frame(truth: GroundTruth) -> pd.DataFrame:
    rows = []
    for e in truth.entries:
        t = e.text_rect
        rows.append(
            {
                "kind": e.kind.value,
                "x": e.rect.x,
                "y": e.rect.y,
                "w": e.rect.w,
                "h": e.rect.h,
                "transcript": e.transcript,
                "colors": _color_text(e.colors),
                "text_x": t.x if t else "",
                "text_y": t.y if t else "",
                "text_w": t.w if t else "",
                "text_h": t.h if t else "",
            }
        )
    return pd.DataFrame(rows, columns=GROUND_TRUTH_COLUMNS)


def write_ground_truth(truth: GroundTruth, path: str | Path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    ground_truth_frame(truth).to_csv(path, index=False)
    return path


def read_ground_truth(path: str | Path) -> GroundTruth:
    df = pd.read_csv(path, dtype=str, keep_default_na=False)
    entries = []
    for row in df.to_dict("records"):
        colors = tuple(
            tuple(int(c) for c in rgb.split(",")) for rgb in _split(row["colors"])
        )
        text_rect = None
        if row["text_x"] != "":
            text_rect = Region(*(int(row[k]) for k in ("text_x", "text_y", "text_w", "text_h")))
        entries.append(
            GroundTruthEntry(
                ElementKind(row["kind"]),
                Region(*(int(row[k]) for k in ("x", "y", "w", "h"))),
                row["transcript"],
                colors,
                text_rect,
            )
        )
    return GroundTruth(tuple(entries))


def write_entry(entry: ManifestEntry, out_dir: str | Path) -> List[Path]:
    """Render one manifest row; returns the frame paths written."""
    target = Path(out_dir) / entry.name
    _, truth = generate_screen(entry.spec)
    frames = generate_scroll_sequence(entry.spec, entry.shifts)
    paths = [save_png(f, target / FRAME_PATTERN.format(i)) for i, f in enumerate(frames)]
    write_ground_truth(truth, target / GROUND_TRUTH_NAME)
    logger.info("Rendered %s: %d frames, %d planted elements", entry.name, len(paths), len(truth))
    return paths


def write_corpus(entries: Sequence[ManifestEntry], out_dir: str | Path) -> List[Path]:
    """Render every manifest row under ``out_dir``; returns all frame paths."""
    paths: List[Path] = []
    for entry in entries:
        paths.extend(write_entry(entry, out_dir))
    return paths


def write_masks(out_dir: str | Path, theme: str = "twitter") -> Dict[str, Path]:
    """Base-size element renders as mask directories, one per intervention."""
    out = Path(out_dir)
    written: Dict[str, Path] = {}
    for group, kinds in MASK_SETS.items():
        for kind in kinds:
            px = element_mask(kind, theme)
            path = out / group / f"{kind.value}.png"
            save_png(Frame.from_array(px), path)
            written[f"{group}/{kind.value}"] = path
    return written
