"""Generate documentation pages from the live codebase.

Keeps the wire-format and configuration pages in sync with the code::

    python -m screen_interventions.docsgen [repo_root]
"""

from __future__ import annotations

import sys
from dataclasses import MISSING, fields
from pathlib import Path
from typing import Iterable, List, Sequence, Tuple

from .config import KIND_KEYS, PIPELINE_KEYS, SCHEMA, InterventionConfig, PipelineConfig
from .core import OpKind, Z_FILL, Z_LABEL, Z_PATCH, Z_VEIL
from .net.protocol import (
    BYE_LAYOUT,
    FRAME_LAYOUT,
    HEADER_LAYOUT,
    HELLO_LAYOUT,
    OP_LAYOUT,
    OVERLAY_LAYOUT,
    STATS_LAYOUT,
    ByeCode,
    MsgType,
)


def _md_table(headers: List[str], rows: Iterable[Sequence[str]]) -> str:
    out = []
    out.append("| " + " | ".join(headers) + " |")
    out.append("| " + " | ".join(["---"] * len(headers)) + " |")
    for r in rows:
        out.append("| " + " | ".join(str(c) for c in r) + " |")
    return "\n".join(out) + "\n"


def _layout(rows: Sequence[Tuple[str, str]]) -> str:
    return _md_table(["field", "encoding"], [[f"`{name}`", enc] for name, enc in rows])


def protocol_markdown() -> str:
    md = []
    md.append("# Wire protocol\n")
    md.append("This page is **auto-generated** from `screen_interventions.net.protocol`.\n")
    md.append("All integers are little-endian.\n")
    md.append("## Header\n")
    md.append(_layout(HEADER_LAYOUT))
    md.append("## Message types\n")
    md.append(_md_table(["type", "value"], [[t.name, str(int(t))] for t in MsgType]))
    md.append("## FRAME\n")
    md.append(_layout(FRAME_LAYOUT))
    md.append("## OVERLAY\n")
    md.append(_layout(OVERLAY_LAYOUT))
    md.append("Every op record starts with `kind` (u8) and `z` (i16).\n")
    z = {OpKind.FILL_RECT: Z_FILL, OpKind.PATCH: Z_PATCH, OpKind.VEIL: Z_VEIL, OpKind.LABEL: Z_LABEL}
    for kind, rows in OP_LAYOUT.items():
        md.append(f"### {kind.name} (kind {int(kind)}, default z {z[kind]})\n")
        md.append(_layout(rows))
    md.append("## HELLO\n")
    md.append(_layout(HELLO_LAYOUT))
    md.append("## BYE\n")
    md.append(_layout(BYE_LAYOUT))
    md.append(_md_table(["code", "value"], [[c.name, str(int(c))] for c in ByeCode]))
    md.append("## STATS\n")
    md.append(_layout(STATS_LAYOUT))
    return "\n".join(md)


def _default_text(key: str) -> str:
    field = next(f for f in fields(InterventionConfig) if f.name == key)
    if field.default is MISSING or field.default is None:
        return "required" if key in ("masks", "lexicon") else "none"
    return f"`{field.default}`"


def config_markdown() -> str:
    pipeline = PipelineConfig()
    pipeline_defaults = {
        "schema": SCHEMA,
        "inpaint": pipeline.inpaint,
        "fmm_radius": pipeline.fmm_radius,
        "workers": pipeline.workers,
        "scales": "0.5:2.0:1.1",
        "score_threshold": pipeline.match.score_threshold,
        "nms_iou": pipeline.match.nms_iou,
        "refine_steps": pipeline.match.refine_steps,
        "strip_height": pipeline.scroll.strip_height,
        "search_window": pipeline.scroll.search_window,
        "min_score": pipeline.scroll.min_score,
        "scroll_history": pipeline.scroll.history,
    }
    md = []
    md.append("# Configuration schema\n")
    md.append("This page is **auto-generated** from `screen_interventions.config`.\n")
    md.append("## [pipeline]\n")
    md.append(_md_table(["key", "default"], [[f"`{k}`", f"`{pipeline_defaults[k]}`"] for k in PIPELINE_KEYS]))
    md.append("## [intervention.&lt;name&gt;]\n")
    md.append("Every section takes `kind` and `enabled` (default `true`).\n")
    for kind, keys in KIND_KEYS.items():
        md.append(f"### kind = {kind}\n")
        md.append(_md_table(["key", "default"], [[f"`{k}`", _default_text(k)] for k in keys]))
    return "\n".join(md)


def generate_all(repo_root: Path) -> List[Path]:
    """Write every generated page under ``repo_root/docs/_generated``.

    Args:
        repo_root: Repository root directory (contains the `docs/` folder).
    """
    out_dir = Path(repo_root) / "docs" / "_generated"
    out_dir.mkdir(parents=True, exist_ok=True)
    pages = {"protocol.md": protocol_markdown(), "config.md": config_markdown()}
    written = []
    for name, text in pages.items():
        path = out_dir / name
        path.write_text(text, encoding="utf-8")
        written.append(path)
    return written


if __name__ == "__main__":
    generate_all(Path(sys.argv[1]) if len(sys.argv) > 1 else Path.cwd())
