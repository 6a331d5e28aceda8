"""Latency budget model and measured latency reports.

Theoretical budget of one frame round trip::

    one_way_ms = image_bits / bandwidth_bps * 1000
    total_ms   = 2 * one_way_ms + sum(per_model_ms)
    max_fps    = floor(1000 / total_ms)

Model capacity at a target frame rate is the frame interval divided by the
cost of one model (``max_models_at_target``). ``max_models_strict`` also
charges the round-trip transport to every model, which is the conservative
reading.

With 1 KiB frames (8192 bits) over 250 Mbit/s and one 5 ms model, one-way
transport is 0.033 ms, the round trip 5.07 ms, 197 fps at most, and 40
models fit in a 5 fps budget, 8 in a 25 fps one.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from statistics import fmean
from typing import Dict, Sequence, Tuple

import pandas as pd

from ..core import LatencyRecord


@dataclass(frozen=True)
class BudgetInput:
    bandwidth_bps: float
    image_bits: float
    per_model_ms: Tuple[float, ...]
    target_fps: float = 5.0

    def __post_init__(self) -> None:
        object.__setattr__(self, "per_model_ms", tuple(float(m) for m in self.per_model_ms))
        for name in ("bandwidth_bps", "image_bits", "target_fps"):
            value = getattr(self, name)
            if not (isinstance(value, (int, float)) and math.isfinite(value) and value > 0):
                raise ValueError(f"{name} must be a positive number, got {value!r}.")
        if not self.per_model_ms:
            raise ValueError("per_model_ms needs at least one model.")
        if any(not math.isfinite(m) or m <= 0 for m in self.per_model_ms):
            raise ValueError(f"per_model_ms entries must be positive, got {self.per_model_ms}.")


@dataclass(frozen=True)
class BudgetReport:
    one_way_ms: float
    total_ms: float
    max_fps: int
    max_models_at_target: int
    max_models_strict: int
    target_fps: float

    def as_row(self) -> Dict[str, float]:
        return asdict(self)


def latency_budget(inp: BudgetInput) -> BudgetReport:
    one_way = inp.image_bits / inp.bandwidth_bps * 1000.0
    total = 2.0 * one_way + sum(inp.per_model_ms)
    frame_ms = 1000.0 / inp.target_fps
    mean_model = fmean(inp.per_model_ms)
    return BudgetReport(
        one_way_ms=one_way,
        total_ms=total,
        max_fps=int(math.floor(1000.0 / total)),
        max_models_at_target=int(math.floor(frame_ms / mean_model)),
        max_models_strict=int(math.floor(frame_ms / (2.0 * one_way + mean_model))),
        target_fps=inp.target_fps,
    )


def latency_frame(records: Sequence[LatencyRecord]) -> pd.DataFrame:
    """One row per frame: timestamps, total and per-hook microseconds."""
    return pd.DataFrame([r.as_row() for r in records])


def latency_summary(records: Sequence[LatencyRecord]) -> pd.DataFrame:
    """Mean, median and max of every timing column, in milliseconds."""
    df = latency_frame(records)
    cols = ["total_us"] + [c for c in df.columns if c.startswith("hook_")]
    if df.empty:
        return pd.DataFrame(columns=["metric", "mean_ms", "median_ms", "max_ms"])
    timings = df[cols].astype(float) / 1000.0
    out = pd.DataFrame(
        {
            "metric": [c.removesuffix("_us") for c in cols],
            "mean_ms": timings.mean().to_numpy(),
            "median_ms": timings.median().to_numpy(),
            "max_ms": timings.max().to_numpy(),
        }
    )
    return out
