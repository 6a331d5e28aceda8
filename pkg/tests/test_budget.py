from __future__ import annotations

import pytest

from screen_interventions.core import LatencyRecord
from screen_interventions.net.budget import BudgetInput, latency_budget, latency_frame, latency_summary


def test_one_kib_frame_over_250_mbit():
    report = latency_budget(BudgetInput(250e6, 8192, (5.0,)))
    assert report.one_way_ms == pytest.approx(0.032768)
    assert report.total_ms == pytest.approx(5.065536)
    assert report.max_fps == 197
    assert report.max_models_at_target == 40
    assert report.max_models_strict == 39


def test_models_at_25_fps():
    report = latency_budget(BudgetInput(250e6, 8192, (5.0,), target_fps=25))
    assert report.max_models_at_target == 8
    assert report.max_models_strict == 7


def test_models_add_up():
    report = latency_budget(BudgetInput(1e9, 1e6, (10.0, 20.0, 30.0)))
    assert report.total_ms == pytest.approx(62.0)
    assert report.max_fps == 16
    assert report.max_models_at_target == 10


@pytest.mark.parametrize(
    "kwargs",
    [
        dict(bandwidth_bps=0, image_bits=8192, per_model_ms=(5.0,)),
        dict(bandwidth_bps=1e6, image_bits=-1, per_model_ms=(5.0,)),
        dict(bandwidth_bps=1e6, image_bits=8192, per_model_ms=()),
        dict(bandwidth_bps=1e6, image_bits=8192, per_model_ms=(0.0,)),
        dict(bandwidth_bps=float("inf"), image_bits=8192, per_model_ms=(5.0,)),
    ],
)
def test_invalid_budget_inputs(kwargs):
    with pytest.raises(ValueError):
        BudgetInput(**kwargs)


def test_latency_summary_in_milliseconds():
    records = [
        LatencyRecord(0, 0, 1000, 2000, {"text": 500}),
        LatencyRecord(1, 0, 3000, 4000, {"text": 1500}),
    ]
    df = latency_frame(records)
    assert list(df["total_us"]) == [2000, 4000]
    summary = latency_summary(records).set_index("metric")
    assert summary.loc["total", "mean_ms"] == pytest.approx(3.0)
    assert summary.loc["hook_text", "max_ms"] == pytest.approx(1.5)


def test_latency_summary_of_nothing():
    assert latency_summary([]).empty
