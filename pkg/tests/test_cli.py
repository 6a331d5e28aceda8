from __future__ import annotations

from pathlib import Path

import pandas as pd
import pytest

from screen_interventions.cli import EXIT_CONFIG, EXIT_INPUT, EXIT_OK, PLAN_COLUMNS, main

HEAD = "[pipeline]\nschema = screen-interventions/1\n"


def _manifest(tmp_path: Path) -> Path:
    path = tmp_path / "manifest.csv"
    path.write_text(
        "name,seed,layout,width,height,theme,chrome,kinds,shifts\n"
        "small_feed,5,feed,240,320,twitter,app,,30;30\n",
        encoding="utf-8",
    )
    return path


def _config(tmp_path: Path, masks_root: Path) -> Path:
    path = tmp_path / "cfg.ini"
    path.write_text(
        HEAD
        + "[intervention.lock]\nkind = usage_lock\ns0 = 0\ns1 = 2\nevent_px = 30\n"
        + f"[intervention.metrics]\nkind = demetrify\nmasks = {masks_root / 'demetrify'}\n",
        encoding="utf-8",
    )
    return path


def test_budget_report(capsys):
    code = main(["budget", "--bandwidth", "250e6", "--image-bits", "8192", "--model-ms", "5"])
    assert code == EXIT_OK
    out = capsys.readouterr().out.splitlines()
    assert out == ["one_way_ms: 0.033", "total_ms: 5.07", "max_fps: 197", "max_models: 40 at 5 fps (strict: 39)"]


def test_budget_rejects_zero_bandwidth(capsys):
    code = main(["budget", "--bandwidth", "0", "--image-bits", "8192", "--model-ms", "5"])
    assert code == EXIT_CONFIG
    assert "bandwidth_bps" in capsys.readouterr().err


@pytest.mark.parametrize(
    "argv",
    [
        ["budget", "--bandwidth", "abc", "--image-bits", "8192", "--model-ms", "5"],
        ["budget", "--bandwidth", "250e6", "--image-bits", "8192", "--model-ms", "fast"],
        ["budget", "--bandwidth", "250e6", "--image-bits", "8192"],
        ["serve", "--listen", "nowhere", "--config", "x.ini"],
    ],
)
def test_argument_errors_exit_with_config_code(argv, capsys):
    assert main(argv) == EXIT_CONFIG
    assert "error:" in capsys.readouterr().err


def test_help_exits_ok(capsys):
    assert main(["--help"]) == EXIT_OK
    assert "budget" in capsys.readouterr().out


def test_run_reports_unreadable_input(tmp_path):
    empty = tmp_path / "frames"
    empty.mkdir()
    assert main(["run", "--input", str(empty), "--config", "x.ini", "--out", str(tmp_path / "out")]) == EXIT_INPUT


def test_run_reports_bad_config(tmp_path):
    code = main(["run", "--input", str(_manifest(tmp_path)), "--config", str(tmp_path / "nope.ini"),
                 "--out", str(tmp_path / "out")])
    assert code == EXIT_CONFIG


def test_run_is_reproducible(tmp_path, masks_root, capsys):
    manifest, config = _manifest(tmp_path), _config(tmp_path, masks_root)
    outs = [tmp_path / "a", tmp_path / "b"]
    for out in outs:
        assert main(["run", "--input", str(manifest), "--config", str(config), "--out", str(out)]) == EXIT_OK
    assert "Wrote 3 frames" in capsys.readouterr().out

    a, b = (out / "small_feed" for out in outs)
    names = sorted(p.name for p in a.iterdir() if not p.name.startswith("latency"))
    assert names == sorted(p.name for p in b.iterdir() if not p.name.startswith("latency"))
    assert len([n for n in names if n.endswith(".png")]) == 3
    for name in names:
        assert (a / name).read_bytes() == (b / name).read_bytes()

    last = pd.read_csv(a / "frame_0002.plan.csv")
    assert list(last.columns) == PLAN_COLUMNS
    assert last["kind"].iloc[-1] == "VEIL"
    latency = pd.read_csv(a / "latency.csv")
    assert list(latency["frame_id"]) == [0, 1, 2]
    assert "hook_metrics_us" in latency.columns


def test_corpus_then_run_on_frames_dir(tmp_path, masks_root):
    out = tmp_path / "corpus"
    assert main(["corpus", "--manifest", str(_manifest(tmp_path)), "--out", str(out)]) == EXIT_OK
    assert sorted(p.name for p in (out / "small_feed").iterdir()) == [
        "frame_0000.png", "frame_0001.png", "frame_0002.png", "ground_truth.csv",
    ]
    assert (out / "masks" / "occlude" / "stories_bar.png").is_file()

    config = _config(tmp_path, masks_root)
    code = main(["run", "--input", str(out / "small_feed"), "--config", str(config), "--out", str(tmp_path / "run")])
    assert code == EXIT_OK
    assert (tmp_path / "run" / "frame_0002.png").is_file()


def test_serve_smoke(tmp_path, masks_root, capsys):
    code = main(["serve", "--listen", "127.0.0.1:0", "--config", str(_config(tmp_path, masks_root)),
                 "--run-seconds", "0"])
    assert code == EXIT_OK
    assert "stopped" in capsys.readouterr().out
