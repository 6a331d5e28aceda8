from __future__ import annotations

from pathlib import Path

import pytest

from screen_interventions.config import (
    InterventionConfig,
    PipelineConfig,
    build_session,
    load_config,
    parse_config,
    parse_scales,
    session_factory,
)
from screen_interventions.core import ConfigError
from screen_interventions.imaging.matching import DEFAULT_SCALES
from screen_interventions.net.protocol import Hello

CONFIGS = Path(__file__).resolve().parents[1] / "configs"
HEAD = "[pipeline]\nschema = screen-interventions/1\n"


def _config_text(masks_root: Path, lexicon: Path) -> str:
    return HEAD + f"""
[intervention.lock]
kind = usage_lock
s0 = 2
s1 = 4
event_px = 50

[intervention.stories]
kind = occlude_elements
masks = {masks_root / "occlude"}

[intervention.metrics]
kind = demetrify
masks = {masks_root / "demetrify"}
action = box
enabled = false

[intervention.hate]
kind = hate_filter
lexicon = {lexicon}
threshold = 0.7
action = label
label = HIDDEN

[intervention.media]
kind = moderate_media
detector = color_range:200,150,120-245,195,165
style = patch
"""


def test_shipped_config_parses():
    cfg = parse_config((CONFIGS / "five_interventions.ini").read_text(encoding="utf-8"), CONFIGS)
    assert [ic.name for ic in cfg.interventions] == [
        "usage_lock", "occlude_stories", "demetrify", "hate_filter", "moderate_media",
    ]
    assert cfg.match.scales == DEFAULT_SCALES
    assert cfg.interventions[1].masks == (CONFIGS / "masks" / "occlude").resolve()
    assert cfg.interventions[3].lexicon == (CONFIGS / "lexicon.txt").resolve()
    assert cfg.interventions[4].style == "patch"


def test_to_text_is_a_fixed_point(masks_root, lexicon_file):
    cfg = parse_config(_config_text(masks_root, lexicon_file))
    text = cfg.to_text()
    again = parse_config(text)
    assert again == cfg
    assert again.to_text() == text


def test_refine_steps_parsed():
    assert parse_config(HEAD).match.refine_steps == 2
    assert parse_config(HEAD + "refine_steps = 0\n").match.refine_steps == 0


def test_parse_scales():
    assert parse_scales("0.5:2.0:1.1") == DEFAULT_SCALES
    assert parse_scales("1.0, 1.5") == (1.0, 1.5)
    with pytest.raises(ConfigError):
        parse_scales("big")


@pytest.mark.parametrize(
    "text",
    [
        "[pipeline]\nschema = other/1\n",
        HEAD + "colour = red\n",
        HEAD + "[hooks]\nx = 1\n",
        HEAD + "workers = 0\n",
        HEAD + "inpaint = blur\n",
        HEAD + "scales = 2.0, 1.0\n",
        HEAD + "refine_steps = -1\n",
        HEAD + "[intervention.x]\nkind = teleport\n",
        HEAD + "[intervention.x]\nkind = demetrify\n",
        HEAD + "[intervention.x]\nkind = demetrify\nmasks = m\nthreshold = 0.5\n",
        HEAD + "[intervention.x]\nkind = hate_filter\nlexicon = l.txt\nthreshold = 0\n",
        HEAD + "[intervention.x]\nkind = hate_filter\nlexicon = l.txt\naction = shout\n",
        HEAD + "[intervention.x]\nkind = moderate_media\nstyle = blur\n",
        HEAD + "[intervention.x]\nkind = usage_lock\ns0 = 5\ns1 = 5\n",
        HEAD + "[intervention.a]\nkind = usage_lock\n[intervention.b]\nkind = usage_lock\n",
        HEAD + "[intervention.x]\nkind = usage_lock\ns0 = many\n",
        "no sections at all",
    ],
)
def test_invalid_configs(text):
    with pytest.raises(ConfigError):
        parse_config(text)


def test_duplicate_names_rejected():
    ic = InterventionConfig("same", "usage_lock")
    with pytest.raises(ConfigError):
        PipelineConfig(interventions=(ic, InterventionConfig("same", "moderate_media")))


def test_load_config_checks_paths(tmp_path):
    path = tmp_path / "cfg.ini"
    path.write_text(HEAD + "[intervention.x]\nkind = demetrify\nmasks = nowhere\n", encoding="utf-8")
    with pytest.raises(ConfigError):
        load_config(path)
    with pytest.raises(ConfigError):
        load_config(tmp_path / "missing.ini")


def test_build_session(tmp_path, masks_root, lexicon_file):
    path = tmp_path / "cfg.ini"
    path.write_text(_config_text(masks_root, lexicon_file), encoding="utf-8")
    cfg = load_config(path)
    session = build_session(cfg)
    assert [b.name for b in session.bindings] == ["stories", "metrics", "hate", "media"]
    assert [b.enabled for b in session.bindings] == [True, False, True, True]
    assert session.usage_lock is not None and session.usage_lock.state.event_px == 50

    only = build_session(cfg, ("hate",))
    assert [b.name for b in only.bindings] == ["hate"] and only.usage_lock is None
    with pytest.raises(ConfigError):
        build_session(cfg, ("nope",))


def test_session_factory_narrows_by_hello(masks_root, lexicon_file):
    factory = session_factory(parse_config(_config_text(masks_root, lexicon_file)))
    assert len(factory(Hello(360, 640)).bindings) == 4
    assert [b.name for b in factory(Hello(360, 640, 0, ("media", "lock"))).bindings] == ["media"]
