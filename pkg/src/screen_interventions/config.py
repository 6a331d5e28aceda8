"""Pipeline configuration files.

Sectioned key/value text (INI dialect)::

    [pipeline]
    schema = screen-interventions/1
    inpaint = majority
    scales = 0.5:2.0:1.1
    refine_steps = 2

    [intervention.no_stories]
    kind = occlude_elements
    masks = masks/occlude

Interventions run in section order. Relative paths resolve against the
directory of the config file and must exist when the file is loaded.
"""

from __future__ import annotations

import configparser
import io
import logging
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Callable, Dict, List, Optional, Tuple

from .core import ConfigError
from .hooks.binding import HookBinding
from .hooks.model import resolve_model
from .imaging.matching import DEFAULT_SCALES, MatchConfig, scale_ladder
from .imaging.scroll import ScrollConfig
from .interventions.actions import ACTIONS, INPAINT_METHODS, inpaint_action, make_action
from .interventions.elements import demetrify, occlude_elements
from .interventions.hate import Lexicon, hate_filter
from .interventions.media import MediaStyle, moderate_media
from .interventions.usage_lock import UsageLock, UsageLockState
from .net.protocol import Hello
from .pipeline import Session

logger = logging.getLogger(__name__)

SCHEMA = "screen-interventions/1"
SECTION_PREFIX = "intervention."
KINDS = ("occlude_elements", "demetrify", "hate_filter", "moderate_media", "usage_lock")

PIPELINE_KEYS = (
    "schema", "inpaint", "fmm_radius", "workers", "scales", "score_threshold", "nms_iou", "refine_steps",
    "strip_height", "search_window", "min_score", "scroll_history",
)
# Keys each intervention kind accepts besides ``kind`` and ``enabled``.
KIND_KEYS: Dict[str, Tuple[str, ...]] = {
    "occlude_elements": ("masks", "action", "label", "allow_fullscreen"),
    "demetrify": ("masks", "action", "label", "allow_fullscreen"),
    "hate_filter": ("lexicon", "threshold", "action", "label"),
    "moderate_media": ("detector", "style"),
    "usage_lock": ("s0", "s1", "max_alpha", "event_px", "time_limit_s"),
}


@dataclass(frozen=True)
class InterventionConfig:
    """One ``[intervention.<name>]`` section; ``action=None`` keeps the intervention's default."""

    name: str
    kind: str
    masks: Optional[Path] = None
    lexicon: Optional[Path] = None
    threshold: float = 0.5
    detector: str = "skin"
    style: str = "box"
    action: Optional[str] = None
    label: str = "WARNING"
    allow_fullscreen: bool = False
    s0: int = 10
    s1: int = 30
    max_alpha: float = 0.9
    event_px: int = 0
    time_limit_s: Optional[float] = None
    enabled: bool = True

    def __post_init__(self) -> None:
        if not self.name:
            raise ConfigError("Intervention sections need a name: [intervention.<name>].")
        if self.kind not in KINDS:
            raise ConfigError(f"[{self.section}] unknown kind {self.kind!r}; expected one of {KINDS}.")
        if self.kind in ("occlude_elements", "demetrify") and self.masks is None:
            raise ConfigError(f"[{self.section}] needs 'masks'.")
        if self.kind == "hate_filter":
            if self.lexicon is None:
                raise ConfigError(f"[{self.section}] needs 'lexicon'.")
            if not 0.0 < self.threshold <= 1.0:
                raise ConfigError(f"[{self.section}] threshold must lie in (0, 1], got {self.threshold}.")
        if self.action is not None and self.action not in ACTIONS:
            raise ConfigError(f"[{self.section}] unknown action {self.action!r}; expected one of {ACTIONS}.")
        try:
            MediaStyle(self.style)
            self.usage_state()
        except ValueError as exc:
            raise ConfigError(f"[{self.section}] {exc}") from exc

    @property
    def section(self) -> str:
        return SECTION_PREFIX + self.name

    def usage_state(self) -> UsageLockState:
        return UsageLockState(self.s0, self.s1, self.max_alpha, self.event_px, self.time_limit_s)


@dataclass(frozen=True)
class PipelineConfig:
    inpaint: str = "majority"
    fmm_radius: int = 5
    workers: int = 1
    match: MatchConfig = MatchConfig()
    scroll: ScrollConfig = ScrollConfig()
    interventions: Tuple[InterventionConfig, ...] = field(default_factory=tuple)

    def __post_init__(self) -> None:
        object.__setattr__(self, "interventions", tuple(self.interventions))
        if self.inpaint not in INPAINT_METHODS:
            raise ConfigError(f"inpaint must be one of {INPAINT_METHODS}, got {self.inpaint!r}.")
        if self.fmm_radius < 1:
            raise ConfigError(f"fmm_radius must be at least 1, got {self.fmm_radius}.")
        if self.workers < 1:
            raise ConfigError(f"workers must be at least 1, got {self.workers}.")
        names = [ic.name for ic in self.interventions]
        if len(set(names)) != len(names):
            raise ConfigError(f"Intervention names must be unique, got {names}.")
        if sum(ic.kind == "usage_lock" for ic in self.interventions) > 1:
            raise ConfigError("At most one usage_lock intervention per pipeline.")

    def to_text(self) -> str:
        """Normalised config text; loading it gives back an equal config."""
        cp = configparser.ConfigParser(interpolation=None)
        cp["pipeline"] = {
            "schema": SCHEMA,
            "inpaint": self.inpaint,
            "fmm_radius": str(self.fmm_radius),
            "workers": str(self.workers),
            "scales": ", ".join(repr(s) for s in self.match.scales),
            "score_threshold": repr(self.match.score_threshold),
            "nms_iou": repr(self.match.nms_iou),
            "refine_steps": str(self.match.refine_steps),
            "strip_height": str(self.scroll.strip_height),
            "search_window": str(self.scroll.search_window),
            "min_score": repr(self.scroll.min_score),
            "scroll_history": str(self.scroll.history),
        }
        for ic in self.interventions:
            section = {"kind": ic.kind}
            for key in KIND_KEYS[ic.kind]:
                value = getattr(ic, key)
                if value is None:
                    continue
                if isinstance(value, bool):
                    section[key] = "true" if value else "false"
                elif isinstance(value, float):
                    section[key] = repr(value)
                else:
                    section[key] = str(value)
            section["enabled"] = "true" if ic.enabled else "false"
            cp[ic.section] = section
        buf = io.StringIO()
        cp.write(buf)
        return buf.getvalue()


def parse_scales(text: str) -> Tuple[float, ...]:
    """``start:stop:factor`` ladder or a comma-separated list."""
    text = text.strip()
    try:
        if ":" in text:
            start, stop, factor = (float(v) for v in text.split(":"))
            return scale_ladder(start, stop, factor)
        return tuple(float(v) for v in text.split(",") if v.strip())
    except ValueError as exc:
        raise ConfigError(f"Bad scales {text!r}: {exc}") from exc


def _path(base: Path, value: str) -> Path:
    p = Path(value).expanduser()
    return p if p.is_absolute() else (base / p).resolve()


def _intervention(name: str, sec: configparser.SectionProxy, base: Path) -> InterventionConfig:
    kind = sec.get("kind", "")
    if kind not in KIND_KEYS:
        raise ConfigError(f"[{SECTION_PREFIX}{name}] unknown kind {kind!r}; expected one of {KINDS}.")
    unknown = set(sec) - set(KIND_KEYS[kind]) - {"kind", "enabled"}
    if unknown:
        raise ConfigError(f"[{SECTION_PREFIX}{name}] keys {sorted(unknown)} do not apply to {kind}.")
    kw: Dict[str, object] = {"name": name, "kind": kind, "enabled": sec.getboolean("enabled", True)}
    for key in ("masks", "lexicon"):
        if key in sec:
            kw[key] = _path(base, sec[key])
    for key in ("threshold", "max_alpha", "time_limit_s"):
        if key in sec:
            kw[key] = sec.getfloat(key)
    for key in ("s0", "s1", "event_px"):
        if key in sec:
            kw[key] = sec.getint(key)
    for key in ("detector", "style", "action", "label"):
        if key in sec:
            kw[key] = sec[key].strip()
    if "allow_fullscreen" in sec:
        kw["allow_fullscreen"] = sec.getboolean("allow_fullscreen")
    return InterventionConfig(**kw)


def parse_config(text: str, base_dir: Path | str = ".") -> PipelineConfig:
    """Parse config text; paths resolve against ``base_dir``."""
    base = Path(base_dir).resolve()
    cp = configparser.ConfigParser(interpolation=None)
    try:
        cp.read_string(text)
    except configparser.Error as exc:
        raise ConfigError(f"Unreadable config: {exc}") from exc
    if "pipeline" not in cp:
        raise ConfigError("Config needs a [pipeline] section.")
    p = cp["pipeline"]
    if p.get("schema") != SCHEMA:
        raise ConfigError(f"Config schema must be {SCHEMA!r}, got {p.get('schema')!r}.")
    unknown = set(p) - set(PIPELINE_KEYS)
    if unknown:
        raise ConfigError(f"[pipeline] has unknown keys {sorted(unknown)}.")
    for section in cp.sections():
        if section != "pipeline" and not section.startswith(SECTION_PREFIX):
            raise ConfigError(f"Unknown section [{section}].")

    try:
        match = MatchConfig(
            parse_scales(p["scales"]) if "scales" in p else DEFAULT_SCALES,
            score_threshold=p.getfloat("score_threshold", MatchConfig.score_threshold),
            nms_iou=p.getfloat("nms_iou", MatchConfig.nms_iou),
            refine_steps=p.getint("refine_steps", MatchConfig.refine_steps),
        )
        scroll = ScrollConfig(
            strip_height=p.getint("strip_height", ScrollConfig.strip_height),
            search_window=p.getint("search_window", ScrollConfig.search_window),
            min_score=p.getfloat("min_score", ScrollConfig.min_score),
            history=p.getint("scroll_history", ScrollConfig.history),
        )
        interventions = [
            _intervention(s[len(SECTION_PREFIX):], cp[s], base)
            for s in cp.sections()
            if s.startswith(SECTION_PREFIX)
        ]
        return PipelineConfig(
            inpaint=p.get("inpaint", "majority").strip(),
            fmm_radius=p.getint("fmm_radius", 5),
            workers=p.getint("workers", 1),
            match=match,
            scroll=scroll,
            interventions=tuple(interventions),
        )
    except ConfigError:
        raise
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def check_paths(cfg: PipelineConfig) -> None:
    """Raise :class:`ConfigError` for referenced files that do not exist."""
    for ic in cfg.interventions:
        if ic.masks is not None and not ic.masks.is_dir():
            raise ConfigError(f"[{ic.section}] mask directory not found: {ic.masks}")
        if ic.lexicon is not None and not ic.lexicon.is_file():
            raise ConfigError(f"[{ic.section}] lexicon not found: {ic.lexicon}")


def load_config(path: Path | str) -> PipelineConfig:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"Cannot read config {path}: {exc}") from exc
    cfg = parse_config(text, path.parent)
    check_paths(cfg)
    logger.info("Loaded %s: %d interventions", path, len(cfg.interventions))
    return cfg


def _binding(cfg: PipelineConfig, ic: InterventionConfig) -> HookBinding:
    def action(default: Optional[str]):
        name = ic.action or default
        return make_action(name, cfg.inpaint, cfg.fmm_radius, ic.label) if name else None

    if ic.kind == "occlude_elements":
        binding = occlude_elements(ic.masks, cfg.match, action("inpaint"), ic.allow_fullscreen, ic.name)
    elif ic.kind == "demetrify":
        binding = demetrify(ic.masks, cfg.match, action("inpaint"), ic.allow_fullscreen, ic.name)
    elif ic.kind == "hate_filter":
        binding = hate_filter(Lexicon.from_file(ic.lexicon), ic.threshold, action(None), ic.name)
    else:
        binding = moderate_media(
            resolve_model(ic.detector), ic.style, inpaint_action(cfg.inpaint, cfg.fmm_radius), ic.name
        )
    return replace(binding, enabled=ic.enabled)


def build_session(cfg: PipelineConfig, only: Tuple[str, ...] = ()) -> Session:
    """A fresh session running ``cfg``'s interventions (or just those named in ``only``)."""
    known = [ic.name for ic in cfg.interventions]
    missing = [n for n in only if n not in known]
    if missing:
        raise ConfigError(f"Unknown interventions {missing}; configured: {known}.")
    bindings: List[HookBinding] = []
    usage_lock: Optional[UsageLock] = None
    for ic in cfg.interventions:
        if only and ic.name not in only:
            continue
        if ic.kind == "usage_lock":
            if ic.enabled:
                usage_lock = UsageLock(ic.usage_state(), cfg.scroll)
            continue
        bindings.append(_binding(cfg, ic))
    return Session(bindings, usage_lock, workers=cfg.workers)


def session_factory(cfg: PipelineConfig) -> Callable[[Hello], Session]:
    """Server session factory; HELLO may narrow the intervention set by name."""

    def factory(hello: Hello) -> Session:
        return build_session(cfg, tuple(hello.interventions))

    return factory
