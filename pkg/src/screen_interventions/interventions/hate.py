"""Hate-speech filtering: a text-hook intervention driven by a weighted lexicon."""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Mapping, Optional

from ..core import ConfigError, Frame
from ..hooks.binding import HookBinding, HookKind, HookOutcome
from ..hooks.text import read_text, run_text_hook
from .actions import Action

_TOKEN = re.compile(r"[a-z0-9]+")


def tokenize(text: str) -> List[str]:
    return _TOKEN.findall(text.lower())


@dataclass(frozen=True)
class Lexicon:
    """Terms and their weights; a line scores the heaviest term it contains."""

    entries: Mapping[str, float] = field(default_factory=dict)

    def __post_init__(self) -> None:
        clean: Dict[str, float] = {}
        for term, weight in self.entries.items():
            if not term or term != term.lower() or any(ch.isspace() for ch in term):
                raise ValueError(f"Lexicon terms must be non-empty, lowercase, without whitespace: {term!r}.")
            weight = float(weight)
            if not 0.0 < weight <= 1.0:
                raise ValueError(f"Weight of {term!r} must lie in (0, 1], got {weight}.")
            clean[term] = weight
        object.__setattr__(self, "entries", clean)

    def __len__(self) -> int:
        return len(self.entries)

    def score(self, text: str) -> float:
        return max((self.entries.get(tok, 0.0) for tok in tokenize(text)), default=0.0)

    @classmethod
    def from_file(cls, path: Path) -> "Lexicon":
        """Parse ``term weight`` lines; ``#`` starts a comment."""
        entries: Dict[str, float] = {}
        for lineno, raw in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            parts = line.split()
            if len(parts) != 2:
                raise ConfigError(f"{path}:{lineno}: expected 'term weight', got {raw!r}")
            try:
                entries[parts[0]] = float(parts[1])
            except ValueError:
                raise ConfigError(f"{path}:{lineno}: weight {parts[1]!r} is not a number") from None
        try:
            return cls(entries)
        except ValueError as exc:
            raise ConfigError(f"{path}: {exc}") from exc


def hate_filter(
    lexicon: Lexicon,
    threshold: float,
    action: Optional[Action] = None,
    name: str = "hate_filter",
) -> HookBinding:
    """Black out every text line whose lexicon score reaches ``threshold``.

    Raises:
        ConfigError: empty lexicon, or threshold outside (0, 1].
    """
    if not len(lexicon):
        raise ConfigError("hate_filter needs a non-empty lexicon.")
    if not 0.0 < threshold <= 1.0:
        raise ConfigError(f"hate_filter threshold must lie in (0, 1], got {threshold}.")

    def evaluate(frame: Frame, _session: object) -> HookOutcome:
        boxes = read_text(frame)
        ops = run_text_hook(frame, lexicon.score, threshold, action, boxes=boxes)
        return HookOutcome(tuple(ops), tuple(boxes))

    return HookBinding(name, HookKind.TEXT, evaluate, params={"terms": len(lexicon), "threshold": threshold})
