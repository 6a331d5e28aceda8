"""Hook bindings: a configured hook plus its action, ready for the pipeline."""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from enum import Enum
from typing import TYPE_CHECKING, Any, Callable, Iterable, Mapping, Tuple

from ..core import OverlayOp
from .text import TextBox

if TYPE_CHECKING:
    from ..core import Frame
    from ..pipeline import SessionState


class HookKind(str, Enum):
    TEXT = "text"
    MASK = "mask"
    MODEL = "model"


@dataclass(frozen=True)
class HookOutcome:
    """What one hook produced for one frame."""

    ops: Tuple[OverlayOp, ...] = ()
    text_boxes: Tuple[TextBox, ...] = ()


Evaluator = Callable[["Frame", "SessionState"], HookOutcome]


@dataclass(frozen=True)
class HookBinding:
    """A hook with its parameters and action bound.

    ``evaluate`` receives the frame and a read-only session snapshot.
    ``registration_index`` breaks z ties between bindings and must be
    unique within a pipeline (:func:`index_bindings` assigns it).
    """

    name: str
    kind: HookKind
    evaluate: Evaluator
    params: Mapping[str, Any] = field(default_factory=dict)
    registration_index: int = 0
    enabled: bool = True

    def __post_init__(self) -> None:
        object.__setattr__(self, "kind", HookKind(self.kind))
        if not self.name:
            raise ValueError("HookBinding needs a name.")


def index_bindings(bindings: Iterable[HookBinding]) -> Tuple[HookBinding, ...]:
    """Number bindings 0, 1, 2, ... in the given order.

    Raises:
        ValueError: two bindings share a name.
    """
    indexed = tuple(replace(b, registration_index=i) for i, b in enumerate(bindings))
    names = [b.name for b in indexed]
    duplicates = sorted({n for n in names if names.count(n) > 1})
    if duplicates:
        raise ValueError(f"Binding names must be unique, repeated: {', '.join(duplicates)}")
    return indexed
