"""Frame pipeline: hook bindings in, one overlay plan per frame out.

Two layers:

* :func:`run_pipeline` evaluates the bindings for one frame against a
  read-only session snapshot. Hooks may fan out over a thread pool; their
  ops are concatenated in registration order and stably sorted by z, so the
  plan does not depend on the schedule.
* :class:`Session` is the sequential session owner. It steps the usage lock,
  runs the pipeline, and keeps the session state (frame count, usage-lock
  counters, the current frame's text boxes).

Evaluation is *non-interrupting*: a hook that raises, or that emits an op
outside the frame, is skipped for that frame and its error recorded in the
frame's :class:`LatencyRecord`.
"""

from __future__ import annotations

import logging
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, Dict, List, NamedTuple, Optional, Sequence, Tuple

from .core import BoundsError, Frame, LatencyRecord, OverlayOp, OverlayPlan
from .hooks.binding import HookBinding, HookOutcome, index_bindings
from .hooks.text import TextBox
from .interventions.usage_lock import UsageLock, UsageLockState

logger = logging.getLogger(__name__)

Clock = Callable[[], int]
USAGE_LOCK_HOOK = "usage_lock"


def monotonic_us() -> int:
    return time.perf_counter_ns() // 1000


@dataclass(frozen=True)
class SessionState:
    """Read-only snapshot handed to hooks."""

    frames_processed: int = 0
    last_frame_id: int = -1
    usage_lock: Optional[UsageLockState] = None
    text_boxes: Tuple[TextBox, ...] = ()


class HookResult(NamedTuple):
    binding: HookBinding
    outcome: Optional[HookOutcome]
    elapsed_us: int
    error: Optional[str]


def _run_binding(binding: HookBinding, frame: Frame, state: SessionState) -> HookResult:
    t0 = time.perf_counter_ns()
    try:
        outcome = binding.evaluate(frame, state)
        for i, op in enumerate(outcome.ops):
            if op.region is not None and not op.region.fits(frame.width, frame.height):
                raise BoundsError(f"op {i} region {op.region} exceeds the frame", op_index=i)
    except Exception as exc:  # isolate every hook failure
        elapsed = (time.perf_counter_ns() - t0) // 1000
        logger.warning("Hook %s skipped on frame %d: %s", binding.name, frame.id, exc)
        return HookResult(binding, None, elapsed, f"{type(exc).__name__}: {exc}")
    return HookResult(binding, outcome, (time.perf_counter_ns() - t0) // 1000, None)


def evaluate_bindings(
    frame: Frame,
    bindings: Sequence[HookBinding],
    state: SessionState,
    workers: int = 1,
) -> List[HookResult]:
    """Run every enabled binding; results come back in registration order."""
    active = sorted((b for b in bindings if b.enabled), key=lambda b: b.registration_index)
    indices = [b.registration_index for b in active]
    if len(set(indices)) != len(indices):
        raise ValueError(f"Duplicate registration_index among bindings: {indices}")
    if workers > 1 and len(active) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(lambda b: _run_binding(b, frame, state), active))
    return [_run_binding(b, frame, state) for b in active]


def _collect(frame_id: int, results: Sequence[HookResult], extra: Sequence[OverlayOp] = ()) -> OverlayPlan:
    ops: List[OverlayOp] = []
    for r in results:
        if r.outcome is not None:
            ops.extend(r.outcome.ops)
    ops.extend(extra)
    return OverlayPlan.from_ops(frame_id, ops)


def run_pipeline(
    frame: Frame,
    bindings: Sequence[HookBinding],
    session: SessionState = SessionState(),
    workers: int = 1,
    clock: Optional[Clock] = None,
) -> Tuple[OverlayPlan, LatencyRecord]:
    """Evaluate ``bindings`` on ``frame`` and assemble the overlay plan."""
    clock = clock or monotonic_us
    t_receive = clock()
    results = evaluate_bindings(frame, bindings, session, workers)
    plan = _collect(frame.id, results)
    t_ready = max(t_receive, clock())
    record = LatencyRecord(
        frame.id,
        t_receive,
        t_ready,
        t_ready,
        per_hook_us={r.binding.name: r.elapsed_us for r in results},
        errors={r.binding.name: r.error for r in results if r.error},
    )
    return plan, record


class Session:
    """Sequential owner of one stream of frames."""

    def __init__(
        self,
        bindings: Sequence[HookBinding],
        usage_lock: Optional[UsageLock] = None,
        workers: int = 1,
        clock: Optional[Clock] = None,
    ):
        self.bindings = index_bindings(bindings)
        if any(b.name == USAGE_LOCK_HOOK for b in self.bindings):
            raise ValueError(f"Binding name {USAGE_LOCK_HOOK!r} is reserved for the usage lock.")
        self.usage_lock = usage_lock
        self.workers = workers
        self._t0 = monotonic_us()
        self._clock = clock or (lambda: monotonic_us() - self._t0)
        self.state = SessionState(usage_lock=usage_lock.state if usage_lock else None)

    def now_us(self) -> int:
        return self._clock()

    def process(self, frame: Frame, t_receive_us: Optional[int] = None) -> Tuple[OverlayPlan, LatencyRecord]:
        """Plan one frame and advance the session.

        Raises:
            ValueError: ``frame.id`` does not exceed the last processed id.
        """
        if frame.id <= self.state.last_frame_id:
            raise ValueError(f"Frame id {frame.id} after {self.state.last_frame_id}; ids must strictly increase.")
        t_receive = self._clock() if t_receive_us is None else t_receive_us
        per_hook: Dict[str, int] = {}
        errors: Dict[str, str] = {}

        extra: List[OverlayOp] = []
        if self.usage_lock is not None:
            t0 = time.perf_counter_ns()
            try:
                op = self.usage_lock.step(frame)
                if op is not None:
                    extra.append(op)
            except Exception as exc:
                logger.warning("Usage lock skipped on frame %d: %s", frame.id, exc)
                errors[USAGE_LOCK_HOOK] = f"{type(exc).__name__}: {exc}"
            per_hook[USAGE_LOCK_HOOK] = (time.perf_counter_ns() - t0) // 1000

        snapshot = SessionState(
            self.state.frames_processed,
            self.state.last_frame_id,
            self.usage_lock.state if self.usage_lock else None,
            self.state.text_boxes,
        )
        results = evaluate_bindings(frame, self.bindings, snapshot, self.workers)
        plan = _collect(frame.id, results, extra)
        for r in results:
            per_hook[r.binding.name] = r.elapsed_us
            if r.error:
                errors[r.binding.name] = r.error

        boxes = tuple(b for r in results if r.outcome is not None for b in r.outcome.text_boxes)
        self.state = SessionState(snapshot.frames_processed + 1, frame.id, snapshot.usage_lock, boxes)
        t_ready = max(t_receive, self._clock())
        logger.debug("Frame %d: %d ops in %d us", frame.id, len(plan.ops), t_ready - t_receive)
        return plan, LatencyRecord(frame.id, t_receive, t_ready, t_ready, per_hook, errors)
