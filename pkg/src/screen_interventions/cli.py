"""Command-line entry point: ``screen-interventions {run,serve,corpus,budget}``.

Exit codes: 0 success, 2 unreadable input, 3 configuration or argument error.
"""

from __future__ import annotations

import argparse
import asyncio
import logging
import signal
import sys
from pathlib import Path
from typing import List, NoReturn, Optional, Sequence, Tuple

import pandas as pd

from .config import PipelineConfig, build_session, load_config, session_factory
from .core import Frame, OverlayPlan, composite
from .corpus.manifest import load_frames, load_manifest, save_png, write_corpus, write_masks
from .corpus.generate import generate_scroll_sequence
from .net.budget import BudgetInput, latency_budget, latency_frame, latency_summary
from .net.server import serve

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_CONFIG = 3
LOG_FORMAT = "%(asctime)s %(levelname)s %(name)s: %(message)s"
PLAN_COLUMNS = ["frame_id", "index", "kind", "z", "x", "y", "w", "h", "color", "alpha", "text", "payload_bytes"]


def plan_frame(plan: OverlayPlan) -> pd.DataFrame:
    """One row per op, in compositing order."""
    rows = []
    for i, op in enumerate(plan.ops):
        r = op.region
        rows.append(
            {
                "frame_id": plan.frame_id,
                "index": i,
                "kind": op.kind.name,
                "z": op.z,
                "x": r.x if r else "",
                "y": r.y if r else "",
                "w": r.w if r else "",
                "h": r.h if r else "",
                "color": ",".join(str(c) for c in op.color),
                "alpha": op.alpha,
                "text": op.text,
                "payload_bytes": len(op.payload),
            }
        )
    return pd.DataFrame(rows, columns=PLAN_COLUMNS)


def _input_streams(source: Path) -> List[Tuple[str, List[Frame]]]:
    """Frame streams of a frames directory or of every row of a corpus manifest."""
    if source.is_file() and source.suffix.lower() == ".csv":
        return [(e.name, generate_scroll_sequence(e.spec, e.shifts)) for e in load_manifest(source)]
    return [("", load_frames(source))]


def run_stream(frames: Sequence[Frame], config: PipelineConfig, out_dir: Path) -> int:
    """Process one stream through a fresh session and write its outputs."""
    session = build_session(config)
    records = []
    out_dir.mkdir(parents=True, exist_ok=True)
    for frame in frames:
        plan, record = session.process(frame)
        records.append(record)
        stem = f"frame_{frame.id:04d}"
        save_png(composite(frame, plan), out_dir / f"{stem}.png")
        plan_frame(plan).to_csv(out_dir / f"{stem}.plan.csv", index=False)
        for hook, error in record.errors.items():
            logger.warning("Frame %d: %s failed: %s", frame.id, hook, error)
    latency_frame(records).to_csv(out_dir / "latency.csv", index=False)
    latency_summary(records).to_csv(out_dir / "latency_summary.csv", index=False)
    return len(records)


def cmd_run(args: argparse.Namespace) -> int:
    try:
        streams = _input_streams(args.input)
    except (OSError, ValueError) as exc:
        print(f"error: cannot read input {args.input}: {exc}", file=sys.stderr)
        return EXIT_INPUT
    config = load_config(args.config)
    total = 0
    for name, frames in streams:
        total += run_stream(frames, config, args.out / name if name else args.out)
    print(f"Wrote {total:,} frames -> {args.out}")
    return EXIT_OK


def _listen(text: str) -> Tuple[str, int]:
    host, sep, port = text.rpartition(":")
    if not sep or not port.isdigit():
        raise argparse.ArgumentTypeError(f"expected host:port, got {text!r}")
    return host or "127.0.0.1", int(port)


async def _serve_until_signalled(host: str, port: int, config: PipelineConfig, run_seconds: Optional[float]) -> None:
    stop = asyncio.Event()
    loop = asyncio.get_running_loop()
    for sig in (signal.SIGINT, signal.SIGTERM):
        try:
            loop.add_signal_handler(sig, stop.set)
        except (NotImplementedError, RuntimeError):
            pass
    if run_seconds is not None:
        loop.call_later(run_seconds, stop.set)
    await serve(host, port, session_factory(config), stop)


def cmd_serve(args: argparse.Namespace) -> int:
    config = load_config(args.config)
    build_session(config)
    host, port = args.listen
    asyncio.run(_serve_until_signalled(host, port, config, args.run_seconds))
    print(f"Server on {host}:{port} stopped")
    return EXIT_OK


def cmd_corpus(args: argparse.Namespace) -> int:
    try:
        entries = load_manifest(args.manifest)
    except OSError as exc:
        print(f"error: cannot read manifest {args.manifest}: {exc}", file=sys.stderr)
        return EXIT_INPUT
    paths = write_corpus(entries, args.out)
    masks = write_masks(args.masks or args.out / "masks", args.theme)
    print(f"Wrote {len(paths):,} frames and {len(masks)} masks -> {args.out}")
    return EXIT_OK


def cmd_budget(args: argparse.Namespace) -> int:
    report = latency_budget(BudgetInput(args.bandwidth, args.image_bits, tuple(args.model_ms), args.target_fps))
    print(f"one_way_ms: {report.one_way_ms:.3f}")
    print(f"total_ms: {report.total_ms:.2f}")
    print(f"max_fps: {report.max_fps}")
    print(f"max_models: {report.max_models_at_target} at {report.target_fps:g} fps "
          f"(strict: {report.max_models_strict})")
    return EXIT_OK


class _Parser(argparse.ArgumentParser):
    """Usage errors (bad numbers, missing flags) exit with :data:`EXIT_CONFIG`."""

    def error(self, message: str) -> NoReturn:
        self.print_usage(sys.stderr)
        self.exit(EXIT_CONFIG, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="screen-interventions", description=__doc__.splitlines()[0])
    p.add_argument("--log-level", default="WARNING", choices=["DEBUG", "INFO", "WARNING", "ERROR"])
    sub = p.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="Process recorded frames offline")
    run.add_argument("--input", type=Path, required=True, help="Frames directory or corpus manifest CSV")
    run.add_argument("--config", type=Path, required=True)
    run.add_argument("--out", type=Path, required=True)
    run.set_defaults(func=cmd_run)

    srv = sub.add_parser("serve", help="Serve overlay plans over TCP")
    srv.add_argument("--listen", type=_listen, default=("127.0.0.1", 7001), help="host:port")
    srv.add_argument("--config", type=Path, required=True)
    srv.add_argument("--run-seconds", type=float, default=None,
                     help="Stop after this many seconds (smoke runs)")
    srv.set_defaults(func=cmd_serve)

    corpus = sub.add_parser("corpus", help="Render a synthetic screen corpus")
    corpus.add_argument("--manifest", type=Path, required=True)
    corpus.add_argument("--out", type=Path, required=True)
    corpus.add_argument("--masks", type=Path, default=None, help="Mask output directory (default <out>/masks)")
    corpus.add_argument("--theme", default="twitter", help="Theme the masks are cropped from")
    corpus.set_defaults(func=cmd_corpus)

    budget = sub.add_parser("budget", help="Theoretical latency budget")
    budget.add_argument("--bandwidth", type=float, required=True, help="bits per second")
    budget.add_argument("--image-bits", type=float, required=True)
    budget.add_argument("--model-ms", type=float, nargs="+", required=True)
    budget.add_argument("--target-fps", type=float, default=5.0)
    budget.set_defaults(func=cmd_budget)
    return p


def main(argv: Optional[Sequence[str]] = None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or EXIT_OK)
    logging.basicConfig(level=args.log_level, format=LOG_FORMAT)
    try:
        return args.func(args)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
