"""Replay client: streams recorded frames to an overlay server.

Stands in for the on-device capture client in tests and local replays.
"""

from __future__ import annotations

import asyncio
import logging
from dataclasses import dataclass, field
from typing import List, Optional, Sequence

from ..core import Frame, OverlayPlan
from .protocol import (
    Bye,
    Hello,
    MsgType,
    ProtocolError,
    Stats,
    encode_bye,
    encode_frame,
    encode_hello,
    encode_stats,
    parse_bye_payload,
    parse_overlay_payload,
    parse_stats_payload,
)
from .server import read_message

logger = logging.getLogger(__name__)


@dataclass
class ReplayResult:
    plans: List[OverlayPlan] = field(default_factory=list)
    stats: List[Stats] = field(default_factory=list)
    bye: Optional[Bye] = None

    @property
    def answered_ids(self) -> List[int]:
        return [p.frame_id for p in self.plans]


class ReplayClient:
    """One connection: HELLO, frames, optional STATS request, BYE."""

    def __init__(self, host: str, port: int):
        self.host = host
        self.port = port
        self.result = ReplayResult()
        self._reader: Optional[asyncio.StreamReader] = None
        self._writer: Optional[asyncio.StreamWriter] = None
        self._receiver: Optional[asyncio.Task] = None
        self._answered = asyncio.Condition()

    async def connect(self, hello: Hello) -> None:
        self._reader, self._writer = await asyncio.open_connection(self.host, self.port)
        await self.send_raw(encode_hello(hello))
        self._receiver = asyncio.create_task(self._receive())

    async def send_raw(self, data: bytes) -> None:
        assert self._writer is not None
        self._writer.write(data)
        await self._writer.drain()

    async def _receive(self) -> None:
        assert self._reader is not None
        try:
            while True:
                msg = await read_message(self._reader)
                if msg is None:
                    break
                if msg.type is MsgType.OVERLAY:
                    self.result.plans.append(parse_overlay_payload(msg.payload))
                elif msg.type is MsgType.STATS:
                    stats = parse_stats_payload(msg.payload)
                    if stats is not None:
                        self.result.stats.append(stats)
                elif msg.type is MsgType.BYE:
                    self.result.bye = parse_bye_payload(msg.payload)
                    break
                else:
                    raise ProtocolError(f"Unexpected {msg.type.name} from server.")
                async with self._answered:
                    self._answered.notify_all()
        except (ProtocolError, ConnectionError) as exc:
            logger.warning("Receiver stopped: %s", exc)
        finally:
            async with self._answered:
                self._answered.notify_all()

    async def wait_for_answer(self, frame_id: int) -> None:
        """Block until the plan for ``frame_id`` (or the server's BYE) arrives."""
        async with self._answered:
            await self._answered.wait_for(
                lambda: self.result.bye is not None
                or (self._receiver is not None and self._receiver.done())
                or any(p.frame_id == frame_id for p in self.result.plans)
            )

    async def send_frame(self, frame: Frame) -> None:
        await self.send_raw(encode_frame(frame))

    async def request_stats(self) -> None:
        await self.send_raw(encode_stats(None))

    async def close(self) -> ReplayResult:
        """Send BYE, collect remaining replies until the server's BYE."""
        try:
            await self.send_raw(encode_bye(Bye()))
        except ConnectionError:
            pass
        if self._receiver is not None:
            await self._receiver
        if self._writer is not None:
            self._writer.close()
            try:
                await self._writer.wait_closed()
            except ConnectionError:
                pass
        return self.result


async def replay(
    host: str,
    port: int,
    frames: Sequence[Frame],
    hello: Optional[Hello] = None,
    lockstep: bool = True,
    request_stats: bool = True,
) -> ReplayResult:
    """Stream ``frames`` and return everything the server answered.

    With ``lockstep`` each frame waits for its plan before the next is sent,
    so nothing is dropped; otherwise frames go back-to-back.
    """
    if hello is None:
        w = max((f.width for f in frames), default=1)
        h = max((f.height for f in frames), default=1)
        hello = Hello(w, h)
    client = ReplayClient(host, port)
    await client.connect(hello)
    for frame in frames:
        await client.send_frame(frame)
        if lockstep:
            await client.wait_for_answer(frame.id)
    if request_stats:
        await client.request_stats()
    return await client.close()
