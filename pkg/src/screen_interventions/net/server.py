"""Overlay server: frames in, overlay plans out, one session per connection.

Each connection has a reader task and a processing loop sharing a single
pending-frame slot. A frame arriving while the slot is occupied replaces
it (keep-latest), and the replaced frame counts as dropped, so the answered
frame ids are strictly increasing and the newest frame is always answered.
Processing runs in a worker thread, leaving the event loop free to keep
reading.
"""

from __future__ import annotations

import asyncio
import logging
from collections import deque
from typing import Callable, Deque, Dict, Optional, Tuple

from ..core import Frame, LatencyRecord
from ..pipeline import Session
from .protocol import (
    HEADER,
    Bye,
    ByeCode,
    Hello,
    Message,
    MsgType,
    ProtocolError,
    Stats,
    TruncatedPayloadError,
    encode_bye,
    encode_overlay,
    encode_stats,
    parse_frame_payload,
    parse_header,
    parse_hello_payload,
)

logger = logging.getLogger(__name__)

STATS_EVERY = 100
# Latency records kept between two STATS messages; older ones are discarded.
STATS_BACKLOG = 1000
SessionFactory = Callable[[Hello], Session]


async def read_message(reader: asyncio.StreamReader) -> Optional[Message]:
    """Next message from the stream, or None on a clean end of stream."""
    try:
        header = await reader.readexactly(HEADER.size)
    except asyncio.IncompleteReadError as exc:
        if not exc.partial:
            return None
        raise TruncatedPayloadError(f"Stream ended inside a header ({len(exc.partial)} bytes).") from None
    msg_type, length = parse_header(header)
    try:
        payload = await reader.readexactly(length)
    except asyncio.IncompleteReadError as exc:
        raise TruncatedPayloadError(
            f"Stream ended after {len(exc.partial)} of {length} payload bytes."
        ) from None
    return Message(msg_type, payload)


class _Connection:
    def __init__(self, session: Session, hello: Hello, writer: asyncio.StreamWriter, peer: str, stats_every: int):
        self.session = session
        self.hello = hello
        self.writer = writer
        self.peer = peer
        self.stats_every = stats_every
        self.pending: Optional[Tuple[Frame, int]] = None
        self.wake = asyncio.Event()
        self.closing: Optional[Bye] = None
        self.stats_requested = False
        self.received = 0
        self.dropped = 0
        self.last_id = -1
        self.answered = 0
        self.unreported: Deque[LatencyRecord] = deque(maxlen=STATS_BACKLOG)

    def stats(self) -> Stats:
        """Counters for the whole session, records only since the previous STATS."""
        stats = Stats(self.received, self.answered, self.dropped, [r.as_row() for r in self.unreported])
        self.unreported.clear()
        return stats

    def close(self, bye: Bye) -> None:
        if self.closing is None:
            self.closing = bye
        self.wake.set()

    async def send(self, data: bytes) -> None:
        self.writer.write(data)
        await self.writer.drain()

    async def read_loop(self, reader: asyncio.StreamReader) -> None:
        try:
            while self.closing is None:
                msg = await read_message(reader)
                if msg is None:
                    self.close(Bye(ByeCode.NORMAL, "end of stream"))
                elif msg.type is MsgType.FRAME:
                    frame = parse_frame_payload(msg.payload)
                    if frame.width > self.hello.max_width or frame.height > self.hello.max_height:
                        raise ProtocolError(
                            f"Frame {frame.width}x{frame.height} exceeds HELLO bound "
                            f"{self.hello.max_width}x{self.hello.max_height}."
                        )
                    if frame.id <= self.last_id:
                        raise ProtocolError(f"Frame id {frame.id} does not follow {self.last_id}.")
                    self.last_id = frame.id
                    self.received += 1
                    if self.pending is not None:
                        self.dropped += 1
                    self.pending = (frame, self.session.now_us())
                    self.wake.set()
                elif msg.type is MsgType.STATS:
                    self.stats_requested = True
                    self.wake.set()
                elif msg.type is MsgType.BYE:
                    self.close(Bye(ByeCode.NORMAL, "bye"))
                else:
                    raise ProtocolError(f"Unexpected {msg.type.name} from client.")
        except ProtocolError as exc:
            logger.warning("Protocol violation from %s: %s", self.peer, exc)
            self.pending = None
            self.close(Bye(ByeCode.PROTOCOL_ERROR, str(exc)))
        except ConnectionError:
            self.close(Bye(ByeCode.NORMAL, "connection lost"))

    async def process_loop(self) -> None:
        loop = asyncio.get_running_loop()
        while True:
            if self.pending is None and not self.stats_requested and self.closing is None:
                await self.wake.wait()
            self.wake.clear()
            if self.pending is not None:
                frame, t_receive = self.pending
                self.pending = None
                plan, record = await loop.run_in_executor(None, self.session.process, frame, t_receive)
                await self.send(encode_overlay(plan))
                t_sent = max(record.t_plan_ready_us, self.session.now_us())
                self.answered += 1
                self.unreported.append(
                    LatencyRecord(record.frame_id, record.t_receive_us, record.t_plan_ready_us, t_sent,
                                  record.per_hook_us, record.errors)
                )
                if self.answered % self.stats_every == 0:
                    await self.send(encode_stats(self.stats()))
            if self.stats_requested:
                self.stats_requested = False
                await self.send(encode_stats(self.stats()))
            if self.closing is not None and self.pending is None:
                return


class OverlayServer:
    """Accepts connections and runs one :class:`Session` per connection."""

    def __init__(self, session_factory: SessionFactory, stats_every: int = STATS_EVERY):
        self.session_factory = session_factory
        self.stats_every = stats_every
        self._server: Optional[asyncio.AbstractServer] = None
        self._tasks: Dict[asyncio.Task, Optional[_Connection]] = {}

    @property
    def address(self) -> Tuple[str, int]:
        if self._server is None:
            raise RuntimeError("Server is not started.")
        host, port = self._server.sockets[0].getsockname()[:2]
        return host, port

    async def start(self, host: str = "127.0.0.1", port: int = 0) -> Tuple[str, int]:
        self._server = await asyncio.start_server(self._on_connect, host, port)
        logger.info("Listening on %s:%d", *self.address)
        return self.address

    async def shutdown(self) -> None:
        """Send BYE to every session, finish their pending frames and stop."""
        for task, conn in list(self._tasks.items()):
            if conn is None:
                task.cancel()  # still waiting for HELLO
            else:
                conn.close(Bye(ByeCode.SHUTDOWN, "server shutdown"))
        if self._tasks:
            await asyncio.gather(*self._tasks, return_exceptions=True)
        if self._server is not None:
            self._server.close()
            await self._server.wait_closed()
        logger.info("Server stopped")

    async def _on_connect(self, reader: asyncio.StreamReader, writer: asyncio.StreamWriter) -> None:
        task = asyncio.current_task()
        if task is not None:
            self._tasks[task] = None
        try:
            await self._serve_connection(reader, writer)
        finally:
            if task is not None:
                self._tasks.pop(task, None)

    async def _serve_connection(self, reader: asyncio.StreamReader, writer: asyncio.StreamWriter) -> None:
        peer = str(writer.get_extra_info("peername"))
        try:
            msg = await read_message(reader)
            if msg is None:
                raise ProtocolError("Connection closed before HELLO.")
            if msg.type is not MsgType.HELLO:
                raise ProtocolError(f"Expected HELLO, got {msg.type.name}.")
            hello = parse_hello_payload(msg.payload)
        except ProtocolError as exc:
            logger.warning("Refusing %s: %s", peer, exc)
            await self._refuse(writer, Bye(ByeCode.PROTOCOL_ERROR, str(exc)))
            return
        try:
            session = self.session_factory(hello)
        except ValueError as exc:
            logger.warning("Refusing %s: %s", peer, exc)
            await self._refuse(writer, Bye(ByeCode.REFUSED, str(exc)))
            return

        logger.info("Session opened for %s (%dx%d)", peer, hello.max_width, hello.max_height)
        conn = _Connection(session, hello, writer, peer, self.stats_every)
        task = asyncio.current_task()
        if task in self._tasks:
            self._tasks[task] = conn
        reader_task = asyncio.create_task(conn.read_loop(reader))
        try:
            await conn.process_loop()
            await conn.send(encode_bye(conn.closing or Bye()))
        except ProtocolError as exc:
            logger.warning("Cannot answer %s: %s", peer, exc)
            conn.pending = None
            await self._say_bye(conn, Bye(ByeCode.PROTOCOL_ERROR, str(exc)))
        except ConnectionError as exc:
            logger.warning("Lost %s: %s", peer, exc)
        finally:
            reader_task.cancel()
            await asyncio.gather(reader_task, return_exceptions=True)
            writer.close()
            try:
                await writer.wait_closed()
            except ConnectionError:
                pass
            logger.info("Session closed for %s: %d received, %d answered, %d dropped",
                        peer, conn.received, conn.answered, conn.dropped)

    async def _say_bye(self, conn: _Connection, bye: Bye) -> None:
        conn.close(bye)
        try:
            await conn.send(encode_bye(bye))
        except ConnectionError:
            pass

    async def _refuse(self, writer: asyncio.StreamWriter, bye: Bye) -> None:
        try:
            writer.write(encode_bye(bye))
            await writer.drain()
        except ConnectionError:
            pass
        writer.close()
        try:
            await writer.wait_closed()
        except ConnectionError:
            pass


async def serve(host: str, port: int, session_factory: SessionFactory, stop: asyncio.Event) -> None:
    """Run a server until ``stop`` is set, then shut down gracefully."""
    server = OverlayServer(session_factory)
    await server.start(host, port)
    await stop.wait()
    await server.shutdown()
