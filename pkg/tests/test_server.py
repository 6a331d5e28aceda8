from __future__ import annotations

import asyncio
import time

from screen_interventions.core import OverlayOp, Region
from screen_interventions.hooks import HookBinding, HookKind
from screen_interventions.hooks.binding import HookOutcome
from screen_interventions.net.client import ReplayClient, replay
from screen_interventions.net.protocol import ByeCode, Hello, MsgType, ProtocolError, encode_frame, parse_bye_payload
from screen_interventions.net import server as server_module
from screen_interventions.net.server import OverlayServer, read_message
from screen_interventions.pipeline import Session

from .conftest import solid

TIMEOUT = 20


def _corner_box(delay_s: float = 0.0) -> HookBinding:
    def evaluate(frame, _state):
        if delay_s:
            time.sleep(delay_s)
        return HookOutcome((OverlayOp.fill_rect(Region(0, 0, 2, 2)),))

    return HookBinding("corner", HookKind.MODEL, evaluate)


def _factory(delay_s: float = 0.0):
    return lambda hello: Session([_corner_box(delay_s)])


def _frames(n: int, size: int = 16):
    return [solid(size, size, frame_id=i) for i in range(n)]


def _run(scenario, factory=None):
    async def main():
        server = OverlayServer(factory or _factory())
        host, port = await server.start("127.0.0.1", 0)
        try:
            return await asyncio.wait_for(scenario(server, host, port), TIMEOUT)
        finally:
            await server.shutdown()

    return asyncio.run(main())


def test_lockstep_replay_answers_every_frame():
    async def scenario(server, host, port):
        return await replay(host, port, _frames(10))

    result = _run(scenario)
    assert result.answered_ids == list(range(10))
    assert all(len(plan.ops) == 1 for plan in result.plans)
    stats = result.stats[-1]
    assert (stats.frames_received, stats.frames_processed, stats.frames_dropped) == (10, 10, 0)
    assert len(stats.records) == 10 and "hook_corner_us" in stats.records[0]
    assert result.bye.code == ByeCode.NORMAL


def test_back_to_back_frames_keep_latest():
    async def scenario(server, host, port):
        return await replay(host, port, _frames(30), lockstep=False)

    result = _run(scenario, _factory(delay_s=0.01))
    ids = result.answered_ids
    assert ids == sorted(set(ids))
    assert ids[-1] == 29
    assert result.stats[-1].frames_received == 30


def test_stats_pushed_every_n_frames():
    async def main():
        server = OverlayServer(_factory(), stats_every=4)
        host, port = await server.start("127.0.0.1", 0)
        try:
            return await asyncio.wait_for(replay(host, port, _frames(8), request_stats=False), TIMEOUT)
        finally:
            await server.shutdown()

    result = asyncio.run(main())
    assert [s.frames_processed for s in result.stats] == [4, 8]
    assert [len(s.records) for s in result.stats] == [4, 4]
    assert [r["frame_id"] for r in result.stats[1].records] == [4, 5, 6, 7]


def test_unencodable_answer_ends_session_with_bye(monkeypatch):
    def too_large(stats):
        raise ProtocolError("Payload of 70000000 bytes exceeds limit.")

    monkeypatch.setattr(server_module, "encode_stats", too_large)

    async def scenario(server, host, port):
        return await replay(host, port, _frames(3))

    result = _run(scenario)
    assert result.answered_ids == [0, 1, 2]
    assert result.stats == []
    assert result.bye.code == ByeCode.PROTOCOL_ERROR
    assert "exceeds" in result.bye.reason



def test_repeated_frame_id_ends_session():
    frames = _frames(2) + [solid(16, 16, frame_id=1)]

    async def scenario(server, host, port):
        return await replay(host, port, frames)

    result = _run(scenario)
    assert result.answered_ids == [0, 1]
    assert result.bye.code == ByeCode.PROTOCOL_ERROR
    assert "does not follow" in result.bye.reason

async def _raw_exchange(host, port, data: bytes):
    reader, writer = await asyncio.open_connection(host, port)
    writer.write(data)
    await writer.drain()
    msg = await read_message(reader)
    writer.close()
    return msg


def test_malformed_hello_is_refused_without_disturbing_other_sessions():
    async def scenario(server, host, port):
        good = ReplayClient(host, port)
        await good.connect(Hello(16, 16))
        await good.send_frame(solid(16, 16, frame_id=0))
        await good.wait_for_answer(0)

        refused = await _raw_exchange(host, port, b"XXXX" + b"\x01\x01\x00\x00\x00\x00")
        early_frame = await _raw_exchange(host, port, encode_frame(solid(4, 4)))

        await good.send_frame(solid(16, 16, frame_id=1))
        await good.wait_for_answer(1)
        return refused, early_frame, await good.close()

    refused, early_frame, result = _run(scenario)
    for msg in (refused, early_frame):
        assert msg.type is MsgType.BYE
        assert parse_bye_payload(msg.payload).code == ByeCode.PROTOCOL_ERROR
    assert result.answered_ids == [0, 1]


def test_session_factory_failure_refuses_connection():
    def factory(hello):
        raise ValueError(f"unknown intervention {hello.interventions[0]}")

    async def scenario(server, host, port):
        client = ReplayClient(host, port)
        await client.connect(Hello(16, 16, 0, ("nope",)))
        return await client.close()

    result = _run(scenario, factory)
    assert result.bye.code == ByeCode.REFUSED
    assert "nope" in result.bye.reason


def test_frame_beyond_hello_bounds_ends_session():
    async def scenario(server, host, port):
        return await replay(host, port, _frames(1, size=8), hello=Hello(4, 4), request_stats=False)

    result = _run(scenario)
    assert result.plans == []
    assert result.bye.code == ByeCode.PROTOCOL_ERROR


def test_shutdown_says_bye_to_open_sessions():
    async def main():
        server = OverlayServer(_factory())
        host, port = await server.start("127.0.0.1", 0)
        client = ReplayClient(host, port)
        await client.connect(Hello(16, 16))
        await client.send_frame(solid(16, 16, frame_id=0))
        await asyncio.wait_for(client.wait_for_answer(0), TIMEOUT)
        await asyncio.wait_for(server.shutdown(), TIMEOUT)
        return await asyncio.wait_for(client.close(), TIMEOUT)

    result = asyncio.run(main())
    assert result.answered_ids == [0]
    assert result.bye.code == ByeCode.SHUTDOWN
