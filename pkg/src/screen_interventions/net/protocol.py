"""Wire protocol between a screen-capture client and the overlay server.

Every message is a 10-byte header followed by its payload::

    magic    4s   b"GTRM"
    version  u8   1
    type     u8   1 HELLO, 2 FRAME, 3 OVERLAY, 4 STATS, 5 BYE
    length   u32  payload byte count

All integers are little-endian. Payload layouts are the ``*_LAYOUT``
constants below; the documentation pages are generated from them.
"""

from __future__ import annotations

import json
import struct
from dataclasses import dataclass, field
from enum import IntEnum
from typing import Any, Dict, List, NamedTuple, Tuple

from ..core import Frame, OpKind, OverlayOp, OverlayPlan, PixelFormat, Region

MAGIC = b"GTRM"
VERSION = 1
MAX_PAYLOAD = 64 * 1024 * 1024

HEADER = struct.Struct("<4sBBI")
FRAME_HEAD = struct.Struct("<QQIIB")
OVERLAY_HEAD = struct.Struct("<QI")
OP_HEAD = struct.Struct("<Bh")
REGION = struct.Struct("<IIII")
COLOR = struct.Struct("<4B")
ALPHA = struct.Struct("<d")
U16 = struct.Struct("<H")
HELLO_HEAD = struct.Struct("<IIB")


class MsgType(IntEnum):
    HELLO = 1
    FRAME = 2
    OVERLAY = 3
    STATS = 4
    BYE = 5


class ByeCode(IntEnum):
    NORMAL = 0
    PROTOCOL_ERROR = 1
    SHUTDOWN = 2
    REFUSED = 3


# (field, encoding) rows, in wire order.
HEADER_LAYOUT: Tuple[Tuple[str, str], ...] = (
    ("magic", "4 bytes 'GTRM'"), ("version", "u8"), ("type", "u8"), ("length", "u32"),
)
FRAME_LAYOUT = (
    ("id", "u64"), ("timestamp_us", "u64"), ("width", "u32"), ("height", "u32"),
    ("pixel_format", "u8 (1 RGBA8, 2 GRAY8)"), ("data", "width*height*bpp raw bytes"),
)
OVERLAY_LAYOUT = (("frame_id", "u64"), ("op_count", "u32"), ("ops", "op_count op records"))
OP_LAYOUT = {
    OpKind.FILL_RECT: (("region", "4 x u32 (x, y, w, h)"), ("color", "4 x u8 RGBA")),
    OpKind.PATCH: (("region", "4 x u32 (x, y, w, h)"), ("pixels", "w*h*4 raw RGBA bytes")),
    OpKind.VEIL: (("color", "4 x u8 RGBA"), ("alpha", "f64")),
    OpKind.LABEL: (("region", "4 x u32 (x, y, w, h)"), ("color", "4 x u8 RGBA"), ("text", "u16 length + UTF-8")),
}
HELLO_LAYOUT = (
    ("max_width", "u32"), ("max_height", "u32"), ("compression", "u8 (must be 0)"),
    ("intervention_count", "u16"), ("interventions", "u16 length + UTF-8, repeated"),
)
BYE_LAYOUT = (("code", "u16"), ("reason", "UTF-8, rest of payload"))
STATS_LAYOUT = (("body", "UTF-8 JSON object; empty payload requests stats"),)


class ProtocolError(ValueError):
    """Malformed or unexpected wire data."""


class BadMagicError(ProtocolError):
    pass


class VersionMismatchError(ProtocolError):
    pass


class TruncatedPayloadError(ProtocolError):
    pass


class UnknownMessageTypeError(ProtocolError):
    pass


class UnknownOpKindError(ProtocolError):
    def __init__(self, kind: int, offset: int):
        super().__init__(f"Unknown op kind {kind} at payload offset {offset}.")
        self.kind = kind
        self.offset = offset


class Message(NamedTuple):
    type: MsgType
    payload: bytes


# ----------------------------
# Envelope
# ----------------------------

def encode_message(msg_type: MsgType, payload: bytes) -> bytes:
    if len(payload) > MAX_PAYLOAD:
        raise ProtocolError(f"Payload of {len(payload)} bytes exceeds {MAX_PAYLOAD}.")
    return HEADER.pack(MAGIC, VERSION, int(msg_type), len(payload)) + payload


def parse_header(header: bytes) -> Tuple[MsgType, int]:
    """Validate a 10-byte header; returns the type and payload length."""
    if len(header) < HEADER.size:
        raise TruncatedPayloadError(f"Header needs {HEADER.size} bytes, got {len(header)}.")
    magic, version, kind, length = HEADER.unpack_from(header)
    if magic != MAGIC:
        raise BadMagicError(f"Bad magic {magic!r}.")
    if version != VERSION:
        raise VersionMismatchError(f"Protocol version {version}, expected {VERSION}.")
    try:
        msg_type = MsgType(kind)
    except ValueError:
        raise UnknownMessageTypeError(f"Unknown message type {kind}.") from None
    if length > MAX_PAYLOAD:
        raise ProtocolError(f"Payload length {length} exceeds {MAX_PAYLOAD}.")
    return msg_type, length


def decode_message(data: bytes) -> Message:
    """Parse exactly one message occupying all of ``data``."""
    msg_type, length = parse_header(data)
    available = len(data) - HEADER.size
    if length > available:
        raise TruncatedPayloadError(f"Length field says {length} bytes, only {available} remain.")
    if length < available:
        raise ProtocolError(f"{available - length} trailing bytes after payload.")
    return Message(msg_type, bytes(data[HEADER.size :]))


def _expect(data: bytes, expected: MsgType) -> bytes:
    msg = decode_message(data)
    if msg.type is not expected:
        raise ProtocolError(f"Expected {expected.name}, got {msg.type.name}.")
    return msg.payload


class _Reader:
    def __init__(self, buf: bytes):
        self.buf = buf
        self.pos = 0

    def take(self, n: int) -> bytes:
        if self.pos + n > len(self.buf):
            raise TruncatedPayloadError(
                f"Need {n} bytes at offset {self.pos}, only {len(self.buf) - self.pos} remain."
            )
        out = self.buf[self.pos : self.pos + n]
        self.pos += n
        return out

    def unpack(self, s: struct.Struct) -> Tuple[Any, ...]:
        return s.unpack(self.take(s.size))

    def done(self) -> None:
        if self.pos != len(self.buf):
            raise ProtocolError(f"{len(self.buf) - self.pos} unexpected bytes at offset {self.pos}.")


def _text(s: str) -> bytes:
    raw = s.encode("utf-8")
    if len(raw) > 0xFFFF:
        raise ProtocolError("String longer than 65535 bytes.")
    return U16.pack(len(raw)) + raw


def _read_text(r: _Reader) -> str:
    (n,) = r.unpack(U16)
    try:
        return r.take(n).decode("utf-8")
    except UnicodeDecodeError as exc:
        raise ProtocolError(f"Invalid UTF-8 string: {exc}") from None


# ----------------------------
# FRAME
# ----------------------------

def frame_payload(frame: Frame) -> bytes:
    return FRAME_HEAD.pack(frame.id, frame.timestamp_us, frame.width, frame.height,
                           int(frame.pixel_format)) + frame.data


def parse_frame_payload(payload: bytes) -> Frame:
    r = _Reader(payload)
    frame_id, ts, width, height, fmt = r.unpack(FRAME_HEAD)
    try:
        pixel_format = PixelFormat(fmt)
    except ValueError:
        raise ProtocolError(f"Unknown pixel format {fmt}.") from None
    if width == 0 or height == 0:
        raise ProtocolError(f"Frame size must be positive, got {width}x{height}.")
    data = r.take(width * height * pixel_format.bytes_per_pixel)
    r.done()
    return Frame(frame_id, ts, width, height, pixel_format, data)


def encode_frame(frame: Frame) -> bytes:
    return encode_message(MsgType.FRAME, frame_payload(frame))


def decode_frame(data: bytes) -> Frame:
    return parse_frame_payload(_expect(data, MsgType.FRAME))


# ----------------------------
# OVERLAY
# ----------------------------

def _region(region: Region) -> bytes:
    return REGION.pack(region.x, region.y, region.w, region.h)


def _encode_op(op: OverlayOp) -> bytes:
    out = OP_HEAD.pack(int(op.kind), op.z)
    if op.kind is OpKind.FILL_RECT:
        return out + _region(op.region) + COLOR.pack(*op.color)
    if op.kind is OpKind.PATCH:
        return out + _region(op.region) + op.payload
    if op.kind is OpKind.VEIL:
        return out + COLOR.pack(*op.color) + ALPHA.pack(op.alpha)
    return out + _region(op.region) + COLOR.pack(*op.color) + _text(op.text)


def _decode_op(r: _Reader) -> OverlayOp:
    offset = r.pos
    kind, z = r.unpack(OP_HEAD)
    try:
        kind = OpKind(kind)
    except ValueError:
        raise UnknownOpKindError(kind, offset) from None
    try:
        if kind is OpKind.VEIL:
            color = r.unpack(COLOR)
            (alpha,) = r.unpack(ALPHA)
            return OverlayOp(kind, z, color=color, alpha=alpha)
        region = Region(*r.unpack(REGION))
        if kind is OpKind.FILL_RECT:
            return OverlayOp(kind, z, region=region, color=r.unpack(COLOR))
        if kind is OpKind.PATCH:
            return OverlayOp(kind, z, region=region, payload=r.take(region.area * 4))
        color = r.unpack(COLOR)
        return OverlayOp(kind, z, region=region, color=color, text=_read_text(r))
    except ProtocolError:
        raise
    except ValueError as exc:
        raise ProtocolError(f"Invalid {kind.name} op at offset {offset}: {exc}") from None


def overlay_payload(plan: OverlayPlan) -> bytes:
    return OVERLAY_HEAD.pack(plan.frame_id, len(plan.ops)) + b"".join(_encode_op(op) for op in plan.ops)


def parse_overlay_payload(payload: bytes) -> OverlayPlan:
    r = _Reader(payload)
    frame_id, count = r.unpack(OVERLAY_HEAD)
    ops = [_decode_op(r) for _ in range(count)]
    r.done()
    try:
        return OverlayPlan(frame_id, tuple(ops))
    except ValueError as exc:
        raise ProtocolError(str(exc)) from None


def encode_overlay(plan: OverlayPlan) -> bytes:
    return encode_message(MsgType.OVERLAY, overlay_payload(plan))


def decode_overlay(data: bytes) -> OverlayPlan:
    return parse_overlay_payload(_expect(data, MsgType.OVERLAY))


# ----------------------------
# HELLO, BYE, STATS
# ----------------------------

@dataclass(frozen=True)
class Hello:
    max_width: int
    max_height: int
    compression: int = 0
    interventions: Tuple[str, ...] = ()


def encode_hello(hello: Hello) -> bytes:
    body = HELLO_HEAD.pack(hello.max_width, hello.max_height, hello.compression)
    body += U16.pack(len(hello.interventions)) + b"".join(_text(n) for n in hello.interventions)
    return encode_message(MsgType.HELLO, body)


def parse_hello_payload(payload: bytes) -> Hello:
    r = _Reader(payload)
    max_w, max_h, compression = r.unpack(HELLO_HEAD)
    if compression != 0:
        raise ProtocolError(f"Unsupported compression {compression}; only 0 (raw) is defined.")
    if max_w == 0 or max_h == 0:
        raise ProtocolError("HELLO frame bounds must be positive.")
    (count,) = r.unpack(U16)
    names = tuple(_read_text(r) for _ in range(count))
    r.done()
    return Hello(max_w, max_h, compression, names)


@dataclass(frozen=True)
class Bye:
    code: int = ByeCode.NORMAL
    reason: str = ""


def encode_bye(bye: Bye) -> bytes:
    return encode_message(MsgType.BYE, U16.pack(int(bye.code)) + bye.reason.encode("utf-8"))


def parse_bye_payload(payload: bytes) -> Bye:
    r = _Reader(payload)
    (code,) = r.unpack(U16)
    return Bye(code, r.take(len(payload) - r.pos).decode("utf-8", errors="replace"))


@dataclass(frozen=True)
class Stats:
    frames_received: int = 0
    frames_processed: int = 0
    frames_dropped: int = 0
    records: List[Dict[str, Any]] = field(default_factory=list)

    def to_json(self) -> str:
        return json.dumps(
            {
                "frames_received": self.frames_received,
                "frames_processed": self.frames_processed,
                "frames_dropped": self.frames_dropped,
                "records": self.records,
            },
            sort_keys=True,
        )


def encode_stats(stats: Stats | None) -> bytes:
    """STATS message; ``None`` encodes the empty request."""
    return encode_message(MsgType.STATS, b"" if stats is None else stats.to_json().encode("utf-8"))


def parse_stats_payload(payload: bytes) -> Stats | None:
    if not payload:
        return None
    try:
        body = json.loads(payload.decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise ProtocolError(f"Malformed STATS body: {exc}") from None
    if not isinstance(body, dict):
        raise ProtocolError(f"STATS body must be a JSON object, got {type(body).__name__}.")
    records = body.get("records", [])
    if not isinstance(records, list) or not all(isinstance(r, dict) for r in records):
        raise ProtocolError("STATS records must be a list of objects.")
    try:
        return Stats(
            int(body.get("frames_received", 0)),
            int(body.get("frames_processed", 0)),
            int(body.get("frames_dropped", 0)),
            records,
        )
    except (TypeError, ValueError) as exc:
        raise ProtocolError(f"Malformed STATS counters: {exc}") from None
