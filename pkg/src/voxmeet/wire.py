"""Framed binary protocol between clients and the orchestrator.

Frame layout (big-endian, normative; see docs/PROTOCOL.md):

    magic "HM" (2) | version u8 | msg_type u8 | session_id u32 |
    sender_id u32 | seq u32 | send_ts_us u64 | payload_len u32 | payload

seq counts per (sender, msg_type). The transport is assumed reliable and
in order; decode_message is total on arbitrary bytes and never reads past
the frame it reports consumed.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass
from enum import IntEnum

from voxmeet.errors import (
    FrameError,
    NeedMoreData,
    PayloadTooLarge,
    ProtocolError,
)

MAGIC = b"HM"
VERSION = 1
MAX_PAYLOAD = 16 * 1024 * 1024
DEFAULT_PORT = 9470

_HEADER = struct.Struct(">2sBBIIIQI")
HEADER_SIZE = _HEADER.size  # 28 bytes

_POSITION = struct.Struct(">fffffff")
_ERROR_CODE = struct.Struct(">H")


class MsgType(IntEnum):
    HELLO = 1
    HELLO_ACK = 2
    CREATE = 3
    CREATE_ACK = 4
    JOIN = 5
    JOIN_ACK = 6
    LEAVE = 7
    MEDIA_PC = 8
    MEDIA_AUDIO = 9
    POSITION = 10
    HEARTBEAT = 11
    ERROR = 12
    ROSTER = 13


# ERROR payload codes
ERR_NO_SUCH_SESSION = 1
ERR_SESSION_FULL = 2
ERR_ALREADY_JOINED = 3
ERR_NOT_A_MEMBER = 4
ERR_PEER_TIMEOUT = 5
ERR_BAD_REQUEST = 6


@dataclass
class WireMessage:
    msg_type: MsgType
    session_id: int = 0
    sender_id: int = 0
    seq: int = 0
    send_ts_us: int = 0
    payload: bytes = b""
    version: int = VERSION

    def wire_size(self) -> int:
        return HEADER_SIZE + len(self.payload)


def encode_message(m: WireMessage) -> bytes:
    if m.version != VERSION:
        raise ProtocolError(f"unsupported version {m.version}")
    if len(m.payload) > MAX_PAYLOAD:
        raise PayloadTooLarge(f"payload is {len(m.payload)} bytes, limit {MAX_PAYLOAD}")
    return (
        _HEADER.pack(
            MAGIC,
            m.version,
            int(m.msg_type),
            m.session_id,
            m.sender_id,
            m.seq,
            m.send_ts_us,
            len(m.payload),
        )
        + m.payload
    )


def decode_message(data: bytes) -> tuple[WireMessage, int]:
    """Parse one frame from the prefix of data.

    Returns (message, consumed). Raises NeedMoreData when the buffer holds
    only a valid prefix, FrameError on bad magic, ProtocolError on unknown
    version or type, PayloadTooLarge on an oversize declared length.
    """
    n = len(data)
    if n >= 1 and data[0] != MAGIC[0]:
        raise FrameError("bad magic", offset=0)
    if n >= 2 and data[1] != MAGIC[1]:
        raise FrameError("bad magic", offset=1)
    if n < HEADER_SIZE:
        raise NeedMoreData(HEADER_SIZE - n)
    magic, version, msg_type, session_id, sender_id, seq, send_ts_us, payload_len = (
        _HEADER.unpack_from(data)
    )
    if version != VERSION:
        raise ProtocolError(f"unsupported version {version}", offset=2)
    try:
        mtype = MsgType(msg_type)
    except ValueError:
        raise ProtocolError(f"unknown msg_type {msg_type}", offset=3) from None
    if payload_len > MAX_PAYLOAD:
        raise PayloadTooLarge(
            f"declared payload of {payload_len} bytes exceeds limit", offset=24
        )
    total = HEADER_SIZE + payload_len
    if n < total:
        raise NeedMoreData(total - n)
    msg = WireMessage(
        msg_type=mtype,
        session_id=session_id,
        sender_id=sender_id,
        seq=seq,
        send_ts_us=send_ts_us,
        payload=bytes(data[HEADER_SIZE:total]),
        version=version,
    )
    return msg, total


def resync_offset(data: bytes) -> int | None:
    """Index of the next possible frame start after a corrupt byte 0."""
    idx = data.find(MAGIC, 1)
    return idx if idx >= 0 else None


class StreamDecoder:
    """Per-connection incremental decoder with resynchronization.

    feed() returns every complete message in the buffer, scanning forward
    to the next magic after a corrupt frame. Do not share across
    connections: the internal buffer is per-stream state.
    """

    def __init__(self):
        self._buf = bytearray()
        self.errors = 0

    def feed(self, data: bytes) -> list[WireMessage]:
        self._buf += data
        out: list[WireMessage] = []
        while self._buf:
            try:
                msg, used = decode_message(bytes(self._buf))
            except NeedMoreData:
                break
            except (FrameError, ProtocolError, PayloadTooLarge):
                self.errors += 1
                skip = resync_offset(bytes(self._buf))
                if skip is None:
                    self._buf.clear()
                    break
                del self._buf[:skip]
                continue
            out.append(msg)
            del self._buf[:used]
        return out


# --- payload helpers ---------------------------------------------------------

def encode_position(pos, quat) -> bytes:
    return _POSITION.pack(*pos, *quat)


def decode_position(payload: bytes):
    if len(payload) != _POSITION.size:
        raise ProtocolError(f"position payload must be {_POSITION.size} bytes")
    vals = _POSITION.unpack(payload)
    return vals[:3], vals[3:]


def encode_error(code: int, text: str) -> bytes:
    return _ERROR_CODE.pack(code) + text.encode("utf-8")


def decode_error(payload: bytes):
    if len(payload) < _ERROR_CODE.size:
        raise ProtocolError("error payload too short")
    (code,) = _ERROR_CODE.unpack_from(payload)
    return code, payload[2:].decode("utf-8")


def encode_roster(seats: dict[int, int]) -> bytes:
    """Roster payload: u8 count then (member_id u32, seat u8) per member."""
    out = bytearray([len(seats)])
    for member_id in sorted(seats):
        out += struct.pack(">IB", member_id, seats[member_id])
    return bytes(out)


def decode_roster(payload: bytes) -> dict[int, int]:
    if not payload:
        raise ProtocolError("empty roster payload")
    count = payload[0]
    if len(payload) != 1 + 5 * count:
        raise ProtocolError("roster payload length mismatch")
    seats = {}
    for i in range(count):
        member_id, seat = struct.unpack_from(">IB", payload, 1 + 5 * i)
        seats[member_id] = seat
    return seats


def encode_join_ack(seat: int, seats: dict[int, int]) -> bytes:
    return bytes([seat]) + encode_roster(seats)


def decode_join_ack(payload: bytes):
    if not payload:
        raise ProtocolError("empty join-ack payload")
    return payload[0], decode_roster(payload[1:])


def encode_create(max_members: int) -> bytes:
    return bytes([max_members])


def decode_create(payload: bytes) -> int:
    if len(payload) != 1:
        raise ProtocolError("create payload must be one byte")
    return payload[0]
