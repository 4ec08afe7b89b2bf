"""Wire frames for the relay-routing MAC.

Five frame types travel over the air. All multi-byte fields are big-endian.
Node ids are unsigned 16-bit; 0xFFFF is reserved as the broadcast id and is
never assigned to a node. RSSI is a signed 16-bit whole-dBm reading. The hop
counter is the single 32-bit field.

Layouts (sizes in bytes):

    SrcBcast (type 1, RTS)          | type:2 | broadcast_node_id:2 |                      = 4
    DstBcast (type 2, beacon)       | type:2 | broadcast_node_id:2 |                      = 4
    Response (type 3, RTS reply)    | type:2 | broadcast_node_id:2 | response_node_id:2
                                    | dst_rssi:2 |                                        = 8
    Routing  (type 4, data)         | type:2 | source_node_id:2 | dest_node_id:2
                                    | send_node_id:2 | recv_node_id:2 | hop_count:4       = 14
    Ack      (type 5)               | type:2 | response_node_id:2 |                       = 4

`decode_frame` raises FrameDecodeError subclasses for unknown type codes,
short buffers, and trailing bytes.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass
from enum import IntEnum

BROADCAST_ID = 0xFFFF

_U16_MAX = 0xFFFF
_U32_MAX = 0xFFFFFFFF
_I16_MIN, _I16_MAX = -0x8000, 0x7FFF


class MessageType(IntEnum):
    SRC_BCAST = 1
    DST_BCAST = 2
    RESPONSE = 3
    ROUTING = 4
    ACK = 5


FRAME_SIZES = {
    MessageType.SRC_BCAST: 4,
    MessageType.DST_BCAST: 4,
    MessageType.RESPONSE: 8,
    MessageType.ROUTING: 14,
    MessageType.ACK: 4,
}


class FrameDecodeError(Exception):
    """Base error for undecodable byte sequences."""


class UnknownTypeError(FrameDecodeError):
    pass


class TruncatedFrameError(FrameDecodeError):
    pass


class TrailingBytesError(FrameDecodeError):
    pass


def _check_u16(value: int, field: str) -> None:
    if not 0 <= value <= _U16_MAX:
        raise ValueError(f"{field} out of range for uint16: {value}")


def _check_i16(value: int, field: str) -> None:
    if not _I16_MIN <= value <= _I16_MAX:
        raise ValueError(f"{field} out of range for int16: {value}")


@dataclass(frozen=True)
class SrcBcast:
    """RTS: a holder announces it wants to hand a packet off."""

    broadcast_node_id: int

    def __post_init__(self) -> None:
        _check_u16(self.broadcast_node_id, "broadcast_node_id")

    type = MessageType.SRC_BCAST


@dataclass(frozen=True)
class DstBcast:
    """Location beacon emitted periodically by the destination."""

    broadcast_node_id: int

    def __post_init__(self) -> None:
        _check_u16(self.broadcast_node_id, "broadcast_node_id")

    type = MessageType.DST_BCAST


@dataclass(frozen=True)
class Response:
    """Reply to an RTS carrying the responder's stored destination RSSI."""

    broadcast_node_id: int
    response_node_id: int
    dst_rssi: int

    def __post_init__(self) -> None:
        _check_u16(self.broadcast_node_id, "broadcast_node_id")
        _check_u16(self.response_node_id, "response_node_id")
        _check_i16(self.dst_rssi, "dst_rssi")

    type = MessageType.RESPONSE


@dataclass(frozen=True)
class Routing:
    """Data frame. hop_count is the number of completed handovers so far."""

    source_node_id: int
    dest_node_id: int
    send_node_id: int
    recv_node_id: int
    hop_count: int

    def __post_init__(self) -> None:
        _check_u16(self.source_node_id, "source_node_id")
        _check_u16(self.dest_node_id, "dest_node_id")
        _check_u16(self.send_node_id, "send_node_id")
        _check_u16(self.recv_node_id, "recv_node_id")
        if not 0 <= self.hop_count <= _U32_MAX:
            raise ValueError(f"hop_count out of range for uint32: {self.hop_count}")

    type = MessageType.ROUTING


@dataclass(frozen=True)
class Ack:
    """Acknowledgement of a received Routing frame."""

    response_node_id: int

    def __post_init__(self) -> None:
        _check_u16(self.response_node_id, "response_node_id")

    type = MessageType.ACK


Frame = SrcBcast | DstBcast | Response | Routing | Ack


def encode_frame(frame: Frame) -> bytes:
    """Serialize a frame to its big-endian wire form."""
    t = frame.type
    if t is MessageType.SRC_BCAST or t is MessageType.DST_BCAST:
        return struct.pack(">HH", t, frame.broadcast_node_id)
    if t is MessageType.RESPONSE:
        return struct.pack(
            ">HHHh", t, frame.broadcast_node_id, frame.response_node_id, frame.dst_rssi
        )
    if t is MessageType.ROUTING:
        return struct.pack(
            ">HHHHHI",
            t,
            frame.source_node_id,
            frame.dest_node_id,
            frame.send_node_id,
            frame.recv_node_id,
            frame.hop_count,
        )
    if t is MessageType.ACK:
        return struct.pack(">HH", t, frame.response_node_id)
    raise ValueError(f"unencodable frame: {frame!r}")


def decode_frame(data: bytes) -> Frame:
    """Parse one frame from `data`; the buffer must hold exactly one frame."""
    if len(data) < 2:
        raise TruncatedFrameError(f"need at least 2 bytes for the type field, got {len(data)}")
    (code,) = struct.unpack_from(">H", data, 0)
    try:
        mtype = MessageType(code)
    except ValueError:
        raise UnknownTypeError(f"unknown frame type code {code}") from None
    size = FRAME_SIZES[mtype]
    if len(data) < size:
        raise TruncatedFrameError(
            f"{mtype.name} frame needs {size} bytes, got {len(data)}"
        )
    if len(data) > size:
        raise TrailingBytesError(
            f"{len(data) - size} trailing bytes after {size}-byte {mtype.name} frame"
        )
    if mtype is MessageType.SRC_BCAST:
        (_, bid) = struct.unpack(">HH", data)
        return SrcBcast(bid)
    if mtype is MessageType.DST_BCAST:
        (_, bid) = struct.unpack(">HH", data)
        return DstBcast(bid)
    if mtype is MessageType.RESPONSE:
        (_, bid, rid, rssi) = struct.unpack(">HHHh", data)
        return Response(bid, rid, rssi)
    if mtype is MessageType.ROUTING:
        (_, src, dst, snd, rcv, hops) = struct.unpack(">HHHHHI", data)
        return Routing(src, dst, snd, rcv, hops)
    (_, rid) = struct.unpack(">HH", data)
    return Ack(rid)
