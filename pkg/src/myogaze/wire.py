"""Byte protocol for the switch-interface/hand-controller link, plus the
append-only JSONL session event log.

Frame layout (at most 64 bytes total):

    0xA5  0x01  opcode  length  payload[length]  crc8

crc8 is CRC-8 with polynomial 0x07 and init 0x00 over opcode..payload.
Opcodes: 0x01 SetGraspType{index}, 0x02 Ack{accepted, index},
0x03 HandStatus{phase, six int16 big-endian centidegree angles}.
"""

from __future__ import annotations

import json
import struct
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Union

SYNC = 0xA5
VERSION = 0x01
MAX_FRAME = 64
MAX_PAYLOAD = MAX_FRAME - 5  # sync + version + opcode + length + crc

OP_SET_GRASP_TYPE = 0x01
OP_ACK = 0x02
OP_HAND_STATUS = 0x03

_PAYLOAD_LEN = {OP_SET_GRASP_TYPE: 1, OP_ACK: 2, OP_HAND_STATUS: 13}


def _build_crc_table(poly: int = 0x07) -> tuple[int, ...]:
    table = []
    for byte in range(256):
        crc = byte
        for _ in range(8):
            crc = ((crc << 1) ^ poly if crc & 0x80 else crc << 1) & 0xFF
        table.append(crc)
    return tuple(table)


_CRC_TABLE = _build_crc_table()


def crc8(data: bytes) -> int:
    """CRC-8/0x07, init 0x00, table-driven."""
    crc = 0x00
    for b in data:
        crc = _CRC_TABLE[crc ^ b]
    return crc


class EncodeError(ValueError):
    pass


class DecodeError(ValueError):
    pass


class BadSync(DecodeError):
    pass


class BadLength(DecodeError):
    pass


class BadCrc(DecodeError):
    pass


class UnknownOpcode(DecodeError):
    pass


class BadPayload(DecodeError):
    """Frame-level checks passed but a payload field is out of range."""


@dataclass(frozen=True)
class SetGraspType:
    index: int


@dataclass(frozen=True)
class Ack:
    accepted: bool
    index: int


@dataclass(frozen=True)
class HandStatus:
    phase: int
    angles_centideg: tuple[int, ...]


Message = Union[SetGraspType, Ack, HandStatus]


def _check_index(index: int) -> None:
    if not 0 <= index <= 5:
        raise EncodeError(f"grasp index out of range 0..5: {index}")


def encode(msg: Message) -> bytes:
    """Serialize one message into a complete frame."""
    if isinstance(msg, SetGraspType):
        _check_index(msg.index)
        opcode, payload = OP_SET_GRASP_TYPE, bytes([msg.index])
    elif isinstance(msg, Ack):
        _check_index(msg.index)
        opcode, payload = OP_ACK, bytes([1 if msg.accepted else 0, msg.index])
    elif isinstance(msg, HandStatus):
        if not 0 <= msg.phase <= 3:
            raise EncodeError(f"phase code out of range 0..3: {msg.phase}")
        if len(msg.angles_centideg) != 6:
            raise EncodeError("hand status needs six angles")
        for a in msg.angles_centideg:
            if not 0 <= a <= 9000:
                raise EncodeError(f"angle out of range 0..9000 centideg: {a}")
        opcode = OP_HAND_STATUS
        payload = struct.pack(">B6h", msg.phase, *msg.angles_centideg)
    else:
        raise EncodeError(f"unknown message type {type(msg).__name__}")
    body = bytes([opcode, len(payload)]) + payload
    return bytes([SYNC, VERSION]) + body + bytes([crc8(body)])


def _parse_payload(opcode: int, payload: bytes) -> Message:
    if opcode == OP_SET_GRASP_TYPE:
        index = payload[0]
        if index > 5:
            raise BadPayload(f"grasp index {index} > 5")
        return SetGraspType(index)
    if opcode == OP_ACK:
        flag, index = payload[0], payload[1]
        if flag > 1:
            raise BadPayload(f"ack flag byte {flag} not 0/1")
        if index > 5:
            raise BadPayload(f"grasp index {index} > 5")
        return Ack(bool(flag), index)
    phase, *angles = struct.unpack(">B6h", payload)
    if phase > 3:
        raise BadPayload(f"phase code {phase} > 3")
    for a in angles:
        if not 0 <= a <= 9000:
            raise BadPayload(f"angle {a} outside 0..9000 centideg")
    return HandStatus(phase, tuple(angles))


def decode(data: bytes) -> tuple[Message | None, int]:
    """Parse exactly one frame from the start of `data`.

    Returns (message, bytes_consumed); (None, 0) means the input is a
    plausible frame prefix and more bytes are needed. Raises a DecodeError
    subclass for anything that cannot become a valid frame.
    """
    if len(data) < 1:
        return None, 0
    if data[0] != SYNC:
        raise BadSync(f"expected sync 0x{SYNC:02X}, got 0x{data[0]:02X}")
    if len(data) < 2:
        return None, 0
    if data[1] != VERSION:
        raise BadSync(f"unsupported version 0x{data[1]:02X}")
    if len(data) < 4:
        return None, 0
    opcode, length = data[2], data[3]
    if length > MAX_PAYLOAD:
        raise BadLength(f"payload length {length} exceeds {MAX_PAYLOAD}")
    expected = _PAYLOAD_LEN.get(opcode)
    if expected is None:
        raise UnknownOpcode(f"opcode 0x{opcode:02X}")
    if length != expected:
        raise BadLength(
            f"opcode 0x{opcode:02X} expects length {expected}, got {length}"
        )
    total = 5 + length
    if len(data) < total:
        return None, 0
    body = data[2 : 4 + length]
    if crc8(bytes(body)) != data[4 + length]:
        raise BadCrc("crc mismatch")
    return _parse_payload(opcode, bytes(data[4 : 4 + length])), total


class Decoder:
    """Streaming decoder: feed arbitrary chunks, get back decoded messages.

    Bad frames are counted by error class and the scanner resynchronizes on
    the next 0xA5. The internal buffer stays bounded because any frame
    claiming more than MAX_FRAME bytes is rejected up front.
    """

    def __init__(self) -> None:
        self._buf = bytearray()
        self.error_counts: dict[str, int] = {}

    def _count(self, exc: DecodeError) -> None:
        name = type(exc).__name__
        self.error_counts[name] = self.error_counts.get(name, 0) + 1

    def push(self, data: bytes) -> list[Message]:
        self._buf.extend(data)
        out: list[Message] = []
        while True:
            start = self._buf.find(SYNC)
            if start < 0:
                self._buf.clear()
                return out
            if start > 0:
                del self._buf[:start]
            try:
                msg, consumed = decode(bytes(self._buf))
            except DecodeError as exc:
                self._count(exc)
                del self._buf[:1]  # skip this sync byte, rescan
                continue
            if msg is None:
                return out  # incomplete; buffer is at most one frame long
            out.append(msg)
            del self._buf[:consumed]

    @property
    def pending_bytes(self) -> int:
        return len(self._buf)


EVENT_KINDS = frozenset(
    {
        "TrialStart",
        "GazeTrigger",
        "SwitchAccepted",
        "SwitchRejected",
        "EmgCommand",
        "Contact",
        "Held",
        "Released",
        "Placed",
        "TrialEnd",
    }
)

_RESERVED_KEYS = {"t", "kind"}
SCHEMA_VERSION = 1


@dataclass(frozen=True)
class EventRecord:
    t: int
    kind: str
    attrs: dict = field(default_factory=dict)

    def __post_init__(self) -> None:
        if self.kind not in EVENT_KINDS:
            raise ValueError(f"unknown event kind {self.kind!r}")
        if self.t < 0:
            raise ValueError("event time must be non-negative")
        if _RESERVED_KEYS & self.attrs.keys():
            raise ValueError("attrs may not shadow 't' or 'kind'")

    def to_json(self) -> dict:
        return {"t": self.t, "kind": self.kind, **self.attrs}

    @classmethod
    def from_json(cls, d: dict) -> "EventRecord":
        attrs = {k: v for k, v in d.items() if k not in _RESERVED_KEYS}
        return cls(t=int(d["t"]), kind=d["kind"], attrs=attrs)


class LogError(ValueError):
    def __init__(self, line_no: int, message: str):
        super().__init__(f"line {line_no}: {message}")
        self.line_no = line_no


def _dumps(obj: dict) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"))


def records_to_lines(records: Iterable[EventRecord], meta: dict | None = None) -> list[str]:
    header = {"schema_version": SCHEMA_VERSION, **(meta or {})}
    return [_dumps(header)] + [_dumps(r.to_json()) for r in records]


def lines_to_records(lines: Iterable[str]) -> tuple[dict, list[EventRecord]]:
    meta: dict | None = None
    records: list[EventRecord] = []
    last_t: int | None = None
    for line_no, line in enumerate(lines, start=1):
        if not line.strip():
            continue
        try:
            doc = json.loads(line)
        except json.JSONDecodeError as exc:
            raise LogError(line_no, f"malformed JSON: {exc.msg}") from exc
        if meta is None:
            if "schema_version" not in doc:
                raise LogError(line_no, "first record must carry schema_version")
            meta = doc
            continue
        try:
            rec = EventRecord.from_json(doc)
        except (KeyError, ValueError) as exc:
            raise LogError(line_no, f"bad event record: {exc}") from exc
        if last_t is not None and rec.t < last_t:
            raise LogError(line_no, f"timestamp {rec.t} decreases (previous {last_t})")
        last_t = rec.t
        records.append(rec)
    if meta is None:
        meta = {"schema_version": SCHEMA_VERSION}
    return meta, records


def write_log(path: str | Path, records: Iterable[EventRecord], meta: dict | None = None) -> None:
    lines = records_to_lines(records, meta)
    Path(path).write_text("\n".join(lines) + "\n")


def read_log(path: str | Path) -> tuple[dict, list[EventRecord]]:
    return lines_to_records(Path(path).read_text().splitlines())
