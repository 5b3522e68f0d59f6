"""Classical client/server messages and their line-delimited JSON encoding."""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Union


class ProtocolError(RuntimeError):
    """A peer sent something the protocol does not allow."""


@dataclass(frozen=True)
class TGateCount:
    r: int
    zero_count: int
    plus_count: int


@dataclass(frozen=True)
class MeasurementReport:
    block_id: int
    bits: str


@dataclass(frozen=True)
class CorrectionInstruction:
    block_id: int
    ops: str


@dataclass(frozen=True)
class SyndromeReport:
    block_id: int
    x_bits: str
    z_bits: str


@dataclass(frozen=True)
class Ack:
    pass


ClassicalMessage = Union[TGateCount, MeasurementReport, CorrectionInstruction, SyndromeReport, Ack]

_TYPES = {
    "t_gate_count": TGateCount,
    "measurement_report": MeasurementReport,
    "correction_instruction": CorrectionInstruction,
    "syndrome_report": SyndromeReport,
    "ack": Ack,
}
_NAMES = {cls: name for name, cls in _TYPES.items()}


def bits_to_str(bits) -> str:
    return "".join("1" if int(b) else "0" for b in bits)


def str_to_bits(text: str) -> list[int]:
    if any(c not in "01" for c in text):
        raise ProtocolError(f"bit string contains characters other than 0/1: {text!r}")
    return [int(c) for c in text]


def to_dict(msg: ClassicalMessage) -> dict:
    out = {"type": _NAMES[type(msg)]}
    out.update(msg.__dict__)
    return out


def from_dict(d: dict) -> ClassicalMessage:
    try:
        cls = _TYPES[d["type"]]
    except KeyError:
        raise ProtocolError(f"unknown message type {d.get('type')!r}") from None
    fields = {k: v for k, v in d.items() if k != "type"}
    try:
        return cls(**fields)
    except TypeError as exc:
        raise ProtocolError(f"bad fields for {d['type']}: {exc}") from None


def encode(msg: ClassicalMessage) -> str:
    """One JSON object terminated by a newline."""
    return json.dumps(to_dict(msg), separators=(",", ":")) + "\n"


def decode(line: str) -> ClassicalMessage:
    return from_dict(json.loads(line))


def check_lengths(msg: ClassicalMessage, block_size: int) -> None:
    """Enforce the session's 2mn bit/op length and alphabet."""
    if isinstance(msg, MeasurementReport):
        fields, alphabet = [msg.bits], "01"
    elif isinstance(msg, SyndromeReport):
        fields, alphabet = [msg.x_bits, msg.z_bits], "01"
    elif isinstance(msg, CorrectionInstruction):
        fields, alphabet = [msg.ops], "ISXZ"
    else:
        return
    for f in fields:
        if len(f) != block_size:
            raise ProtocolError(f"{type(msg).__name__} has length {len(f)}, expected {block_size}")
        if any(c not in alphabet for c in f):
            raise ProtocolError(f"{type(msg).__name__} uses symbols outside {alphabet!r}")
