"""Logical circuits over {X, Z, H, S, T, CNOT} and their text format."""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from ..state_sim import ContractViolation, GateOp, init_register

ARITY = {"X": 1, "Z": 1, "H": 1, "S": 1, "T": 1, "CNOT": 2}


@dataclass
class LogicalCircuit:
    wires: int
    gates: list[tuple[str, tuple[int, ...]]] = field(default_factory=list)

    def __post_init__(self):
        self.gates = [(kind, tuple(w)) for kind, w in self.gates]
        for kind, w in self.gates:
            if kind not in ARITY:
                raise ContractViolation(f"unsupported gate {kind!r}")
            if len(w) != ARITY[kind] or len(set(w)) != len(w):
                raise ContractViolation(f"bad wires for {kind}: {w}")
            if not all(0 <= x < self.wires for x in w):
                raise ContractViolation(f"{kind} {w} references a wire outside 0..{self.wires - 1}")

    @property
    def t_count(self) -> int:
        return sum(kind == "T" for kind, _ in self.gates)

    def to_text(self) -> str:
        return "".join(f"{kind} {' '.join(map(str, w))}\n" for kind, w in self.gates)

    @classmethod
    def parse(cls, text: str, wires: int | None = None) -> "LogicalCircuit":
        """Read one gate per line (``H 0``, ``CNOT 0 1``); ``#`` starts a comment line."""
        gates = []
        for lineno, raw in enumerate(text.splitlines(), 1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            kind, *args = line.split()
            if kind not in ARITY:
                raise ContractViolation(f"line {lineno}: unknown gate {kind!r}")
            try:
                gates.append((kind, tuple(int(a) for a in args)))
            except ValueError:
                raise ContractViolation(f"line {lineno}: wire indices must be integers") from None
        if wires is None:
            wires = 1 + max((max(w) for _, w in gates if w), default=0)
        return cls(wires, gates)

    @classmethod
    def load(cls, path: str | Path, wires: int | None = None) -> "LogicalCircuit":
        return cls.parse(Path(path).read_text(encoding="utf-8"), wires)


def ideal_output(circuit: LogicalCircuit, inputs: list[np.ndarray]) -> np.ndarray:
    """Plain (unencrypted) state-vector result; wire 0 is the least significant bit."""
    reg = init_register(inputs)
    for kind, w in circuit.gates:
        reg.apply(GateOp(kind, w))
    return reg.amplitudes.copy()
