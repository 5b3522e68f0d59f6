"""Phase-tracked Pauli strings."""

from __future__ import annotations

from dataclasses import dataclass
from functools import reduce

import numpy as np

_PHASE_TEXT = {0: "+", 1: "+i", 2: "-", 3: "-i"}
_TEXT_PHASE = {"+": 0, "": 0, "+i": 1, "i": 1, "-": 2, "-i": 3}

# (a, b) -> (c, k) with a*b = i^k c
_PRODUCT = {
    ("I", "I"): ("I", 0), ("I", "X"): ("X", 0), ("I", "Y"): ("Y", 0), ("I", "Z"): ("Z", 0),
    ("X", "I"): ("X", 0), ("X", "X"): ("I", 0), ("X", "Y"): ("Z", 1), ("X", "Z"): ("Y", 3),
    ("Y", "I"): ("Y", 0), ("Y", "X"): ("Z", 3), ("Y", "Y"): ("I", 0), ("Y", "Z"): ("X", 1),
    ("Z", "I"): ("Z", 0), ("Z", "X"): ("Y", 1), ("Z", "Y"): ("X", 3), ("Z", "Z"): ("I", 0),
}

MATRICES = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}


@dataclass(frozen=True)
class PauliString:
    """An n-qubit Pauli operator ``i**phase * ops[0] (x) ops[1] ...``.

    ``ops[j]`` acts on qubit ``j``; ``phase`` is the exponent of ``i`` (mod 4).
    """

    ops: str
    phase: int = 0

    def __post_init__(self):
        if any(c not in "IXYZ" for c in self.ops):
            raise ValueError(f"invalid Pauli letters in {self.ops!r}")
        object.__setattr__(self, "phase", self.phase % 4)

    @classmethod
    def parse(cls, text: str) -> "PauliString":
        """Parse ``"XIZ"``, ``"-XIZ"``, ``"+iYY"`` and similar."""
        body = text.lstrip("+-i")
        return cls(body, _TEXT_PHASE[text[: len(text) - len(body)]])

    @classmethod
    def identity(cls, n: int) -> "PauliString":
        return cls("I" * n)

    @classmethod
    def single(cls, n: int, index: int, op: str) -> "PauliString":
        if not 0 <= index < n:
            raise IndexError(f"qubit {index} out of range for length {n}")
        return cls("I" * index + op + "I" * (n - index - 1))

    @classmethod
    def from_bits(cls, x, z, phase: int = 0) -> "PauliString":
        """Build from X/Z support vectors (Y where both are set)."""
        letters = {(0, 0): "I", (1, 0): "X", (0, 1): "Z", (1, 1): "Y"}
        return cls("".join(letters[int(a) % 2, int(b) % 2] for a, b in zip(x, z)), phase)

    def __len__(self) -> int:
        return len(self.ops)

    def __str__(self) -> str:
        return _PHASE_TEXT[self.phase] + self.ops

    @property
    def weight(self) -> int:
        return sum(c != "I" for c in self.ops)

    @property
    def x_bits(self) -> np.ndarray:
        return np.array([c in "XY" for c in self.ops], dtype=np.uint8)

    @property
    def z_bits(self) -> np.ndarray:
        return np.array([c in "ZY" for c in self.ops], dtype=np.uint8)

    def __mul__(self, other: "PauliString") -> "PauliString":
        if len(self) != len(other):
            raise ValueError("Pauli strings of different length")
        phase = self.phase + other.phase
        out = []
        for a, b in zip(self.ops, other.ops):
            c, k = _PRODUCT[a, b]
            out.append(c)
            phase += k
        return PauliString("".join(out), phase)

    def commutes_with(self, other: "PauliString") -> bool:
        if len(self) != len(other):
            raise ValueError("Pauli strings of different length")
        sx, sz, ox, oz = self.x_bits, self.z_bits, other.x_bits, other.z_bits
        return int(sx @ oz + sz @ ox) % 2 == 0

    def equiv(self, other: "PauliString") -> bool:
        """Equality up to global phase."""
        return self.ops == other.ops

    def to_matrix(self) -> np.ndarray:
        """Dense matrix with qubit 0 as the least significant index bit."""
        mats = [MATRICES[c] for c in reversed(self.ops)] or [np.eye(1, dtype=complex)]
        return (1j ** self.phase) * reduce(np.kron, mats)
