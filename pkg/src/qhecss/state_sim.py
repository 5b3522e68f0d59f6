"""State-vector backend with symbolic maximally mixed slots.

Ordering convention: dense qubit ``i`` is bit ``i`` of the amplitude index
(little-endian).  Every density matrix produced here uses the same rule
over the requested position list: ``positions[0]`` is the least
significant bit.

Positions are arbitrary hashable labels.  A position is either a dense
qubit (it has an index into ``amplitudes``) or an MMS slot, a qubit in the
state I/2 that is never stored.  MMS slots are unchanged by any unitary that
acts on MMS slots only.  When an entangling gate pairs an MMS slot with a
dense qubit, the slot is promoted: it is replaced by a random computational
basis state, which reproduces I/2 on average over trajectories.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Hashable, Iterable, Sequence

import numpy as np

from .pauli import PauliString

Label = Hashable

ORACLE_LIMIT = 10
NORM_TOL = 1e-10

_S2 = 1 / math.sqrt(2)
ONE_QUBIT = {
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
    "H": np.array([[_S2, _S2], [_S2, -_S2]], dtype=complex),
    "S": np.diag([1, 1j]).astype(complex),
    "Sdg": np.diag([1, -1j]).astype(complex),
    "T": np.diag([1, np.exp(1j * math.pi / 4)]),
    "Tdg": np.diag([1, np.exp(-1j * math.pi / 4)]),
}
_DIAGONAL_PHASE = {"Z": -1, "S": 1j, "Sdg": -1j, "T": np.exp(1j * math.pi / 4), "Tdg": np.exp(-1j * math.pi / 4)}
_ARITY = {**{k: 1 for k in ONE_QUBIT}, "CNOT": 2, "SWAP": 2}
INVERSE = {"X": "X", "Y": "Y", "Z": "Z", "H": "H", "S": "Sdg", "Sdg": "S", "T": "Tdg", "Tdg": "T",
           "CNOT": "CNOT", "SWAP": "SWAP"}

KET0 = np.array([1, 0], dtype=complex)
KET1 = np.array([0, 1], dtype=complex)
KET_PLUS = np.array([_S2, _S2], dtype=complex)
KET_MINUS = np.array([_S2, -_S2], dtype=complex)


class ContractViolation(ValueError):
    """An operation was called outside its documented preconditions."""


class OracleLimitExceeded(ContractViolation):
    pass


@dataclass(frozen=True)
class GateOp:
    kind: str
    targets: tuple

    def __post_init__(self):
        if self.kind not in _ARITY:
            raise ContractViolation(f"unknown gate {self.kind!r}")
        object.__setattr__(self, "targets", tuple(self.targets))
        if len(self.targets) != _ARITY[self.kind]:
            raise ContractViolation(f"{self.kind} takes {_ARITY[self.kind]} target(s), got {self.targets}")
        if len(set(self.targets)) != len(self.targets):
            raise ContractViolation(f"repeated targets in {self.kind} {self.targets}")

    def inverse(self) -> "GateOp":
        return GateOp(INVERSE[self.kind], self.targets)

    def relabel(self, mapping) -> "GateOp":
        return GateOp(self.kind, tuple(mapping[t] for t in self.targets))

    def to_json(self) -> dict:
        return {"kind": self.kind, "targets": list(self.targets)}

    @classmethod
    def from_json(cls, d: dict) -> "GateOp":
        return cls(d["kind"], tuple(d["targets"]))


class QuantumRegister:
    """Pure dense qubits plus symbolic I/2 slots, addressed by position label."""

    def __init__(self, rng: np.random.Generator | None = None):
        self.amplitudes = np.ones(1, dtype=complex)
        self.dense: list[Label] = []
        self.mms: set[Label] = set()
        self.positions: list[Label] = []
        self.consumed: set[Label] = set()
        self.noise_log: list[tuple[Label, str]] = []
        self.rng = rng if rng is not None else np.random.default_rng()
        self._forward: QuantumRegister | None = None

    # ---- bookkeeping -------------------------------------------------
    @property
    def num_dense(self) -> int:
        return len(self.dense)

    @property
    def mms_slots(self) -> set[Label]:
        return set(self.mms)

    @property
    def layout(self) -> dict:
        out = {}
        for p in self.positions:
            if p in self.mms:
                out[p] = ("mms", p)
            elif p in self._dense_index:
                out[p] = ("dense", self._dense_index[p])
        return out

    @property
    def _dense_index(self) -> dict:
        return {p: i for i, p in enumerate(self.dense)}

    def resolve(self) -> "QuantumRegister":
        """Follow merges to the register that currently owns this state."""
        reg = self
        while reg._forward is not None:
            reg = reg._forward
        return reg

    def is_dense(self, label: Label) -> bool:
        return label in self._dense_index

    def is_mms(self, label: Label) -> bool:
        return label in self.mms

    def _check(self, label: Label) -> None:
        if label in self.consumed:
            raise ContractViolation(f"position {label!r} was already measured")
        if label not in self.mms and label not in self._dense_index:
            raise ContractViolation(f"position {label!r} not in register")

    def add_dense(self, label: Label, state=KET0) -> None:
        """Append a fresh dense qubit as the new most significant bit."""
        state = _normalized(state)
        if len(state) != 2:
            raise ContractViolation("add_dense takes a single-qubit state")
        self._claim(label)
        self.amplitudes = np.kron(state, self.amplitudes)
        self.dense.append(label)

    def add_mms(self, label: Label) -> None:
        self._claim(label)
        self.mms.add(label)

    def _claim(self, label: Label) -> None:
        if label in self.positions:
            raise ContractViolation(f"position {label!r} already used")
        self.positions.append(label)

    def absorb(self, other: "QuantumRegister") -> None:
        """Tensor ``other`` into this register; ``other`` forwards here afterwards."""
        other = other.resolve()
        if other is self:
            return
        clash = set(self.positions) & set(other.positions)
        if clash:
            raise ContractViolation(f"registers share positions {sorted(map(str, clash))[:3]}")
        self.amplitudes = np.kron(other.amplitudes, self.amplitudes)
        self.dense.extend(other.dense)
        self.mms |= other.mms
        self.positions.extend(other.positions)
        self.consumed |= other.consumed
        self.noise_log.extend(other.noise_log)
        other._forward = self
        other.amplitudes = np.ones(1, dtype=complex)
        other.dense, other.mms, other.positions = [], set(), []

    def copy(self) -> "QuantumRegister":
        reg = self.resolve()
        new = QuantumRegister(reg.rng)
        new.amplitudes = reg.amplitudes.copy()
        new.dense = list(reg.dense)
        new.mms = set(reg.mms)
        new.positions = list(reg.positions)
        new.consumed = set(reg.consumed)
        new.noise_log = list(reg.noise_log)
        return new

    # ---- gates -------------------------------------------------------
    def _view(self, idx: int) -> np.ndarray:
        lo = 1 << idx
        return self.amplitudes.reshape(-1, 2, lo)

    def _apply_one(self, kind: str, idx: int) -> None:
        v = self._view(idx)
        if kind in _DIAGONAL_PHASE:
            v[:, 1, :] *= _DIAGONAL_PHASE[kind]
        elif kind == "X":
            a = v[:, 0, :].copy()
            v[:, 0, :] = v[:, 1, :]
            v[:, 1, :] = a
        elif kind == "Y":
            a = v[:, 0, :].copy()
            v[:, 0, :] = -1j * v[:, 1, :]
            v[:, 1, :] = 1j * a
        elif kind == "H":
            a = v[:, 0, :].copy()
            b = v[:, 1, :].copy()
            v[:, 0, :] = (a + b) * _S2
            v[:, 1, :] = (a - b) * _S2
        else:
            raise ContractViolation(f"not a single-qubit gate: {kind}")

    def _apply_two(self, kind: str, i: int, j: int) -> None:
        n = self.num_dense
        t = self.amplitudes.reshape([2] * n)
        ai, aj = n - 1 - i, n - 1 - j

        def at(bi, bj):
            sl = [slice(None)] * n
            sl[ai], sl[aj] = bi, bj
            return tuple(sl)

        if kind == "CNOT":
            a = t[at(1, 0)].copy()
            t[at(1, 0)] = t[at(1, 1)]
            t[at(1, 1)] = a
        elif kind == "SWAP":
            a = t[at(0, 1)].copy()
            t[at(0, 1)] = t[at(1, 0)]
            t[at(1, 0)] = a
        else:
            raise ContractViolation(f"not a two-qubit gate: {kind}")

    def promote(self, label: Label) -> int:
        """Turn an MMS slot into a dense qubit in a uniformly random basis state."""
        if label not in self.mms:
            raise ContractViolation(f"{label!r} is not an MMS slot")
        bit = int(self.rng.integers(2))
        self.mms.discard(label)
        self.amplitudes = np.kron(KET1 if bit else KET0, self.amplitudes)
        self.dense.append(label)
        return bit

    def apply(self, gate: GateOp) -> None:
        for t in gate.targets:
            self._check(t)
        on_mms = [t in self.mms for t in gate.targets]
        if all(on_mms):
            return
        for t, is_mms in zip(gate.targets, on_mms):
            if is_mms:
                self.promote(t)
        index = self._dense_index
        idx = [index[t] for t in gate.targets]
        if len(idx) == 1:
            self._apply_one(gate.kind, idx[0])
        else:
            self._apply_two(gate.kind, idx[0], idx[1])

    def apply_pauli(self, pauli: PauliString, labels: Sequence[Label]) -> None:
        """Apply a Pauli string; ``pauli.ops[j]`` acts on ``labels[j]``. Global phase is dropped."""
        for op, label in zip(pauli.ops, labels):
            if op != "I":
                self.apply(GateOp(op, (label,)))

    # ---- measurement -------------------------------------------------
    def measure(self, label: Label, rng: np.random.Generator | None = None) -> int:
        self._check(label)
        rng = rng if rng is not None else self.rng
        if label in self.mms:
            self.mms.discard(label)
            self.consumed.add(label)
            return int(rng.integers(2))
        idx = self._dense_index[label]
        v = self._view(idx)
        p1 = float(np.sum(np.abs(v[:, 1, :]) ** 2))
        p1 = min(max(p1, 0.0), 1.0)
        bit = int(rng.random() < p1)
        kept = v[:, bit, :]
        norm = math.sqrt(p1 if bit else 1.0 - p1)
        self.amplitudes = np.ascontiguousarray(kept).reshape(-1) / norm
        self.dense.pop(idx)
        self.consumed.add(label)
        return bit

    # ---- inspection --------------------------------------------------
    def norm(self) -> float:
        return float(np.vdot(self.amplitudes, self.amplitudes).real)

    def reduced_dense(self, labels: Sequence[Label]) -> np.ndarray:
        """Reduced density matrix of dense qubits ``labels`` (little-endian in list order)."""
        index = self._dense_index
        n = self.num_dense
        axes = [n - 1 - index[p] for p in reversed(labels)]
        rest = [a for a in range(n) if a not in axes]
        t = self.amplitudes.reshape([2] * n).transpose(axes + rest)
        m = t.reshape(1 << len(labels), -1)
        return m @ m.conj().T

    def expectation(self, pauli: PauliString, labels: Sequence[Label]) -> float:
        """<psi|P|psi> for a Pauli on dense labels."""
        probe = self.copy()
        probe.apply_pauli(pauli, labels)
        return float(((1j ** pauli.phase) * np.vdot(self.amplitudes, probe.amplitudes)).real)

    def to_json(self) -> dict:
        reg = self.resolve()
        return {
            "ordering": "little-endian",
            "positions": [_jsonable(p) for p in reg.positions],
            "dense": [_jsonable(p) for p in reg.dense],
            "mms": [_jsonable(p) for p in reg.positions if p in reg.mms],
            "consumed": [_jsonable(p) for p in reg.positions if p in reg.consumed],
            "amplitudes": [[float(a.real), float(a.imag)] for a in reg.amplitudes],
        }

    @classmethod
    def from_json(cls, d: dict, rng: np.random.Generator | None = None) -> "QuantumRegister":
        reg = cls(rng)
        reg.positions = [_label(p) for p in d["positions"]]
        reg.dense = [_label(p) for p in d["dense"]]
        reg.mms = {_label(p) for p in d["mms"]}
        reg.consumed = {_label(p) for p in d.get("consumed", [])}
        reg.amplitudes = np.array([complex(re, im) for re, im in d["amplitudes"]], dtype=complex)
        if len(reg.amplitudes) != 1 << len(reg.dense):
            raise ContractViolation("amplitude count does not match dense qubits")
        return reg


def _jsonable(label):
    return list(label) if isinstance(label, tuple) else label


def _label(obj):
    return tuple(obj) if isinstance(obj, list) else obj


def _normalized(state) -> np.ndarray:
    v = np.asarray(state, dtype=complex).reshape(-1)
    if v.size == 0 or v.size & (v.size - 1):
        raise ContractViolation(f"state length {v.size} is not a power of two")
    if abs(np.vdot(v, v).real - 1.0) > NORM_TOL:
        raise ContractViolation("input state is not normalized")
    return v


# ---- functional interface ---------------------------------------------

def init_register(dense_states: Iterable, mms_count: int = 0, layout: Sequence[Label] | None = None,
                  rng: np.random.Generator | None = None) -> QuantumRegister:
    """Build a register from pure states and MMS slots.

    ``dense_states`` are given in position order: a single-qubit state takes
    one position, a ``2**j`` block takes ``j`` positions (itself
    little-endian).  ``layout`` labels the dense positions first, then the
    ``mms_count`` MMS slots; it defaults to ``0, 1, 2, ...``.
    """
    blocks = [_normalized(s) for s in dense_states]
    widths = [int(b.size).bit_length() - 1 for b in blocks]
    total = sum(widths) + mms_count
    labels = list(range(total)) if layout is None else list(layout)
    if len(labels) != total or len(set(labels)) != total:
        raise ContractViolation(f"layout must name {total} distinct positions")
    reg = QuantumRegister(rng)
    amps = np.ones(1, dtype=complex)
    for b in blocks:
        amps = np.kron(b, amps)
    reg.amplitudes = amps
    reg.dense = labels[: sum(widths)]
    reg.positions = list(labels)
    reg.mms = set(labels[sum(widths):])
    return reg


def apply_gate(reg: QuantumRegister, g: GateOp) -> None:
    reg.resolve().apply(g)


def apply_depolarizing(reg: QuantumRegister, position: Label, p: float,
                       rng: np.random.Generator) -> PauliString:
    """Sample one Kraus branch of the depolarizing channel at ``position``."""
    if not 0.0 <= p <= 1.0:
        raise ContractViolation(f"depolarizing probability {p} outside [0, 1]")
    reg = reg.resolve()
    reg._check(position)
    op = "I"
    if p > 0 and rng.random() < p:
        op = "XYZ"[int(rng.integers(3))]
    reg.noise_log.append((position, op))
    if op != "I" and not reg.is_mms(position):
        reg.apply(GateOp(op, (position,)))
    return PauliString(op)


def measure_z_all(reg: QuantumRegister, positions: Sequence[Label],
                  rng: np.random.Generator) -> list[int]:
    reg = reg.resolve()
    return [reg.measure(p, rng) for p in positions]


def permute_qubits(rho: np.ndarray, order: Sequence[int]) -> np.ndarray:
    """Reorder qubits so that new qubit ``j`` is old qubit ``order[j]`` (little-endian)."""
    n = len(order)
    t = np.asarray(rho).reshape([2] * (2 * n))
    axes = [n - 1 - order[n - 1 - a] for a in range(n)]
    return t.transpose(axes + [a + n for a in axes]).reshape(1 << n, 1 << n)


def densify(reg: QuantumRegister, positions: Sequence[Label] | None = None,
            limit: int = ORACLE_LIMIT) -> np.ndarray:
    """Exact density matrix over ``positions`` (all live positions by default)."""
    reg = reg.resolve()
    if positions is None:
        positions = [p for p in reg.positions if p not in reg.consumed]
    positions = list(positions)
    if len(positions) > limit:
        raise OracleLimitExceeded(f"{len(positions)} positions exceed oracle limit {limit}")
    for p in positions:
        reg._check(p)
    dense = [p for p in positions if reg.is_dense(p)]
    mms = [p for p in positions if reg.is_mms(p)]
    rho = reg.reduced_dense(dense)
    for _ in mms:
        rho = np.kron(np.eye(2) / 2, rho)
    current = dense + mms
    return permute_qubits(rho, [current.index(p) for p in positions])


def fidelity(a: np.ndarray, b: np.ndarray) -> float:
    """Uhlmann fidelity (Tr sqrt(sqrt(a) b sqrt(a)))**2, clipped to [0, 1]."""
    a, b = np.asarray(a, dtype=complex), np.asarray(b, dtype=complex)
    if a.shape != b.shape:
        raise ContractViolation(f"dimension mismatch {a.shape} vs {b.shape}")
    w, v = np.linalg.eigh((a + a.conj().T) / 2)
    root = (v * np.sqrt(np.clip(w, 0, None))) @ v.conj().T
    inner = np.linalg.eigvalsh(root @ b @ root)
    f = float(np.sum(np.sqrt(np.clip(inner, 0, None))) ** 2)
    return min(max(f, 0.0), 1.0)


def pure_density(state) -> np.ndarray:
    v = np.asarray(state, dtype=complex).reshape(-1)
    return np.outer(v, v.conj())


def is_density_matrix(rho: np.ndarray, tol: float = 1e-8) -> bool:
    rho = np.asarray(rho)
    if not np.allclose(rho, rho.conj().T, atol=1e-10):
        return False
    if abs(np.trace(rho).real - 1.0) > 1e-10:
        return False
    return bool(np.linalg.eigvalsh(rho).min() >= -tol)

