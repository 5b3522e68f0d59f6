"""CSS stabilizer codes: construction, validation, syndromes and decoding.

Qubits are 0-indexed in code; the Steane check matrix is fixed as

    1110100
    1101010
    1011001

(qubit 1 is the leftmost column when counting from 1).
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from . import gf2
from .pauli import PauliString
from .state_sim import KET0, KET_PLUS, ContractViolation, GateOp, init_register

STEANE_CHECKS = np.array(
    [[1, 1, 1, 0, 1, 0, 0],
     [1, 1, 0, 1, 0, 1, 0],
     [1, 0, 1, 1, 0, 0, 1]],
    dtype=np.uint8,
)


def _steane_encoder() -> tuple[GateOp, ...]:
    # Message on qubit 0.  Copy it onto the rest of the weight-3 logical-X
    # representative {0, 1, 6}, then open each X stabilizer from a pivot that
    # no other generator (or that representative) touches:
    #   pivot 4 -> rows 1+3 = {1, 3, 4, 6}
    #   pivot 5 -> row 2    = {0, 1, 3, 5}
    #   pivot 2 -> row 3    = {0, 2, 3, 6}
    gates = [GateOp("CNOT", (0, 1)), GateOp("CNOT", (0, 6))]
    generators = {4: (1, 3, 6), 5: (0, 1, 3), 2: (0, 3, 6)}
    gates += [GateOp("H", (p,)) for p in generators]
    for pivot, others in generators.items():
        gates += [GateOp("CNOT", (pivot, q)) for q in others]
    return tuple(gates)


@dataclass(frozen=True, eq=False)
class CssCode:
    """An [[n, k, d]] CSS code.

    ``h_x`` rows are X-type stabilizers, ``h_z`` rows Z-type.  The encoding
    circuit acts on code indices and maps the message on ``input_qubits``
    (other qubits starting in |0>) into the code space.
    """

    name: str
    n: int
    k: int
    d: int
    h_x: np.ndarray
    h_z: np.ndarray
    logical_x: tuple[PauliString, ...]
    logical_z: tuple[PauliString, ...]
    encoding_circuit: tuple[GateOp, ...]
    input_qubits: tuple[int, ...] = field(default=(0,))

    @property
    def t(self) -> int:
        """Number of correctable errors, floor((d - 1) / 2)."""
        return (self.d - 1) // 2

    @property
    def stabilizers(self) -> list[PauliString]:
        gens = [PauliString.from_bits(row, np.zeros(self.n)) for row in self.h_x]
        gens += [PauliString.from_bits(np.zeros(self.n), row) for row in self.h_z]
        return gens

    @property
    def transversal_phase(self) -> str:
        """Physical gate whose n-fold product acts as logical S.

        On a doubly-even code every word in the |1> coset has weight equal
        to the logical-X weight mod 4, so S on each qubit multiplies |1_L> by
        i**w.  w = 1 needs S, w = 3 needs its inverse.
        """
        w = self.logical_x[0].weight % 4
        if w == 1:
            return "S"
        if w == 3:
            return "Sdg"
        raise ContractViolation(f"{self.name}: transversal phase gate is not logical S")

    def x_checks_of(self, bits) -> np.ndarray:
        """Syndrome of X-type errors with support ``bits`` (from h_z)."""
        return gf2.matvec(self.h_z, bits)

    def z_checks_of(self, bits) -> np.ndarray:
        return gf2.matvec(self.h_x, bits)

    @cached_property
    def _x_table(self) -> dict[tuple, np.ndarray]:
        return _min_weight_table(self.h_z, self.n)

    @cached_property
    def _z_table(self) -> dict[tuple, np.ndarray]:
        return _min_weight_table(self.h_x, self.n)

    def to_json(self) -> dict:
        return {
            "name": self.name,
            "n": self.n, "k": self.k, "d": self.d,
            "h_x": self.h_x.tolist(), "h_z": self.h_z.tolist(),
            "logical_x": [str(p) for p in self.logical_x],
            "logical_z": [str(p) for p in self.logical_z],
            "encoding_circuit": [g.to_json() for g in self.encoding_circuit],
            "input_qubits": list(self.input_qubits),
        }

    @classmethod
    def from_json(cls, d: dict | str) -> "CssCode":
        if isinstance(d, str):
            d = json.loads(d)
        n = d["n"]
        return cls(
            name=d.get("name", "custom"),
            n=n, k=d["k"], d=d["d"],
            h_x=np.array(d["h_x"], dtype=np.uint8).reshape(-1, n),
            h_z=np.array(d["h_z"], dtype=np.uint8).reshape(-1, n),
            logical_x=tuple(PauliString.parse(p) for p in d["logical_x"]),
            logical_z=tuple(PauliString.parse(p) for p in d["logical_z"]),
            encoding_circuit=tuple(GateOp.from_json(g) for g in d["encoding_circuit"]),
            input_qubits=tuple(d.get("input_qubits", range(d["k"]))),
        )


def _min_weight_table(checks: np.ndarray, n: int) -> dict[tuple, np.ndarray]:
    """Map each reachable syndrome to a minimum-weight error pattern."""
    checks = np.asarray(checks, dtype=np.uint8).reshape(-1, n)
    rows = checks.shape[0]
    reachable = 1 << gf2.rank(checks) if rows else 1
    table: dict[tuple, np.ndarray] = {}
    for w in range(n + 1):
        for support in itertools.combinations(range(n), w):
            e = np.zeros(n, dtype=np.uint8)
            e[list(support)] = 1
            key = tuple(int(b) for b in gf2.matvec(checks, e))
            table.setdefault(key, e)
        if len(table) == reachable:
            break
    return table


def steane_code() -> CssCode:
    return CssCode(
        name="steane",
        n=7, k=1, d=3,
        h_x=STEANE_CHECKS.copy(),
        h_z=STEANE_CHECKS.copy(),
        logical_x=(PauliString("X" * 7),),
        logical_z=(PauliString("Z" * 7),),
        encoding_circuit=_steane_encoder(),
    )


def identity_code() -> CssCode:
    """Trivial [[1, 1, 1]] code: no checks, no encoding."""
    empty = np.zeros((0, 1), dtype=np.uint8)
    return CssCode(
        name="identity",
        n=1, k=1, d=1,
        h_x=empty, h_z=empty.copy(),
        logical_x=(PauliString("X"),),
        logical_z=(PauliString("Z"),),
        encoding_circuit=(),
    )


CODES = {"steane": steane_code, "identity": identity_code}


def get_code(name: str) -> CssCode:
    try:
        return CODES[name]()
    except KeyError:
        raise ValueError(f"unknown code {name!r}; choose from {sorted(CODES)}") from None


@dataclass(frozen=True)
class Syndrome:
    x_bits: tuple[int, ...]
    z_bits: tuple[int, ...]

    @property
    def trivial(self) -> bool:
        return not any(self.x_bits) and not any(self.z_bits)


@dataclass
class ValidationReport:
    checks: dict[str, bool]

    @property
    def ok(self) -> bool:
        return all(self.checks.values())

    @property
    def failures(self) -> list[str]:
        return [name for name, passed in self.checks.items() if not passed]


def _encoded_state(code: CssCode, message) -> tuple:
    states = [KET0] * code.n
    for q in code.input_qubits:
        states[q] = message
    reg = init_register(states)
    for g in code.encoding_circuit:
        reg.apply(g)
    return reg, list(range(code.n))


def validate_css_properties(code: CssCode) -> ValidationReport:
    """Check the structural properties the scheme relies on; never raises."""
    hx, hz = np.asarray(code.h_x, dtype=np.int64), np.asarray(code.h_z, dtype=np.int64)
    checks: dict[str, bool] = {}
    checks["css_commutation"] = bool(not ((hx @ hz.T) % 2).any()) if hx.size and hz.size else True
    checks["self_dual"] = gf2.same_row_space(hx, hz)
    checks["doubly_even"] = bool(all(int(r.sum()) % 4 == 0 for r in hx))

    logical_ok = len(code.logical_x) == len(code.logical_z) == code.k
    stabs = code.stabilizers
    for i, lx in enumerate(code.logical_x):
        for j, lz in enumerate(code.logical_z):
            if lx.commutes_with(lz) == (i == j):
                logical_ok = False
    for op in (*code.logical_x, *code.logical_z):
        if not all(op.commutes_with(s) for s in stabs):
            logical_ok = False
    checks["logical_operators"] = logical_ok

    try:
        reg, labels = _encoded_state(code, KET0)
        checks["encoding_circuit"] = all(abs(reg.expectation(s, labels) - 1) < 1e-9 for s in stabs)
    except (ContractViolation, IndexError, KeyError):
        checks["encoding_circuit"] = False
    return ValidationReport(checks)


def syndrome_of(code: CssCode, error: PauliString) -> Syndrome:
    if len(error) != code.n:
        raise ContractViolation(f"error has length {len(error)}, code has n={code.n}")
    return Syndrome(
        tuple(int(b) for b in code.x_checks_of(error.x_bits)),
        tuple(int(b) for b in code.z_checks_of(error.z_bits)),
    )


def decode_syndrome(code: CssCode, s: Syndrome) -> PauliString:
    """Minimum-weight correction, X and Z parts decoded independently.

    Unreachable syndromes (possible only for codes with redundant checks)
    fall back to the identity on that part.
    """
    if len(s.x_bits) != code.h_z.shape[0] or len(s.z_bits) != code.h_x.shape[0]:
        raise ContractViolation("syndrome does not match the code's check counts")
    zero = np.zeros(code.n, dtype=np.uint8)
    x = code._x_table.get(tuple(s.x_bits), zero)
    z = code._z_table.get(tuple(s.z_bits), zero)
    return PauliString.from_bits(x, z)


def correct_bits(code: CssCode, bits) -> tuple[np.ndarray, bool]:
    """Nearest codeword of ker(h_z) and whether any correction was needed."""
    bits = np.asarray(bits, dtype=np.uint8) % 2
    syn = tuple(int(b) for b in code.x_checks_of(bits))
    flip = code._x_table.get(syn, np.zeros(code.n, dtype=np.uint8))
    return bits ^ flip, any(syn)


def decode_logical_z_readout(code: CssCode, bits) -> tuple[int, bool]:
    """Interpret a transversal Z readout as a logical bit.

    The raw bits are moved to the nearest codeword of the classical code
    ker(h_z) first; the logical bit is the parity of the corrected bits on
    the support of logical Z.
    """
    bits = np.asarray(bits, dtype=np.uint8)
    if bits.shape != (code.n,):
        raise ContractViolation(f"readout has {bits.size} bits, code has n={code.n}")
    corrected, detected = correct_bits(code, bits)
    logical = int(corrected @ code.logical_z[0].z_bits.astype(np.uint8)) % 2
    return logical, detected


def in_stabilizer_group(code: CssCode, op: PauliString) -> bool:
    """Membership up to phase, via GF(2) row-space tests on each part."""
    return gf2.in_row_space(code.h_x, op.x_bits) and gf2.in_row_space(code.h_z, op.z_bits)
