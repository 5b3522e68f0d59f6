"""Key generation, encryption, decryption and transversal evaluation.

A cipher block for an [[n, 1, d]] code and group half-width m has 2mn
physical positions, grouped as n groups of 2m.  Position ``g*2m + s`` is
slot ``s`` of group ``g``.  Code qubit ``g`` sits at slot ``key.slots[g]``;
every other position is an MMS slot.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ..css_code import CssCode
from ..pauli import PauliString
from ..state_sim import KET0, ContractViolation, GateOp, QuantumRegister, apply_depolarizing, init_register
from .messages import ProtocolError

# decrypt() moves each code qubit to the head of its group with adjacent
# swaps, so swap_count <= n(2m - 1) < SWAP_CONSTANT * (r + 1) * n * m.
SWAP_CONSTANT = 2

TRANSVERSAL_GATES = ("X", "Z", "H", "S", "CNOT")


class KeyMismatch(ContractViolation):
    """The block's dense-slot pattern does not match the key."""


@dataclass(frozen=True)
class PermutationKey:
    m: int
    n: int
    slots: tuple[int, ...]
    tag: int = 0

    def __post_init__(self):
        if self.m < 1 or self.n < 1:
            raise ContractViolation("key needs m >= 1 and n >= 1")
        if len(self.slots) != self.n or not all(0 <= s < 2 * self.m for s in self.slots):
            raise ContractViolation(f"slots must be n={self.n} values in [0, {2 * self.m})")

    @property
    def group_size(self) -> int:
        return 2 * self.m

    @property
    def block_size(self) -> int:
        return 2 * self.m * self.n

    @property
    def key_space_size(self) -> int:
        return (2 * self.m) ** self.n

    @property
    def code_positions(self) -> list[int]:
        """Block-local position index of each code qubit."""
        return [g * self.group_size + s for g, s in enumerate(self.slots)]

    def bitstring(self) -> str:
        """The key as n one-hot words of length 2m, concatenated."""
        return "".join("".join("1" if j == s else "0" for j in range(self.group_size)) for s in self.slots)


def keygen(m: int, n: int, rng: np.random.Generator) -> PermutationKey:
    if m < 1 or n < 1:
        raise ContractViolation("keygen needs m >= 1 and n >= 1")
    slots = tuple(int(s) for s in rng.integers(0, 2 * m, size=n))
    return PermutationKey(m, n, slots, tag=int(rng.integers(1, 2**62)))


@dataclass(eq=False)
class CipherBlock:
    block_id: int
    m: int
    n: int
    key_tag: int
    _register: QuantumRegister = field(repr=False)

    @property
    def register(self) -> QuantumRegister:
        reg = self._register.resolve()
        self._register = reg
        return reg

    @property
    def group_size(self) -> int:
        return 2 * self.m

    @property
    def group_count(self) -> int:
        return self.n

    @property
    def size(self) -> int:
        return 2 * self.m * self.n

    def label(self, j: int) -> tuple[int, int]:
        return (self.block_id, j)

    @property
    def positions(self) -> list[tuple[int, int]]:
        return [(self.block_id, j) for j in range(self.size)]

    def group(self, g: int) -> list[tuple[int, int]]:
        return self.positions[g * self.group_size:(g + 1) * self.group_size]


def encrypt(key: PermutationKey, code: CssCode, message, rng: np.random.Generator,
            block_id: int = 0, inner_permutation=None) -> CipherBlock:
    """Encode ``message`` with ``code`` and hide each code qubit in its group."""
    if code.k != 1 or inner_permutation not in (None, (0,)):
        raise NotImplementedError("only k = 1 codes with the identity inner permutation are supported")
    if key.n != code.n:
        raise ContractViolation(f"key is for n={key.n}, code has n={code.n}")
    states = [KET0] * code.n
    states[code.input_qubits[0]] = message
    code_labels = [(block_id, p) for p in key.code_positions]
    taken = set(code_labels)
    mms_labels = [(block_id, j) for j in range(key.block_size) if (block_id, j) not in taken]
    reg = init_register(states, len(mms_labels), code_labels + mms_labels, rng=rng)
    for g in code.encoding_circuit:
        reg.apply(g.relabel(code_labels))
    # keep positions in physical order for readability of dumps
    reg.positions = [(block_id, j) for j in range(key.block_size)]
    return CipherBlock(block_id, key.m, key.n, key.tag, reg)


def _check_block(key: PermutationKey, block: CipherBlock) -> list[tuple[int, int]]:
    if (block.m, block.n) != (key.m, key.n):
        raise KeyMismatch(f"block shape (m={block.m}, n={block.n}) does not match key")
    reg = block.register
    code_labels = [block.label(p) for p in key.code_positions]
    for g in range(key.n):
        dense = [lab for lab in block.group(g) if reg.is_dense(lab)]
        if dense != [code_labels[g]]:
            raise KeyMismatch(f"group {g}: dense slots {dense} do not match the key")
    return code_labels


def decrypt(key: PermutationKey, code: CssCode, block: CipherBlock) -> tuple[np.ndarray, int]:
    """Message qubit's reduced density matrix and the relocation swap count."""
    return decrypt_many(key, code, [block])


def decrypt_many(key: PermutationKey, code: CssCode, blocks: list[CipherBlock]) -> tuple[np.ndarray, int]:
    """Joint state of several messages, wire 0 as the least significant bit."""
    labels = [_check_block(key, b) for b in blocks]
    work: QuantumRegister | None = None
    seen: list[QuantumRegister] = []
    for b in blocks:
        if any(b.register is r for r in seen):
            continue
        seen.append(b.register)
        piece = b.register.copy()
        if work is None:
            work = piece
        else:
            work.absorb(piece)
    messages = []
    for code_labels in labels:
        for g in reversed(code.encoding_circuit):
            work.apply(g.inverse().relabel(code_labels))
        messages.append(code_labels[code.input_qubits[0]])
    swaps = sum(sum(key.slots) for _ in blocks)
    return work.reduced_dense(messages), swaps


def _join(a: CipherBlock, b: CipherBlock) -> QuantumRegister:
    reg = a.register
    reg.absorb(b.register)
    return reg


def apply_transversal(blocks, gate: str, code: CssCode) -> None:
    """Apply a logical gate by acting identically on every position."""
    if isinstance(blocks, CipherBlock):
        blocks = [blocks]
    if gate not in TRANSVERSAL_GATES:
        raise ContractViolation(f"{gate!r} is not transversal here; use the T-gate protocol")
    if gate == "CNOT":
        if len(blocks) != 2:
            raise ContractViolation("CNOT needs a control block and a target block")
        ctrl, tgt = blocks
        if ctrl.key_tag != tgt.key_tag or ctrl.size != tgt.size:
            raise ProtocolError("CNOT across blocks encrypted under different keys")
        reg = _join(ctrl, tgt)
        for a, b in zip(ctrl.positions, tgt.positions):
            reg.apply(GateOp("CNOT", (a, b)))
        return
    if len(blocks) != 1:
        raise ContractViolation(f"{gate} acts on one block")
    (block,) = blocks
    physical = code.transversal_phase if gate == "S" else gate
    reg = block.register
    for lab in block.positions:
        reg.apply(GateOp(physical, (lab,)))


def depolarize_block(block: CipherBlock, p: float, rng: np.random.Generator) -> PauliString:
    """Independent depolarizing noise on every position; returns the sampled Pauli."""
    reg = block.register
    return PauliString("".join(apply_depolarizing(reg, lab, p, rng).ops for lab in block.positions))


def random_pure_state(rng: np.random.Generator, dim: int = 2) -> np.ndarray:
    v = rng.normal(size=dim) + 1j * rng.normal(size=dim)
    return v / np.linalg.norm(v)


def magic_state() -> np.ndarray:
    return np.array([1, np.exp(1j * math.pi / 4)], dtype=complex) / math.sqrt(2)
