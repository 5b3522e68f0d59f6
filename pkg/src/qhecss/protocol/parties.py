"""Client and server roles of the interactive protocol.

The server holds cipher blocks and applies gates; it never sees the key.
Whenever a measurement has to be interpreted (T-gate teleportation,
syndrome extraction) it sends the raw bits to the client and applies the
position-wise instruction it gets back.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Protocol

import numpy as np

from ..css_code import CssCode, Syndrome, decode_logical_z_readout, decode_syndrome
from ..state_sim import KET0, KET_PLUS, GateOp
from . import messages as wire
from .circuit import LogicalCircuit
from .messages import (Ack, ClassicalMessage, CorrectionInstruction, MeasurementReport, ProtocolError,
                       SyndromeReport, TGateCount)
from .scheme import (CipherBlock, PermutationKey, apply_transversal, decrypt_many, depolarize_block, encrypt,
                     keygen, magic_state)

PURPOSES = ("t_gate", "syndrome_x", "syndrome_z")


def _interpret(key: PermutationKey, code: CssCode, bits, purpose: str, rng: np.random.Generator,
               block_id: int = 0) -> tuple[CorrectionInstruction, dict]:
    if purpose not in PURPOSES:
        raise ProtocolError(f"unknown purpose {purpose!r}")
    if isinstance(bits, str):
        bits = wire.str_to_bits(bits)
    if len(bits) != key.block_size:
        raise ProtocolError(f"{len(bits)} bits for a block of {key.block_size} positions")
    code_pos = key.code_positions
    code_bits = np.array([bits[p] for p in code_pos], dtype=np.uint8)

    if purpose == "t_gate":
        outcome, detected = decode_logical_z_readout(code, code_bits)
        ops = ["S" if rng.integers(2) else "I" for _ in range(key.block_size)]
        for p in code_pos:
            ops[p] = "S" if outcome else "I"
        info = {"outcome": outcome, "detected": detected}
    else:
        checks = code.h_z if purpose == "syndrome_x" else code.h_x
        syn = tuple(int(b) for b in (checks.astype(int) @ code_bits) % 2)
        none = (0,) * checks.shape[0]
        if purpose == "syndrome_x":
            fix = decode_syndrome(code, Syndrome(syn, none)).x_bits
            letter = "X"
        else:
            fix = decode_syndrome(code, Syndrome(none, syn)).z_bits
            letter = "Z"
        # the whole group gets the same letter so the code slot stays hidden
        ops = []
        for g in range(key.n):
            ops += [letter if fix[g] else "I"] * key.group_size
        info = {"syndrome": "".join(map(str, syn))}
    return CorrectionInstruction(block_id, "".join(ops)), info


def client_interpret_and_correct(key: PermutationKey, code: CssCode, bits, purpose: str,
                                 rng: np.random.Generator, block_id: int = 0) -> CorrectionInstruction:
    """Turn a raw 2mn-bit measurement into the instruction sent back to the server."""
    return _interpret(key, code, bits, purpose, rng, block_id)[0]


@dataclass
class QheClient:
    code: CssCode
    m: int
    rng: np.random.Generator
    key: PermutationKey | None = None
    log: list[dict] = field(default_factory=list)

    def __post_init__(self):
        if self.key is None:
            self.key = keygen(self.m, self.code.n, self.rng)
        self._ids = itertools.count()

    def encrypt(self, state) -> CipherBlock:
        return encrypt(self.key, self.code, state, self.rng, block_id=next(self._ids))

    def encrypt_inputs(self, states) -> list[CipherBlock]:
        return [self.encrypt(s) for s in states]

    def provision(self, count: TGateCount) -> dict[str, list[CipherBlock]]:
        """Prepare ideal encrypted ancillas for the counts the server asked for."""
        self.log.append({"kind": "provision", "r": count.r, "zero": count.zero_count, "plus": count.plus_count})
        return {
            "magic": [self.encrypt(magic_state()) for _ in range(count.r)],
            "zero": [self.encrypt(KET0) for _ in range(count.zero_count)],
            "plus": [self.encrypt(KET_PLUS) for _ in range(count.plus_count)],
        }

    def handle(self, msg: ClassicalMessage) -> list[ClassicalMessage]:
        wire.check_lengths(msg, self.key.block_size)
        if isinstance(msg, MeasurementReport):
            instr, info = _interpret(self.key, self.code, msg.bits, "t_gate", self.rng, msg.block_id)
            self.log.append({"kind": "t_gate", "block": msg.block_id, **info, "ops": instr.ops})
            return [instr]
        if isinstance(msg, SyndromeReport):
            fx, ix = _interpret(self.key, self.code, msg.x_bits, "syndrome_x", self.rng, msg.block_id)
            fz, iz = _interpret(self.key, self.code, msg.z_bits, "syndrome_z", self.rng, msg.block_id)
            self.log.append({"kind": "syndrome", "block": msg.block_id,
                             "x_syndrome": ix["syndrome"], "z_syndrome": iz["syndrome"]})
            return [fx, fz]
        if isinstance(msg, Ack):
            return []
        raise ProtocolError(f"client cannot handle {type(msg).__name__}")

    def decrypt(self, blocks: list[CipherBlock]) -> np.ndarray:
        rho, swaps = decrypt_many(self.key, self.code, blocks)
        self.log.append({"kind": "decrypt", "swaps": swaps})
        return rho


class Link(Protocol):
    """Server-side view of the channel to the client."""

    def exchange(self, msg: ClassicalMessage) -> list[ClassicalMessage]: ...

    def provision(self, count: TGateCount) -> dict[str, list[CipherBlock]]: ...

    def notify(self, msg: ClassicalMessage) -> None: ...


class InProcessLink:
    """Routes messages to an in-process client through the JSON wire encoding.

    Cipher blocks (the quantum channel) are handed over by reference.
    """

    def __init__(self, client: QheClient):
        self.client = client
        self.transcript: list[tuple[str, str]] = []

    def _send(self, msg: ClassicalMessage) -> ClassicalMessage:
        line = wire.encode(msg)
        self.transcript.append(("server", line))
        return wire.decode(line)

    def _recv(self, msg: ClassicalMessage) -> ClassicalMessage:
        line = wire.encode(msg)
        self.transcript.append(("client", line))
        return wire.decode(line)

    def exchange(self, msg):
        return [self._recv(r) for r in self.client.handle(self._send(msg))]

    def provision(self, count):
        return self.client.provision(self._send(count))

    def notify(self, msg):
        self.client.handle(self._send(msg))


@dataclass
class QheServer:
    code: CssCode
    m: int
    rng: np.random.Generator
    transmission_p: float = 0.0
    per_gate_p: float = 0.0
    syndrome_after_transmission: bool = True
    syndrome_every: int = 0
    log: list[dict] = field(default_factory=list)

    @property
    def block_size(self) -> int:
        return 2 * self.m * self.code.n

    def _apply_instruction(self, block: CipherBlock, instr: CorrectionInstruction) -> None:
        wire.check_lengths(instr, self.block_size)
        if instr.block_id != block.block_id:
            raise ProtocolError(f"instruction for block {instr.block_id}, expected {block.block_id}")
        reg = block.register
        for lab, op in zip(block.positions, instr.ops):
            if op == "S":
                reg.apply(GateOp(self.code.transversal_phase, (lab,)))
            elif op != "I":
                reg.apply(GateOp(op, (lab,)))

    def t_gate_round(self, data: CipherBlock, magic: CipherBlock, link: Link) -> None:
        """Teleport T onto ``data`` using an encrypted T|+> block."""
        apply_transversal([data, magic], "CNOT", self.code)
        reg = data.register
        bits = [reg.measure(lab, self.rng) for lab in magic.positions]
        report = MeasurementReport(data.block_id, wire.bits_to_str(bits))
        replies = link.exchange(report)
        if len(replies) != 1 or not isinstance(replies[0], CorrectionInstruction):
            raise ProtocolError("expected one correction instruction after a T-gate report")
        self._apply_instruction(data, replies[0])
        self.log.append({"kind": "t_gate", "block": data.block_id})

    def syndrome_extraction_round(self, data: CipherBlock, zero: CipherBlock, plus: CipherBlock,
                                  link: Link) -> None:
        """Steane-style extraction with one |+_L> and one |0_L> ancilla block.

        Bit flips: CNOT data -> |+_L>, read the ancilla in Z.  Phase flips:
        CNOT |0_L> -> data, read the ancilla in X.  Neither ancilla picks up
        the logical value, so the data block is not disturbed.
        """
        apply_transversal([data, plus], "CNOT", self.code)
        reg = data.register
        x_bits = [reg.measure(lab, self.rng) for lab in plus.positions]
        apply_transversal([zero, data], "CNOT", self.code)
        apply_transversal(zero, "H", self.code)
        reg = data.register
        z_bits = [reg.measure(lab, self.rng) for lab in zero.positions]
        report = SyndromeReport(data.block_id, wire.bits_to_str(x_bits), wire.bits_to_str(z_bits))
        replies = link.exchange(report)
        if len(replies) != 2 or not all(isinstance(r, CorrectionInstruction) for r in replies):
            raise ProtocolError("expected two correction instructions after a syndrome report")
        for instr in replies:
            self._apply_instruction(data, instr)
        self.log.append({"kind": "syndrome", "block": data.block_id})

    def plan(self, circuit: LogicalCircuit) -> TGateCount:
        rounds = 1 if self.syndrome_after_transmission else 0
        if self.syndrome_every:
            rounds += len(circuit.gates) // self.syndrome_every
        n_anc = rounds * circuit.wires
        return TGateCount(circuit.t_count, n_anc, n_anc)

    def evaluate(self, circuit: LogicalCircuit, data: list[CipherBlock], link: Link) -> list[CipherBlock]:
        if len(data) != circuit.wires:
            raise ProtocolError(f"circuit has {circuit.wires} wires but {len(data)} blocks arrived")
        for b in data:
            if b.size != self.block_size:
                raise ProtocolError(f"block {b.block_id} has {b.size} positions, expected {self.block_size}")
        count = self.plan(circuit)
        ancillas = link.provision(count)
        magic, zero, plus = (list(ancillas[k]) for k in ("magic", "zero", "plus"))

        def correct_all():
            for b in data:
                if not zero or not plus:
                    raise ProtocolError("ran out of syndrome-extraction ancillas")
                self.syndrome_extraction_round(b, zero.pop(0), plus.pop(0), link)

        if self.transmission_p:
            for b in data:
                depolarize_block(b, self.transmission_p, self.rng)
        if self.syndrome_after_transmission:
            correct_all()
        for i, (kind, wires) in enumerate(circuit.gates, 1):
            touched = [data[w] for w in wires]
            if kind == "T":
                if not magic:
                    raise ProtocolError("ran out of magic-state blocks")
                self.t_gate_round(touched[0], magic.pop(0), link)
            else:
                apply_transversal(touched, kind, self.code)
            if self.per_gate_p:
                for b in touched:
                    depolarize_block(b, self.per_gate_p, self.rng)
            if self.syndrome_every and i % self.syndrome_every == 0:
                correct_all()
        link.notify(Ack())
        return data
