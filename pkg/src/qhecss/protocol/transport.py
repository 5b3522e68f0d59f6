"""TCP transport: the same classical messages as line-delimited JSON.

Besides the classical vocabulary, three envelope types carry what a real
deployment would send over the quantum channel or as job metadata:

    {"type": "job", "config": {...}, "circuit": "H 0\\n...", "wires": 1, "blocks": bundle}
    {"type": "quantum_payload", "blocks": {"magic": bundle, "zero": bundle, "plus": bundle}}
    {"type": "result", "blocks": bundle}

A bundle holds serialized registers plus the blocks that live in them.
"""

from __future__ import annotations

import json
import logging
import socket
from typing import IO

import numpy as np

from ..state_sim import QuantumRegister, fidelity
from . import messages as wire
from .circuit import LogicalCircuit, ideal_output
from .messages import ProtocolError, SyndromeReport, TGateCount
from .parties import QheClient
from .scheme import CipherBlock
from .session import SessionConfig, SessionResult

log = logging.getLogger(__name__)


def dump_blocks(blocks: list[CipherBlock]) -> dict:
    regs: list[QuantumRegister] = []
    entries = []
    for b in blocks:
        reg = b.register
        idx = next((i for i, r in enumerate(regs) if r is reg), None)
        if idx is None:
            regs.append(reg)
            idx = len(regs) - 1
        entries.append({"block_id": b.block_id, "m": b.m, "n": b.n, "key_tag": b.key_tag, "register": idx})
    return {"registers": [r.to_json() for r in regs], "blocks": entries}


def load_blocks(bundle: dict, rng: np.random.Generator | None = None) -> list[CipherBlock]:
    regs = [QuantumRegister.from_json(r, rng) for r in bundle["registers"]]
    return [CipherBlock(e["block_id"], e["m"], e["n"], e["key_tag"], regs[e["register"]])
            for e in bundle["blocks"]]


def _write(stream: IO[str], obj: dict) -> None:
    stream.write(json.dumps(obj, separators=(",", ":")) + "\n")
    stream.flush()


def _read(stream: IO[str]) -> dict:
    line = stream.readline()
    if not line:
        raise ProtocolError("channel closed by peer")
    return json.loads(line)


class SocketLink:
    """Server-side link over a text stream."""

    def __init__(self, stream: IO[str], rng: np.random.Generator):
        self.stream = stream
        self.rng = rng

    def exchange(self, msg):
        _write(self.stream, wire.to_dict(msg))
        expected = 2 if isinstance(msg, SyndromeReport) else 1
        return [wire.from_dict(_read(self.stream)) for _ in range(expected)]

    def provision(self, count: TGateCount):
        _write(self.stream, wire.to_dict(count))
        reply = _read(self.stream)
        if reply.get("type") != "quantum_payload":
            raise ProtocolError(f"expected quantum_payload, got {reply.get('type')!r}")
        return {k: load_blocks(v, self.rng) for k, v in reply["blocks"].items()}

    def notify(self, msg):
        _write(self.stream, wire.to_dict(msg))


def serve_stream(stream: IO[str], server_rng: np.random.Generator) -> list[dict]:
    """Run one server session over ``stream``; returns the server log."""
    job = _read(stream)
    if job.get("type") != "job":
        raise ProtocolError(f"expected a job, got {job.get('type')!r}")
    config = SessionConfig.from_json(job["config"])
    server = config.make_server(config.code, server_rng)
    circuit = LogicalCircuit.parse(job["circuit"], job["wires"])
    blocks = load_blocks(job["blocks"], server_rng)
    out = server.evaluate(circuit, blocks, SocketLink(stream, server_rng))
    _write(stream, {"type": "result", "blocks": dump_blocks(out)})
    return server.log


def serve(port: int, seed: int, host: str = "127.0.0.1", max_sessions: int | None = None,
          ready=None) -> None:
    """Accept sessions one after another.  ``ready`` is called with the bound port."""
    server_rng = SessionConfig(seed=seed).rngs()[1]
    with socket.create_server((host, port)) as listener:
        if ready is not None:
            ready(listener.getsockname()[1])
        done = 0
        while max_sessions is None or done < max_sessions:
            conn, addr = listener.accept()
            log.info("session from %s", addr)
            with conn, conn.makefile("rw", encoding="utf-8", newline="\n") as stream:
                try:
                    serve_stream(stream, server_rng)
                except ProtocolError as exc:
                    log.error("session aborted: %s", exc)
            done += 1


def run_client_stream(stream: IO[str], config: SessionConfig, circuit: LogicalCircuit,
                      inputs: list[np.ndarray]) -> SessionResult:
    code = config.code
    client = QheClient(code, config.m, config.rngs()[0])
    blocks = client.encrypt_inputs(inputs)
    _write(stream, {"type": "job", "config": config.to_json(), "circuit": circuit.to_text(),
                    "wires": circuit.wires, "blocks": dump_blocks(blocks)})
    transcript = []
    while True:
        obj = _read(stream)
        kind = obj.get("type")
        if kind == "result":
            out = load_blocks(obj["blocks"])
            break
        transcript.append(("server", json.dumps(obj, separators=(",", ":")) + "\n"))
        msg = wire.from_dict(obj)
        if isinstance(msg, TGateCount):
            anc = client.provision(msg)
            _write(stream, {"type": "quantum_payload", "blocks": {k: dump_blocks(v) for k, v in anc.items()}})
            continue
        for reply in client.handle(msg):
            line = wire.to_dict(reply)
            transcript.append(("client", json.dumps(line, separators=(",", ":")) + "\n"))
            _write(stream, line)
    rho = client.decrypt(out)
    ideal = ideal_output(circuit, inputs)
    return SessionResult(rho, ideal, fidelity(rho, np.outer(ideal, ideal.conj())), client.log, [], transcript)


def connect(address: str, config: SessionConfig, circuit: LogicalCircuit, inputs: list[np.ndarray],
            timeout: float = 60.0) -> SessionResult:
    host, _, port = address.rpartition(":")
    with socket.create_connection((host or "127.0.0.1", int(port)), timeout=timeout) as sock:
        with sock.makefile("rw", encoding="utf-8", newline="\n") as stream:
            return run_client_stream(stream, config, circuit, inputs)
