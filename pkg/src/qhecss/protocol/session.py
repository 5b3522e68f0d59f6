"""Session configuration and the in-process end-to-end runner."""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from ..css_code import CssCode, get_code, validate_css_properties
from ..state_sim import ContractViolation, fidelity
from .circuit import LogicalCircuit, ideal_output
from .parties import InProcessLink, QheClient, QheServer


@dataclass
class SessionConfig:
    m: int = 1
    n_code: str = "steane"
    seed: int = 0
    noise_p: float = 0.0
    transport: str = "inproc"
    address: str = "127.0.0.1:7341"
    per_gate_p: float = 0.0
    syndrome_after_transmission: bool = True
    syndrome_every: int = 0

    def __post_init__(self):
        if self.m < 1:
            raise ContractViolation("m must be at least 1")
        if not 0.0 <= self.noise_p <= 1.0 or not 0.0 <= self.per_gate_p <= 1.0:
            raise ContractViolation("noise probabilities must lie in [0, 1]")
        if self.transport not in ("inproc", "tcp"):
            raise ContractViolation(f"unknown transport {self.transport!r}")

    @property
    def code(self) -> CssCode:
        code = get_code(self.n_code)
        report = validate_css_properties(code)
        if not report.ok:
            raise ContractViolation(f"code {self.n_code} fails {report.failures}")
        return code

    def rngs(self) -> tuple[np.random.Generator, np.random.Generator]:
        """Independent (client, server) streams derived from the seed."""
        c, s = np.random.SeedSequence(self.seed).spawn(2)
        return np.random.default_rng(c), np.random.default_rng(s)

    def make_server(self, code: CssCode, rng: np.random.Generator) -> QheServer:
        return QheServer(code, self.m, rng, transmission_p=self.noise_p, per_gate_p=self.per_gate_p,
                         syndrome_after_transmission=self.syndrome_after_transmission,
                         syndrome_every=self.syndrome_every)

    def to_json(self) -> dict:
        return asdict(self)

    @classmethod
    def from_json(cls, d: dict) -> "SessionConfig":
        known = set(cls.__dataclass_fields__)
        unknown = set(d) - known
        if unknown:
            raise ContractViolation(f"unknown session config keys {sorted(unknown)}")
        return cls(**d)

    @classmethod
    def load(cls, path: str | Path) -> "SessionConfig":
        return cls.from_json(json.loads(Path(path).read_text(encoding="utf-8")))


@dataclass
class SessionResult:
    state: np.ndarray
    ideal: np.ndarray
    fidelity: float
    client_log: list[dict] = field(default_factory=list)
    server_log: list[dict] = field(default_factory=list)
    transcript: list[tuple[str, str]] = field(default_factory=list)


def run_session(config: SessionConfig, circuit: LogicalCircuit, inputs: list[np.ndarray]) -> SessionResult:
    """Encrypt ``inputs``, evaluate ``circuit`` interactively, decrypt."""
    code = config.code
    client_rng, server_rng = config.rngs()
    client = QheClient(code, config.m, client_rng)
    server = config.make_server(code, server_rng)
    link = InProcessLink(client)
    blocks = client.encrypt_inputs(inputs)
    out = server.evaluate(circuit, blocks, link)
    rho = client.decrypt(out)
    ideal = ideal_output(circuit, inputs)
    return SessionResult(rho, ideal, fidelity(rho, np.outer(ideal, ideal.conj())),
                         client.log, server.log, link.transcript)
