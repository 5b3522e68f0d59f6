"""Depolarizing-noise experiments against the closed-form logical error rate."""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .css_code import CssCode
from .protocol.parties import InProcessLink, QheClient, QheServer
from .protocol.scheme import decrypt, depolarize_block, random_pure_state
from .protocol.session import SessionConfig
from .state_sim import KET0, KET_PLUS, ContractViolation, fidelity, pure_density

FAILURE_FIDELITY = 1 - 1e-6


@dataclass(frozen=True)
class NoiseConfig:
    p: float
    trials: int = 10_000
    seed: int = 0
    locations: tuple[str, ...] = ("transmission",)

    def __post_init__(self):
        if not 0.0 <= self.p <= 1.0:
            raise ContractViolation(f"p = {self.p} outside [0, 1]")
        if self.trials < 1:
            raise ContractViolation("trials must be positive")
        if not set(self.locations) <= {"transmission", "per_gate"}:
            raise ContractViolation(f"unknown noise locations {self.locations}")


@dataclass(frozen=True)
class NoiseReport:
    p: float
    trials: int
    uncorrectable_rate: float
    decoder_failure_rate: float
    closed_form_pl: float
    stderr: float = field(init=False)

    CSV_FIELDS = ("p", "trials", "uncorrectable_rate", "decoder_failure_rate", "closed_form_pl", "stderr")

    def __post_init__(self):
        r = self.uncorrectable_rate
        object.__setattr__(self, "stderr", math.sqrt(r * (1 - r) / self.trials))

    @property
    def null_sigma(self) -> float:
        """Binomial standard error if the closed form were the true rate."""
        q = self.closed_form_pl
        return math.sqrt(q * (1 - q) / self.trials)


def logical_error_probability(n: int, d: int, p: float) -> float:
    """1 - sum_{i<=t} C(n, i) p^i (1-p)^(n-i) with t = floor((d-1)/2)."""
    if not 0.0 <= p <= 1.0 or not 1 <= d <= n:
        raise ContractViolation(f"invalid parameters n={n}, d={d}, p={p}")
    t = (d - 1) // 2
    ok = sum(math.comb(n, i) * p**i * (1 - p) ** (n - i) for i in range(t + 1))
    return min(max(1.0 - ok, 0.0), 1.0)


def _lookup(checks: np.ndarray, table: dict, n: int) -> np.ndarray:
    """Dense array: syndrome (as integer, row 0 least significant) -> correction."""
    rows = checks.shape[0]
    out = np.zeros((1 << rows, n), dtype=np.uint8)
    for syn, pattern in table.items():
        out[sum(b << i for i, b in enumerate(syn))] = pattern
    return out


def _decoder_fails(checks, table, logical_support, err: np.ndarray) -> np.ndarray:
    n = err.shape[1]
    rows = checks.shape[0]
    if rows:
        syn = (err.astype(np.int64) @ checks.T.astype(np.int64)) % 2
        index = syn @ (1 << np.arange(rows))
        residual = err ^ _lookup(checks, table, n)[index]
    else:
        residual = err
    return (residual.astype(np.int64) @ logical_support.astype(np.int64)) % 2 == 1


def mc_uncorrectable_rate(code: CssCode, p: float, trials: int, seed: int) -> NoiseReport:
    """Sample i.i.d. depolarizing errors on the n code qubits.

    ``uncorrectable_rate`` counts errors heavier than t, the event the
    closed form describes.  ``decoder_failure_rate`` runs the actual decoder
    and counts residuals that act as a logical operator.
    """
    NoiseConfig(p, trials, seed)
    rng = np.random.default_rng(seed)
    hit = rng.random((trials, code.n)) < p
    which = rng.integers(0, 3, size=(trials, code.n))  # 0=X, 1=Y, 2=Z
    x_err = (hit & (which <= 1)).astype(np.uint8)
    z_err = (hit & (which >= 1)).astype(np.uint8)
    uncorrectable = hit.sum(axis=1) > code.t
    fails = _decoder_fails(code.h_z, code._x_table, code.logical_z[0].z_bits, x_err)
    fails |= _decoder_fails(code.h_x, code._z_table, code.logical_x[0].x_bits, z_err)
    return NoiseReport(p, trials, float(uncorrectable.mean()), float(fails.mean()),
                       logical_error_probability(code.n, code.d, p))


def _e2e_trial(code: CssCode, m: int, p: float, seed_seq: np.random.SeedSequence) -> tuple[bool, bool]:
    """One encrypt / noise / correct / decrypt trajectory -> (heavy error, fidelity failure)."""
    c_seq, s_seq, n_seq = seed_seq.spawn(3)
    client = QheClient(code, m, np.random.default_rng(c_seq))
    server = QheServer(code, m, np.random.default_rng(s_seq), syndrome_after_transmission=False)
    link = InProcessLink(client)
    message = random_pure_state(client.rng)
    data = client.encrypt(message)
    zero, plus = client.encrypt(KET0), client.encrypt(KET_PLUS)
    error = depolarize_block(data, p, np.random.default_rng(n_seq))
    heavy = sum(error.ops[q] != "I" for q in client.key.code_positions) > code.t
    server.syndrome_extraction_round(data, zero, plus, link)
    rho, _ = decrypt(client.key, code, data)
    return heavy, fidelity(rho, pure_density(message)) < FAILURE_FIDELITY


def _e2e_chunk(args) -> list[tuple[bool, bool]]:
    code, m, p, seqs = args
    return [_e2e_trial(code, m, p, s) for s in seqs]


def end_to_end_noise_experiment(session_config: SessionConfig, noise_config: NoiseConfig,
                                jobs: int = 1) -> NoiseReport:
    """Transmission noise on the whole cipher block, one extraction round, decrypt.

    Every physical position is depolarized; MMS positions log the sample
    without changing the state.  ``decoder_failure_rate`` is the share of
    trials whose decrypted fidelity drops below 1 - 1e-6.
    """
    code = session_config.code
    seqs = np.random.SeedSequence(noise_config.seed).spawn(noise_config.trials)
    args = (code, session_config.m, noise_config.p)
    if jobs > 1:
        chunks = [seqs[i::jobs] for i in range(jobs)]
        with ProcessPoolExecutor(jobs) as pool:
            parts = list(pool.map(_e2e_chunk, [(*args, c) for c in chunks]))
        results = [r for part in parts for r in part]
    else:
        results = _e2e_chunk((*args, seqs))
    heavy = np.array([h for h, _ in results])
    failed = np.array([f for _, f in results])
    return NoiseReport(noise_config.p, noise_config.trials, float(heavy.mean()), float(failed.mean()),
                       logical_error_probability(code.n, code.d, noise_config.p))
