"""Trace-distance security figures and the scheme comparison.

All closed forms are evaluated as log2 quantities and exponentiated at the
end, so (2m)**n and binomial(2m, m) never have to fit in a float.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate

from .state_sim import ORACLE_LIMIT, OracleLimitExceeded, permute_qubits


@dataclass(frozen=True)
class SecurityParams:
    r: int
    m: int
    n: int

    def __post_init__(self):
        if self.r < 0 or self.m < 1 or self.n < 1:
            raise ValueError(f"need r >= 0, m >= 1, n >= 1; got {self}")


@dataclass(frozen=True)
class DeltaReport:
    r: int
    m: int
    n: int
    delta_proposed: float
    delta_previous_exact: float
    delta_previous_stirling: float
    key_count_proposed: int
    key_count_previous: int

    CSV_FIELDS = ("r", "m", "n", "delta_proposed", "delta_previous_exact", "delta_previous_stirling")


@dataclass(frozen=True)
class RegionReport:
    N: float
    fraction_proposed_better: float
    resolution: float
    mode: str = "area"

    CSV_FIELDS = ("N", "resolution", "fraction")

    @property
    def fraction(self) -> float:
        return self.fraction_proposed_better


def _from_log2(x: float) -> float:
    return 2.0 ** x


def delta_bound(r: int, key_count: int) -> float:
    """sqrt(2**r / |K|)."""
    if key_count < 1:
        raise ValueError("key_count must be positive")
    return _from_log2((r - math.log2(key_count)) / 2)


def delta_proposed(r: int, m: int, n: int) -> float:
    """Bound for per-group keys: |K| = (2m)**n."""
    SecurityParams(r, m, n)
    return _from_log2((r - n * math.log2(2 * m)) / 2)


def delta_previous(r: int, m: int, n: int, mode: str = "exact") -> float:
    """Bound for a single 2m-column permutation key, |K| = binomial(2m, m).

    ``stirling`` evaluates the Stirling-style form sqrt(pi*n*2**r/4**m)
    literally, with n (not m) under the root.
    """
    SecurityParams(r, m, n)
    if mode == "exact":
        return _from_log2((r - math.log2(math.comb(2 * m, m))) / 2)
    if mode == "stirling":
        return _from_log2((math.log2(math.pi * n) + r - 2 * m) / 2)
    raise ValueError(f"mode must be 'exact' or 'stirling', not {mode!r}")


def delta_report(r: int, m: int, n: int) -> DeltaReport:
    return DeltaReport(
        r, m, n,
        delta_proposed(r, m, n),
        delta_previous(r, m, n, "exact"),
        delta_previous(r, m, n, "stirling"),
        (2 * m) ** n,
        math.comb(2 * m, m),
    )


def threshold_n(m: float) -> float:
    """Code length above which the per-group key beats the column key: log(4**m) / log(2m)."""
    if m <= 0.5:
        raise ValueError("threshold_n needs m > 0.5")
    return 2 * m * math.log(2) / math.log(2 * m)


def _threshold_array(m: np.ndarray) -> np.ndarray:
    return 2 * m * np.log(2) / np.log(2 * m)


def region_fraction(N: float, resolution: float = 0.01, mode: str = "area") -> RegionReport:
    """Share of [1, N]^2 where n exceeds threshold_n(m).

    ``area`` integrates the part of each column above the threshold curve
    with composite Simpson on a uniform grid of step ``resolution`` (rounded
    down so the step divides N - 1 into an even count).  ``lattice`` counts
    integer points instead; ``resolution`` is ignored there.
    """
    if not N > 1:
        raise ValueError("N must exceed 1")
    if mode == "lattice":
        Ni = int(N)
        m = np.arange(1, Ni + 1, dtype=float)
        cut = _threshold_array(m)
        # points with n > cut, n in 1..N
        above = np.clip(Ni - np.floor(cut), 0, Ni)
        return RegionReport(N, float(above.sum() / Ni**2), 1.0, "lattice")
    if mode != "area":
        raise ValueError(f"mode must be 'area' or 'lattice', not {mode!r}")
    if not resolution > 0:
        raise ValueError("resolution must be positive")
    steps = max(2, math.ceil((N - 1) / resolution))
    steps += steps % 2
    m = np.linspace(1.0, N, steps + 1)
    height = N - np.clip(_threshold_array(m), 1.0, N)
    area = integrate.simpson(height, x=m)
    return RegionReport(N, float(area / (N - 1) ** 2), (N - 1) / steps, "area")


# ---- eavesdropper-state oracle ------------------------------------------

def pad_with_mms(rho_e: np.ndarray, m: int, n: int) -> np.ndarray:
    """rho_E (x) (I/2)^(2mn - n), code qubits on the low positions."""
    extra = 2 * m * n - n
    return np.kron(np.eye(1 << extra) / (1 << extra), rho_e)


def all_keys(m: int, n: int):
    return itertools.product(range(2 * m), repeat=n)


def _key_order(key, m: int, n: int) -> list[int]:
    # new physical position p holds old qubit order[p]: code qubit i goes to
    # slot key[i] of group i, MMS qubits fill the remaining slots in order
    size = 2 * m * n
    code_at = {g * 2 * m + s: g for g, s in enumerate(key)}
    mms = iter(range(n, size))
    return [code_at[p] if p in code_at else next(mms) for p in range(size)]


def eve_state(states: np.ndarray, keys, m: int, n: int) -> np.ndarray:
    """Uniform mixture of key-permuted copies of rho_{E||a}."""
    rho = np.asarray(states, dtype=complex)
    size = 2 * m * n
    if size > ORACLE_LIMIT:
        raise OracleLimitExceeded(f"2mn = {size} exceeds the oracle limit {ORACLE_LIMIT}")
    if rho.shape != (1 << size, 1 << size):
        raise ValueError(f"expected a {1 << size}-dimensional rho_E||a, got {rho.shape}")
    keys = list(keys)
    out = np.zeros_like(rho)
    for key in keys:
        out += permute_qubits(rho, _key_order(key, m, n))
    return out / len(keys)


def trace_distance(a: np.ndarray, b: np.ndarray) -> float:
    return 0.5 * float(np.abs(np.linalg.eigvalsh(a - b)).sum())


def brute_force_eve_distance(rho: np.ndarray, rho_prime: np.ndarray, m: int, n: int) -> float:
    """Trace distance between the eavesdropper's views of two encryptions.

    Accepts either encoded states rho_E (n qubits, padded here) or full
    rho_{E||a} (2mn qubits).
    """
    def full(x):
        x = np.asarray(x, dtype=complex)
        return pad_with_mms(x, m, n) if x.shape[0] == 1 << n else x

    a, b = full(rho), full(rho_prime)
    keys = list(all_keys(m, n))
    return trace_distance(eve_state(a, keys, m, n), eve_state(b, keys, m, n))


def padded_identity_encoding(message: np.ndarray, n: int) -> np.ndarray:
    """rho_E for the trivial length-n code: message (x) |0><0|^(n-1)."""
    msg = np.asarray(message, dtype=complex)
    if msg.ndim == 1:
        msg = np.outer(msg, msg.conj())
    zero = np.zeros((1 << (n - 1), 1 << (n - 1)))
    zero[0, 0] = 1
    return np.kron(zero, msg)
