"""Dense GF(2) linear algebra on numpy uint8 arrays."""

from __future__ import annotations

import numpy as np


def as_bits(matrix) -> np.ndarray:
    """Coerce to a 2-D uint8 array reduced mod 2."""
    arr = np.asarray(matrix, dtype=np.int64) % 2
    if arr.ndim == 1:
        arr = arr.reshape(1, -1)
    return arr.astype(np.uint8)


def row_reduce(matrix) -> tuple[np.ndarray, list[int]]:
    """Reduced row-echelon form over GF(2).

    Returns the reduced matrix (zero rows dropped) and its pivot columns.
    """
    R = as_bits(matrix).copy()
    rows, cols = R.shape
    pivots: list[int] = []
    r = 0
    for c in range(cols):
        if r == rows:
            break
        hits = np.nonzero(R[r:, c])[0]
        if hits.size == 0:
            continue
        p = r + hits[0]
        if p != r:
            R[[r, p]] = R[[p, r]]
        others = np.nonzero(R[:, c])[0]
        others = others[others != r]
        R[others] ^= R[r]
        pivots.append(c)
        r += 1
    return R[:r], pivots


def rank(matrix) -> int:
    if np.size(matrix) == 0:
        return 0
    return len(row_reduce(matrix)[1])


def in_row_space(matrix, vector) -> bool:
    """True when ``vector`` is a GF(2) combination of the rows of ``matrix``."""
    v = as_bits(vector)
    if not v.any():
        return True
    if np.size(matrix) == 0:
        return False
    m = as_bits(matrix)
    return rank(np.vstack([m, v])) == rank(m)


def same_row_space(a, b) -> bool:
    if np.size(a) == 0 or np.size(b) == 0:
        return np.size(a) == np.size(b) or not (as_bits(a).any() or as_bits(b).any())
    ra, rb = rank(a), rank(b)
    return ra == rb == rank(np.vstack([as_bits(a), as_bits(b)]))


def matvec(matrix, vector) -> np.ndarray:
    """``matrix @ vector`` mod 2; empty matrices give an empty result."""
    m = np.asarray(matrix, dtype=np.int64)
    if m.size == 0:
        return np.zeros(0, dtype=np.uint8)
    return ((m @ np.asarray(vector, dtype=np.int64)) % 2).astype(np.uint8)
