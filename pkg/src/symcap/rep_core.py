"""Partitions, tableau counting and the GL(2) irreps q_lambda(M).

Partitions are plain tuples padded with zeros to length ``d``, e.g. ``(3, 1)``
for d=2 or ``(2, 1, 0, 0)`` for d=4.

Irrep matrices are indexed from the highest weight down: row/column ``r``
corresponds to the Gelfand-Tsetlin label ``i = l - r`` (number of ``1`` entries
in the single-row SSYT), so ``irrep_q2(diag(a, b), (2, 0))`` is
``diag(a**2, a*b, b**2)``.
"""

from __future__ import annotations

from functools import lru_cache
from itertools import combinations
from math import comb, factorial, lgamma

import numpy as np

PASCAL_MAX = 64


def _pascal(nmax: int) -> list[list[int]]:
    rows = [[1]]
    for _ in range(nmax):
        prev = rows[-1]
        rows.append([1] + [prev[k - 1] + prev[k] for k in range(1, len(prev))] + [1])
    return rows


_PASCAL = _pascal(PASCAL_MAX)


def binom(n: int, k: int) -> int:
    """Exact binomial coefficient, zero outside ``0 <= k <= n``."""
    if k < 0 or k > n or n < 0:
        return 0
    if n <= PASCAL_MAX:
        return _PASCAL[n][k]
    return comb(n, k)


def check_partition(lam, d: int | None = None) -> tuple[int, ...]:
    """Validate ``lam`` and return it as a tuple (padded to ``d`` parts if given)."""
    parts = tuple(int(x) for x in lam)
    if any(x < 0 for x in parts):
        raise ValueError(f"partition {parts} has negative parts")
    if any(parts[i] < parts[i + 1] for i in range(len(parts) - 1)):
        raise ValueError(f"partition {parts} is not non-increasing")
    if d is not None:
        if len(parts) > d:
            if any(parts[d:]):
                raise ValueError(f"partition {parts} has more than {d} parts")
            parts = parts[:d]
        parts = parts + (0,) * (d - len(parts))
    return parts


def enumerate_partitions(n: int, d: int) -> list[tuple[int, ...]]:
    """All partitions of ``n`` into at most ``d`` parts, lexicographically descending."""
    if n <= 0:
        raise ValueError("n must be positive")
    if d < 1:
        raise ValueError("d must be positive")
    out: list[tuple[int, ...]] = []

    def rec(prefix: list[int], remaining: int, cap: int, slots: int) -> None:
        if slots == 0:
            if remaining == 0:
                out.append(tuple(prefix))
            return
        # the remaining slots can hold at most cap * slots
        if remaining > cap * slots:
            return
        for part in range(min(cap, remaining), -1, -1):
            prefix.append(part)
            rec(prefix, remaining - part, part, slots - 1)
            prefix.pop()

    rec([], n, n, d)
    return out


def specht_dim(lam) -> int:
    """Dimension of the Specht module S_lambda by the hook-length formula."""
    parts = [x for x in check_partition(lam) if x > 0]
    n = sum(parts)
    if n == 0:
        return 1
    conj = [sum(1 for x in parts if x > c) for c in range(parts[0])]
    hooks = 1
    for r, row in enumerate(parts):
        for c in range(row):
            hooks *= (row - c - 1) + (conj[c] - r - 1) + 1
    return factorial(n) // hooks


def weyl_dim(lam, d: int) -> int:
    """Dimension of the GL(d) irrep V^d_lambda (Weyl dimension formula)."""
    parts = check_partition(lam, d)
    num = 1
    den = 1
    for i, j in combinations(range(d), 2):
        num *= parts[i] - parts[j] + j - i
        den *= j - i
    return num // den


def two_row_label(lam) -> tuple[int, int]:
    """Return ``(l, lambda_2)`` for a partition with at most two rows."""
    parts = check_partition(lam, 2)
    return parts[0] - parts[1], parts[1]


@lru_cache(maxsize=None)
def _irrep_tables(l: int):
    """Index tables for the Sym^l entries, ordered i, j = l, ..., 0.

    One entry ``(k, coef, e12, e21, e22)`` per summation index k; ``coef``
    already carries the factorial-ratio prefactor and is zero wherever k is
    outside the summation range for that (i, j).
    """
    idx = np.arange(l, -1, -1)
    i = idx[:, None]
    j = idx[None, :]
    lg = np.array([lgamma(x + 1) for x in range(l + 1)])
    scale = np.exp(0.5 * (lg[i] + lg[l - i] - lg[j] - lg[l - j]))
    terms = []
    for k in range(l + 1):
        valid = (k >= np.maximum(0, i + j - l)) & (k <= np.minimum(i, j))
        coef = np.zeros((l + 1, l + 1))
        for r, ii in enumerate(idx):
            for c, jj in enumerate(idx):
                if valid[r, c]:
                    coef[r, c] = float(binom(jj, k) * binom(l - jj, ii - k))
        if not coef.any():
            continue
        # exponents clipped to 0 where the coefficient vanishes
        e12 = np.where(valid, i - k, 0)
        e21 = np.where(valid, j - k, 0)
        e22 = np.where(valid, l - i - j + k, 0)
        terms.append((k, coef * scale, e12, e21, e22))
    return terms


def _power_table(x: np.ndarray, l: int) -> np.ndarray:
    """``out[..., e] = x**e`` for ``e = 0..l`` with ``0**0 == 1``."""
    out = np.empty(x.shape + (l + 1,), dtype=complex)
    out[..., 0] = 1.0
    for e in range(1, l + 1):
        out[..., e] = out[..., e - 1] * x
    return out


def irrep_q2_batch(mats: np.ndarray, lam) -> np.ndarray:
    """Evaluate q^2_lambda on a stack of 2x2 matrices.

    Args:
        mats: complex array of shape (..., 2, 2).
        lam: two-row partition.

    Returns:
        Array of shape (..., l+1, l+1).
    """
    l, lam2 = two_row_label(lam)
    mats = np.asarray(mats, dtype=complex)
    batch = mats.shape[:-2]
    flat = mats.reshape(-1, 2, 2)
    p11 = _power_table(flat[:, 0, 0], l)
    p12 = _power_table(flat[:, 0, 1], l)
    p21 = _power_table(flat[:, 1, 0], l)
    p22 = _power_table(flat[:, 1, 1], l)
    out = np.zeros((flat.shape[0], l + 1, l + 1), dtype=complex)
    for k, coef, e12, e21, e22 in _irrep_tables(l):
        out += (coef * p11[:, k][:, None, None]) * p12[:, e12] * p21[:, e21] * p22[:, e22]
    if lam2:
        det = flat[:, 0, 0] * flat[:, 1, 1] - flat[:, 0, 1] * flat[:, 1, 0]
        out *= (det**lam2)[:, None, None]
    return out.reshape(batch + (l + 1, l + 1))


def irrep_q2(M, lam) -> np.ndarray:
    """q^2_lambda(M) = det(M)^lambda_2 Sym^l(M) for any 2x2 complex ``M``.

    ``det(M)**0`` is taken as 1 even for singular ``M``.
    """
    M = np.asarray(M, dtype=complex)
    if M.shape != (2, 2):
        raise ValueError("M must be 2x2")
    return irrep_q2_batch(M[None], lam)[0]


def sym_power_reference(M, lam) -> np.ndarray:
    """Independent q^2_lambda via polynomial expansion of the column images.

    Column ``j`` holds the coefficients of ``(M e1)^j (M e2)^(l-j)`` in the
    normalised monomial basis. Used as a cross-check of :func:`irrep_q2`.
    """
    l, lam2 = two_row_label(lam)
    M = np.asarray(M, dtype=complex)
    out = np.zeros((l + 1, l + 1), dtype=complex)
    for c, j in enumerate(range(l, -1, -1)):
        # polynomials in x = coefficient of e1, stored by power of e1
        poly = np.array([1.0 + 0j])
        for _ in range(j):
            poly = np.convolve(poly, [M[1, 0], M[0, 0]])
        for _ in range(l - j):
            poly = np.convolve(poly, [M[1, 1], M[0, 1]])
        for r, i in enumerate(range(l, -1, -1)):
            out[r, c] = poly[i] * np.sqrt(binom(l, j) / binom(l, i))
    return out * np.linalg.det(M) ** lam2 if lam2 else out


def dimension_identity(n: int, d: int) -> int:
    """Sum over lambda of dim(S_lambda) * dim(V^d_lambda); equals d**n."""
    return sum(specht_dim(lam) * weyl_dim(lam, d) for lam in enumerate_partitions(n, d))


def character_sum(M, n: int) -> complex:
    """Sum over two-row lambda of dim(S_lambda) * tr q_lambda(M); equals tr(M)**n."""
    return sum(specht_dim(lam) * np.trace(irrep_q2(M, lam)) for lam in enumerate_partitions(n, 2))


__all__ = [
    "binom",
    "check_partition",
    "enumerate_partitions",
    "specht_dim",
    "weyl_dim",
    "two_row_label",
    "irrep_q2",
    "irrep_q2_batch",
    "sym_power_reference",
    "dimension_identity",
    "character_sum",
]
