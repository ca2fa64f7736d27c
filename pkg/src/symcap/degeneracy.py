"""Schur-basis view of n Pauli channel uses and the degeneracy counts it implies.

The Choi matrix J of a Pauli channel is diagonal in the Bell basis with
spectrum (p_I, p_X, p_Y, p_Z). On (C^4)^(x)n = sum_lambda S_lambda (x) V^4_lambda
every Schur basis vector is an eigenvector of J^(x)n whose eigenvalue is
p^w = p_I^w_I p_X^w_X p_Y^w_Y p_Z^w_Z for a weight vector w, and the number of
such vectors for (lambda, w) is dim(S_lambda) * K_{lambda, w}. Kraus operators
attached to lambda with a third row annihilate the symmetric input subspace,
so only two-row lambda contribute to the complementary output of symmetric
inputs.

Weight vectors are 4-tuples ordered (I, X, Y, Z).
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from math import factorial, lgamma, log, log2, exp
from typing import Callable, Iterable

import numpy as np

from .channel import PauliChannel
from .coherent_info import SymmetricInput
from .entropy import shannon_bits
from .oracle import environment_spectrum, numeric_rank, symmetric_density
from .rep_core import check_partition, enumerate_partitions, specht_dim, weyl_dim


# ---------------------------------------------------------------------------
# Schur polynomials and Kostka numbers


def _complete_homogeneous(x: list[Fraction], kmax: int) -> list[Fraction]:
    """h_0..h_kmax of the variables x, by adding one variable at a time."""
    h = [Fraction(1)] + [Fraction(0)] * kmax
    for xi in x:
        for k in range(1, kmax + 1):
            h[k] += xi * h[k - 1]
    return h


def _det(m: list[list[Fraction]]) -> Fraction:
    """Exact determinant by fraction-preserving Gaussian elimination."""
    a = [row[:] for row in m]
    size = len(a)
    det = Fraction(1)
    for c in range(size):
        piv = next((r for r in range(c, size) if a[r][c] != 0), None)
        if piv is None:
            return Fraction(0)
        if piv != c:
            a[c], a[piv] = a[piv], a[c]
            det = -det
        det *= a[c][c]
        for r in range(c + 1, size):
            if a[r][c]:
                f = a[r][c] / a[c][c]
                for k in range(c, size):
                    a[r][k] -= f * a[c][k]
    return det


def _schur_from_h(parts: tuple[int, ...], h: list[Fraction]) -> Fraction:
    rows = [x for x in parts if x > 0]
    if not rows:
        return Fraction(1)
    size = len(rows)

    def hk(k):
        return h[k] if k >= 0 else Fraction(0)

    return _det([[hk(rows[i] - i + j) for j in range(size)] for i in range(size)])


def schur_polynomial(lam, x) -> float:
    """s_lambda(x) for up to four variables via the Jacobi-Trudi determinant.

    det[h_{lambda_i - i + j}] is evaluated in exact rational arithmetic on the
    binary values of ``x``, so repeated variables and large n lose nothing to
    cancellation; only the final conversion rounds.
    """
    parts = check_partition(lam)
    xs = [Fraction(float(v)) for v in x]
    if sum(1 for p in parts if p > 0) > len(xs):
        return 0.0
    h = _complete_homogeneous(xs, sum(parts) + len(parts))
    return float(_schur_from_h(parts, h))


def enumerate_ssyt(lam, d: int):
    """Yield every semistandard tableau of shape ``lam`` with entries 1..d (rows of tuples)."""
    shape = [p for p in check_partition(lam) if p > 0]
    cells = [(r, c) for r, row in enumerate(shape) for c in range(row)]
    filling: dict = {}

    def rec(idx):
        if idx == len(cells):
            yield tuple(tuple(filling[(r, c)] for c in range(row)) for r, row in enumerate(shape))
            return
        r, c = cells[idx]
        lo = 1
        if c > 0:
            lo = max(lo, filling[(r, c - 1)])
        if r > 0:
            lo = max(lo, filling[(r - 1, c)] + 1)
        for v in range(lo, d + 1):
            filling[(r, c)] = v
            yield from rec(idx + 1)
        filling.pop((r, c), None)

    yield from rec(0)


def ssyt_content(tab, d: int) -> tuple[int, ...]:
    w = [0] * d
    for row in tab:
        for v in row:
            w[v - 1] += 1
    return tuple(w)


def schur_polynomial_ssyt(lam, x) -> float:
    """s_lambda(x) as the monomial sum over SSYTs (slow reference)."""
    d = len(x)
    total = Fraction(0)
    xs = [Fraction(float(v)) for v in x]
    for tab in enumerate_ssyt(lam, d):
        term = Fraction(1)
        for i, wi in enumerate(ssyt_content(tab, d)):
            term *= xs[i] ** wi
        total += term
    return float(total)


def _interlacing(parts: tuple[int, ...], size: int):
    """Partitions mu with len(parts)-1 parts, lambda_{i+1} <= mu_i <= lambda_i, |mu| = size."""
    k = len(parts)
    out = []

    def rec(i, prefix, remaining):
        if i == k - 1:
            if remaining == 0:
                out.append(tuple(prefix))
            return
        lo, hi = parts[i + 1], parts[i]
        # the rest can take at most sum(parts[i+1:k-1]) and at least sum(parts[i+2:])
        rest_max = sum(parts[i + 1:k - 1])
        rest_min = sum(parts[i + 2:k])
        for v in range(max(lo, remaining - rest_max), min(hi, remaining - rest_min) + 1):
            prefix.append(v)
            rec(i + 1, prefix, remaining - v)
            prefix.pop()

    rec(0, [], size)
    return out


@lru_cache(maxsize=None)
def _kostka_sorted(parts: tuple[int, ...], weight: tuple[int, ...]) -> int:
    # parts has exactly len(weight) entries; weight sorted decreasingly
    if len(weight) == 1:
        return 1 if parts[0] == weight[0] else 0
    if parts[len(weight):] and any(parts[len(weight):]):
        return 0
    last = weight[-1]
    sub = tuple(sorted(weight[:-1], reverse=True))
    total = 0
    for mu in _interlacing(parts, sum(parts) - last):
        total += _kostka_sorted(mu, sub)
    return total


def kostka_number(lam, w) -> int:
    """Number of SSYT of shape ``lam`` and content ``w``.

    Counted by peeling off the largest letter: its cells form a horizontal
    strip, so K_{lam, w} sums K_{mu, w'} over mu interlacing lam. Kostka numbers
    do not depend on the order of ``w``, which keeps the memo table small.
    """
    w = tuple(int(v) for v in w)
    if any(v < 0 for v in w):
        raise ValueError("weights must be non-negative")
    parts = check_partition(lam)
    if sum(parts) != sum(w):
        return 0
    d = len(w)
    if sum(1 for p in parts if p > 0) > d:
        return 0
    parts = check_partition(parts, d)
    return _kostka_sorted(parts, tuple(sorted(w, reverse=True)))


def kostka_enumerated(lam, w) -> int:
    """Kostka number by listing tableaux (slow reference)."""
    d = len(w)
    target = tuple(w)
    return sum(1 for tab in enumerate_ssyt(lam, d) if ssyt_content(tab, d) == target)


# ---------------------------------------------------------------------------
# Eigenvalue measure of J^(x)n


def compositions(n: int, parts: int = 4):
    """All weight vectors (tuples of ``parts`` non-negative ints summing to n)."""
    if parts == 1:
        yield (n,)
        return
    for first in range(n, -1, -1):
        for rest in compositions(n - first, parts - 1):
            yield (first,) + rest


def multinomial(n: int, w) -> int:
    out = factorial(n)
    for v in w:
        out //= factorial(v)
    return out


def weight_probability(w, probs) -> float:
    """Probability of any single Pauli string of weight w."""
    out = 1.0
    for v, p in zip(w, probs):
        out *= float(p) ** v
    return out


def is_two_row(lam) -> bool:
    parts = check_partition(lam, 4)
    return parts[2] == 0 and parts[3] == 0


def irrep_measurement_distribution(channel: PauliChannel, n: int) -> dict:
    """P(lambda) = dim(S_lambda) s_lambda(p_I, p_X, p_Y, p_Z) for all lambda of n into <= 4 parts."""
    if n < 1:
        raise ValueError("n must be positive")
    xs = [Fraction(float(v)) for v in channel.probs]
    h = _complete_homogeneous(xs, n + 4)
    return {lam: specht_dim(lam) * float(_schur_from_h(lam, h)) for lam in enumerate_partitions(n, 4)}


def two_row_probability(channel: PauliChannel, n: int) -> float:
    """Probability that a Schur measurement of J^(x)n returns lambda with lambda_3 = lambda_4 = 0."""
    dist = irrep_measurement_distribution(channel, n)
    return float(sum(v for lam, v in dist.items() if is_two_row(lam)))


@dataclass(frozen=True)
class EigenvalueMeasure:
    """Entries (lambda, w, multiplicity, mass) of the J^(x)n eigenvalue measure."""

    n: int
    entries: list

    def total(self) -> float:
        return float(sum(e[3] for e in self.entries))

    def by_partition(self) -> dict:
        out: dict = {}
        for lam, _, _, mass in self.entries:
            out[lam] = out.get(lam, 0.0) + mass
        return out

    def by_weight(self) -> dict:
        out: dict = {}
        for _, w, _, mass in self.entries:
            out[w] = out.get(w, 0.0) + mass
        return out

    def multiplicity_by_weight(self) -> dict:
        out: dict = {}
        for _, w, mult, _ in self.entries:
            out[w] = out.get(w, 0) + mult
        return out


def choi_eigenvalue_measure(channel: PauliChannel, n: int) -> EigenvalueMeasure:
    """Masses dim(S_lambda) K_{lambda, w} p^w for every (lambda, w) with K > 0."""
    probs = channel.probs
    weights = [(w, tuple(sorted(w, reverse=True)), weight_probability(w, probs)) for w in compositions(n)]
    entries = []
    for lam in enumerate_partitions(n, 4):
        ds = specht_dim(lam)
        table: dict = {}
        for w, key, pw in weights:
            k = table.get(key)
            if k is None:
                k = table[key] = _kostka_sorted(lam, key)
            if k:
                mult = ds * k
                entries.append((lam, w, mult, mult * pw))
    return EigenvalueMeasure(n, entries)


# ---------------------------------------------------------------------------
# Strong typicality over weight classes

TYPICAL_SLACK = 1e-12


def support(probs) -> list[int]:
    return [i for i, p in enumerate(probs) if p > 0]


def is_strongly_typical(w, dist, delta: float) -> bool:
    """Every empirical letter frequency of ``w`` is within ``delta`` of ``dist``.

    Letters with zero probability are outside the alphabet: a weight using one
    is never typical. Deviations equal to ``delta`` count as typical even when
    float rounding puts them a hair above it.
    """
    if delta <= 0:
        raise ValueError("delta must be positive")
    n = sum(w)
    if n == 0:
        raise ValueError("empty weight vector")
    for wi, pi in zip(w, dist):
        if pi == 0:
            if wi:
                return False
            continue
        if abs(wi / n - pi) > delta + TYPICAL_SLACK:
            return False
    return True


def support_weights(n: int, probs):
    """Weight vectors of length 4 that only use letters with positive probability."""
    sup = support(probs)
    for sub in compositions(n, len(sup)):
        w = [0, 0, 0, 0]
        for idx, v in zip(sup, sub):
            w[idx] = v
        yield tuple(w)


def typical_weights(channel: PauliChannel, n: int, delta: float) -> list:
    probs = channel.probs
    return [w for w in support_weights(n, probs) if is_strongly_typical(w, probs, delta)]


def _log2_multinomial(n: int, w) -> float:
    return (lgamma(n + 1) - sum(lgamma(v + 1) for v in w)) / log(2)


def _log2_weight_prob(w, probs) -> float:
    return sum(v * log2(p) for v, p in zip(w, probs) if v)


@dataclass(frozen=True)
class TypicalStats:
    mass: float
    count: int
    min_prob: float
    max_prob: float


def typical_set_stats(channel: PauliChannel, n: int, delta: float) -> TypicalStats:
    """Exact probability mass, size, and per-string probability range of T_delta^n."""
    probs = channel.probs
    ws = typical_weights(channel, n, delta)
    if not ws:
        return TypicalStats(0.0, 0, 0.0, 0.0)
    count = sum(multinomial(n, w) for w in ws)
    mass = sum(exp((_log2_multinomial(n, w) + _log2_weight_prob(w, probs)) * log(2)) for w in ws)
    lp = [_log2_weight_prob(w, probs) for w in ws]
    return TypicalStats(float(min(mass, 1.0)), count, 2.0 ** min(lp), 2.0 ** max(lp))


def fit_typicality_constants(channel: PauliChannel, ns: Iterable[int], delta: float) -> dict:
    """Smallest c making the cardinality and equipartition windows hold for every n given.

    Cardinality uses |log2|T| / n - H| <= c delta; equipartition uses
    |-log2 Pr[x] / n - H| <= c delta for all strings in the set.
    """
    probs = channel.probs
    H = shannon_bits(probs)
    c_card = 0.0
    c_equi = 0.0
    for n in ns:
        st = typical_set_stats(channel, n, delta)
        if st.count == 0:
            continue
        c_card = max(c_card, abs(log2(st.count) / n - H) / delta)
        for pr in (st.min_prob, st.max_prob):
            c_equi = max(c_equi, abs(-log2(pr) / n - H) / delta)
    return {"cardinality": c_card, "equipartition": c_equi, "entropy": H}


def equipartition_bound_constant(probs) -> float:
    """sum_i |log2 p_i| over the support: an a-priori equipartition constant."""
    return float(sum(abs(log2(p)) for p in probs if p > 0))


# ---------------------------------------------------------------------------
# Annihilation counts and complementary rank


def _resolve_weights(channel: PauliChannel, n: int, weights, delta):
    if weights is None and delta is None:
        return list(compositions(n))
    if delta is not None:
        return typical_weights(channel, n, delta)
    if callable(weights):
        return [w for w in compositions(n) if weights(w)]
    return [tuple(w) for w in weights]


def annihilation_counts(
    channel: PauliChannel,
    n: int,
    weights: Iterable | Callable | None = None,
    delta: float | None = None,
) -> tuple[int, int]:
    """(total, non_annihilating) Schur-basis Kraus counts over a permutation-invariant weight set.

    ``total`` = sum over w in T and all lambda of dim(S_lambda) K_{lambda, w}
    (which equals the number of Pauli strings in T); ``non_annihilating``
    restricts lambda to at most two rows. T is all weights by default, the
    strongly delta-typical weights of ``channel`` if ``delta`` is given, or
    the explicit collection / predicate ``weights``.
    """
    ws = _resolve_weights(channel, n, weights, delta)
    parts = enumerate_partitions(n, 4)
    dims = {lam: specht_dim(lam) for lam in parts}
    total = 0
    two_row = 0
    for w in ws:
        for lam in parts:
            k = kostka_number(lam, w)
            if k:
                total += dims[lam] * k
                if is_two_row(lam):
                    two_row += dims[lam] * k
    return total, two_row


def two_row_kraus_bound(n: int) -> int:
    """Number of Schur-basis Kraus operators with at most two rows."""
    return sum(specht_dim(lam) * weyl_dim(lam, 4) for lam in enumerate_partitions(n, 4) if is_two_row(lam))


def complementary_rank_check(state, channel: PauliChannel) -> tuple[int, int]:
    """(observed environment rank, two-row bound) for a symmetric input or dense n-qubit state.

    For inputs supported on the symmetric subspace the observed rank cannot
    exceed the bound; dense states outside it may.
    """
    if isinstance(state, SymmetricInput):
        rho = symmetric_density(state)
    else:
        rho = np.asarray(state, dtype=complex)
    n = int(round(np.log2(rho.shape[0])))
    observed = numeric_rank(environment_spectrum(rho, channel))
    return observed, two_row_kraus_bound(n)
