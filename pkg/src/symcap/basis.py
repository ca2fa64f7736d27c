"""Dicke basis and tensor-power spanning sets of the symmetric subspace."""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np
import scipy.linalg
from scipy.spatial.transform import Rotation

from .rep_core import binom

log = logging.getLogger(__name__)

COND_CEILING = 1e8
MAX_RESEEDS = 8
GOLDEN_ANGLE = np.pi * (3.0 - np.sqrt(5.0))


class BasisError(ValueError):
    """The spanning states do not give a usable change of basis."""


def dicke_overlap(n: int, k: int, phi) -> complex:
    """<D^n_k | phi^(x)n> = sqrt(C(n, k)) c0^(n-k) c1^k."""
    if not 0 <= k <= n:
        raise ValueError(f"k={k} outside 0..{n}")
    c0, c1 = complex(phi[0]), complex(phi[1])
    return np.sqrt(binom(n, k)) * c0 ** (n - k) * c1**k


def overlap_matrix(n: int, states: np.ndarray) -> np.ndarray:
    """A[k, j] = <D_k | phi_j^(x)n> for states given as rows (c0, c1)."""
    states = np.asarray(states, dtype=complex)
    k = np.arange(n + 1)[:, None]
    sq = np.sqrt(np.array([binom(n, i) for i in range(n + 1)], dtype=float))[:, None]
    return sq * states[None, :, 0] ** (n - k) * states[None, :, 1] ** k


def bloch_to_state(r: np.ndarray) -> np.ndarray:
    """Rows of unit Bloch vectors -> rows (c0, c1) with c0 real non-negative."""
    r = np.asarray(r, dtype=float)
    theta = np.arccos(np.clip(r[:, 2], -1.0, 1.0))
    phase = np.arctan2(r[:, 1], r[:, 0])
    return np.stack([np.cos(theta / 2) + 0j, np.exp(1j * phase) * np.sin(theta / 2)], axis=1)


def fibonacci_sphere(count: int, rng: np.random.Generator) -> np.ndarray:
    i = np.arange(count) + 0.5
    z = 1.0 - 2.0 * i / count
    rad = np.sqrt(1.0 - z * z)
    ang = GOLDEN_ANGLE * np.arange(count)
    pts = np.stack([rad * np.cos(ang), rad * np.sin(ang), z], axis=1)
    # seeded random rotation keeps runs reproducible but not tied to the poles
    rot = Rotation.random(random_state=rng).as_matrix()
    return pts @ rot.T


def max_pairwise_overlap(r: np.ndarray) -> float:
    """max_{i<j} |<phi_i|phi_j>|^2 = (1 + r_i . r_j) / 2."""
    if len(r) < 2:
        return 0.0
    g = r @ r.T
    iu = np.triu_indices(len(r), 1)
    return float((1.0 + g[iu].max()) / 2.0)


def polish(r: np.ndarray, steps: int = 200, lr: float = 0.05) -> np.ndarray:
    """Spread points further apart with a few projected repulsion steps.

    Uses the log-energy sum -log|r_i - r_j|; a step is kept only if the largest
    pairwise overlap does not grow.
    """
    r = r.copy()
    count = len(r)
    if count < 3:
        return r
    best = max_pairwise_overlap(r)
    for _ in range(steps):
        diff = r[:, None, :] - r[None, :, :]
        d2 = np.einsum("ijk,ijk->ij", diff, diff)
        np.fill_diagonal(d2, np.inf)
        force = np.einsum("ij,ijk->ik", 1.0 / d2, diff)
        # tangential component only
        force -= np.einsum("ik,ik->i", force, r)[:, None] * r
        trial = r + lr * force / count
        trial /= np.linalg.norm(trial, axis=1, keepdims=True)
        ov = max_pairwise_overlap(trial)
        if ov <= best + 1e-15:
            r, best = trial, ov
        else:
            lr *= 0.5
            if lr < 1e-6:
                break
    return r


def expansion_from_overlap(A: np.ndarray) -> np.ndarray:
    """beta with |D_i> = sum_j beta[i, j] |phi_j>^(x)n, i.e. A @ beta.T = I.

    Solved through a column-pivoted QR factorisation of ``A``.
    """
    A = np.asarray(A, dtype=complex)
    q, r, piv = scipy.linalg.qr(A, pivoting=True)
    diag = np.abs(np.diag(r))
    if diag.min() <= diag.max() * np.finfo(float).eps * len(diag):
        raise BasisError("overlap matrix is singular; spanning states are collinear")
    y = scipy.linalg.solve_triangular(r, q.conj().T)
    inv = np.empty_like(y)
    inv[piv] = y
    return inv.T


@dataclass(frozen=True)
class SpanningBasis:
    n: int
    seed: int
    states: np.ndarray  # (n+1, 2) rows (c0, c1)
    overlap: np.ndarray  # A[k, j]
    beta: np.ndarray  # beta[i, j]
    condition_number: float

    @classmethod
    def from_states(cls, n: int, states, seed: int = -1) -> SpanningBasis:
        states = np.asarray(states, dtype=complex)
        if states.shape != (n + 1, 2):
            raise BasisError(f"need {n + 1} single-qubit states, got shape {states.shape}")
        norms = np.linalg.norm(states, axis=1, keepdims=True)
        # leave already-normalised states untouched so a JSON round trip is bitwise
        if np.any(np.abs(norms - 1.0) > 1e-14):
            states = states / norms
        A = overlap_matrix(n, states)
        beta = expansion_from_overlap(A)
        cond = float(np.linalg.cond(A))
        return cls(n, seed, states, A, beta, max(cond, 1.0))

    def residual(self) -> float:
        """max |A beta^T - I|: how well beta reproduces the Dicke unit vectors."""
        return float(np.abs(self.overlap @ self.beta.T - np.eye(self.n + 1)).max())

    def to_json(self) -> dict:
        return {
            "n": self.n,
            "seed": self.seed,
            "states": [[c0.real, c0.imag, c1.real, c1.imag] for c0, c1 in self.states.tolist()],
            "condition_number": self.condition_number,
        }

    @classmethod
    def from_json(cls, data: dict) -> SpanningBasis:
        st = np.array([[a + 1j * b, c + 1j * d] for a, b, c, d in data["states"]])
        return cls.from_states(int(data["n"]), st, int(data.get("seed", -1)))


def choose_spanning_states(n: int, seed: int = 0) -> SpanningBasis:
    """n+1 well-spread qubit states whose n-th tensor powers span Sym^n(C^2).

    Fibonacci-sphere placement under a seeded random rotation, followed by a
    repulsion polish. Reseeds up to 8 times if cond(A) exceeds 1e8.
    """
    if n < 1:
        raise ValueError("n must be at least 1")
    best = None
    for attempt in range(MAX_RESEEDS + 1):
        rng = np.random.default_rng([seed, attempt])
        r = polish(fibonacci_sphere(n + 1, rng))
        try:
            basis = SpanningBasis.from_states(n, bloch_to_state(r), seed)
        except BasisError:
            continue
        if basis.condition_number <= COND_CEILING:
            return basis
        log.info("spanning basis n=%d attempt %d: cond %.3g", n, attempt, basis.condition_number)
        if best is None or basis.condition_number < best.condition_number:
            best = basis
    raise BasisError(
        f"no spanning basis with condition number <= {COND_CEILING:g} for n={n}"
        + (f" (best {best.condition_number:.3g})" if best else "")
    )


def dicke_vector(n: int, k: int) -> np.ndarray:
    """|D^n_k> in the computational basis (qubit 0 is the most significant bit)."""
    idx = np.arange(2**n)
    weights = np.array([bin(x).count("1") for x in idx])
    v = (weights == k).astype(complex)
    return v / np.sqrt(binom(n, k))
