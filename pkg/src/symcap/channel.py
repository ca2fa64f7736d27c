"""Mixed Pauli channels on a single qubit."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .entropy import shannon_bits

I2 = np.eye(2, dtype=complex)
X = np.array([[0, 1], [1, 0]], dtype=complex)
Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
Z = np.array([[1, 0], [0, -1]], dtype=complex)
PAULIS = (I2, X, Y, Z)
PAULI_LABELS = ("I", "X", "Y", "Z")

PROB_TOL = 1e-12

# CLI short names -> family kind
FAMILY_ALIASES = {
    "dep": "depolarizing",
    "depolarizing": "depolarizing",
    "xz": "independent_xz",
    "independent_xz": "independent_xz",
    "2pauli": "two_pauli",
    "two_pauli": "two_pauli",
}
FAMILY_RANGES = {
    "depolarizing": (0.0, 1.0 / 3.0),
    "independent_xz": (0.0, 1.0),
    "two_pauli": (0.0, 0.5),
}


@dataclass(frozen=True)
class PauliChannel:
    """Pauli channel rho -> p_I rho + p_X X rho X + p_Y Y rho Y + p_Z Z rho Z."""

    p_I: float
    p_X: float
    p_Y: float
    p_Z: float

    def __post_init__(self):
        probs = self.probs
        if np.any(probs < 0) or not np.all(np.isfinite(probs)):
            raise ValueError(f"Pauli probabilities must be non-negative, got {tuple(probs)}")
        if abs(probs.sum() - 1.0) > PROB_TOL:
            raise ValueError(f"Pauli probabilities must sum to 1, got {probs.sum()!r}")

    @property
    def probs(self) -> np.ndarray:
        return np.array([self.p_I, self.p_X, self.p_Y, self.p_Z], dtype=float)

    @classmethod
    def identity(cls) -> PauliChannel:
        return cls(1.0, 0.0, 0.0, 0.0)


@dataclass(frozen=True)
class ChannelFamily:
    kind: str
    p: float

    def __post_init__(self):
        kind = FAMILY_ALIASES.get(self.kind)
        if kind is None:
            raise ValueError(f"unknown channel family {self.kind!r}")
        object.__setattr__(self, "kind", kind)
        lo, hi = FAMILY_RANGES[kind]
        if not lo <= self.p <= hi:
            raise ValueError(f"p={self.p} outside [{lo}, {hi:.6g}] for {kind}")

    def channel(self) -> PauliChannel:
        return family_channel(self.kind, self.p)

    def to_json(self) -> dict:
        return {"kind": self.kind, "p": self.p}

    @classmethod
    def from_json(cls, data: dict) -> ChannelFamily:
        return cls(data["kind"], float(data["p"]))


def family_channel(kind: str, p: float) -> PauliChannel:
    """Build the Pauli channel of a named one-parameter family."""
    kind = FAMILY_ALIASES.get(kind, kind)
    lo, hi = FAMILY_RANGES.get(kind, (None, None))
    if lo is None:
        raise ValueError(f"unknown channel family {kind!r}")
    if not lo <= p <= hi:
        raise ValueError(f"p={p} outside [{lo}, {hi:.6g}] for {kind}")
    if kind == "depolarizing":
        return PauliChannel(1 - 3 * p, p, p, p)
    if kind == "independent_xz":
        q = 1 - p
        probs = (q * q, p * q, p * p, p * q)
        # exact in real arithmetic; renormalise the float round-off
        s = sum(probs)
        return PauliChannel(*(x / s for x in probs))
    return PauliChannel(1 - 2 * p, p, 0.0, p)


def apply_single(channel: PauliChannel, M) -> np.ndarray:
    """Apply the channel to an arbitrary (not necessarily Hermitian) 2x2 matrix."""
    M = np.asarray(M, dtype=complex)
    out = np.zeros_like(M)
    for p, P in zip(channel.probs, PAULIS):
        if p:
            out = out + p * (P @ M @ P)
    return out


def apply_single_batch(channel: PauliChannel, mats: np.ndarray) -> np.ndarray:
    """Vectorised :func:`apply_single` over arrays of shape (..., 2, 2)."""
    pI, pX, pY, pZ = channel.probs
    a = mats[..., 0, 0]
    b = mats[..., 0, 1]
    c = mats[..., 1, 0]
    d = mats[..., 1, 1]
    out = np.empty_like(mats, dtype=complex)
    # X swaps diagonal and off-diagonal pairs, Z negates off-diagonals, Y does both
    out[..., 0, 0] = (pI + pZ) * a + (pX + pY) * d
    out[..., 1, 1] = (pI + pZ) * d + (pX + pY) * a
    out[..., 0, 1] = (pI - pZ) * b + (pX - pY) * c
    out[..., 1, 0] = (pI - pZ) * c + (pX - pY) * b
    return out


def bell_basis() -> np.ndarray:
    """Columns are (I (x) P)|Phi+> for P = I, X, Y, Z."""
    phi = np.array([1, 0, 0, 1], dtype=complex) / np.sqrt(2)
    return np.stack([np.kron(I2, P) @ phi for P in PAULIS], axis=1)


def choi(channel: PauliChannel) -> np.ndarray:
    """Normalised Choi matrix (I (x) N)(Phi), trace 1, ordered as reference (x) output."""
    phi = np.array([1, 0, 0, 1], dtype=complex) / np.sqrt(2)
    Phi = np.outer(phi, phi.conj())
    J = np.zeros((4, 4), dtype=complex)
    for p, P in zip(channel.probs, PAULIS):
        K = np.kron(I2, P)
        J += p * K @ Phi @ K.conj().T
    return J


def kraus_operators(channel: PauliChannel) -> list[tuple[float, np.ndarray]]:
    """``(probability, sqrt(p) * P)`` pairs with zero-probability Paulis dropped."""
    return [(float(p), np.sqrt(p) * P) for p, P in zip(channel.probs, PAULIS) if p > 0]


def hashing_ci(channel: PauliChannel) -> float:
    """Single-use coherent information of the maximally mixed qubit, 1 - H(p)."""
    return 1.0 - shannon_bits(channel.probs)
