"""Dense brute-force references on the full 2^n (or 4^n) dimensional spaces.

Everything here works with explicit state vectors and density matrices and is
only meant for small n; it shares no code with the block-diagonal fast path
beyond the channel definition.
"""

from __future__ import annotations

from itertools import combinations

import numpy as np

from .basis import dicke_vector
from .channel import PauliChannel, choi, kraus_operators
from .coherent_info import SymmetricInput
from .entropy import entropy_bits, project_to_simplex, shannon_bits

MAX_CI_QUBITS = 10
MAX_ENV_QUBITS = 6
RANK_RTOL = 1e-10


class SizeError(ValueError):
    """Requested system is too large for dense evaluation."""


def build_purification(inp: SymmetricInput) -> np.ndarray:
    """(|0>|psi0> + |1>|psi1>)/sqrt(2) on R (x) A_1..A_n, reference qubit first."""
    n = inp.n
    if n > MAX_CI_QUBITS:
        raise SizeError(f"dense purification limited to n <= {MAX_CI_QUBITS}, got {n}")
    dicke = np.stack([dicke_vector(n, k) for k in range(n + 1)], axis=1)
    psi0 = dicke @ inp.alpha[0]
    psi1 = dicke @ inp.alpha[1]
    return np.concatenate([psi0, psi1]) / np.sqrt(2)


def apply_channel_qubitwise(channel: PauliChannel, rho: np.ndarray, which_qubits, num_qubits: int | None = None):
    """Apply the single-qubit Pauli channel to each listed qubit of ``rho``.

    Qubit 0 is the most significant tensor factor. Each application is a
    reshape plus index flip / sign, never an explicit 4^n Kraus sum.
    """
    rho = np.asarray(rho, dtype=complex)
    dim = rho.shape[0]
    if num_qubits is None:
        num_qubits = int(round(np.log2(dim)))
    if rho.shape != (2**num_qubits, 2**num_qubits):
        raise ValueError(f"density matrix shape {rho.shape} does not match {num_qubits} qubits")
    pI, pX, pY, pZ = channel.probs
    t = rho.reshape((2,) * (2 * num_qubits))
    for q in which_qubits:
        if not 0 <= q < num_qubits:
            raise ValueError(f"qubit {q} out of range")
        r_ax, c_ax = q, num_qubits + q
        flipped = np.flip(np.flip(t, axis=r_ax), axis=c_ax)
        shape = [1] * (2 * num_qubits)
        shape[r_ax] = 2
        sign_r = np.array([1.0, -1.0]).reshape(shape)
        shape[r_ax] = 1
        shape[c_ax] = 2
        sign_c = np.array([1.0, -1.0]).reshape(shape)
        sign = sign_r * sign_c
        # Z: (-1)^(r+c) sign; X: flip both; Y = X and Z combined
        t = pI * t + pZ * sign * t + pX * flipped + pY * sign * flipped
    return t.reshape(dim, dim)


def partial_trace_first(rho: np.ndarray, dim_first: int) -> np.ndarray:
    d2 = rho.shape[0] // dim_first
    return np.einsum("iaib->ab", rho.reshape(dim_first, d2, dim_first, d2))


def brute_ci(inp: SymmetricInput, channel: PauliChannel) -> float:
    """S(N^(x)n(rho)) - S((I (x) N^(x)n)(|psi><psi|)) by dense diagonalisation."""
    psi = build_purification(inp)
    n = inp.n
    joint = apply_channel_qubitwise(channel, np.outer(psi, psi.conj()), range(1, n + 1), n + 1)
    out = partial_trace_first(joint, 2)
    return entropy_bits(out) - entropy_bits(joint)


def symmetric_density(inp: SymmetricInput) -> np.ndarray:
    """rho = (|psi0><psi0| + |psi1><psi1|)/2 on n qubits, dense."""
    psi = build_purification(inp).reshape(2, -1)
    return 0.5 * (np.outer(psi[0], psi[0].conj()) + np.outer(psi[1], psi[1].conj())) * 2


def _kraus_images(channel: PauliChannel, v: np.ndarray, n: int) -> np.ndarray:
    """A_k v for every Kraus string k; shape (K^n, 2^n), strings in lexicographic order."""
    ops = np.stack([op for _, op in kraus_operators(channel)])
    K = len(ops)
    t = v.reshape((1,) + (2,) * n)
    for q in range(n):
        # new Kraus axis goes right after the existing ones
        t = np.tensordot(ops, t, axes=([2], [1 + q]))  # (K, 2_out, prev..., remaining)
        t = np.moveaxis(t, 1, 2 + q)  # place output qubit back at its slot
        t = t.reshape((K ** (q + 1),) + t.shape[2:])
    return t.reshape(K**n, 2**n)


def _environment_factor(rho: np.ndarray, channel: PauliChannel, n: int) -> np.ndarray:
    """F with E = F^T conj(F); one column block per eigenvector of rho."""
    if n > MAX_ENV_QUBITS:
        raise SizeError(f"complementary output limited to n <= {MAX_ENV_QUBITS}, got {n}")
    evals, evecs = np.linalg.eigh(0.5 * (rho + rho.conj().T))
    keep = evals > RANK_RTOL * max(evals.max(), 0.0)
    cols = [np.sqrt(e) * _kraus_images(channel, evecs[:, i], n).T for i, e in enumerate(evals) if keep[i]]
    return np.concatenate(cols, axis=0)  # (r * 2^n, K^n)


def complementary_output(rho: np.ndarray, channel: PauliChannel) -> np.ndarray:
    """Environment state E[k1, k2] = tr(A_k1 rho A_k2^dagger) over all Kraus strings."""
    rho = np.asarray(rho, dtype=complex)
    n = int(round(np.log2(rho.shape[0])))
    F = _environment_factor(rho, channel, n)
    return F.T @ F.conj()


def environment_spectrum(rho: np.ndarray, channel: PauliChannel) -> np.ndarray:
    """Non-zero part of the spectrum of the environment state via the small Gram matrix."""
    rho = np.asarray(rho, dtype=complex)
    n = int(round(np.log2(rho.shape[0])))
    F = _environment_factor(rho, channel, n)
    gram = F.conj() @ F.T
    return np.linalg.eigvalsh(0.5 * (gram + gram.conj().T))


def numeric_rank(eigs, rtol: float = RANK_RTOL) -> int:
    eigs = np.asarray(eigs, dtype=float)
    if eigs.size == 0:
        return 0
    return int(np.sum(eigs > rtol * eigs.max()))


def complementary_ci(inp: SymmetricInput, channel: PauliChannel) -> float:
    """I_c = S(B) - S(E) using the complementary channel output."""
    rho = symmetric_density(inp)
    out = apply_channel_qubitwise(channel, rho, range(inp.n), inp.n)
    return entropy_bits(out) - shannon_bits(project_to_simplex(environment_spectrum(rho, channel)))


def swap_operator(dim: int, n: int, i: int, j: int) -> np.ndarray:
    """Permutation matrix exchanging tensor factors i and j of (C^dim)^(x)n."""
    idx = np.arange(dim**n).reshape((dim,) * n)
    perm = np.swapaxes(idx, i, j).ravel()
    out = np.zeros((dim**n, dim**n))
    out[np.arange(dim**n), perm] = 1.0
    return out


def choi_isotypic_weights(channel: PauliChannel, n: int) -> dict:
    """tr(Pi_lambda J^(x)n) for each partition lambda, by dense diagonalisation.

    The isotypic projectors Pi_lambda are eigenspaces of the sum of all
    transpositions, which acts on S_lambda (x) V_lambda as the content sum of
    lambda. Only valid while those content sums are distinct (n <= 5).
    """
    if n > 4:
        raise SizeError("dense Choi tensor power limited to n <= 4")
    from .rep_core import enumerate_partitions

    J = choi(channel)
    Jn = np.array([[1.0 + 0j]])
    for _ in range(n):
        Jn = np.kron(Jn, J)
    C = sum((swap_operator(4, n, i, j) for i, j in combinations(range(n), 2)), np.zeros((4**n, 4**n)))
    evals, evecs = np.linalg.eigh(C)
    out = {}
    for lam in enumerate_partitions(n, 4):
        content = sum(c - r for r, row in enumerate(lam) for c in range(row))
        sel = np.abs(evals - content) < 1e-6
        V = evecs[:, sel]
        out[lam] = float(np.trace(V.conj().T @ Jn @ V).real)
    return out


ORACLE_FAMILIES = ("depolarizing", "independent_xz", "two_pauli")
ORACLE_PS = (0.01, 0.05, 0.1, 0.15, 0.2)
MAX_SUITE_QUBITS = 8


def equivalence_suite(
    ns=range(1, MAX_SUITE_QUBITS + 1),
    samples: int = 200,
    seed: int = 0,
    families=ORACLE_FAMILIES,
    ps=ORACLE_PS,
    fast=None,
) -> dict:
    """Compare the block-diagonal CI with :func:`brute_ci` on random inputs.

    ``fast`` defaults to :func:`symcap.coherent_info.evaluate_ci`; it is a
    parameter so a deliberately broken evaluator can be plugged in.
    Returns the largest absolute difference and where it occurred.
    """
    from .channel import FAMILY_RANGES, family_channel
    from .coherent_info import evaluate_ci, precompute, random_input

    fast = fast or evaluate_ci
    worst = {"max_diff": 0.0, "n": None, "family": None, "p": None, "sample": None}
    cases = 0
    for n in ns:
        if n > MAX_SUITE_QUBITS:
            raise SizeError(f"oracle suite limited to n <= {MAX_SUITE_QUBITS}, got {n}")
        for fi, fam in enumerate(families):
            lo, hi = FAMILY_RANGES[fam]
            for pi, p in enumerate(ps):
                if not lo <= p <= hi:
                    continue
                channel = family_channel(fam, p)
                pre = precompute(channel, n, keep_q=False)
                rng = np.random.default_rng([seed, n, fi, pi])
                for s in range(samples):
                    inp = random_input(n, rng)
                    diff = abs(fast(inp, pre) - brute_ci(inp, channel))
                    cases += 1
                    if not diff <= worst["max_diff"]:
                        worst = {"max_diff": float(diff), "n": n, "family": fam, "p": p, "sample": s}
    worst["cases"] = cases
    return worst
