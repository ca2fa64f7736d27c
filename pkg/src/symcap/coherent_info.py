"""Coherent information of n Pauli channel uses on rank-two symmetric inputs.

The input is rho = (|psi0><psi0| + |psi1><psi1|) / 2 with both states in the
symmetric subspace, given by their Dicke coefficients ``alpha`` (2 x (n+1)).
Output and reference-output states are block diagonal over two-row partitions
lambda of n: the channel output is sum_lambda c_lambda I/dim(S_lambda) (x)
sigma_lambda and the joint state with the purifying qubit carries omega_lambda
in place of sigma_lambda, so

    I_c = sum_lambda c_lambda (S(sigma_lambda) - S(omega_lambda)).

The blocks come from q^2_lambda(N(|phi_a><phi_b|)) for a tensor-power spanning
set {|phi_a>^(x)n} of the symmetric subspace, rotated back to Dicke pairs
once per (channel, n).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .basis import SpanningBasis, choose_spanning_states
from .channel import PauliChannel, apply_single, apply_single_batch
from .entropy import entropy_bits, project_to_simplex, shannon_bits
from .rep_core import binom, enumerate_partitions, irrep_q2_batch, specht_dim, two_row_label

BLOCK_CUTOFF = 1e-15
NORM_TOL = 1e-10
_LOG_FLOOR = 1e-300


class NumericError(ArithmeticError):
    """The block decomposition lost all weight (should not happen for CPTP maps)."""


@dataclass(frozen=True)
class SymmetricInput:
    """Two symmetric-subspace states in Dicke coordinates (rows of ``alpha``)."""

    n: int
    alpha: np.ndarray

    def __post_init__(self):
        alpha = np.asarray(self.alpha, dtype=complex)
        if alpha.shape != (2, self.n + 1):
            raise ValueError(f"alpha must have shape (2, {self.n + 1}), got {alpha.shape}")
        norms = np.linalg.norm(alpha, axis=1)
        if np.any(np.abs(norms - 1.0) > NORM_TOL):
            raise ValueError(f"rows of alpha must be unit vectors, norms {norms}")
        object.__setattr__(self, "alpha", alpha)

    @classmethod
    def normalized(cls, alpha) -> SymmetricInput:
        alpha = np.asarray(alpha, dtype=complex)
        return cls(alpha.shape[1] - 1, alpha / np.linalg.norm(alpha, axis=1, keepdims=True))

    def density_matrix(self) -> np.ndarray:
        """rho in the Dicke basis ((n+1) x (n+1))."""
        a = self.alpha
        return 0.5 * (np.outer(a[0], a[0].conj()) + np.outer(a[1], a[1].conj()))

    def to_json(self) -> dict:
        return {
            "n": self.n,
            "alpha0": [[z.real, z.imag] for z in self.alpha[0].tolist()],
            "alpha1": [[z.real, z.imag] for z in self.alpha[1].tolist()],
        }

    @classmethod
    def from_json(cls, data: dict) -> SymmetricInput:
        rows = [[complex(re, im) for re, im in data[key]] for key in ("alpha0", "alpha1")]
        return cls(int(data["n"]), np.array(rows))


def product_state_dicke(n: int, phi) -> np.ndarray:
    """Dicke coordinates of |phi>^(x)n."""
    c0, c1 = complex(phi[0]), complex(phi[1])
    return np.array([np.sqrt(binom(n, k)) * c0 ** (n - k) * c1**k for k in range(n + 1)])


def repetition_input(n: int) -> SymmetricInput:
    """rho = (|+><+|^(x)n + |-><-|^(x)n) / 2, the phase-flip repetition code."""
    s = 1 / np.sqrt(2)
    return SymmetricInput(n, np.stack([product_state_dicke(n, (s, s)), product_state_dicke(n, (s, -s))]))


def random_input(n: int, rng: np.random.Generator, real: bool = False) -> SymmetricInput:
    a = rng.normal(size=(2, n + 1))
    if not real:
        a = a + 1j * rng.normal(size=(2, n + 1))
    return SymmetricInput.normalized(a)


@dataclass
class Precomputation:
    """Irrep blocks for one (channel, n, spanning basis).

    ``Q[lam][a, b] = q_lam(N(|phi_a><phi_b|))`` and
    ``ND[lam][k, l] = sum_ab beta[k, a] conj(beta[l, b]) Q[lam][a, b]``,
    each of shape (n+1, n+1, l+1, l+1). ``Q`` is dropped when built with
    ``keep_q=False`` to halve memory at large n.
    """

    channel: PauliChannel
    n: int
    basis: SpanningBasis
    partitions: list
    ND: dict
    Q: dict | None = None
    dims: dict = field(default_factory=dict)

    def block_size(self, lam) -> int:
        return two_row_label(lam)[0] + 1


def channel_pair_images(channel: PauliChannel, basis: SpanningBasis) -> np.ndarray:
    """N(|phi_a><phi_b|) for all spanning pairs, shape (n+1, n+1, 2, 2)."""
    st = basis.states
    outer = st[:, None, :, None] * st[None, :, None, :].conj()
    return apply_single_batch(channel, outer)


def precompute(
    channel: PauliChannel, n: int, basis: SpanningBasis | None = None, keep_q: bool = True
) -> Precomputation:
    """Build every q-block and Dicke-pair block for all two-row partitions of n."""
    if basis is None:
        basis = choose_spanning_states(n)
    if basis.n != n:
        raise ValueError(f"basis is for n={basis.n}, not n={n}")
    mats = channel_pair_images(channel, basis)
    beta = basis.beta
    partitions = enumerate_partitions(n, 2)
    Q, ND = {}, {}
    m = n + 1
    for lam in partitions:
        q = irrep_q2_batch(mats, lam)
        L = q.shape[-1]
        flat = q.reshape(m, m * L * L)
        # contract a with beta[k, a], then b with conj(beta[l, b])
        t = (beta @ flat).reshape(m, m, L * L)
        nd = np.einsum("kbx,lb->klx", t, beta.conj(), optimize=True)
        ND[lam] = nd.reshape(m, m, L, L)
        if keep_q:
            Q[lam] = q
    dims = {lam: specht_dim(lam) for lam in partitions}
    return Precomputation(channel, n, basis, partitions, ND, Q if keep_q else None, dims)


@dataclass
class Block:
    lam: tuple
    c: float
    sigma: np.ndarray
    omega: np.ndarray
    S_sigma: float = float("nan")
    S_omega: float = float("nan")


@dataclass
class BlockDecomposition:
    blocks: list

    @property
    def c_total(self) -> float:
        return float(sum(b.c for b in self.blocks))

    def ci(self) -> float:
        return float(sum(b.c * (b.S_sigma - b.S_omega) for b in self.blocks))


def _raw_blocks(alpha: np.ndarray, nd: np.ndarray) -> np.ndarray:
    """W[i, j] = 1/2 sum_kl alpha[i, k] conj(alpha[j, l]) ND[k, l]; shape (2, 2, L, L)."""
    m, _, L, _ = nd.shape
    x = (alpha @ nd.reshape(m, m * L * L)).reshape(2, m, L * L)
    w = 0.5 * np.einsum("ilx,jl->ijx", x, alpha.conj(), optimize=True)
    return w.reshape(2, 2, L, L)


def _supermatrix(w: np.ndarray) -> np.ndarray:
    L = w.shape[-1]
    return w.transpose(0, 2, 1, 3).reshape(2 * L, 2 * L)


def block_decomposition(inp: SymmetricInput, pre: Precomputation) -> BlockDecomposition:
    """c_lambda, sigma_lambda and omega_lambda for every retained block."""
    if inp.n != pre.n:
        raise ValueError(f"input has n={inp.n}, precomputation n={pre.n}")
    blocks = []
    for lam in pre.partitions:
        w = _raw_blocks(inp.alpha, pre.ND[lam])
        r = w[0, 0] + w[1, 1]
        qbar = float(np.trace(r).real)
        c = qbar * pre.dims[lam]
        if c < BLOCK_CUTOFF:
            continue
        sigma = r / qbar
        omega = _supermatrix(w) / qbar
        sigma = 0.5 * (sigma + sigma.conj().T)
        omega = 0.5 * (omega + omega.conj().T)
        blocks.append(Block(lam, c, sigma, omega, entropy_bits(sigma), entropy_bits(omega)))
    if not blocks:
        raise NumericError("every block weight fell below the cutoff")
    return BlockDecomposition(blocks)


def evaluate_ci(inp: SymmetricInput, pre: Precomputation) -> float:
    """Total coherent information I_c(N^(x)n, rho) in bits (not divided by n)."""
    if inp.n != pre.n:
        raise ValueError(f"input has n={inp.n}, precomputation n={pre.n}")
    total = 0.0
    kept = False
    for lam in pre.partitions:
        w = _raw_blocks(inp.alpha, pre.ND[lam])
        r = w[0, 0] + w[1, 1]
        qbar = float(np.trace(r).real)
        c = qbar * pre.dims[lam]
        if c < BLOCK_CUTOFF:
            continue
        kept = True
        om = _supermatrix(w)
        s_sig = shannon_bits(project_to_simplex(np.linalg.eigvalsh(0.5 * (r + r.conj().T)) / qbar))
        s_om = shannon_bits(project_to_simplex(np.linalg.eigvalsh(0.5 * (om + om.conj().T)) / qbar))
        total += c * (s_sig - s_om)
    if not kept:
        raise NumericError("every block weight fell below the cutoff")
    return float(total)


def _xlogx_and_log(m: np.ndarray):
    """tr(m log2 m) and log2(m) for a Hermitian PSD-intended block."""
    e, v = np.linalg.eigh(0.5 * (m + m.conj().T))
    e = np.clip(e, 0.0, None)
    logs = np.log2(np.maximum(e, _LOG_FLOOR))
    return float(np.sum(e * logs)), (v * logs) @ v.conj().T


def ci_and_gradient(alpha: np.ndarray, pre: Precomputation) -> tuple[float, np.ndarray]:
    """Coherent information of an unnormalised ``alpha`` and its gradient.

    Uses the identity c (S(sigma) - S(omega)) = dim(S_lambda) (tr W log W -
    tr R log R) on the unnormalised blocks. The returned gradient ``g`` is the
    Wirtinger derivative dCI/d conj(alpha) for alpha held fixed (no row
    normalisation); the directional derivative along ``d`` is
    ``2 Re sum(conj(g) * d)``. The value here uses clipped rather than
    simplex-projected spectra; use :func:`evaluate_ci` for reported numbers.
    """
    alpha = np.asarray(alpha, dtype=complex)
    m = pre.n + 1
    total = 0.0
    grad = np.zeros_like(alpha)
    for lam in pre.partitions:
        nd = pre.ND[lam]
        L = nd.shape[-1]
        w = _raw_blocks(alpha, nd)
        r = w[0, 0] + w[1, 1]
        if float(np.trace(r).real) * pre.dims[lam] < BLOCK_CUTOFF:
            continue
        fw, gw = _xlogx_and_log(_supermatrix(w))
        fr, gr = _xlogx_and_log(r)
        d = pre.dims[lam]
        total += d * (fw - fr)
        gblocks = gw.reshape(2, L, 2, L).transpose(0, 2, 1, 3)  # G[j, i] blocks
        # columns: tr(G_ji X) for (j, i) pairs, then tr(H X)
        cols = np.concatenate(
            [gblocks.transpose(0, 1, 3, 2).reshape(4, L * L), gr.T.reshape(1, L * L)], axis=0
        )
        traces = nd.reshape(m * m, L * L) @ cols.T  # (k*l, 5)
        traces = traces.reshape(m, m, 5)
        tw = traces[:, :, :4].reshape(m, m, 2, 2)  # [k, l, j, i]
        tr_ = traces[:, :, 4]
        gw_part = np.einsum("ik,klji->jl", alpha, tw, optimize=True)
        gr_part = alpha @ tr_
        grad += 0.5 * d * (gw_part - gr_part)
    return float(total), grad


def evaluate_ci_extended(
    inp: SymmetricInput, channel: PauliChannel, basis: SpanningBasis | None = None, dps: int = 32
) -> float:
    """Re-evaluate the coherent information in mpmath arithmetic at ``dps`` digits.

    Slow (pure-Python multiprecision); meant for confirming threshold-scale
    values, not for optimisation loops.
    """
    import mpmath

    n = inp.n
    if basis is None:
        basis = choose_spanning_states(n)
    with mpmath.workdps(dps):
        m = n + 1
        A = mpmath.matrix(m, m)
        st = [[mpmath.mpc(complex(z)) for z in row] for row in basis.states]
        for k in range(m):
            for j in range(m):
                A[k, j] = mpmath.sqrt(binom(n, k)) * st[j][0] ** (n - k) * st[j][1] ** k
        Ainv = mpmath.inverse(A)
        # gamma[i, a] = sum_k alpha[i, k] beta[k, a], beta = Ainv^T
        alpha = [[mpmath.mpc(complex(z)) for z in row] for row in inp.alpha]
        gamma = [[mpmath.fsum(alpha[i][k] * Ainv[a, k] for k in range(m)) for a in range(m)] for i in range(2)]
        probs = [mpmath.mpf(float(p)) for p in channel.probs]
        pairs = {}
        for a in range(m):
            for b in range(m):
                M = [[st[a][r] * mpmath.conj(st[b][c]) for c in range(2)] for r in range(2)]
                pairs[a, b] = _mp_apply(probs, M)
        total = mpmath.mpf(0)
        for lam in enumerate_partitions(n, 2):
            l, lam2 = two_row_label(lam)
            L = l + 1
            W = [[mpmath.matrix(L, L) for _ in range(2)] for _ in range(2)]
            for a in range(m):
                for b in range(m):
                    q = _mp_sym_power(pairs[a, b], l, lam2)
                    for i in range(2):
                        for j in range(2):
                            coef = gamma[i][a] * mpmath.conj(gamma[j][b]) / 2
                            W[i][j] += coef * q
            R = W[0][0] + W[1][1]
            qbar = mpmath.re(sum(R[x, x] for x in range(L)))
            c = qbar * specht_dim(lam)
            if c < BLOCK_CUTOFF:
                continue
            big = mpmath.matrix(2 * L, 2 * L)
            for i in range(2):
                for j in range(2):
                    for x in range(L):
                        for y in range(L):
                            big[i * L + x, j * L + y] = W[i][j][x, y]
            total += c * (_mp_entropy(R / qbar) - _mp_entropy(big / qbar))
        return float(total)


def _mp_apply(probs, M):
    a, b = M[0]
    c, d = M[1]
    pI, pX, pY, pZ = probs
    return [
        [(pI + pZ) * a + (pX + pY) * d, (pI - pZ) * b + (pX - pY) * c],
        [(pI - pZ) * c + (pX - pY) * b, (pI + pZ) * d + (pX + pY) * a],
    ]


def _mp_sym_power(M, l: int, lam2: int):
    import mpmath

    L = l + 1
    out = mpmath.matrix(L, L)
    col1 = [M[1][0], M[0][0]]  # M e1 as polynomial in the e1 power
    col2 = [M[1][1], M[0][1]]
    for c, j in enumerate(range(l, -1, -1)):
        poly = [mpmath.mpc(1)]
        for _ in range(j):
            poly = _mp_conv(poly, col1)
        for _ in range(l - j):
            poly = _mp_conv(poly, col2)
        for r, i in enumerate(range(l, -1, -1)):
            out[r, c] = poly[i] * mpmath.sqrt(mpmath.mpf(binom(l, j)) / binom(l, i))
    if lam2:
        det = M[0][0] * M[1][1] - M[0][1] * M[1][0]
        out *= det**lam2
    return out


def _mp_conv(p, q):
    out = [0] * (len(p) + len(q) - 1)
    for i, x in enumerate(p):
        for j, y in enumerate(q):
            out[i + j] += x * y
    return out


def _mp_entropy(m) -> object:
    import mpmath

    h = (m + m.H) / 2
    ev = sorted((mpmath.re(x) for x in mpmath.eighe(h, eigvals_only=True)), reverse=True)
    # same sort-and-threshold simplex projection as the double path
    css = mpmath.mpf(0)
    theta = mpmath.mpf(0)
    for k, u in enumerate(ev, start=1):
        css += u
        t = (css - 1) / k
        if u - t > 0:
            theta = t
    out = mpmath.mpf(0)
    for u in ev:
        x = u - theta
        if x > 0:
            out -= x * mpmath.log(x, 2)
    return out


def single_qubit_ci_closed_form(channel: PauliChannel, inp: SymmetricInput) -> float:
    """n=1 coherent information computed directly from 2x2 and 4x4 matrices."""
    if inp.n != 1:
        raise ValueError("closed form is for n=1")
    a = inp.alpha
    psi = np.concatenate([a[0], a[1]]) / np.sqrt(2)  # reference qubit first
    joint = np.outer(psi, psi.conj())
    out = np.zeros_like(joint)
    for i in range(2):
        for j in range(2):
            out[2 * i:2 * i + 2, 2 * j:2 * j + 2] = apply_single(channel, joint[2 * i:2 * i + 2, 2 * j:2 * j + 2])
    rho_b = out[:2, :2] + out[2:, 2:]
    return entropy_bits(rho_b) - entropy_bits(out)
