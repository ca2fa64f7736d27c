"""Shannon / von Neumann entropies in bits, with simplex-projected spectra."""

from __future__ import annotations

import numpy as np

HERMITIAN_TOL = 1e-9


def project_to_simplex(v) -> np.ndarray:
    """Euclidean projection of a real vector onto the probability simplex.

    Sort-and-threshold algorithm: find the largest ``k`` with
    ``u_k - (sum_{j<=k} u_j - 1) / k > 0`` on the sorted vector ``u`` and shift
    by that threshold.
    """
    v = np.asarray(v, dtype=float).ravel()
    if v.size == 0:
        raise ValueError("cannot project an empty vector")
    u = np.sort(v)[::-1]
    css = np.cumsum(u) - 1.0
    ks = np.arange(1, v.size + 1)
    rho = np.nonzero(u - css / ks > 0)[0][-1]
    theta = css[rho] / (rho + 1)
    return np.maximum(v - theta, 0.0)


def shannon_bits(p) -> float:
    """Shannon entropy (base 2) with 0 log 0 = 0."""
    p = np.asarray(p, dtype=float).ravel()
    nz = p[p > 0]
    return float(-np.sum(nz * np.log2(nz)))


def hermitian_part(m: np.ndarray, tol: float = HERMITIAN_TOL) -> np.ndarray:
    m = np.asarray(m)
    scale = max(1.0, float(np.abs(m).max())) if m.size else 1.0
    if np.abs(m - m.conj().T).max() > tol * scale:
        raise ValueError("matrix is not Hermitian within tolerance")
    return 0.5 * (m + m.conj().T)


def spectrum(m: np.ndarray) -> np.ndarray:
    """Eigenvalues of a Hermitian-intended matrix, projected onto the simplex."""
    return project_to_simplex(np.linalg.eigvalsh(hermitian_part(m)))


def entropy_bits(m: np.ndarray) -> float:
    """von Neumann entropy in bits of a density matrix.

    The eigenvalue vector is projected onto the probability simplex before the
    Shannon entropy is taken, which removes small negative eigenvalues from
    round-off. Raises ``ValueError`` for matrices that are not Hermitian within
    ``1e-9``.

    >>> entropy_bits(np.eye(2) / 2)
    1.0
    """
    return shannon_bits(spectrum(m))
