import numpy as np
import pytest

from symcap.channel import PauliChannel, family_channel, hashing_ci
from symcap.coherent_info import SymmetricInput, random_input
from symcap.oracle import (
    SizeError,
    apply_channel_qubitwise,
    brute_ci,
    build_purification,
    complementary_ci,
    complementary_output,
    environment_spectrum,
    equivalence_suite,
    numeric_rank,
    partial_trace_first,
    symmetric_density,
)


def random_density(rng, dim):
    a = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    rho = a @ a.conj().T
    return rho / np.trace(rho)


def test_purification_n1_is_bell_state():
    psi = build_purification(SymmetricInput(1, np.eye(2)))
    assert np.allclose(psi, np.array([1, 0, 0, 1]) / np.sqrt(2))


def test_identical_branches_factorise():
    d = np.zeros(3)
    d[1] = 1
    psi = build_purification(SymmetricInput(2, np.stack([d, d])))
    m = psi.reshape(2, 4)
    assert np.linalg.matrix_rank(m, tol=1e-12) == 1


def test_purification_norm(rng):
    for n in range(1, 9):
        assert np.linalg.norm(build_purification(random_input(n, rng))) == pytest.approx(1.0, abs=1e-12)


def test_size_limits(rng):
    with pytest.raises(SizeError):
        build_purification(random_input(11, rng))
    with pytest.raises(SizeError):
        complementary_output(np.eye(2**7) / 2**7, family_channel("dep", 0.1))


def test_identity_channel_leaves_state(rng):
    rho = random_density(rng, 8)
    assert np.allclose(apply_channel_qubitwise(PauliChannel.identity(), rho, range(3)), rho)


def test_full_depolarization(rng):
    rho = random_density(rng, 8)  # reference qubit + two channel qubits
    out = apply_channel_qubitwise(family_channel("dep", 0.25), rho, [1, 2], 3)
    ref = partial_trace_first(rho.reshape(2, 4, 2, 4).transpose(1, 0, 3, 2).reshape(8, 8), 4)
    assert np.allclose(out, np.kron(ref, np.eye(4) / 4), atol=1e-14)


def test_trace_preserved_and_order_irrelevant(rng):
    ch = PauliChannel(0.5, 0.2, 0.1, 0.2)
    rho = random_density(rng, 16)
    a = apply_channel_qubitwise(ch, rho, [0, 2, 3])
    b = apply_channel_qubitwise(ch, rho, [3, 0, 2])
    assert np.trace(a).real == pytest.approx(1.0, abs=1e-12)
    assert np.allclose(a, b, atol=1e-14)


def test_matches_kraus_sum(rng):
    ch = PauliChannel(0.4, 0.3, 0.2, 0.1)
    rho = random_density(rng, 4)
    from symcap.channel import kraus_operators

    ks = [A for _, A in kraus_operators(ch)]
    direct = sum(np.kron(A, B) @ rho @ np.kron(A, B).conj().T for A in ks for B in ks)
    assert np.allclose(apply_channel_qubitwise(ch, rho, [0, 1]), direct, atol=1e-14)


def test_dimension_mismatch():
    with pytest.raises(ValueError):
        apply_channel_qubitwise(PauliChannel.identity(), np.eye(4), [0], 3)


def test_brute_ci_examples(rng):
    q, _ = np.linalg.qr(rng.normal(size=(5, 2)) + 1j * rng.normal(size=(5, 2)))
    assert brute_ci(SymmetricInput(4, q.T), PauliChannel.identity()) == pytest.approx(1.0, abs=1e-10)
    ch = family_channel("dep", 0.04)
    assert brute_ci(SymmetricInput(1, np.eye(2)), ch) == pytest.approx(hashing_ci(ch), abs=1e-12)


def test_complementary_identity_is_trivial():
    E = complementary_output(np.eye(4) / 4, PauliChannel.identity())
    assert E.shape == (1, 1) and E[0, 0] == pytest.approx(1.0)


def test_complementary_full_rank_for_maximally_mixed():
    E = complementary_output(np.eye(4) / 4, family_channel("dep", 0.1))
    assert E.shape == (16, 16)
    assert numeric_rank(np.linalg.eigvalsh(E)) == 16


@pytest.mark.parametrize("kind", ["dep", "xz", "2pauli"])
def test_complementary_trace_and_psd(rng, kind):
    rho = symmetric_density(random_input(3, rng))
    E = complementary_output(rho, family_channel(kind, 0.12))
    assert np.trace(E).real == pytest.approx(1.0, abs=1e-10)
    assert np.linalg.eigvalsh(E).min() > -1e-12
    assert np.allclose(np.sort(environment_spectrum(rho, family_channel(kind, 0.12)))[-5:],
                       np.sort(np.linalg.eigvalsh(E))[-5:], atol=1e-12)


def test_two_pauli_environment_is_3_to_the_n():
    E = complementary_output(np.eye(4) / 4, family_channel("2pauli", 0.1))
    assert E.shape == (9, 9)


@pytest.mark.parametrize("kind", ["dep", "xz", "2pauli"])
@pytest.mark.parametrize("n", range(1, 6))
def test_complementary_route_agrees(rng, kind, n):
    ch = family_channel(kind, 0.11)
    for _ in range(3):
        inp = random_input(n, rng)
        assert complementary_ci(inp, ch) == pytest.approx(brute_ci(inp, ch), abs=1e-9)


def test_equivalence_suite_small():
    res = equivalence_suite(ns=[1, 2, 3], samples=3, seed=1)
    assert res["max_diff"] <= 1e-8 and res["cases"] == 3 * 3 * 5 * 3


def test_equivalence_suite_detects_sign_flip():
    from symcap.coherent_info import evaluate_ci

    res = equivalence_suite(ns=[2], samples=2, fast=lambda inp, pre: -evaluate_ci(inp, pre))
    assert res["max_diff"] > 1e-3


def test_equivalence_suite_size_limit():
    with pytest.raises(SizeError):
        equivalence_suite(ns=[9], samples=1)
