import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from symcap.entropy import entropy_bits, project_to_simplex, shannon_bits


def test_maximally_mixed_qubit():
    assert entropy_bits(np.eye(2) / 2) == pytest.approx(1.0, abs=1e-15)


def test_pure_state_has_zero_entropy():
    v = np.array([0.6, 0.8j])
    assert entropy_bits(np.outer(v, v.conj())) == pytest.approx(0.0, abs=1e-12)


def test_overweight_diagonal_is_projected():
    assert np.allclose(project_to_simplex([0.6, 0.6]), [0.5, 0.5])
    assert entropy_bits(np.diag([0.6, 0.6])) == pytest.approx(1.0, abs=1e-14)


def test_small_negative_eigenvalues_are_removed():
    p = project_to_simplex([1.0 + 1e-12, -1e-12, 0.0])
    assert (p >= 0).all() and p.sum() == pytest.approx(1.0)


def test_non_hermitian_rejected():
    with pytest.raises(ValueError):
        entropy_bits(np.array([[0.5, 0.1], [0.3, 0.5]]))


def test_zero_probability_terms():
    assert shannon_bits([1.0, 0.0, 0.0]) == 0.0
    assert shannon_bits([0.25] * 4) == pytest.approx(2.0)


@settings(max_examples=60, deadline=None)
@given(st.lists(st.floats(-5, 5), min_size=1, max_size=12))
def test_projection_kkt(v):
    """Projection onto the simplex: non-negative, sums to one, and the
    shift is common to all positive coordinates."""
    v = np.array(v)
    p = project_to_simplex(v)
    assert p.sum() == pytest.approx(1.0, abs=1e-9)
    assert (p >= 0).all()
    pos = p > 0
    shifts = v[pos] - p[pos]
    assert np.ptp(shifts) < 1e-9
    # zeroed coordinates sit at or below the common shift
    if (~pos).any():
        assert (v[~pos] <= shifts[0] + 1e-9).all()


def test_projection_of_distribution_is_identity(rng):
    p = rng.dirichlet(np.ones(6))
    assert np.allclose(project_to_simplex(p), p, atol=1e-15)
