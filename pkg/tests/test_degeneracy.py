from math import log2

import numpy as np
import pytest
from scipy.stats import multinomial as mn

from symcap.channel import family_channel
from symcap.coherent_info import SymmetricInput, random_input
from symcap.degeneracy import (
    EigenvalueMeasure,
    annihilation_counts,
    choi_eigenvalue_measure,
    complementary_rank_check,
    compositions,
    enumerate_ssyt,
    equipartition_bound_constant,
    fit_typicality_constants,
    irrep_measurement_distribution,
    is_strongly_typical,
    is_two_row,
    kostka_enumerated,
    kostka_number,
    multinomial,
    schur_polynomial,
    schur_polynomial_ssyt,
    ssyt_content,
    support_weights,
    two_row_kraus_bound,
    two_row_probability,
    typical_set_stats,
    typical_weights,
    weight_probability,
)
from symcap.oracle import SizeError, choi_isotypic_weights
from symcap.rep_core import enumerate_partitions, specht_dim, weyl_dim

FAMILIES = ("depolarizing", "independent_xz", "two_pauli")


# ---------------------------------------------------------------- Schur polynomials


def test_schur_single_box_is_sum(rng):
    x = rng.random(4)
    assert schur_polynomial((1, 0, 0, 0), x) == pytest.approx(x.sum(), rel=1e-14)


@pytest.mark.parametrize("n", range(1, 9))
def test_schur_at_ones_is_weyl_dimension(n):
    for lam in enumerate_partitions(n, 4):
        assert schur_polynomial(lam, [1, 1, 1, 1]) == weyl_dim(lam, 4)


@pytest.mark.parametrize("n", range(1, 9))
def test_schur_matches_ssyt_sum(n, rng):
    for lam in enumerate_partitions(n, 4):
        for _ in range(2):
            x = rng.random(4)
            assert schur_polynomial(lam, x) == pytest.approx(schur_polynomial_ssyt(lam, x), rel=1e-10)


def test_schur_example_value():
    x = (0.7, 0.1, 0.1, 0.1)
    assert schur_polynomial((2, 1, 0, 0), x) == pytest.approx(schur_polynomial_ssyt((2, 1, 0, 0), x), rel=1e-12)
    assert schur_polynomial((2, 1, 0, 0), x) == pytest.approx(0.218, rel=1e-12)


def test_schur_repeated_and_zero_variables():
    # all-equal variables make the bialternant 0/0; Jacobi-Trudi must not care
    for lam in enumerate_partitions(6, 4):
        assert schur_polynomial(lam, [0.25] * 4) == pytest.approx(weyl_dim(lam, 4) * 0.25**6, rel=1e-12)
        expect = 1.0 if lam == (6, 0, 0, 0) else 0.0
        assert schur_polynomial(lam, [1, 0, 0, 0]) == expect


def test_ssyt_enumeration_is_semistandard():
    for tab in enumerate_ssyt((3, 2, 1, 0), 4):
        for row in tab:
            assert all(a <= b for a, b in zip(row, row[1:]))
        for r in range(len(tab) - 1):
            assert all(tab[r][c] < tab[r + 1][c] for c in range(len(tab[r + 1])))
    assert sum(1 for _ in enumerate_ssyt((3, 2, 1, 0), 4)) == weyl_dim((3, 2, 1, 0), 4)


# ---------------------------------------------------------------- Kostka numbers


def test_kostka_example():
    assert kostka_number((2, 1, 0, 0), (1, 1, 1, 0)) == 2
    assert kostka_enumerated((2, 1, 0, 0), (1, 1, 1, 0)) == 2


@pytest.mark.parametrize("n", [1, 3, 5, 9])
def test_single_row_kostka_is_one(n):
    for w in compositions(n):
        assert kostka_number((n, 0, 0, 0), w) == 1


@pytest.mark.parametrize("n", range(1, 8))
def test_kostka_matches_enumeration_and_sums_to_weyl(n):
    for lam in enumerate_partitions(n, 4):
        total = 0
        for w in compositions(n):
            k = kostka_number(lam, w)
            assert k == kostka_enumerated(lam, w)
            total += k
        assert total == weyl_dim(lam, 4)


def test_kostka_is_symmetric_in_weight():
    lam = (4, 3, 1, 0)
    for w in compositions(8):
        assert kostka_number(lam, w) == kostka_number(lam, tuple(sorted(w)))


def test_kostka_size_mismatch_is_zero():
    assert kostka_number((2, 1, 0, 0), (1, 1, 0, 0)) == 0
    assert kostka_enumerated((2, 1, 0, 0), (1, 1, 0, 0)) == 0


def test_ssyt_content_counts_entries():
    tab = ((1, 1, 3), (2, 4))
    assert ssyt_content(tab, 4) == (2, 1, 1, 1)


# ---------------------------------------------------------------- irrep distribution


def test_n1_distribution():
    assert irrep_measurement_distribution(family_channel("dep", 0.1), 1) == {(1, 0, 0, 0): 1.0}


@pytest.mark.parametrize("n", [2, 10, 25, 40])
@pytest.mark.parametrize("family", FAMILIES)
def test_distribution_sums_to_one(n, family):
    dist = irrep_measurement_distribution(family_channel(family, 0.1), n)
    assert sum(dist.values()) == pytest.approx(1.0, abs=1e-9)
    assert min(dist.values()) >= 0


def test_n2_symmetric_block_is_h2():
    x = family_channel("dep", 0.1).probs
    h2 = sum(v * v for v in x) + sum(x[i] * x[j] for i in range(4) for j in range(i + 1, 4))
    assert irrep_measurement_distribution(family_channel("dep", 0.1), 2)[(2, 0, 0, 0)] == pytest.approx(h2, rel=1e-14)


@pytest.mark.parametrize("n", range(1, 5))
@pytest.mark.parametrize("family,p", [("depolarizing", 0.1), ("independent_xz", 0.07), ("two_pauli", 0.2)])
def test_distribution_matches_dense_choi(n, family, p):
    ch = family_channel(family, p)
    dist = irrep_measurement_distribution(ch, n)
    brute = choi_isotypic_weights(ch, n)
    assert set(dist) == set(brute)
    for lam in dist:
        assert dist[lam] == pytest.approx(brute[lam], abs=1e-9)


def test_dense_choi_size_limit():
    with pytest.raises(SizeError):
        choi_isotypic_weights(family_channel("dep", 0.1), 5)


# ---------------------------------------------------------------- two-row probability


def test_two_row_trivial_cases():
    assert two_row_probability(family_channel("dep", 0.1), 1) == pytest.approx(1.0)
    assert two_row_probability(family_channel("dep", 0.0), 2) == pytest.approx(1.0)


@pytest.mark.parametrize("p", [0.05, 0.1, 0.15])
def test_two_row_probability_within_quadratic_envelope(p):
    ch = family_channel("dep", p)
    ratios = [two_row_probability(ch, n) / (n * n * (1 - 2 * p) ** n) for n in range(4, 41)]
    # bounded: never above the small-n value, and not growing in the tail
    assert max(ratios) == ratios[0] < 1.0
    tail = ratios[10:]
    assert all(b <= a for a, b in zip(tail, tail[1:]))


# ---------------------------------------------------------------- eigenvalue measure


def test_n1_measure_is_pauli_distribution():
    ch = family_channel("dep", 0.12)
    m = choi_eigenvalue_measure(ch, 1)
    assert len(m.entries) == 4
    masses = sorted(m.entries, key=lambda e: e[1], reverse=True)
    assert [e[3] for e in masses] == pytest.approx(list(ch.probs))


@pytest.mark.parametrize("n", [2, 5, 8, 12])
@pytest.mark.parametrize("family", FAMILIES)
def test_measure_marginals(n, family):
    ch = family_channel(family, 0.13)
    m = choi_eigenvalue_measure(ch, n)
    assert isinstance(m, EigenvalueMeasure)
    assert m.total() == pytest.approx(1.0, abs=1e-9)
    dist = irrep_measurement_distribution(ch, n)
    for lam, v in m.by_partition().items():
        assert v == pytest.approx(dist[lam], rel=1e-9, abs=1e-15)
    for w, v in m.by_weight().items():
        assert v == pytest.approx(multinomial(n, w) * weight_probability(w, ch.probs), rel=1e-9, abs=1e-300)
    # multiplicities count every Pauli string of each weight
    for w, mult in m.multiplicity_by_weight().items():
        assert mult == multinomial(n, w)
    for lam, w, mult, _ in m.entries:
        assert mult == specht_dim(lam) * kostka_number(lam, w)


@pytest.mark.parametrize("n", [1, 4, 9])
def test_two_pauli_has_no_y_mass(n):
    m = choi_eigenvalue_measure(family_channel("two_pauli", 0.2), n)
    for _, w, _, mass in m.entries:
        if w[2] > 0:
            assert mass == 0.0


# ---------------------------------------------------------------- typicality


def test_typical_examples():
    dist = (0.7, 0.1, 0.1, 0.1)
    assert is_strongly_typical((7, 1, 1, 1), dist, 1e-9)
    assert not is_strongly_typical((10, 0, 0, 0), dist, 0.05)
    for w in compositions(6):
        assert is_strongly_typical(w, dist, 1.0)


def test_typical_boundary_is_inclusive():
    dist = (0.7, 0.1, 0.1, 0.1)
    w = (15, 2, 2, 1)  # deviations 0.05, 0, 0, 0.05 exactly
    assert abs(15 / 20 - 0.7) > 0.05  # float rounding lands just outside
    assert is_strongly_typical(w, dist, 0.05)
    assert not is_strongly_typical((16, 2, 1, 1), dist, 0.05)


def test_typical_rejects_bad_delta():
    with pytest.raises(ValueError):
        is_strongly_typical((1, 0, 0, 0), (1, 0, 0, 0), 0.0)


def test_zero_probability_letter_is_atypical():
    assert not is_strongly_typical((3, 1, 1, 0), (0.8, 0.1, 0.0, 0.1), 1.0)


def test_support_weights_for_two_pauli():
    probs = family_channel("two_pauli", 0.1).probs
    ws = list(support_weights(7, probs))
    assert all(w[2] == 0 for w in ws) and len(ws) == 36


@pytest.mark.parametrize("family,base", [("depolarizing", 4), ("independent_xz", 4), ("two_pauli", 3)])
def test_full_delta_covers_everything(family, base):
    st = typical_set_stats(family_channel(family, 0.1), 7, 1.0)
    assert st.mass == pytest.approx(1.0, abs=1e-12)
    assert st.count == base**7


def test_typical_mass_matches_scipy_multinomial():
    ch = family_channel("dep", 0.1)
    for n in (10, 20):
        ws = typical_weights(ch, n, 0.05)
        exact = sum(mn.pmf(w, n, ch.probs) for w in ws)
        assert typical_set_stats(ch, n, 0.05).mass == pytest.approx(exact, rel=1e-10)


def test_typical_mass_grows_from_10_to_20():
    ch = family_channel("dep", 0.1)
    m10 = typical_set_stats(ch, 10, 0.05).mass
    m20 = typical_set_stats(ch, 20, 0.05).mass
    assert m20 > m10
    assert m20 == pytest.approx(0.30757, abs=1e-5)


def test_typical_mass_grows_on_aligned_lengths():
    # n a multiple of 20 keeps every n p_i an integer, which removes lattice effects
    ch = family_channel("dep", 0.1)
    masses = [typical_set_stats(ch, n, 0.05).mass for n in (20, 40, 60, 80)]
    assert all(b > a for a, b in zip(masses, masses[1:]))


@pytest.mark.parametrize("n", [9, 15, 24])
@pytest.mark.parametrize("family", FAMILIES)
def test_measure_sandwich(n, family):
    st = typical_set_stats(family_channel(family, 0.1), n, 0.1)
    assert st.count > 0
    assert st.min_prob * st.count <= st.mass * (1 + 1e-12)
    assert st.mass <= st.max_prob * st.count * (1 + 1e-12)


def test_empty_typical_set():
    st = typical_set_stats(family_channel("dep", 0.1), 8, 0.05)
    assert (st.mass, st.count) == (0.0, 0)


def test_fitted_constants_hold_and_are_bounded():
    ch = family_channel("dep", 0.1)
    ns = range(10, 56, 5)
    c = fit_typicality_constants(ch, ns, 0.05)
    H = c["entropy"]
    assert H == pytest.approx(-(0.7 * log2(0.7) + 0.3 * log2(0.1)), rel=1e-12)
    for n in ns:
        st = typical_set_stats(ch, n, 0.05)
        if st.count:
            assert 2 ** (n * (H - c["cardinality"] * 0.05)) <= st.count * (1 + 1e-9)
            assert st.count <= 2 ** (n * (H + c["cardinality"] * 0.05)) * (1 + 1e-9)
    # equipartition: a-priori constant sum |log p_i| is an upper bound
    assert c["equipartition"] <= equipartition_bound_constant(ch.probs)


# ---------------------------------------------------------------- annihilation counts


def test_annihilation_trivial_counts():
    ch = family_channel("dep", 0.1)
    assert annihilation_counts(ch, 1) == (4, 4)
    assert annihilation_counts(ch, 2)[0] == 16


@pytest.mark.parametrize("n", [3, 5])
def test_annihilation_total_counts_strings(n):
    ch = family_channel("dep", 0.1)
    total, two = annihilation_counts(ch, n)
    assert total == 4**n
    assert two == two_row_kraus_bound(n)
    pred_total, _ = annihilation_counts(ch, n, weights=lambda w: w[0] == n - 1)
    assert pred_total == 3 * n
    assert annihilation_counts(ch, n, weights=[(n, 0, 0, 0)]) == (1, 1)


def test_annihilation_ratio_decreases():
    ch = family_channel("dep", 0.1)
    ratios = []
    for n in (10, 12, 16, 20, 24, 30):
        total, two = annihilation_counts(ch, n, delta=0.05)
        assert total == typical_set_stats(ch, n, 0.05).count
        ratios.append(two / total)
    assert all(b < a for a, b in zip(ratios, ratios[1:]))


def test_two_row_bound_values():
    assert two_row_kraus_bound(1) == 4
    assert two_row_kraus_bound(3) == 60
    assert two_row_kraus_bound(3) == sum(
        specht_dim(l) * weyl_dim(l, 4) for l in enumerate_partitions(3, 4) if is_two_row(l)
    )


# ---------------------------------------------------------------- complementary rank


def test_rank_check_n1():
    obs, bound = complementary_rank_check(random_input(1, np.random.default_rng(1)), family_channel("dep", 0.1))
    assert obs <= 4 and bound == 4


def test_rank_check_n3_example(rng):
    obs, bound = complementary_rank_check(random_input(3, rng), family_channel("dep", 0.1))
    assert obs <= 20 <= bound


@pytest.mark.parametrize("n", range(2, 7))
@pytest.mark.parametrize("family", FAMILIES)
@pytest.mark.parametrize("p", [0.05, 0.15])
def test_rank_check_random_inputs(n, family, p, rng):
    ch = family_channel(family, p)
    for _ in range(100 if n <= 4 else 10):
        obs, bound = complementary_rank_check(random_input(n, rng), ch)
        assert obs <= bound


def test_rank_check_basis_state_mixture():
    a = np.zeros((2, 4), dtype=complex)
    a[0, 0] = a[1, 3] = 1.0
    obs, bound = complementary_rank_check(SymmetricInput(3, a), family_channel("dep", 0.1))
    assert obs <= bound


def test_rank_check_nonsymmetric_contrast():
    obs, bound = complementary_rank_check(np.eye(8) / 8, family_channel("dep", 0.1))
    assert obs == 64 > bound
