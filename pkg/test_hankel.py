#!/usr/bin/env python3
"""
Tests for moment Hankel matrices, exact LDL^T and Schur-power probes.
"""

from fractions import Fraction
from itertools import combinations

import pytest
from hypothesis import given, settings, strategies as st

from errors import DomainError
from classifiers import Status, k_alternating_verdict, mid_verdict
from hankel import (PsdStatus, bram_halmos_verdict, hankel_from_weights, hankel_matrix, is_psd_exact,
                    ldl_decompose, probe_report, schur_power_psd_probe)
from numerics import Sign
from sequences import (Agler, Dirichlet, Explicit, GeometricGap, MomentSequence, PowerOf, Sabcd, Unilateral,
                       bergman)

entries = st.fractions(min_value=-6, max_value=6, max_denominator=6)


def det(rows):
    """Laplace expansion; fine for the small matrices used here."""
    if not rows:
        return Fraction(1)
    return sum(((-1) ** j * rows[0][j] * det([r[:j] + r[j + 1:] for r in rows[1:]])
                for j in range(len(rows))), Fraction(0))


def principal_minors_nonnegative(M):
    size = len(M)
    for r in range(1, size + 1):
        for idx in combinations(range(size), r):
            if det([[M[i][j] for j in idx] for i in idx]) < 0:
                return False
    return True


@st.composite
def symmetric_matrices(draw):
    size = draw(st.integers(min_value=1, max_value=5))
    if draw(st.booleans()):
        # B B^T is PSD, possibly singular
        cols = draw(st.integers(min_value=1, max_value=size))
        B = [[draw(entries) for _ in range(cols)] for _ in range(size)]
        return [[sum(B[i][c] * B[j][c] for c in range(cols)) for j in range(size)] for i in range(size)]
    M = [[Fraction(0)] * size for _ in range(size)]
    for i in range(size):
        for j in range(i, size):
            M[i][j] = M[j][i] = draw(entries)
    return M


@settings(max_examples=80, deadline=None)
@given(symmetric_matrices())
def test_exact_psd_matches_principal_minors(M):
    assert is_psd_exact(M) == principal_minors_nonnegative(M)


@pytest.mark.slow
@settings(max_examples=500, deadline=None)
@given(symmetric_matrices())
def test_exact_psd_matches_principal_minors_at_full_scale(M):
    assert is_psd_exact(M) == principal_minors_nonnegative(M)


@settings(max_examples=80, deadline=None)
@given(symmetric_matrices())
def test_ldl_failure_reports_a_negative_entry(M):
    result = ldl_decompose(M)
    if result.psd:
        assert result.offending is None
    else:
        assert result.offending < 0


def test_ldl_pivots_of_identity():
    result = ldl_decompose([[1, 0], [0, 1]])
    assert result.psd
    assert result.pivots == (1, 1)


def test_ldl_rejects_bad_shapes():
    with pytest.raises(DomainError):
        is_psd_exact([[1, 2], [3, 4]])
    with pytest.raises(DomainError):
        is_psd_exact([[1, 2, 3]])


def test_hankel_of_unilateral_is_all_ones():
    H = hankel_from_weights(Unilateral(), 0, 2)
    assert H.entries == ((1, 1, 1), (1, 1, 1), (1, 1, 1))
    assert H.size == 3
    assert is_psd_exact(H)


def test_hankel_of_bergman_is_hilbert():
    H = hankel_matrix(MomentSequence(bergman()), 1, 2)
    assert H.to_rows() == [['1/2', '1/3', '1/4'], ['1/3', '1/4', '1/5'], ['1/4', '1/5', '1/6']]


def test_hankel_from_a_list_of_moments():
    H = hankel_matrix(['1', '1/2', '1/3'], 0, 1)
    assert H.entries == ((1, Fraction(1, 2)), (Fraction(1, 2), Fraction(1, 3)))
    with pytest.raises(DomainError):
        hankel_matrix(['1', '1/2'], 0, 1)


def test_hankel_order_limits():
    with pytest.raises(DomainError):
        hankel_from_weights(bergman(), 0, 0)
    with pytest.raises(DomainError):
        hankel_from_weights(bergman(), 0, 13)


def test_bram_halmos_on_bergman():
    verdict = bram_halmos_verdict(bergman(), 12, 12, max_total=12)
    assert verdict.status is Status.PASS
    assert verdict.side_conditions == {'max_total': 12}


def test_bram_halmos_finds_a_failing_minor():
    """Weights 1, 2, 1/4, ... give moments 1, 1, 4, 1/4 and a negative 2x2 minor at n = 1."""
    verdict = bram_halmos_verdict(Explicit((Fraction(1), Fraction(2), Fraction(1, 4))), 3, 2)
    assert verdict.status is Status.FAIL
    assert verdict.witness.n <= 1


@pytest.mark.parametrize('p', ['1/3', '1/2', '1', '3/2', '5/2'])
def test_schur_powers_of_the_hilbert_matrix_stay_psd(p):
    (result,) = schur_power_psd_probe(MomentSequence(bergman()), [p], 0, 4)
    assert result.status is not PsdStatus.NOT_PSD


def test_probe_report_is_keyed_by_exponent():
    results = schur_power_psd_probe(MomentSequence(bergman()), [2, '1/2'], 0, 2)
    report = probe_report(results)
    assert set(report) == {'2', '1/2'}
    assert report['2'] == {'status': 'psd', 'bits': None}
    assert report['1/2']['status'] == 'psd'


def test_bram_halmos_witness_is_the_negative_schur_complement():
    """Moments 1, 2, 3: pivot 3 leaves the Schur complement 1 - 4/3."""
    verdict = bram_halmos_verdict(Dirichlet(), 0, 1)
    assert verdict.status is Status.FAIL
    w = verdict.witness
    assert (w.k, w.n) == (1, 0)
    assert w.value == Fraction(-1, 3)
    assert w.sign is Sign.NEGATIVE


def test_ldl_zero_diagonal_reports_minus_off_diagonal_squared():
    result = ldl_decompose([[0, 2], [2, 0]])
    assert not result.psd
    assert result.offending == -4


mid_families = [Agler(2), Agler(3), Sabcd(1, 2, 1, 3), GeometricGap((Fraction(1, 2),))]


def hankel_windows(total):
    return [(n, k) for k in range(1, total + 1) for n in range(total - k + 1)]


@pytest.mark.parametrize('s', mid_families, ids=lambda s: s.label())
def test_schur_powers_of_mid_hankel_matrices_are_not_refuted(s):
    assert mid_verdict(s, 6, 10).status is Status.PASS
    moments = MomentSequence(s)
    for n, k in hankel_windows(4):
        for result in schur_power_psd_probe(moments, ['1/3', '1/2', '3/2', '5/2'], n, k):
            assert result.status is not PsdStatus.NOT_PSD, (n, k, result.p)


@pytest.mark.slow
@pytest.mark.parametrize('s', mid_families, ids=lambda s: s.label())
def test_schur_powers_of_mid_hankel_matrices_up_to_order_eight(s):
    moments = MomentSequence(s)
    for n, k in hankel_windows(8):
        for result in schur_power_psd_probe(moments, ['1/3', '1/2', '3/2', '5/2'], n, k):
            assert result.status is not PsdStatus.NOT_PSD, (n, k, result.p)


contractive_squares = st.fractions(min_value=Fraction(1, 20), max_value=1, max_denominator=20).filter(lambda q: q > 0)


@settings(max_examples=60, deadline=None)
@given(st.lists(contractive_squares, min_size=8, max_size=8))
def test_first_order_hankel_failures_are_weight_decreases(values):
    """H(n,1) is PSD iff alpha_n^2 <= alpha_(n+1)^2, so both sweeps fail at the same n."""
    s = Explicit(tuple(values), squared=True)
    hankel = bram_halmos_verdict(s, 6, 1)
    monotone = k_alternating_verdict(PowerOf(s, 2), 1, 6)
    mid = mid_verdict(s, 1, 6)
    assert hankel.status is monotone.status is mid.status
    first_drop = next((n for n in range(7) if values[n + 1] < values[n]), None)
    if first_drop is None:
        assert hankel.status is Status.PASS
    else:
        assert hankel.witness.n == monotone.witness.n == mid.witness.n == first_drop
        assert hankel.witness.value < 0
