#!/usr/bin/env python3
"""
Tests for sequence and shift transforms and their preservation properties.
"""

from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from errors import ContractivityError, DomainError
from classifiers import (Status, completely_alternating_verdict, completely_monotone_verdict,
                         log_completely_alternating_verdict, mid_verdict)
from numerics import Interval
from sequences import Agler, Dirichlet, Euler, Explicit, MomentSequence, PowerOf, Sabcd, bergman, difference
from transforms import (TRANSFORM_NAMES, AlphaPrime, Aluthge, Cesaro, CesaroWindow, ExpMoment, ExpNormalized,
                        GeneralizedMean, GeometricCesaro, GeometricCesaroWindow, PerturbZeroth, Reciprocal,
                        Restriction, SchurPower, TransformTag, aluthge_iter, apply, apply_chain,
                        cesaro_difference_identity_check, cesaro_difference_sides, gamma_cesaro_sequence,
                        gamma_cesaro_weights, hypothesis_report, mean_transform_weights, sabcd_restriction)


def bergman_squared():
    return PowerOf(Agler(2), 2)


def test_aluthge_of_bergman_is_mid():
    s = Aluthge(bergman())
    assert s.log_form(0) is not None
    assert mid_verdict(s, 12, 40).status is Status.PASS


def test_aluthge_iterates():
    assert aluthge_iter(bergman(), 0) == bergman()
    assert isinstance(aluthge_iter(bergman(), 2).inner, Aluthge)
    with pytest.raises(DomainError):
        aluthge_iter(bergman(), -1)


@pytest.mark.parametrize('t', [Fraction(0), Fraction(1, 4), Fraction(1, 2)])
def test_mean_transforms_of_bergman_are_mid(t):
    assert mid_verdict(GeneralizedMean(bergman(), t), 8, 20).status is Status.PASS


@pytest.mark.slow
@pytest.mark.parametrize('t', [Fraction(0), Fraction(1, 4), Fraction(1, 2)])
def test_mean_transforms_of_bergman_at_full_scope(t):
    assert mid_verdict(GeneralizedMean(bergman(), t), 12, 40).status is Status.PASS


def test_mean_transform_half_is_aluthge():
    assert GeneralizedMean(bergman(), Fraction(1, 2)).log_form(3) == Aluthge(bergman()).log_form(3)
    with pytest.raises(DomainError):
        GeneralizedMean(bergman(), Fraction(3, 4))


def test_mean_transform_zero_is_arithmetic_mean():
    s = Explicit((Fraction(1, 2), Fraction(1, 4)))
    assert mean_transform_weights(s, 0, 0) == Fraction(3, 8)


def test_alpha_prime_squares():
    s = AlphaPrime(bergman())
    assert s.square_exact(0) == (Fraction(1, 2) + Fraction(2, 3)) / 2


def test_cesaro_values():
    c = Cesaro(bergman_squared())
    assert c.exact_values(3) == [Fraction(1, 2), Fraction(7, 12), Fraction(23, 36)]
    assert difference(c, 1, 0) == Fraction(-1, 12)


def test_cesaro_of_bergman_squared_is_ca():
    assert completely_alternating_verdict(Cesaro(bergman_squared()), 12, 40).status is Status.PASS


@pytest.mark.parametrize('j', [2, 3, 4])
def test_cesaro_identity_on_agler_squares(j):
    x = PowerOf(Agler(j), 2)
    for m in range(1, 6):
        for i in range(6):
            assert cesaro_difference_identity_check(x, m, i)


@pytest.mark.slow
@pytest.mark.parametrize('j', [2, 3, 4])
def test_cesaro_identity_full_grid(j):
    x = PowerOf(Agler(j), 2)
    assert all(cesaro_difference_identity_check(x, m, i) for m in range(1, 9) for i in range(9))


unit_points = st.fractions(min_value=Fraction(1, 10), max_value=Fraction(9, 10), max_denominator=10)


@settings(max_examples=20, deadline=None)
@given(st.fractions(min_value=0, max_value=5, max_denominator=5),
       st.fractions(min_value=0, max_value=5, max_denominator=5),
       st.lists(st.tuples(unit_points, st.fractions(min_value=Fraction(1, 5), max_value=3, max_denominator=5)),
                min_size=1, max_size=3),
       st.integers(min_value=1, max_value=5), st.integers(min_value=0, max_value=5))
def test_cesaro_identity_on_ca_by_construction(a, b, atoms, m, j):
    """x_n = 1 + a + b n + sum c (1 - t^n) is completely alternating by construction."""
    values = tuple(1 + a + b * n + sum(c * (1 - t ** n) for t, c in atoms) for n in range(m + j + 2))
    lhs, rhs = cesaro_difference_sides(Explicit(values), m, j)
    assert lhs == rhs


def test_cesaro_identity_needs_rational_sequence():
    with pytest.raises(DomainError):
        cesaro_difference_sides(bergman(), 1, 0)


def test_gamma_cesaro_closed_form_and_digamma():
    for n in range(21):
        exact, iv = gamma_cesaro_weights(n, bits=256)
        assert isinstance(iv, Interval)
        assert iv.contains(exact)
    assert gamma_cesaro_weights(2)[0] == Fraction(23, 36)


def test_gamma_cesaro_sequence_is_ca():
    assert completely_alternating_verdict(gamma_cesaro_sequence(), 12, 40).status is Status.PASS


def test_exp_moment_of_bergman_is_cm():
    moments = MomentSequence(ExpMoment(bergman()))
    verdict = completely_monotone_verdict(moments, 8, 20)
    assert verdict.status is Status.PASS
    assert not verdict.undecided_cells


@pytest.mark.slow
def test_exp_moment_at_full_scope():
    moments = MomentSequence(ExpMoment(bergman()))
    verdict = completely_monotone_verdict(moments, 12, 40)
    assert verdict.status is Status.PASS and not verdict.undecided_cells


def test_exp_moment_rejects_transcendental_weights():
    with pytest.raises(DomainError):
        ExpMoment(Euler())


def test_geometric_cesaro_preserves_log_ca():
    assert log_completely_alternating_verdict(GeometricCesaro(bergman_squared()), 8, 20).status is Status.PASS
    assert log_completely_alternating_verdict(GeometricCesaroWindow(bergman_squared(), 2), 8, 20).status \
        is Status.PASS


def test_cesaro_window():
    s = CesaroWindow(bergman_squared(), 1)
    assert s.exact(0) == (Fraction(1, 2) + Fraction(2, 3)) / 2
    with pytest.raises(DomainError):
        CesaroWindow(bergman_squared(), 0)


def test_reciprocal_of_dirichlet():
    s = Reciprocal(Dirichlet())
    assert s.square_exact(0) == Fraction(1, 2)
    assert s.sup_bound() == 1


def test_restriction_and_sabcd_closure():
    s = Sabcd(1, 1, 1, 2)
    restricted = Restriction(s, 3)
    closed = sabcd_restriction(s, 3)
    assert closed == Sabcd(1, 4, 1, 5)
    assert all(restricted.square_exact(n) == closed.square_exact(n) for n in range(10))


def test_perturb_zeroth():
    s = PerturbZeroth(bergman(), Fraction(1, 3), squared=True)
    assert s.square_exact(0) == Fraction(1, 3)
    assert s.square_exact(1) == Fraction(2, 3)
    assert mid_verdict(s, 8, 20).status is Status.PASS
    with pytest.raises(DomainError):
        PerturbZeroth(bergman(), Fraction(9, 10), squared=True)


def test_exp_normalized_needs_a_supremum():
    with pytest.raises(ContractivityError):
        ExpNormalized(MomentSequence(Dirichlet()))
    s = ExpNormalized(bergman_squared())
    assert s.sup_bound() == 1


def test_exp_normalized_checks_a_given_bound():
    assert ExpNormalized(Agler(2), Fraction(2)).sup_bound() == 1
    low = ExpNormalized(Agler(2), Fraction(1, 2))
    assert low.sup_bound() is None
    with pytest.raises(ContractivityError):
        mid_verdict(low, 4, 8)


def test_schur_power():
    s = SchurPower(bergman_squared(), 3)
    assert s.exact(1) == Fraction(8, 27)


positive_weights = st.fractions(min_value=Fraction(1, 20), max_value=20, max_denominator=20).filter(lambda q: q > 0)
schur_exponents = st.sampled_from([Fraction(1, 3), Fraction(1, 2), Fraction(2, 3), Fraction(1), Fraction(2),
                                   Fraction(3)])


@settings(max_examples=40, deadline=None)
@given(st.lists(positive_weights, min_size=5, max_size=5), schur_exponents, schur_exponents)
def test_schur_powers_compose(values, p, q):
    s = Explicit(tuple(values))
    nested, direct = SchurPower(SchurPower(s, p), q), SchurPower(s, p * q)
    for n in range(5):
        assert nested.log_form(n) == direct.log_form(n)
        if p.denominator == q.denominator == 1:
            assert nested.exact(n) == direct.exact(n) == values[n] ** int(p * q)


def test_schur_powers_compose_on_squared_families():
    s = Agler(3)
    assert all(SchurPower(SchurPower(s, 2), 3).exact(n) == SchurPower(s, 6).exact(n) == Fraction(n + 1, n + 3) ** 3
               for n in range(10))


@pytest.mark.parametrize('s', [bergman(), Agler(3), Sabcd(1, 2, 1, 3), bergman_squared(), Aluthge(bergman())],
                         ids=lambda s: s.label())
def test_aluthge_preserves_log_ca(s):
    assert log_completely_alternating_verdict(s, 8, 21).status is Status.PASS
    assert log_completely_alternating_verdict(Aluthge(s), 8, 20).status is Status.PASS


@settings(max_examples=40, deadline=None)
@given(st.lists(positive_weights, min_size=12, max_size=12))
def test_aluthge_preserves_log_ca_of_explicit_weights(values):
    s = Explicit(tuple(values))
    if log_completely_alternating_verdict(s, 4, 7).status is Status.PASS:
        assert log_completely_alternating_verdict(Aluthge(s), 4, 6).status is Status.PASS


def test_apply_and_chain():
    s = bergman()
    assert apply('aluthge', s) == Aluthge(s)
    assert apply(TransformTag('restriction', {'r': 0}), s) is s
    chained = apply_chain([TransformTag('aluthge'), TransformTag('generalized_mean', {'t': '1/4'})], s)
    assert chained == GeneralizedMean(Aluthge(s), Fraction(1, 4))
    assert 'exp_moment' in TRANSFORM_NAMES


def test_apply_rejects_unknown_names_and_params():
    with pytest.raises(DomainError):
        apply('fourier', bergman())
    with pytest.raises(DomainError):
        apply(TransformTag('aluthge', {'t': '1/2'}), bergman())


def test_hypothesis_report_separates_weights_and_squares():
    report = hypothesis_report(bergman(), 6, 12)
    assert set(report) == {'weights_ca', 'weights_squared_ca', 'either_holds'}
    assert report['weights_squared_ca']['status'] == 'pass'
    assert report['either_holds'] is True
