#!/usr/bin/env python3
"""
Tests for Levy-Khintchin triples, Berger measures and moment matching.
"""

from fractions import Fraction

import pytest

from errors import DomainError, UnsupportedKindError
from classifiers import Status
from measures import (LOG_POWER_EXPONENT_NOTE, AtomicMeasure, LevyKhintchinTriple, LogPowerDensity,
                      MeasureMoments, PolyDensity, agler_berger_measure, agler_lk_triple, berger_moment,
                      geometric_gap_lk_triple, lk_sequence, moment_match_verdict)
from numerics import Interval
from sequences import Agler, GeometricGap, MomentSequence, ValueClass, bergman


@pytest.mark.parametrize('j', range(2, 7))
def test_agler_triple_generates_the_weights_squared(j):
    T = agler_lk_triple(j)
    assert all(lk_sequence(T, n) == Agler(j).square_exact(n) for n in range(30))


def test_agler_triple_value():
    assert lk_sequence(agler_lk_triple(2), 3) == Fraction(4, 5)
    with pytest.raises(DomainError):
        agler_lk_triple(1)


@pytest.mark.parametrize('j', range(1, 7))
def test_agler_berger_measures(j):
    moments = MomentSequence(Agler(j)).exact_values(25)
    assert [berger_moment(agler_berger_measure(j), n) for n in range(25)] == moments


def test_log_power_moments_at_integer_exponents():
    for q in range(1, 6):
        m = LogPowerDensity(q)
        assert all(berger_moment(m, n) == Fraction(1, (n + 1) ** q) for n in range(12))
    assert berger_moment(LogPowerDensity(2), 1) == Fraction(1, 4)
    # 4^(-3/2) = 1/8
    assert berger_moment(LogPowerDensity(Fraction(3, 2)), 3) == Fraction(1, 8)


def test_log_power_moments_at_fractional_exponents_are_enclosed():
    value = berger_moment(LogPowerDensity(Fraction(3, 2)), 1, bits=256)
    assert isinstance(value, Interval)
    assert value.width <= Fraction(1, 1 << 96)
    assert value.lo > Fraction(35355339, 10 ** 8) and value.hi < Fraction(35355340, 10 ** 8)


def test_log_power_is_not_a_levy_khintchin_measure():
    T = LevyKhintchinTriple(0, 0, LogPowerDensity(2))
    with pytest.raises(UnsupportedKindError):
        lk_sequence(T, 1)


def test_log_power_rejects_nonpositive_q():
    with pytest.raises(DomainError):
        LogPowerDensity(0)


def test_geometric_gap_triple_uses_index_offset():
    p = Fraction(1, 2)
    T = geometric_gap_lk_triple(p)
    assert T.index_offset == 1
    assert all(lk_sequence(T, n) == GeometricGap((p,)).square_exact(n) for n in range(10))
    assert lk_sequence(T, 0, index_offset=0) == 0


def test_atomic_measure_validation():
    with pytest.raises(DomainError):
        AtomicMeasure(())
    with pytest.raises(DomainError):
        AtomicMeasure(((Fraction(3, 2), 1),))
    with pytest.raises(DomainError):
        AtomicMeasure(((Fraction(1, 2), 0),))


def test_poly_density_lk_at_zero():
    T = LevyKhintchinTriple(1, 2, PolyDensity((1, 1)))
    assert lk_sequence(T, 0) == 1
    # 1 + 2 + (1 - 1/2) + (1/2 - 1/3)
    assert lk_sequence(T, 1) == Fraction(11, 3)


def test_measure_moments_sequence():
    s = MeasureMoments(LogPowerDensity(Fraction(1, 2)))
    assert s.value_class is ValueClass.TRANSCENDENTAL
    assert s.exact(3) == Fraction(1, 2)
    assert MeasureMoments(agler_berger_measure(2)).exact(3) == Fraction(1, 4)


def test_moment_match_against_berger_measure():
    verdict = moment_match_verdict(bergman(), agler_berger_measure(2), 20)
    assert verdict.status is Status.PASS
    mismatch = moment_match_verdict(Agler(3), agler_berger_measure(2), 5)
    assert mismatch.status is Status.FAIL
    assert mismatch.witness.n == 1


def test_moment_match_reports_the_log_power_note():
    verdict = moment_match_verdict(bergman(), LogPowerDensity(1), 10)
    assert verdict.status is Status.PASS
    assert verdict.side_conditions['note'] == LOG_POWER_EXPONENT_NOTE
