"""
Levy-Khintchin triples and Berger measures for shiftlab.
Closed-form evaluation of psi(n) = a + b n + int_0^1 (1 - t^n) dmu(t) and of
Berger moments int_0^1 t^n dmu(t), plus forward moment matching.
"""

import logging
from dataclasses import dataclass
from fractions import Fraction

from config import resolve
from errors import DomainError, UnsupportedKindError
from numerics import Const, Interval, LogCombination, Pow, binomial, format_rational, sign_of, to_rational
from classifiers import Status, Verdict, Witness
from sequences import MomentSequence, SequenceDef, ValueClass, check_index

logger = logging.getLogger(__name__)

LOG_POWER_EXPONENT_NOTE = (
    'The density (1/Gamma(q)) (-ln u)^(q-1) du on (0,1) has moments (n+1)^(-q) by the Gamma '
    'integral. It is sometimes quoted as the Berger measure of the shift with moments '
    '(1/(n+1))^(1/q); that exponent does not match the integral and is reported, not used.'
)


@dataclass(frozen=True)
class AtomicMeasure:
    """Finitely many atoms (location in [0,1], positive mass)."""
    atoms: tuple
    kind = 'atomic'

    def __post_init__(self):
        atoms = tuple((to_rational(loc), to_rational(mass)) for loc, mass in self.atoms)
        if not atoms:
            raise DomainError('atomic measure needs at least one atom')
        for loc, mass in atoms:
            if not 0 <= loc <= 1:
                raise DomainError(f'atom location must lie in [0, 1], got {loc}')
            if mass <= 0:
                raise DomainError(f'atom mass must be positive, got {mass}')
        object.__setattr__(self, 'atoms', atoms)

    def to_dict(self):
        return {'atomic': [[format_rational(loc), format_rational(mass)] for loc, mass in self.atoms]}


@dataclass(frozen=True)
class PolyDensity:
    """Density sum_j c_j t^j on [0,1]; nonnegativity is the caller's responsibility."""
    coefficients: tuple
    kind = 'poly_density'

    def __post_init__(self):
        coefficients = tuple(to_rational(c) for c in self.coefficients)
        if not coefficients:
            raise DomainError('poly_density needs at least one coefficient')
        object.__setattr__(self, 'coefficients', coefficients)

    def to_dict(self):
        return {'poly_density': [format_rational(c) for c in self.coefficients]}


@dataclass(frozen=True)
class LogPowerDensity:
    """Density (1/Gamma(q)) (-ln u)^(q-1) on (0,1)."""
    q: Fraction
    kind = 'log_power'

    def __post_init__(self):
        q = to_rational(self.q)
        if q <= 0:
            raise DomainError(f'log_power needs q > 0, got {q}')
        object.__setattr__(self, 'q', q)

    def to_dict(self):
        return {'log_power': {'q': format_rational(self.q)}}


@dataclass(frozen=True)
class LevyKhintchinTriple:
    a: Fraction
    b: Fraction
    mu: object
    index_offset: int = 0

    def __post_init__(self):
        object.__setattr__(self, 'a', to_rational(self.a))
        object.__setattr__(self, 'b', to_rational(self.b))
        check_index(self.index_offset, 'index_offset')

    def to_dict(self):
        return {'a': format_rational(self.a), 'b': format_rational(self.b), 'mu': self.mu.to_dict(),
                'index_offset': self.index_offset}


def lk_sequence(T, n, index_offset=None):
    """psi(n + offset) = a + b m + int (1 - t^m) dmu with m = n + offset and t^0 = 1."""
    check_index(n)
    m = n + (T.index_offset if index_offset is None else check_index(index_offset, 'index_offset'))
    mu = T.mu
    if isinstance(mu, AtomicMeasure):
        integral = sum((mass * (1 - loc ** m) for loc, mass in mu.atoms), Fraction(0))
    elif isinstance(mu, PolyDensity):
        if m == 0:
            integral = Fraction(0)
        else:
            integral = sum((c * (Fraction(1, j + 1) - Fraction(1, m + j + 1))
                            for j, c in enumerate(mu.coefficients)), Fraction(0))
    elif isinstance(mu, LogPowerDensity):
        raise UnsupportedKindError('log_power measures are only supported as Berger measures')
    else:
        raise UnsupportedKindError(f'unsupported measure {mu!r}')
    return T.a + T.b * m + integral


def agler_lk_triple(j):
    """(1/j, 0, (j-1) t^(j-1) dt); generates the Agler weights squared (n+1)/(n+j)."""
    if isinstance(j, bool) or not isinstance(j, int) or j < 2:
        raise DomainError(f'agler_lk_triple needs an integer j >= 2, got {j!r}')
    coefficients = [Fraction(0)] * (j - 1) + [Fraction(j - 1)]
    return LevyKhintchinTriple(Fraction(1, j), Fraction(0), PolyDensity(tuple(coefficients)))


def agler_berger_measure(j):
    """delta_1 for j = 1, density (j-1)(1-t)^(j-2) otherwise."""
    if isinstance(j, bool) or not isinstance(j, int) or j < 1:
        raise DomainError(f'agler_berger_measure needs an integer j >= 1, got {j!r}')
    if j == 1:
        return AtomicMeasure(((Fraction(1), Fraction(1)),))
    return PolyDensity(tuple(Fraction((j - 1) * binomial(j - 2, i) * (-1) ** i) for i in range(j - 1)))


def geometric_gap_lk_triple(p):
    """(0, 0, delta_{p^2}) evaluated with index offset 1."""
    p = to_rational(p)
    if not 0 < p < 1:
        raise DomainError(f'p must lie in (0, 1), got {p}')
    return LevyKhintchinTriple(Fraction(0), Fraction(0), AtomicMeasure(((p * p, Fraction(1)),)), 1)


def berger_moment(m, n, bits=None, config=None):
    """int_0^1 t^n dmu(t): exact where closed forms allow, an Interval otherwise."""
    check_index(n)
    if isinstance(m, AtomicMeasure):
        return sum((mass * loc ** n for loc, mass in m.atoms), Fraction(0))
    if isinstance(m, PolyDensity):
        return sum((c / (n + j + 1) for j, c in enumerate(m.coefficients)), Fraction(0))
    if isinstance(m, LogPowerDensity):
        expr = Pow(Const(Fraction(n + 1)), -m.q)
        exact = expr.exact()
        if exact is not None:
            return exact
        return expr.interval(bits or resolve(config).start_bits)
    raise UnsupportedKindError(f'unsupported measure {m!r}')


@dataclass(frozen=True)
class MeasureMoments(SequenceDef):
    """The moment sequence of a Berger measure."""
    measure: object
    kind = 'transformed'

    @property
    def value_class(self):
        if isinstance(self.measure, LogPowerDensity) and self.measure.q.denominator != 1:
            return ValueClass.TRANSCENDENTAL
        return ValueClass.RATIONAL

    def exact(self, n):
        if isinstance(self.measure, LogPowerDensity):
            return Pow(Const(Fraction(n + 1)), -self.measure.q).exact()
        return berger_moment(self.measure, n)

    def expr(self, n):
        if isinstance(self.measure, LogPowerDensity):
            return Pow(Const(Fraction(n + 1)), -self.measure.q)
        return Const(berger_moment(self.measure, n))

    def log_form(self, n):
        if isinstance(self.measure, LogPowerDensity):
            return LogCombination.from_terms([(n + 1, -self.measure.q)])
        return super().log_form(n)

    def to_dict(self):
        return {'measure_moments': self.measure.to_dict()}

    def label(self):
        return f'moments[{next(iter(self.measure.to_dict()))}]'


def moment_match_verdict(s, m, N, tolerance_bits=None, config=None):
    """PASS iff the moments of the shift s equal the Berger moments of m for n <= N."""
    config = resolve(config)
    check_index(N, 'N')
    tolerance_bits = tolerance_bits or config.start_bits
    moments = MomentSequence(s)
    exact = moments.exact_values(N + 1)

    witness = None
    undecided = []
    for n in range(N + 1):
        target = berger_moment(m, n, bits=max(tolerance_bits, config.start_bits))
        ours = exact[n]
        if ours is not None and not isinstance(target, Interval):
            if ours != target:
                witness = Witness(0, n, ours, sign_of(ours - target))
                break
            continue
        bits = max(tolerance_bits, config.start_bits)
        mine = moments.interval(n, bits) if ours is None else Interval.point(ours, bits)
        theirs = target if isinstance(target, Interval) else Interval.point(target, bits)
        if not mine.overlaps(theirs):
            witness = Witness(0, n, mine, (mine - theirs).sign())
            break
        limit = Fraction(1, 1 << tolerance_bits)
        if mine.width > limit or theirs.width > limit:
            undecided.append((0, n))

    if witness is not None:
        status = Status.FAIL
    elif undecided:
        status = Status.UNDECIDED
    else:
        status = Status.PASS
    side = {'measure': m.to_dict()}
    if isinstance(m, LogPowerDensity):
        side['note'] = LOG_POWER_EXPONENT_NOTE
    logger.info('verdict test=moment-match sequence=%s status=%s N=%d', s.label(), status.value, N)
    return Verdict(status, 0, N, 'moment-match', s.label(), witness, tuple(undecided), side)
