"""
Sequence kernel for shiftlab.
Weight families, explicit sequences with tail rules, moment sequences and the
exact difference engine. Indexing starts at 0 everywhere (alpha_0, gamma_0).
"""

import logging
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction

from config import resolve
from errors import DomainError, ShiftLabError, UndecidedError, UnsupportedKindError
from numerics import (Const, EulerConst, Exp, Interval, Ln, LogCombination, Pow, binomial,
                      format_rational, harmonic, sign_adaptive, to_rational)

logger = logging.getLogger(__name__)

HALF = Fraction(1, 2)


class ValueClass(Enum):
    RATIONAL = 'rational'
    RATIONAL_SQUARE = 'rational_square'
    TRANSCENDENTAL = 'transcendental'


_CLASS_ORDER = [ValueClass.RATIONAL, ValueClass.RATIONAL_SQUARE, ValueClass.TRANSCENDENTAL]


def weakest(*classes):
    """The least exact of the given value classes."""
    return max(classes, key=_CLASS_ORDER.index)


def check_index(n, name='n'):
    if isinstance(n, bool) or not isinstance(n, int) or n < 0:
        raise DomainError(f'{name} must be a nonnegative integer, got {n!r}')
    return n


class SequenceDef:
    """A positive sequence, evaluable exactly or through intervals.

    Subclasses override whichever of exact / square_exact / log_form / expr
    they can provide; everything else is derived from those.
    """
    kind = 'family'
    value_class = ValueClass.RATIONAL

    def exact(self, n):
        return None

    def square_exact(self, n):
        q = self.exact(n)
        return None if q is None else q * q

    def log_form(self, n):
        """ln(value(n)) as a LogCombination, or None."""
        q = self.exact(n)
        if q is not None:
            return LogCombination.from_terms([(q, 1)])
        sq = self.square_exact(n)
        if sq is not None:
            return LogCombination.from_terms([(sq, HALF)])
        return None

    def expr(self, n):
        q = self.exact(n)
        if q is not None:
            return Const(q)
        sq = self.square_exact(n)
        if sq is not None:
            return Pow(Const(sq), HALF)
        form = self.log_form(n)
        if form is not None:
            return form.exp_expr()
        raise UnsupportedKindError(f'{self.label()} has no evaluable form at n={n}')

    def interval(self, n, bits):
        return self.expr(n).interval(bits)

    def log_expr(self, n):
        """Expression for ln(value(n))."""
        form = self.log_form(n)
        if form is not None:
            return form.to_expr()
        return Ln(self.expr(n))

    def value(self, n, config=None):
        """Exact value when representable, otherwise a positive enclosing interval."""
        check_index(n)
        q = self.exact(n)
        if q is not None:
            return q
        config = resolve(config)
        bits = config.start_bits
        while bits <= config.max_bits:
            try:
                iv = self.interval(n, bits)
            except UndecidedError:
                iv = None
            if iv is not None and iv.lo > 0:
                return iv
            bits *= 2
        raise UndecidedError(f'{self.label()} at n={n} not separated from zero', config.max_bits)

    def exact_values(self, count):
        return [self.exact(n) for n in range(count)]

    def square_values(self, count):
        return [self.square_exact(n) for n in range(count)]

    def intervals(self, count, bits):
        return [self.interval(n, bits) for n in range(count)]

    def sup_bound(self):
        """A rational upper bound for every term, or None."""
        return None

    def inf_bound(self):
        """A positive rational lower bound for every term, or None."""
        return None

    def supremum(self):
        """Exact supremum as an expression, or None."""
        return None

    def is_exact(self):
        return self.value_class is ValueClass.RATIONAL

    def moments(self):
        return MomentSequence(self)

    def squared(self):
        return PowerOf(self, 2)

    def to_dict(self):
        raise NotImplementedError

    def label(self):
        return type(self).__name__.lower()

    def __str__(self):
        return self.label()


# ---------------------------------------------------------------------------
# Families
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Agler(SequenceDef):
    """Weights sqrt((n+1)/(n+j)); j=2 is the Bergman shift."""
    j: int

    def __post_init__(self):
        if isinstance(self.j, bool) or not isinstance(self.j, int) or self.j < 1:
            raise DomainError(f'agler j must be an integer >= 1, got {self.j!r}')

    @property
    def value_class(self):
        return ValueClass.RATIONAL if self.j == 1 else ValueClass.RATIONAL_SQUARE

    def exact(self, n):
        return Fraction(1) if self.j == 1 else None

    def square_exact(self, n):
        return Fraction(n + 1, n + self.j)

    def sup_bound(self):
        return Fraction(1)

    def inf_bound(self):
        return Fraction(1, self.j)

    def supremum(self):
        return Const(Fraction(1))

    def to_dict(self):
        return {'family': 'agler', 'j': self.j}

    def label(self):
        return 'bergman' if self.j == 2 else f'agler({self.j})'


def bergman():
    return Agler(2)


@dataclass(frozen=True)
class Sabcd(SequenceDef):
    """Weights sqrt((an+b)/(cn+d)) with a, b, c, d > 0 and ad > bc."""
    a: Fraction
    b: Fraction
    c: Fraction
    d: Fraction
    value_class = ValueClass.RATIONAL_SQUARE

    def __post_init__(self):
        for name in ('a', 'b', 'c', 'd'):
            v = to_rational(getattr(self, name))
            if v <= 0:
                raise DomainError(f'sabcd {name} must be positive, got {v}')
            object.__setattr__(self, name, v)
        if self.a * self.d <= self.b * self.c:
            raise DomainError(f'sabcd needs ad > bc, got a={self.a} b={self.b} c={self.c} d={self.d}')

    def square_exact(self, n):
        return (self.a * n + self.b) / (self.c * n + self.d)

    def sup_bound(self):
        # terms increase to sqrt(a/c) <= max(1, a/c)
        return max(Fraction(1), self.a / self.c)

    def inf_bound(self):
        return min(Fraction(1), self.b / self.d)

    def supremum(self):
        return Pow(Const(self.a / self.c), HALF)

    def to_dict(self):
        return {'family': 'sabcd', **{k: format_rational(getattr(self, k)) for k in 'abcd'}}

    def label(self):
        return f'S({self.a},{self.b},{self.c},{self.d})'


@dataclass(frozen=True)
class GeometricGap(SequenceDef):
    """Weights squared prod_i (1 - p_i^(2n+2)) for 0 < p_i < 1."""
    ps: tuple
    value_class = ValueClass.RATIONAL_SQUARE

    def __post_init__(self):
        raw = self.ps if isinstance(self.ps, (list, tuple)) else (self.ps,)
        ps = tuple(to_rational(p) for p in raw)
        if not ps:
            raise DomainError('geometric_gap needs at least one p')
        for p in ps:
            if not 0 < p < 1:
                raise DomainError(f'geometric_gap p must lie in (0, 1), got {p}')
        object.__setattr__(self, 'ps', ps)

    def square_exact(self, n):
        out = Fraction(1)
        for p in self.ps:
            out *= 1 - p ** (2 * n + 2)
        return out

    def sup_bound(self):
        return Fraction(1)

    def inf_bound(self):
        return self.square_exact(0)

    def supremum(self):
        return Const(Fraction(1))

    def to_dict(self):
        return {'family': 'geometric_gap', 'p': [format_rational(p) for p in self.ps]}

    def label(self):
        return f"geometric_gap({','.join(map(str, self.ps))})"


@dataclass(frozen=True)
class Euler(SequenceDef):
    """alpha_n = H_{n+1} - ln(n+2), increasing to Euler's constant."""
    value_class = ValueClass.TRANSCENDENTAL

    def expr(self, n):
        return Const(harmonic(n + 1)) - Ln(Const(Fraction(n + 2)))

    def sup_bound(self):
        return Fraction(5773, 10000)

    def inf_bound(self):
        return Fraction(3, 10)

    def supremum(self):
        return EulerConst()

    def to_dict(self):
        return {'family': 'euler'}


@dataclass(frozen=True)
class Dirichlet(SequenceDef):
    """Weights sqrt((n+2)/(n+1)); moments n+1."""
    value_class = ValueClass.RATIONAL_SQUARE

    def square_exact(self, n):
        return Fraction(n + 2, n + 1)

    def sup_bound(self):
        return Fraction(2)

    def inf_bound(self):
        return Fraction(1)

    def supremum(self):
        return Pow(Const(Fraction(2)), HALF)

    def to_dict(self):
        return {'family': 'dirichlet'}


@dataclass(frozen=True)
class Constant(SequenceDef):
    c: Fraction = Fraction(1)

    def __post_init__(self):
        c = to_rational(self.c)
        if c <= 0:
            raise DomainError(f'constant sequence needs c > 0, got {c}')
        object.__setattr__(self, 'c', c)

    def exact(self, n):
        return self.c

    def sup_bound(self):
        return self.c

    def inf_bound(self):
        return self.c

    def supremum(self):
        return Const(self.c)

    def to_dict(self):
        return {'family': 'constant', 'c': format_rational(self.c)}

    def label(self):
        return f'constant({self.c})'


@dataclass(frozen=True)
class Unilateral(Constant):
    c: Fraction = Fraction(1)

    def to_dict(self):
        return {'family': 'unilateral'}

    def label(self):
        return 'unilateral'


@dataclass(frozen=True)
class PowerOf(SequenceDef):
    """Termwise integer power base(n)^m."""
    base: SequenceDef
    m: int

    def __post_init__(self):
        if isinstance(self.m, bool) or not isinstance(self.m, int):
            raise DomainError(f'power_of needs an integer exponent, got {self.m!r}')

    @property
    def value_class(self):
        cls = self.base.value_class
        if cls is ValueClass.RATIONAL_SQUARE and self.m % 2 == 0:
            return ValueClass.RATIONAL
        return cls

    def exact(self, n):
        q = self.base.exact(n)
        if q is not None:
            return q ** self.m
        if self.m % 2 == 0:
            sq = self.base.square_exact(n)
            if sq is not None:
                return sq ** (self.m // 2)
        return None

    def square_exact(self, n):
        sq = self.base.square_exact(n)
        return None if sq is None else sq ** self.m

    def log_form(self, n):
        form = self.base.log_form(n)
        return None if form is None else form.scale(self.m)

    def expr(self, n):
        q = self.exact(n)
        if q is not None:
            return Const(q)
        return Pow(self.base.expr(n), Fraction(self.m))

    def log_expr(self, n):
        form = self.log_form(n)
        if form is not None:
            return form.to_expr()
        return Const(Fraction(self.m)) * self.base.log_expr(n)

    def sup_bound(self):
        if self.m == 0:
            return Fraction(1)
        bound = self.base.sup_bound() if self.m > 0 else self.base.inf_bound()
        return None if bound is None else bound ** self.m

    def inf_bound(self):
        if self.m == 0:
            return Fraction(1)
        bound = self.base.inf_bound() if self.m > 0 else self.base.sup_bound()
        return None if bound is None else bound ** self.m

    def supremum(self):
        sup = self.base.supremum()
        if self.m <= 0 or sup is None:
            return None
        return Pow(sup, Fraction(self.m))

    def to_dict(self):
        return {'family': 'power_of', 'm': self.m, 'base': self.base.to_dict()}

    def label(self):
        return f'({self.base.label()})^{self.m}'


# ---------------------------------------------------------------------------
# Explicit sequences
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Explicit(SequenceDef):
    """A finite prefix followed by a tail rule.

    With squared=True the prefix holds squared terms. The tail is evaluated at
    the absolute index; without one the last prefix entry repeats.
    """
    values: tuple
    tail: SequenceDef = None
    squared: bool = False
    kind = 'explicit'

    def __post_init__(self):
        values = tuple(to_rational(v) for v in self.values)
        if not values and self.tail is None:
            raise DomainError('explicit sequence needs a nonempty prefix or a tail')
        for i, v in enumerate(values):
            if v <= 0:
                raise DomainError(f'explicit term {i} must be positive, got {v}')
        object.__setattr__(self, 'values', values)

    @classmethod
    def from_moments(cls, moments, tail=None):
        return cls(tuple(weights_from_moments(moments)), tail, squared=True)

    @property
    def value_class(self):
        head = ValueClass.RATIONAL_SQUARE if self.squared else ValueClass.RATIONAL
        if self.tail is None:
            return head
        return weakest(head, self.tail.value_class)

    def _prefix(self, n):
        if n < len(self.values):
            return self.values[n]
        if self.tail is None:
            return self.values[-1]
        return None

    def exact(self, n):
        v = self._prefix(n)
        if v is None:
            return self.tail.exact(n)
        return None if self.squared else v

    def square_exact(self, n):
        v = self._prefix(n)
        if v is None:
            return self.tail.square_exact(n)
        return v if self.squared else v * v

    def log_form(self, n):
        v = self._prefix(n)
        if v is None:
            return self.tail.log_form(n)
        return LogCombination.from_terms([(v, HALF if self.squared else 1)])

    def expr(self, n):
        v = self._prefix(n)
        if v is None:
            return self.tail.expr(n)
        return Pow(Const(v), HALF) if self.squared else Const(v)

    def _bounds(self):
        if self.squared:
            return [max(Fraction(1), v) for v in self.values], [min(Fraction(1), v) for v in self.values]
        return list(self.values), list(self.values)

    def sup_bound(self):
        highs, _ = self._bounds()
        if self.tail is not None:
            t = self.tail.sup_bound()
            if t is None:
                return None
            highs.append(t)
        return max(highs)

    def inf_bound(self):
        _, lows = self._bounds()
        if self.tail is not None:
            t = self.tail.inf_bound()
            if t is None:
                return None
            lows.append(t)
        return min(lows)

    def supremum(self):
        if not self.values:
            return self.tail.supremum()
        top = max(self.values)
        if self.tail is not None:
            t = self.tail.supremum()
            tq = None if t is None else t.exact()
            if tq is None:
                return None
            if self.squared:
                tq = tq * tq
            top = max(top, tq)
        return Pow(Const(top), HALF) if self.squared else Const(top)

    def to_dict(self):
        key = 'weights_squared' if self.squared else 'weights'
        body = {key: [format_rational(v) for v in self.values]}
        if self.tail is not None:
            body['tail'] = self.tail.to_dict()
        return {'explicit': body}

    def label(self):
        head = ','.join(format_rational(v) for v in self.values[:4])
        more = ',...' if len(self.values) > 4 else ''
        return f"explicit({'sq:' if self.squared else ''}{head}{more})"


# ---------------------------------------------------------------------------
# Moments and exponential lifts
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class MomentSequence(SequenceDef):
    """gamma_0 = 1, gamma_n = prod_{i<n} alpha_i^2."""
    weights: SequenceDef
    kind = 'transformed'

    @property
    def value_class(self):
        if self.weights.value_class is ValueClass.TRANSCENDENTAL:
            return ValueClass.TRANSCENDENTAL
        return ValueClass.RATIONAL

    def exact(self, n):
        out = Fraction(1)
        for i in range(n):
            sq = self.weights.square_exact(i)
            if sq is None:
                return None
            out *= sq
        return out

    def exact_values(self, count):
        out, acc = [], Fraction(1)
        for n in range(count):
            if acc is not None:
                out.append(acc)
                sq = self.weights.square_exact(n)
                acc = None if sq is None else acc * sq
            else:
                out.append(None)
        return out

    def log_form(self, n):
        q = self.exact(n)
        if q is not None:
            return LogCombination.from_terms([(q, 1)])
        total = LogCombination()
        for i in range(n):
            form = self.weights.log_form(i)
            if form is None:
                return None
            total = total + form.scale(2)
        return total

    def expr(self, n):
        q = self.exact(n)
        if q is not None:
            return Const(q)
        form = self.log_form(n)
        if form is not None:
            return form.exp_expr()
        out = Const(Fraction(1))
        for i in range(n):
            out = out * Pow(self.weights.expr(i), Fraction(2))
        return out

    def intervals(self, count, bits):
        exact = self.exact_values(count)
        if all(q is not None for q in exact):
            return [Interval.point(q, bits) for q in exact]
        out, acc = [], Interval.point(1, bits)
        for n in range(count):
            out.append(acc)
            acc = acc * self.weights.interval(n, bits) ** 2
        return out

    def sup_bound(self):
        bound = self.weights.sup_bound()
        return Fraction(1) if bound is not None and bound <= 1 else None

    def inf_bound(self):
        bound = self.weights.inf_bound()
        return Fraction(1) if bound is not None and bound >= 1 else None

    def to_dict(self):
        return {'moments_of': self.weights.to_dict()}

    def label(self):
        return f'moments({self.weights.label()})'


@dataclass(frozen=True)
class ExpOf(SequenceDef):
    """exp(scale * inner(n) + shift)."""
    inner: SequenceDef
    scale: Fraction = Fraction(1)
    shift: Fraction = Fraction(0)
    kind = 'transformed'
    value_class = ValueClass.TRANSCENDENTAL

    def __post_init__(self):
        object.__setattr__(self, 'scale', to_rational(self.scale))
        object.__setattr__(self, 'shift', to_rational(self.shift))

    def exact(self, n):
        if self.scale == 0 and self.shift == 0:
            return Fraction(1)
        return None

    def log_form(self, n):
        q = self.inner.exact(n)
        if q is None:
            return None
        return LogCombination.constant(self.scale * q + self.shift)

    def expr(self, n):
        form = self.log_form(n)
        if form is not None:
            return Exp(Const(form.offset))
        return Exp(Const(self.scale) * self.inner.expr(n) + Const(self.shift))

    def to_dict(self):
        return {'exp_of': self.inner.to_dict(), 'scale': format_rational(self.scale),
                'shift': format_rational(self.shift)}

    def label(self):
        shift = '' if self.shift == 0 else f' + {self.shift}'
        return f'exp({self.scale}*{self.inner.label()}{shift})'


# ---------------------------------------------------------------------------
# Moments <-> weights
# ---------------------------------------------------------------------------

def moments_from_weights(s, N, config=None):
    """gamma_0..gamma_N: exact for rational classes, intervals otherwise."""
    check_index(N, 'N')
    moments = MomentSequence(s)
    values = moments.exact_values(N + 1)
    if all(q is not None for q in values):
        return values
    config = resolve(config)
    logger.warning('moments use interval path sequence=%s bits=%d', s.label(), config.start_bits)
    return moments.intervals(N + 1, config.start_bits)


def weights_from_moments(moments):
    """Weights squared alpha_n^2 = gamma_{n+1}/gamma_n."""
    if moments is None or len(moments) == 0:
        raise DomainError('moment list is empty')
    gammas = [to_rational(g) for g in moments]
    if gammas[0] != 1:
        raise DomainError(f'gamma_0 must be 1, got {gammas[0]}')
    for i, g in enumerate(gammas):
        if g <= 0:
            raise DomainError(f'moment gamma_{i} must be positive, got {g}')
    return [gammas[i + 1] / gammas[i] for i in range(len(gammas) - 1)]


# ---------------------------------------------------------------------------
# Differences
# ---------------------------------------------------------------------------

def difference(s, k, n, bits=None, config=None):
    """nabla^k s(n) = sum_i (-1)^i C(k,i) s(n+i), exact when possible."""
    check_index(k, 'k')
    check_index(n)
    values = [s.exact(n + i) for i in range(k + 1)]
    if all(q is not None for q in values):
        return sum(((-1) ** i * binomial(k, i) * q for i, q in enumerate(values)), Fraction(0))
    bits = bits or resolve(config).start_bits
    total = Interval.point(0, bits)
    for i in range(k + 1):
        total = total + s.interval(n + i, bits) * ((-1) ** i * binomial(k, i))
    return total


@dataclass(frozen=True)
class DifferenceTable:
    """rows[k][n] = nabla^k source(n), for n up to N + K - k."""
    source: SequenceDef
    K: int
    N: int
    rows: tuple
    bits: int = None

    @property
    def exact(self):
        return self.bits is None

    def entry(self, k, n):
        if not (0 <= k <= self.K and 0 <= n < len(self.rows[k])):
            raise DomainError(f'cell ({k}, {n}) outside table K={self.K} N={self.N}')
        return self.rows[k][n]

    def cells(self):
        """(k, n, value) over 0 <= k <= K, 0 <= n <= N."""
        for k in range(self.K + 1):
            for n in range(self.N + 1):
                yield k, n, self.rows[k][n]


def pascal_rows(values, K):
    rows = [list(values)]
    for _ in range(K):
        prev = rows[-1]
        rows.append([prev[i] - prev[i + 1] for i in range(len(prev) - 1)])
    return tuple(tuple(r) for r in rows)


def difference_table(s, K, N, bits=None, config=None):
    """Difference table by the Pascal recurrence, spot-checked against direct sums."""
    check_index(K, 'K')
    check_index(N, 'N')
    count = N + K + 1
    values = s.exact_values(count)
    if all(q is not None for q in values):
        table = DifferenceTable(s, K, N, pascal_rows(values, K))
    else:
        bits = bits or resolve(config).start_bits
        table = DifferenceTable(s, K, N, pascal_rows(s.intervals(count, bits), K), bits)

    for k, n in {(K, 0), (K, N), (K // 2, N // 2)}:
        direct = difference(s, k, n, bits=table.bits or bits)
        cell = table.rows[k][n]
        agrees = direct == cell if table.exact else direct.overlaps(cell)
        if not agrees:
            raise ShiftLabError(f'difference table disagrees with direct expansion at ({k}, {n})')
    logger.debug('difference table sequence=%s K=%d N=%d exact=%s', s.label(), K, N, table.exact)
    return table


@dataclass(frozen=True)
class IntervalLogDifference:
    """nabla^k ln s(n) for sequences without an exact log form."""
    expr: object
    flagged: bool = field(default=True)

    def interval(self, bits):
        return self.expr.interval(bits)

    def sign(self, config=None):
        return sign_adaptive(self.expr, config=config)


def log_difference(s, k, n):
    """sum_i (-1)^i C(k,i) ln s(n+i), as an exact LogCombination when possible."""
    check_index(k, 'k')
    check_index(n)
    forms = [s.log_form(n + i) for i in range(k + 1)]
    if all(f is not None for f in forms):
        total = LogCombination()
        for i, form in enumerate(forms):
            total = total + form.scale((-1) ** i * binomial(k, i))
        return total
    logger.warning('log difference uses interval path sequence=%s k=%d n=%d', s.label(), k, n)
    expr = Const(Fraction(0))
    for i in range(k + 1):
        expr = expr + Const(Fraction((-1) ** i * binomial(k, i))) * Ln(s.expr(n + i))
    return IntervalLogDifference(expr)


def log_difference_table(s, K, N):
    """Exact LogCombination table by the Pascal recurrence, or None."""
    forms = [s.log_form(n) for n in range(N + K + 1)]
    if any(f is None for f in forms):
        return None
    return DifferenceTable(s, K, N, pascal_rows(forms, K))
