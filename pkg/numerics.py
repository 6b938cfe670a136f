"""
Verified arithmetic for shiftlab.
This module provides exact rationals, exact signs of rational log-combinations,
outward-rounded interval arithmetic, and the special functions the weighted
shift families need (exp, ln, power, Gamma, digamma, Euler's constant).
"""

import logging
import math
import threading
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from functools import lru_cache, reduce

from mpmath import mp

from config import resolve
from errors import DomainError, UndecidedError

logger = logging.getLogger(__name__)

# Extra working bits for mpmath calls; results are widened by 2^-bits relative.
GUARD_BITS = 32

# Interval JSON keeps at most this many decimal places, rounded outward.
MAX_DECIMAL_PLACES = 80

_SMALL_PRIMES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53, 59, 61, 67, 71, 73, 79, 83, 89, 97)

# mpmath's mp context is process-global; precision changes are serialized.
_MP_LOCK = threading.RLock()


# ---------------------------------------------------------------------------
# Rationals and signs
# ---------------------------------------------------------------------------

def to_rational(x):
    """Parse an int, Fraction or 'p/q' string into a Fraction."""
    if isinstance(x, Fraction):
        return x
    if isinstance(x, bool):
        raise DomainError(f'not a rational: {x!r}')
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, str):
        try:
            return Fraction(x.strip())
        except (ValueError, ZeroDivisionError):
            raise DomainError(f'not a rational: {x!r}')
    raise DomainError(f'not a rational: {x!r} ({type(x).__name__})')


def format_rational(q):
    """'p/q', or 'p' when the denominator is 1."""
    return str(Fraction(q))


class Sign(Enum):
    NEGATIVE = 'negative'
    ZERO = 'zero'
    POSITIVE = 'positive'
    UNDECIDED = 'undecided'

    def negate(self):
        if self is Sign.NEGATIVE:
            return Sign.POSITIVE
        if self is Sign.POSITIVE:
            return Sign.NEGATIVE
        return self

    @property
    def decided(self):
        return self is not Sign.UNDECIDED


def sign_of(x):
    if x > 0:
        return Sign.POSITIVE
    if x < 0:
        return Sign.NEGATIVE
    return Sign.ZERO


@lru_cache(maxsize=None)
def _binomial(k, i):
    return math.comb(k, i)


def binomial(k, i):
    """C(k, i) for 0 <= i <= k, memoized."""
    if k < 0 or i < 0 or i > k:
        raise DomainError(f'binomial({k}, {i}) needs 0 <= i <= k')
    return _binomial(k, i)


_harmonic_cache = [Fraction(0)]
_harmonic_lock = threading.Lock()


def harmonic(n):
    """Exact harmonic number H_n = 1 + 1/2 + ... + 1/n (H_0 = 0)."""
    if n < 0:
        raise DomainError(f'harmonic({n}) needs n >= 0')
    with _harmonic_lock:
        while len(_harmonic_cache) <= n:
            m = len(_harmonic_cache)
            _harmonic_cache.append(_harmonic_cache[-1] + Fraction(1, m))
        return _harmonic_cache[n]


# ---------------------------------------------------------------------------
# Intervals
# ---------------------------------------------------------------------------

def _floor_dyadic(q, bits):
    """Largest dyadic <= q with about `bits` significant bits."""
    if q == 0:
        return Fraction(0)
    num, den = q.numerator, q.denominator
    shift = bits - (abs(num).bit_length() - den.bit_length())
    if shift >= 0:
        return Fraction((num << shift) // den, 1 << shift)
    return Fraction((num // (den << -shift)) << -shift)


def _ceil_dyadic(q, bits):
    return -_floor_dyadic(-q, bits)


def _decimal_string(q, places, up):
    scale = 10 ** places
    num = q.numerator * scale
    m = -((-num) // q.denominator) if up else num // q.denominator
    sign = '-' if m < 0 else ''
    whole, frac = divmod(abs(m), scale)
    if frac == 0:
        return f'{sign}{whole}'
    return f'{sign}{whole}.{frac:0{places}d}'.rstrip('0')


@dataclass(frozen=True)
class Interval:
    """Closed interval [lo, hi] with dyadic endpoints; encloses the true value."""
    lo: Fraction
    hi: Fraction
    bits: int

    def __post_init__(self):
        if self.lo > self.hi:
            raise DomainError(f'empty interval [{self.lo}, {self.hi}]')

    @classmethod
    def point(cls, q, bits):
        q = to_rational(q)
        return cls(_floor_dyadic(q, bits), _ceil_dyadic(q, bits), bits)

    @classmethod
    def hull(cls, lo, hi, bits):
        return cls(_floor_dyadic(Fraction(lo), bits), _ceil_dyadic(Fraction(hi), bits), bits)

    @property
    def width(self):
        return self.hi - self.lo

    @property
    def mid(self):
        return (self.lo + self.hi) / 2

    def contains(self, q):
        q = to_rational(q) if not isinstance(q, Interval) else q
        if isinstance(q, Interval):
            return self.lo <= q.lo and q.hi <= self.hi
        return self.lo <= q <= self.hi

    def overlaps(self, other):
        return self.lo <= other.hi and other.lo <= self.hi

    def sign(self):
        if self.lo > 0:
            return Sign.POSITIVE
        if self.hi < 0:
            return Sign.NEGATIVE
        if self.lo == 0 and self.hi == 0:
            return Sign.ZERO
        return Sign.UNDECIDED

    def _coerce(self, other):
        if isinstance(other, Interval):
            return other
        if isinstance(other, (int, Fraction)):
            return Interval.point(other, self.bits)
        return None

    def __add__(self, other):
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        bits = max(self.bits, other.bits)
        return Interval.hull(self.lo + other.lo, self.hi + other.hi, bits)

    __radd__ = __add__

    def __neg__(self):
        return Interval(-self.hi, -self.lo, self.bits)

    def __sub__(self, other):
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other):
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        return other + (-self)

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            other = Fraction(other)
            lo, hi = sorted((self.lo * other, self.hi * other))
            return Interval.hull(lo, hi, self.bits)
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        products = (self.lo * other.lo, self.lo * other.hi, self.hi * other.lo, self.hi * other.hi)
        return Interval.hull(min(products), max(products), max(self.bits, other.bits))

    __rmul__ = __mul__

    def reciprocal(self):
        if self.lo == 0 and self.hi == 0:
            raise DomainError('division by zero')
        if self.lo <= 0 <= self.hi:
            raise UndecidedError('divisor interval contains zero', self.bits)
        return Interval.hull(1 / self.hi, 1 / self.lo, self.bits)

    def __truediv__(self, other):
        if isinstance(other, (int, Fraction)):
            if other == 0:
                raise DomainError('division by zero')
            return self * (1 / Fraction(other))
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        return self * other.reciprocal()

    def __rtruediv__(self, other):
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        return other * self.reciprocal()

    def __pow__(self, n):
        if not isinstance(n, int):
            return NotImplemented
        if n < 0:
            return (self ** -n).reciprocal()
        if n == 0:
            return Interval(Fraction(1), Fraction(1), self.bits)
        a, b = self.lo ** n, self.hi ** n
        if n % 2 == 1 or self.lo >= 0:
            return Interval.hull(min(a, b), max(a, b), self.bits)
        if self.hi <= 0:
            return Interval.hull(b, a, self.bits)
        return Interval.hull(0, max(a, b), self.bits)

    def to_json(self):
        places = min(math.ceil(self.bits * 0.30103) + 1, MAX_DECIMAL_PLACES)
        return {
            'lo': _decimal_string(self.lo, places, up=False),
            'hi': _decimal_string(self.hi, places, up=True),
            'bits': self.bits,
        }

    def __str__(self):
        d = self.to_json()
        return f"[{d['lo']}, {d['hi']}]"


# ---------------------------------------------------------------------------
# mpmath bridge: monotone primitives evaluated at the interval endpoints
# ---------------------------------------------------------------------------

def _mp_to_fraction(v):
    if not mp.isfinite(v):
        raise DomainError(f'non-finite value {v}')
    sign, man, exp, _ = v._mpf_
    value = Fraction(man) * Fraction(2) ** exp
    return -value if sign else value


def _working_prec(bits, *endpoints):
    needed = max([bits] + [q.numerator.bit_length() + q.denominator.bit_length() for q in endpoints])
    return needed + GUARD_BITS


def _to_mp(q):
    return mp.mpf(q.numerator) / q.denominator


def _widen(values, bits):
    lo = min(values)
    hi = max(values)
    slack_floor = Fraction(1, 1 << (2 * bits))
    lo = lo - abs(lo) / (1 << bits) - slack_floor
    hi = hi + abs(hi) / (1 << bits) + slack_floor
    return Interval.hull(lo, hi, bits)


def _apply_mp(fn, x, bits):
    """Evaluate fn at both endpoints of x with guard bits, as exact Fractions."""
    with _MP_LOCK, mp.workprec(_working_prec(bits, x.lo, x.hi)):
        a = fn(_to_mp(x.lo))
        b = a if x.lo == x.hi else fn(_to_mp(x.hi))
        return _mp_to_fraction(a), _mp_to_fraction(b)


def exp_interval(x, bits):
    return _widen(_apply_mp(mp.exp, x, bits), bits)


def ln_interval(x, bits):
    if x.hi <= 0:
        raise DomainError(f'ln of non-positive value {x}')
    if x.lo <= 0:
        raise UndecidedError(f'ln argument {x} not separated from zero', bits)
    return _widen(_apply_mp(mp.log, x, bits), bits)


@lru_cache(maxsize=8192)
def ln_int_interval(m, bits):
    """Enclosure of ln(m) for a positive integer m."""
    if m <= 0:
        raise DomainError(f'ln of non-positive integer {m}')
    if m == 1:
        return Interval(Fraction(0), Fraction(0), bits)
    return ln_interval(Interval(Fraction(m), Fraction(m), bits), bits)


def pow_interval(x, p, bits):
    """x^p for rational p; integer p is exact interval power."""
    p = to_rational(p)
    if p.denominator == 1:
        return Interval.hull((x ** int(p)).lo, (x ** int(p)).hi, bits)
    if x.hi <= 0:
        raise DomainError(f'non-integer power of non-positive value {x}')
    if x.lo <= 0:
        raise UndecidedError(f'power base {x} not separated from zero', bits)
    with _MP_LOCK, mp.workprec(_working_prec(bits, x.lo, x.hi, p)):
        e = mp.mpf(p.numerator) / p.denominator
        a = _mp_to_fraction(mp.power(_to_mp(x.lo), e))
        b = _mp_to_fraction(mp.power(_to_mp(x.hi), e))
    return _widen((a, b), bits)


# Gamma attains its minimum on (0, oo) near 1.46163; 0.8856 lies below it.
_GAMMA_ARGMIN_LO = Fraction(14616, 10000)
_GAMMA_ARGMIN_HI = Fraction(14617, 10000)
_GAMMA_MIN_LOWER = Fraction(8856, 10000)


def gamma_interval(x, bits):
    if x.lo <= 0:
        raise DomainError(f'Gamma is only supported on positive arguments, got {x}')
    a, b = _apply_mp(mp.gamma, x, bits)
    if x.hi <= _GAMMA_ARGMIN_LO or x.lo >= _GAMMA_ARGMIN_HI:
        return _widen((a, b), bits)
    return _widen((_GAMMA_MIN_LOWER, max(a, b)), bits)


def digamma_interval(x, bits):
    if x.lo <= 0:
        raise DomainError(f'digamma is only supported on positive arguments, got {x}')
    return _widen(_apply_mp(mp.digamma, x, bits), bits)


@lru_cache(maxsize=64)
def euler_interval(bits):
    with _MP_LOCK, mp.workprec(bits + GUARD_BITS):
        g = _mp_to_fraction(+mp.euler)
    return _widen((g,), bits)


# ---------------------------------------------------------------------------
# Log-combinations
# ---------------------------------------------------------------------------

def _coprime_insert(acc, x, e):
    """Add e*ln(x) to acc, keeping the bases of acc pairwise coprime."""
    if x == 1 or e == 0:
        return
    for p in _SMALL_PRIMES:
        if x % p == 0:
            k = 0
            while x % p == 0:
                x //= p
                k += 1
            _coprime_insert_unit(acc, p, e * k)
    _coprime_insert_unit(acc, x, e)


def _coprime_insert_unit(acc, x, e):
    pending = [(x, e)]
    while pending:
        x, e = pending.pop()
        if x == 1 or e == 0:
            continue
        if x in acc:
            total = acc[x] + e
            if total == 0:
                del acc[x]
            else:
                acc[x] = total
            continue
        for b in list(acc):
            g = math.gcd(x, b)
            if g == 1:
                continue
            eb = acc.pop(b)
            # eb*ln(b) + e*ln(x) = (eb+e)*ln(g) + eb*ln(b/g) + e*ln(x/g)
            pending.append((g, eb + e))
            pending.append((b // g, eb))
            pending.append((x // g, e))
            break
        else:
            acc[x] = e


@dataclass(frozen=True)
class LogCombination:
    """offset + sum of exponent*ln(base), bases kept pairwise coprime integers > 1.

    Build with `from_terms`; the canonical form makes "no factors" equivalent to
    the logarithmic part being exactly zero.
    """
    factors: tuple = ()
    offset: Fraction = Fraction(0)

    @classmethod
    def from_terms(cls, terms, offset=0):
        acc = {}
        for base, exponent in terms:
            b = to_rational(base)
            e = to_rational(exponent)
            if b <= 0:
                raise DomainError(f'log base must be positive, got {b}')
            _coprime_insert(acc, b.numerator, e)
            _coprime_insert(acc, b.denominator, -e)
        return cls._from_dict(acc, offset)

    @classmethod
    def constant(cls, offset):
        return cls((), to_rational(offset))

    @classmethod
    def _from_dict(cls, acc, offset):
        return cls(tuple(sorted((b, e) for b, e in acc.items() if e != 0)), to_rational(offset))

    @property
    def terms(self):
        return tuple((Fraction(b), e) for b, e in self.factors)

    @property
    def has_logs(self):
        return bool(self.factors)

    def is_zero(self):
        return not self.factors and self.offset == 0

    def __add__(self, other):
        if not isinstance(other, LogCombination):
            return NotImplemented
        acc = dict(self.factors)
        for b, e in other.factors:
            _coprime_insert_unit(acc, b, e)
        return LogCombination._from_dict(acc, self.offset + other.offset)

    def __neg__(self):
        return LogCombination(tuple((b, -e) for b, e in self.factors), -self.offset)

    def __sub__(self, other):
        if not isinstance(other, LogCombination):
            return NotImplemented
        return self + (-other)

    def scale(self, c):
        c = to_rational(c)
        if c == 0:
            return LogCombination()
        return LogCombination(tuple((b, e * c) for b, e in self.factors), self.offset * c)

    def __mul__(self, c):
        if isinstance(c, (int, Fraction)):
            return self.scale(c)
        return NotImplemented

    __rmul__ = __mul__

    def interval(self, bits):
        total = Interval.point(self.offset, bits)
        for b, e in self.factors:
            total = total + ln_int_interval(b, bits) * e
        return total

    def to_expr(self):
        expr = Const(self.offset)
        for b, e in self.factors:
            expr = expr + Const(e) * Ln(Const(b))
        return expr

    def exp_expr(self):
        """Expression for exp(self) = e^offset * prod b^e."""
        expr = Const(1) if self.offset == 0 else Exp(Const(self.offset))
        for b, e in self.factors:
            expr = expr * Pow(Const(Fraction(b)), e)
        return expr

    def sign(self, config=None):
        return sign_of_log_combination(self, config)

    def __str__(self):
        parts = []
        for b, e in self.factors:
            coeff = '' if e == 1 else ('-' if e == -1 else f'{e}*')
            parts.append(f'{coeff}ln({b})')
        if self.offset != 0 or not parts:
            parts.append(format_rational(self.offset))
        return ' + '.join(parts).replace('+ -', '- ')


def _bit_bounds(items):
    """(lower, upper) with 2^lower <= prod(b^E) < 2^upper."""
    lower = sum(E * (b.bit_length() - 1) for b, E in items)
    upper = max(sum(E * b.bit_length() for b, E in items), 1)
    return lower, upper


def _sign_of_pure_logs(c, config):
    L = reduce(lambda acc, d: acc * d // math.gcd(acc, d), (e.denominator for _, e in c.factors), 1)
    pos = [(b, int(e * L)) for b, e in c.factors if e > 0]
    neg = [(b, int(-e * L)) for b, e in c.factors if e < 0]

    lo_p, hi_p = _bit_bounds(pos)
    lo_n, hi_n = _bit_bounds(neg)
    if hi_p <= lo_n:
        return Sign.NEGATIVE
    if hi_n <= lo_p:
        return Sign.POSITIVE

    for bits in (config.start_bits, 4 * config.start_bits):
        s = c.interval(bits).sign()
        if s.decided:
            return s

    logger.debug('log-combination sign falls back to exact products factors=%d', len(c.factors))
    a = 1
    for b, E in pos:
        a *= b ** E
    d = 1
    for b, E in neg:
        d *= b ** E
    return sign_of(a - d)


def sign_of_log_combination(c, config=None):
    """Exact sign of offset + sum e_i ln(b_i); never UNDECIDED."""
    config = resolve(config)
    if not isinstance(c, LogCombination):
        c = LogCombination.from_terms(c)
    if not c.has_logs:
        return sign_of(c.offset)
    if c.offset == 0:
        return _sign_of_pure_logs(c, config)
    # Nonzero rational plus nonzero log of a rational is never zero, so this terminates.
    bits = config.start_bits
    while True:
        s = c.interval(bits).sign()
        if s.decided:
            return s
        if bits >= config.max_bits:
            logger.warning('log-combination sign escalating past max_bits bits=%d', bits)
        bits *= 2


# ---------------------------------------------------------------------------
# Symbolic expressions
# ---------------------------------------------------------------------------

def as_expr(x):
    if isinstance(x, Expr):
        return x
    return Const(to_rational(x))


class Expr:
    """Expression over + - * / exp ln power Gamma digamma and Euler's constant."""

    def exact(self):
        """Exact rational value, or None."""
        return None

    def log_form(self):
        """The value as a LogCombination (offset + sum e ln b), or None."""
        q = self.exact()
        return None if q is None else LogCombination.constant(q)

    def log_of(self):
        """ln(value) as a LogCombination, or None."""
        q = self.exact()
        if q is None:
            return None
        if q <= 0:
            raise DomainError(f'ln of non-positive value {q}')
        return LogCombination.from_terms([(q, 1)])

    def interval(self, bits):
        raise NotImplementedError

    def __add__(self, other):
        return Add(self, as_expr(other))

    def __radd__(self, other):
        return Add(as_expr(other), self)

    def __sub__(self, other):
        return Sub(self, as_expr(other))

    def __rsub__(self, other):
        return Sub(as_expr(other), self)

    def __mul__(self, other):
        return Mul(self, as_expr(other))

    def __rmul__(self, other):
        return Mul(as_expr(other), self)

    def __truediv__(self, other):
        return Div(self, as_expr(other))

    def __rtruediv__(self, other):
        return Div(as_expr(other), self)

    def __neg__(self):
        return Neg(self)

    def __pow__(self, p):
        return Pow(self, to_rational(p))


@dataclass(frozen=True)
class Const(Expr):
    value: Fraction

    def exact(self):
        return self.value

    def interval(self, bits):
        return Interval.point(self.value, bits)

    def __str__(self):
        return format_rational(self.value)


@dataclass(frozen=True)
class Add(Expr):
    left: Expr
    right: Expr

    def exact(self):
        a, b = self.left.exact(), self.right.exact()
        return None if a is None or b is None else a + b

    def log_form(self):
        a, b = self.left.log_form(), self.right.log_form()
        return None if a is None or b is None else a + b

    def interval(self, bits):
        return self.left.interval(bits) + self.right.interval(bits)

    def __str__(self):
        return f'({self.left} + {self.right})'


@dataclass(frozen=True)
class Sub(Expr):
    left: Expr
    right: Expr

    def exact(self):
        if self.left == self.right:
            return Fraction(0)
        a, b = self.left.exact(), self.right.exact()
        return None if a is None or b is None else a - b

    def log_form(self):
        a, b = self.left.log_form(), self.right.log_form()
        return None if a is None or b is None else a - b

    def interval(self, bits):
        if self.left == self.right:
            return Interval.point(0, bits)
        return self.left.interval(bits) - self.right.interval(bits)

    def __str__(self):
        return f'({self.left} - {self.right})'


@dataclass(frozen=True)
class Neg(Expr):
    arg: Expr

    def exact(self):
        a = self.arg.exact()
        return None if a is None else -a

    def log_form(self):
        a = self.arg.log_form()
        return None if a is None else -a

    def interval(self, bits):
        return -self.arg.interval(bits)

    def __str__(self):
        return f'-{self.arg}'


@dataclass(frozen=True)
class Mul(Expr):
    left: Expr
    right: Expr

    def exact(self):
        a, b = self.left.exact(), self.right.exact()
        if a == 0 or b == 0:
            return Fraction(0)
        return None if a is None or b is None else a * b

    def log_form(self):
        a, b = self.left.exact(), self.right.exact()
        if a is not None:
            form = self.right.log_form()
            return None if form is None else form.scale(a)
        if b is not None:
            form = self.left.log_form()
            return None if form is None else form.scale(b)
        return None

    def log_of(self):
        a, b = self.left.log_of(), self.right.log_of()
        return None if a is None or b is None else a + b

    def interval(self, bits):
        return self.left.interval(bits) * self.right.interval(bits)

    def __str__(self):
        return f'{self.left}*{self.right}'


@dataclass(frozen=True)
class Div(Expr):
    left: Expr
    right: Expr

    def exact(self):
        a, b = self.left.exact(), self.right.exact()
        if b == 0:
            raise DomainError('division by zero')
        return None if a is None or b is None else a / b

    def log_form(self):
        b = self.right.exact()
        if b is None or b == 0:
            return None
        form = self.left.log_form()
        return None if form is None else form.scale(1 / b)

    def log_of(self):
        a, b = self.left.log_of(), self.right.log_of()
        return None if a is None or b is None else a - b

    def interval(self, bits):
        return self.left.interval(bits) / self.right.interval(bits)

    def __str__(self):
        return f'{self.left}/{self.right}'


@dataclass(frozen=True)
class Exp(Expr):
    arg: Expr

    def exact(self):
        return Fraction(1) if self.arg.exact() == 0 else None

    def log_of(self):
        return self.arg.log_form()

    def interval(self, bits):
        if self.arg.exact() == 0:
            return Interval.point(1, bits)
        return exp_interval(self.arg.interval(bits), bits)

    def __str__(self):
        return f'exp({self.arg})'


@dataclass(frozen=True)
class Ln(Expr):
    arg: Expr

    def exact(self):
        a = self.arg.exact()
        if a is not None and a <= 0:
            raise DomainError(f'ln of non-positive value {a}')
        return Fraction(0) if a == 1 else None

    def log_form(self):
        return self.arg.log_of()

    def interval(self, bits):
        form = self.arg.log_of()
        if form is not None:
            return form.interval(bits)
        return ln_interval(self.arg.interval(bits), bits)

    def __str__(self):
        return f'ln({self.arg})'


@dataclass(frozen=True)
class Pow(Expr):
    base: Expr
    exponent: Fraction

    def exact(self):
        if self.exponent == 0:
            return Fraction(1)
        b = self.base.exact()
        if b is None:
            return None
        if self.exponent.denominator == 1:
            if b == 0 and self.exponent < 0:
                raise DomainError('zero to a negative power')
            return b ** int(self.exponent)
        return _exact_root(b, self.exponent)

    def log_of(self):
        form = self.base.log_of()
        return None if form is None else form.scale(self.exponent)

    def interval(self, bits):
        q = self.exact()
        if q is not None:
            return Interval.point(q, bits)
        return pow_interval(self.base.interval(bits), self.exponent, bits)

    def __str__(self):
        return f'{self.base}^({format_rational(self.exponent)})'


def _exact_root(b, p):
    """b^p when it is rational (perfect powers), else None."""
    if b < 0:
        return None
    q = p.denominator
    num = _integer_root(b.numerator, q)
    den = _integer_root(b.denominator, q)
    if num is None or den is None:
        return None
    return Fraction(num, den) ** p.numerator


def _integer_root(m, q):
    """The integer q-th root of m when m is a perfect q-th power, else None."""
    if m < 2:
        return m
    if q == 1:
        return m
    if q == 2:
        r = math.isqrt(m)
        return r if r * r == m else None
    # Newton from above on floor(m^(1/q))
    r = 1 << -(-m.bit_length() // q)
    while True:
        nxt = ((q - 1) * r + m // r ** (q - 1)) // q
        if nxt >= r:
            break
        r = nxt
    return r if r ** q == m else None


@dataclass(frozen=True)
class Gamma(Expr):
    arg: Expr

    def exact(self):
        a = self.arg.exact()
        if a is not None and a.denominator == 1 and a > 0:
            return Fraction(math.factorial(int(a) - 1))
        return None

    def interval(self, bits):
        q = self.exact()
        if q is not None:
            return Interval.point(q, bits)
        return gamma_interval(self.arg.interval(bits), bits)

    def __str__(self):
        return f'Gamma({self.arg})'


@dataclass(frozen=True)
class Digamma(Expr):
    arg: Expr

    def interval(self, bits):
        return digamma_interval(self.arg.interval(bits), bits)

    def __str__(self):
        return f'digamma({self.arg})'


@dataclass(frozen=True)
class EulerConst(Expr):

    def interval(self, bits):
        return euler_interval(bits)

    def __str__(self):
        return 'euler_gamma'


def eval_interval(expr, precision_bits):
    """Enclosure of `expr` at the given precision."""
    if precision_bits <= 0:
        raise DomainError(f'precision_bits must be positive, got {precision_bits}')
    return as_expr(expr).interval(precision_bits)


def sign_adaptive(expr, max_precision_bits=None, config=None, start_bits=None):
    """Sign of `expr`, doubling precision until decided or the cap is reached.

    ZERO is returned only when the expression is exactly zero (rational value,
    or a log-combination that cancels).
    """
    config = resolve(config)
    max_bits = max_precision_bits or config.max_bits
    expr = as_expr(expr)

    q = expr.exact()
    if q is not None:
        return sign_of(q)
    form = expr.log_form()
    if form is not None and (not form.has_logs or form.offset == 0):
        return sign_of_log_combination(form, config)

    bits = start_bits or config.start_bits
    while bits <= max_bits:
        try:
            s = expr.interval(bits).sign()
        except UndecidedError:
            s = Sign.UNDECIDED
        if s in (Sign.POSITIVE, Sign.NEGATIVE):
            return s
        logger.debug('sign_adaptive escalating bits=%d', bits * 2)
        bits *= 2
    return Sign.UNDECIDED
