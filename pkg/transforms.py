"""
Sequence and shift transforms for shiftlab.
Each transform wraps another SequenceDef lazily; evaluation and log-form
extraction recurse through the wrapper so exact sign tests survive composition.
"""

import logging
import math
from dataclasses import dataclass, field
from fractions import Fraction

from config import resolve
from errors import ContractivityError, DomainError
from numerics import (Const, Digamma, EulerConst, Exp, LogCombination, Pow, Sign, binomial,
                      format_rational, harmonic, sign_adaptive, to_rational)
from sequences import (HALF, Agler, Sabcd, SequenceDef, ValueClass, difference, weakest)
from classifiers import completely_alternating_verdict

logger = logging.getLogger(__name__)


class Transformed(SequenceDef):
    """Base for wrappers; subclasses define `name` and `params()`."""
    kind = 'transformed'
    name = ''

    def params(self):
        return {}

    def to_dict(self):
        return {'transform': {'name': self.name, **self.params(), 'of': self.inner.to_dict()}}

    def label(self):
        args = ','.join(f'{k}={v}' for k, v in self.params().items())
        return f"{self.name}{'(' + args + ')' if args else ''}[{self.inner.label()}]"


def _forms(s, indices):
    forms = [s.log_form(i) for i in indices]
    return None if any(f is None for f in forms) else forms


def _ceil_power(bound, p, upper):
    """Rational bound for bound^p with rational p > 0."""
    if bound is None:
        return None
    if p.denominator == 1:
        return bound ** int(p)
    c = math.ceil(p)
    return max(Fraction(1), bound) ** c if upper else min(Fraction(1), bound) ** c


@dataclass(frozen=True)
class SchurPower(Transformed):
    """Termwise power s(n)^p for rational p > 0."""
    inner: SequenceDef
    p: Fraction
    name = 'schur_power'

    def __post_init__(self):
        p = to_rational(self.p)
        if p <= 0:
            raise DomainError(f'schur_power needs p > 0, got {p}')
        object.__setattr__(self, 'p', p)

    def params(self):
        return {'p': format_rational(self.p)}

    @property
    def value_class(self):
        inner = self.inner.value_class
        if self.p.denominator == 1:
            if inner is ValueClass.RATIONAL_SQUARE and self.p.numerator % 2 == 0:
                return ValueClass.RATIONAL
            return inner
        if (2 * self.p).denominator == 1 and inner is ValueClass.RATIONAL:
            return ValueClass.RATIONAL_SQUARE
        return ValueClass.TRANSCENDENTAL

    def exact(self, n):
        if self.p.denominator != 1:
            return None
        m = int(self.p)
        q = self.inner.exact(n)
        if q is not None:
            return q ** m
        sq = self.inner.square_exact(n)
        return sq ** (m // 2) if sq is not None and m % 2 == 0 else None

    def square_exact(self, n):
        two_p = 2 * self.p
        if two_p.denominator != 1:
            return None
        q = self.inner.exact(n)
        if q is not None:
            return q ** int(two_p)
        sq = self.inner.square_exact(n)
        return sq ** int(self.p) if sq is not None and self.p.denominator == 1 else None

    def log_form(self, n):
        form = self.inner.log_form(n)
        return None if form is None else form.scale(self.p)

    def expr(self, n):
        q = self.exact(n)
        if q is not None:
            return Const(q)
        return Pow(self.inner.expr(n), self.p)

    def sup_bound(self):
        return _ceil_power(self.inner.sup_bound(), self.p, upper=True)

    def inf_bound(self):
        return _ceil_power(self.inner.inf_bound(), self.p, upper=False)

    def supremum(self):
        sup = self.inner.supremum()
        return None if sup is None else Pow(sup, self.p)


@dataclass(frozen=True)
class Aluthge(Transformed):
    """Weights sqrt(alpha_n alpha_{n+1})."""
    inner: SequenceDef
    name = 'aluthge'

    @property
    def value_class(self):
        if self.inner.value_class is ValueClass.RATIONAL:
            return ValueClass.RATIONAL_SQUARE
        return ValueClass.TRANSCENDENTAL

    def square_exact(self, n):
        a, b = self.inner.exact(n), self.inner.exact(n + 1)
        return None if a is None or b is None else a * b

    def log_form(self, n):
        forms = _forms(self.inner, (n, n + 1))
        return None if forms is None else (forms[0] + forms[1]).scale(HALF)

    def expr(self, n):
        sq = self.square_exact(n)
        if sq is not None:
            return Pow(Const(sq), HALF)
        return Pow(self.inner.expr(n) * self.inner.expr(n + 1), HALF)

    def sup_bound(self):
        return self.inner.sup_bound()

    def inf_bound(self):
        return self.inner.inf_bound()


def aluthge_iter(s, m):
    """m-th Aluthge iterate by repeated wrapping."""
    if isinstance(m, bool) or not isinstance(m, int) or m < 0:
        raise DomainError(f'aluthge_iter needs an integer m >= 0, got {m!r}')
    for _ in range(m):
        s = Aluthge(s)
    return s


@dataclass(frozen=True)
class GeneralizedMean(Transformed):
    """Weights (a^(1-t) b^t + a^t b^(1-t))/2 with a = alpha_n, b = alpha_{n+1}."""
    inner: SequenceDef
    t: Fraction
    name = 'generalized_mean'

    def __post_init__(self):
        t = to_rational(self.t)
        if not 0 <= t <= HALF:
            raise DomainError(f'generalized_mean needs 0 <= t <= 1/2, got {t}')
        object.__setattr__(self, 't', t)

    def params(self):
        return {'t': format_rational(self.t)}

    @property
    def value_class(self):
        if self.t == 0 and self.inner.value_class is ValueClass.RATIONAL:
            return ValueClass.RATIONAL
        if self.t == HALF:
            return Aluthge(self.inner).value_class
        return ValueClass.TRANSCENDENTAL

    def exact(self, n):
        if self.t != 0:
            return None
        a, b = self.inner.exact(n), self.inner.exact(n + 1)
        return None if a is None or b is None else (a + b) / 2

    def square_exact(self, n):
        if self.t == HALF:
            return Aluthge(self.inner).square_exact(n)
        return super().square_exact(n)

    def log_form(self, n):
        if self.t == HALF:
            return Aluthge(self.inner).log_form(n)
        return super().log_form(n)

    def expr(self, n):
        if self.t == HALF:
            return Aluthge(self.inner).expr(n)
        q = self.exact(n)
        if q is not None:
            return Const(q)
        a, b = self.inner.expr(n), self.inner.expr(n + 1)
        if self.t == 0:
            return (a + b) / 2
        return (Pow(a, 1 - self.t) * Pow(b, self.t) + Pow(a, self.t) * Pow(b, 1 - self.t)) / 2

    def sup_bound(self):
        return self.inner.sup_bound()

    def inf_bound(self):
        return self.inner.inf_bound()


@dataclass(frozen=True)
class AlphaPrime(Transformed):
    """Weights sqrt((alpha_n^2 + alpha_{n+1}^2)/2)."""
    inner: SequenceDef
    name = 'alpha_prime'

    @property
    def value_class(self):
        if self.inner.value_class is ValueClass.TRANSCENDENTAL:
            return ValueClass.TRANSCENDENTAL
        return ValueClass.RATIONAL_SQUARE

    def square_exact(self, n):
        a, b = self.inner.square_exact(n), self.inner.square_exact(n + 1)
        return None if a is None or b is None else (a + b) / 2

    def expr(self, n):
        sq = self.square_exact(n)
        if sq is not None:
            return Pow(Const(sq), HALF)
        a, b = self.inner.expr(n), self.inner.expr(n + 1)
        return Pow((Pow(a, Fraction(2)) + Pow(b, Fraction(2))) / 2, HALF)

    def sup_bound(self):
        return self.inner.sup_bound()

    def inf_bound(self):
        return self.inner.inf_bound()


@dataclass(frozen=True)
class Cesaro(Transformed):
    """c_n = (x_0 + ... + x_n)/(n+1)."""
    inner: SequenceDef
    name = 'cesaro'

    @property
    def value_class(self):
        if self.inner.value_class is ValueClass.RATIONAL:
            return ValueClass.RATIONAL
        return ValueClass.TRANSCENDENTAL

    def exact(self, n):
        values = self.inner.exact_values(n + 1)
        if any(q is None for q in values):
            return None
        return sum(values, Fraction(0)) / (n + 1)

    def exact_values(self, count):
        out, total = [], Fraction(0)
        for n, q in enumerate(self.inner.exact_values(count)):
            if q is None or total is None:
                total = None
                out.append(None)
            else:
                total += q
                out.append(total / (n + 1))
        return out

    def expr(self, n):
        q = self.exact(n)
        if q is not None:
            return Const(q)
        total = self.inner.expr(0)
        for i in range(1, n + 1):
            total = total + self.inner.expr(i)
        return total / (n + 1)

    def sup_bound(self):
        return self.inner.sup_bound()

    def inf_bound(self):
        return self.inner.inf_bound()


@dataclass(frozen=True)
class GeometricCesaro(Transformed):
    """g_n = (x_0 x_1 ... x_n)^(1/(n+1))."""
    inner: SequenceDef
    name = 'geometric_cesaro'
    value_class = ValueClass.TRANSCENDENTAL

    def log_form(self, n):
        forms = _forms(self.inner, range(n + 1))
        if forms is None:
            return None
        total = LogCombination()
        for form in forms:
            total = total + form
        return total.scale(Fraction(1, n + 1))

    def expr(self, n):
        form = self.log_form(n)
        if form is not None:
            return form.exp_expr()
        prod = self.inner.expr(0)
        for i in range(1, n + 1):
            prod = prod * self.inner.expr(i)
        return Pow(prod, Fraction(1, n + 1))

    def sup_bound(self):
        return self.inner.sup_bound()

    def inf_bound(self):
        return self.inner.inf_bound()


def _window(k):
    if isinstance(k, bool) or not isinstance(k, int) or k < 1:
        raise DomainError(f'window k must be an integer >= 1, got {k!r}')
    return k


@dataclass(frozen=True)
class CesaroWindow(Transformed):
    """c_n^k = (x_n + ... + x_{n+k})/(k+1)."""
    inner: SequenceDef
    k: int
    name = 'cesaro_window'

    def __post_init__(self):
        _window(self.k)

    def params(self):
        return {'k': self.k}

    @property
    def value_class(self):
        if self.inner.value_class is ValueClass.RATIONAL:
            return ValueClass.RATIONAL
        return ValueClass.TRANSCENDENTAL

    def exact(self, n):
        values = [self.inner.exact(n + i) for i in range(self.k + 1)]
        if any(q is None for q in values):
            return None
        return sum(values, Fraction(0)) / (self.k + 1)

    def expr(self, n):
        q = self.exact(n)
        if q is not None:
            return Const(q)
        total = self.inner.expr(n)
        for i in range(1, self.k + 1):
            total = total + self.inner.expr(n + i)
        return total / (self.k + 1)

    def sup_bound(self):
        return self.inner.sup_bound()

    def inf_bound(self):
        return self.inner.inf_bound()


@dataclass(frozen=True)
class GeometricCesaroWindow(Transformed):
    """g_n^k = (x_n ... x_{n+k})^(1/(k+1))."""
    inner: SequenceDef
    k: int
    name = 'geometric_cesaro_window'
    value_class = ValueClass.TRANSCENDENTAL

    def __post_init__(self):
        _window(self.k)

    def params(self):
        return {'k': self.k}

    def log_form(self, n):
        forms = _forms(self.inner, range(n, n + self.k + 1))
        if forms is None:
            return None
        total = LogCombination()
        for form in forms:
            total = total + form
        return total.scale(Fraction(1, self.k + 1))

    def expr(self, n):
        form = self.log_form(n)
        if form is not None:
            return form.exp_expr()
        prod = self.inner.expr(n)
        for i in range(1, self.k + 1):
            prod = prod * self.inner.expr(n + i)
        return Pow(prod, Fraction(1, self.k + 1))

    def sup_bound(self):
        return self.inner.sup_bound()

    def inf_bound(self):
        return self.inner.inf_bound()


@dataclass(frozen=True)
class Reciprocal(Transformed):
    """delta_n = 1/alpha_n."""
    inner: SequenceDef
    name = 'reciprocal'

    @property
    def value_class(self):
        return self.inner.value_class

    def exact(self, n):
        q = self.inner.exact(n)
        return None if q is None else 1 / q

    def square_exact(self, n):
        sq = self.inner.square_exact(n)
        return None if sq is None else 1 / sq

    def log_form(self, n):
        form = self.inner.log_form(n)
        return None if form is None else -form

    def expr(self, n):
        q = self.exact(n)
        if q is not None:
            return Const(q)
        sq = self.square_exact(n)
        if sq is not None:
            return Pow(Const(sq), HALF)
        return 1 / self.inner.expr(n)

    def sup_bound(self):
        bound = self.inner.inf_bound()
        return None if bound is None else 1 / bound

    def inf_bound(self):
        bound = self.inner.sup_bound()
        return None if bound is None else 1 / bound


@dataclass(frozen=True)
class Restriction(Transformed):
    """The subshift s(n + r)."""
    inner: SequenceDef
    r: int
    name = 'restriction'

    def __post_init__(self):
        if isinstance(self.r, bool) or not isinstance(self.r, int) or self.r < 0:
            raise DomainError(f'restriction needs an integer r >= 0, got {self.r!r}')

    def params(self):
        return {'r': self.r}

    @property
    def value_class(self):
        return self.inner.value_class

    def exact(self, n):
        return self.inner.exact(n + self.r)

    def square_exact(self, n):
        return self.inner.square_exact(n + self.r)

    def log_form(self, n):
        return self.inner.log_form(n + self.r)

    def expr(self, n):
        return self.inner.expr(n + self.r)

    def log_expr(self, n):
        return self.inner.log_expr(n + self.r)

    def sup_bound(self):
        return self.inner.sup_bound()

    def inf_bound(self):
        return self.inner.inf_bound()


@dataclass(frozen=True)
class PerturbZeroth(Transformed):
    """Replace alpha_0; decreasing it keeps MID."""
    inner: SequenceDef
    alpha0: Fraction
    squared: bool = False
    allow_increase: bool = False
    name = 'perturb_zeroth'

    def __post_init__(self):
        v = to_rational(self.alpha0)
        if v <= 0:
            raise DomainError(f'perturb_zeroth needs a positive value, got {v}')
        object.__setattr__(self, 'alpha0', v)
        if self.allow_increase:
            return
        new = Pow(Const(v), HALF) if self.squared else Const(v)
        sign = sign_adaptive(new - self.inner.expr(0))
        if sign is Sign.POSITIVE:
            raise DomainError(f'perturb_zeroth would increase alpha_0; pass allow_increase to override')
        if sign is Sign.UNDECIDED:
            raise DomainError('perturb_zeroth could not compare the new alpha_0 with the old one')

    def params(self):
        key = 'alpha0_squared' if self.squared else 'alpha0'
        out = {key: format_rational(self.alpha0)}
        if self.allow_increase:
            out['allow_increase'] = True
        return out

    @property
    def value_class(self):
        head = ValueClass.RATIONAL_SQUARE if self.squared else ValueClass.RATIONAL
        return weakest(head, self.inner.value_class)

    def exact(self, n):
        if n == 0:
            return None if self.squared else self.alpha0
        return self.inner.exact(n)

    def square_exact(self, n):
        if n == 0:
            return self.alpha0 if self.squared else self.alpha0 ** 2
        return self.inner.square_exact(n)

    def log_form(self, n):
        if n == 0:
            return LogCombination.from_terms([(self.alpha0, HALF if self.squared else 1)])
        return self.inner.log_form(n)

    def expr(self, n):
        if n == 0:
            return Pow(Const(self.alpha0), HALF) if self.squared else Const(self.alpha0)
        return self.inner.expr(n)

    def sup_bound(self):
        bound = self.inner.sup_bound()
        if bound is None:
            return None
        head = max(Fraction(1), self.alpha0) if self.squared else self.alpha0
        return max(bound, head)

    def inf_bound(self):
        bound = self.inner.inf_bound()
        if bound is None:
            return None
        head = min(Fraction(1), self.alpha0) if self.squared else self.alpha0
        return min(bound, head)


@dataclass(frozen=True)
class ExpNormalized(Transformed):
    """Weights e^(alpha_n) / e^(sup alpha), so every weight is at most 1."""
    inner: SequenceDef
    M: Fraction = None
    name = 'exp_normalized'
    value_class = ValueClass.TRANSCENDENTAL

    def __post_init__(self):
        if self.M is not None:
            object.__setattr__(self, 'M', to_rational(self.M))
            return
        sup = self.inner.supremum()
        if sup is None:
            raise ContractivityError(f'exp_normalized needs sup alpha for {self.inner.label()}; pass M explicitly')

    def _sup_expr(self):
        return Const(self.M) if self.M is not None else self.inner.supremum()

    def params(self):
        return {} if self.M is None else {'M': format_rational(self.M)}

    def log_form(self, n):
        q = self.inner.exact(n)
        m = self._sup_expr().exact()
        if q is None or m is None:
            return None
        return LogCombination.constant(q - m)

    def log_expr(self, n):
        form = self.log_form(n)
        if form is not None:
            return form.to_expr()
        return self.inner.expr(n) - self._sup_expr()

    def expr(self, n):
        return Exp(self.log_expr(n))

    def _dominates(self):
        """M >= sup alpha, so every weight is at most 1."""
        if self.M is None:
            return True
        bound = self.inner.sup_bound()
        if bound is not None and bound <= self.M:
            return True
        sup = self.inner.supremum()
        return sup is not None and sign_adaptive(Const(self.M) - sup) in (Sign.POSITIVE, Sign.ZERO)

    def sup_bound(self):
        return Fraction(1) if self._dominates() else None

    def supremum(self):
        if self.M is None:
            return Const(Fraction(1))
        sup = self.inner.supremum()
        return None if sup is None else Exp(sup - Const(self.M))


@dataclass(frozen=True)
class ExpMoment(Transformed):
    """Shift with moments e^(gamma_n - 1), gamma the moments of the inner weights."""
    inner: SequenceDef
    name = 'exp_moment'
    value_class = ValueClass.TRANSCENDENTAL

    def __post_init__(self):
        if self.inner.value_class is ValueClass.TRANSCENDENTAL:
            raise DomainError('exp_moment needs weights with exact moments')

    def log_form(self, n):
        moments = self.inner.moments()
        # alpha_n = e^((gamma_{n+1} - gamma_n)/2)
        return LogCombination.constant((moments.exact(n + 1) - moments.exact(n)) / 2)

    def expr(self, n):
        return Exp(Const(self.log_form(n).offset))

    def sup_bound(self):
        bound = self.inner.sup_bound()
        return Fraction(1) if bound is not None and bound <= 1 else None


# ---------------------------------------------------------------------------
# Tags
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class TransformTag:
    name: str
    params: dict = field(default_factory=dict)

    def to_dict(self):
        return {'name': self.name, **self.params}


def _int_param(params, key, default=None):
    value = params.get(key, default)
    if value is None:
        raise DomainError(f'transform parameter {key!r} is required')
    if isinstance(value, str) and value.strip().lstrip('-').isdigit():
        value = int(value)
    if isinstance(value, bool) or not isinstance(value, int):
        raise DomainError(f'transform parameter {key!r} must be an integer, got {value!r}')
    return value


def _rational_param(params, key, default=None):
    value = params.get(key, default)
    if value is None:
        raise DomainError(f'transform parameter {key!r} is required')
    return to_rational(value)


_BUILDERS = {
    'schur_power': (('p',), lambda s, p: SchurPower(s, _rational_param(p, 'p'))),
    'aluthge': ((), lambda s, p: Aluthge(s)),
    'aluthge_iter': (('m',), lambda s, p: aluthge_iter(s, _int_param(p, 'm'))),
    'generalized_mean': (('t',), lambda s, p: GeneralizedMean(s, _rational_param(p, 't', 0))),
    'alpha_prime': ((), lambda s, p: AlphaPrime(s)),
    'cesaro': ((), lambda s, p: Cesaro(s)),
    'geometric_cesaro': ((), lambda s, p: GeometricCesaro(s)),
    'cesaro_window': (('k',), lambda s, p: CesaroWindow(s, _int_param(p, 'k'))),
    'geometric_cesaro_window': (('k',), lambda s, p: GeometricCesaroWindow(s, _int_param(p, 'k'))),
    'reciprocal': ((), lambda s, p: Reciprocal(s)),
    'restriction': (('r',), lambda s, p: _restrict(s, _int_param(p, 'r', 0))),
    'perturb_zeroth': (('alpha0', 'alpha0_squared', 'allow_increase'), lambda s, p: _perturb(s, p)),
    'exp_normalized': (('M',), lambda s, p: ExpNormalized(s, p.get('M'))),
    'exp_moment': ((), lambda s, p: ExpMoment(s)),
}

TRANSFORM_NAMES = tuple(_BUILDERS)


def _restrict(s, r):
    # restriction by 0 is the sequence itself
    return s if r == 0 else Restriction(s, r)


def _perturb(s, params):
    allow = bool(params.get('allow_increase', False))
    if 'alpha0_squared' in params:
        return PerturbZeroth(s, _rational_param(params, 'alpha0_squared'), True, allow)
    return PerturbZeroth(s, _rational_param(params, 'alpha0'), False, allow)


def apply(tag, s):
    """Apply a TransformTag (or a transform name) to s."""
    if isinstance(tag, str):
        tag = TransformTag(tag)
    if tag.name not in _BUILDERS:
        raise DomainError(f'unknown transform {tag.name!r}; expected one of {", ".join(TRANSFORM_NAMES)}')
    allowed, build = _BUILDERS[tag.name]
    unknown = set(tag.params) - set(allowed)
    if unknown:
        raise DomainError(f'transform {tag.name!r} does not take {", ".join(sorted(unknown))}')
    result = build(s, tag.params)
    logger.debug('transform applied name=%s result=%s', tag.name, result.label())
    return result


def apply_chain(tags, s):
    """Apply tags innermost first."""
    for tag in tags:
        s = apply(tag, s)
    return s


# ---------------------------------------------------------------------------
# Identities
# ---------------------------------------------------------------------------

def mean_transform_weights(s, t, n, config=None):
    """Weight n of the generalized mean transform (exact or enclosed)."""
    return GeneralizedMean(s, t).value(n, config)


def cesaro_difference_sides(x, m, j):
    """Both sides of C(m,j) = m! j!/(m+j+1)! * sum_k C(m+k, m) D(m,k)."""
    if isinstance(m, bool) or not isinstance(m, int) or m < 1:
        raise DomainError(f'm must be an integer >= 1, got {m!r}')
    if not x.is_exact():
        raise DomainError(f'{x.label()} is not a rational sequence')
    lhs = difference(Cesaro(x), m, j)
    total = sum((binomial(m + k, m) * difference(x, m, k) for k in range(j + 1)), Fraction(0))
    rhs = Fraction(math.factorial(m) * math.factorial(j), math.factorial(m + j + 1)) * total
    return lhs, rhs


def cesaro_difference_identity_check(x, m, j):
    lhs, rhs = cesaro_difference_sides(x, m, j)
    return lhs == rhs


def gamma_cesaro_weights(n, bits=None, config=None):
    """(exact (n+2-H_{n+2})/(n+1), enclosure of (2 - euler + n - digamma(n+3))/(n+1))."""
    if isinstance(n, bool) or not isinstance(n, int) or n < 0:
        raise DomainError(f'n must be a nonnegative integer, got {n!r}')
    bits = bits or resolve(config).start_bits
    exact = Cesaro(Agler(2).squared()).exact(n)
    closed = (n + 2 - harmonic(n + 2)) / (n + 1)
    if exact != closed:
        raise DomainError(f'Cesaro value {exact} disagrees with harmonic closed form {closed} at n={n}')
    expr = (Const(Fraction(2 + n)) - EulerConst() - Digamma(Const(Fraction(n + 3)))) / (n + 1)
    return exact, expr.interval(bits)


def gamma_cesaro_sequence():
    """Cesaro transform of the Bergman weights squared."""
    return Cesaro(Agler(2).squared())


def sabcd_restriction(s, r):
    """The restriction of S(a,b,c,d) by r as another S(a',b',c',d')."""
    return Sabcd(s.a, s.b + s.a * r, s.c, s.d + s.c * r)


def hypothesis_report(s, K=None, N=None, config=None):
    """Finite-order CA status of the weights and of the weights squared, reported separately."""
    weights = completely_alternating_verdict(s, K, N, config)
    squares = completely_alternating_verdict(s.squared(), K, N, config)
    return {
        'weights_ca': weights.to_json(),
        'weights_squared_ca': squares.to_json(),
        'either_holds': weights.passed or squares.passed,
    }
