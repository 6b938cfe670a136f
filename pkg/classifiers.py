"""
Verdict engines for shiftlab.
Finite-order certificates for k-alternating, completely alternating and
completely monotone sequences, their logarithmic versions, moment infinite
divisibility of contractive shifts, n-contractivity, complete hyperexpansivity,
and witness search for the exact failing order.

Every verdict carries the tested scope (K, N). FAIL witnesses are the
lexicographically smallest decided violation in (k, n); interval cells that
stay undecided at the precision cap never hide a decided violation.
"""

import logging
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction

from config import resolve
from errors import ContractivityError, DomainError, UndecidedError
from numerics import (Const, Interval, LogCombination, Pow, Sign, format_rational,
                      sign_adaptive, sign_of, sign_of_log_combination, to_rational)
from sequences import (ExpOf, MomentSequence, PowerOf, check_index, difference_table,
                       log_difference_table, pascal_rows)

logger = logging.getLogger(__name__)


class Status(Enum):
    PASS = 'pass'
    FAIL = 'fail'
    UNDECIDED = 'undecided'


def json_value(value):
    """Render a cell value for reports."""
    if isinstance(value, Fraction):
        return format_rational(value)
    if isinstance(value, int):
        return str(value)
    if isinstance(value, Interval):
        return value.to_json()
    return str(value)


@dataclass(frozen=True)
class Witness:
    k: int
    n: int
    value: object
    sign: Sign

    def to_json(self):
        return {'k': self.k, 'n': self.n, 'value': json_value(self.value), 'sign': self.sign.value}


@dataclass(frozen=True)
class Verdict:
    status: Status
    K: int
    N: int
    test: str
    sequence: str = ''
    witness: Witness = None
    undecided_cells: tuple = ()
    side_conditions: dict = field(default_factory=dict)

    @property
    def passed(self):
        return self.status is Status.PASS

    def to_json(self):
        return {
            'test': self.test,
            'sequence': self.sequence,
            'status': self.status.value,
            'K': self.K,
            'N': self.N,
            'witness': None if self.witness is None else self.witness.to_json(),
            'undecided_cells': [[k, n] for k, n in self.undecided_cells],
            'side_conditions': self.side_conditions,
        }


# ---------------------------------------------------------------------------
# Grid sweeps
# ---------------------------------------------------------------------------

def cell_sign(value, config=None):
    if isinstance(value, (Fraction, int)):
        return sign_of(value)
    if isinstance(value, LogCombination):
        return sign_of_log_combination(value, config)
    if isinstance(value, Interval):
        return value.sign()
    raise DomainError(f'cannot take the sign of {value!r}')


def value_rows(s, K, N):
    """(build(bits) -> rows, exact) for the differences of s itself."""
    values = s.exact_values(N + K + 1)
    if all(q is not None for q in values):
        rows = difference_table(s, K, N).rows
        return (lambda bits: rows), True
    logger.warning('differences use interval path sequence=%s', s.label())
    return (lambda bits: difference_table(s, K, N, bits=bits).rows), False


def log_rows(s, K, N):
    """(build(bits) -> rows, exact) for the differences of ln s."""
    table = log_difference_table(s, K, N)
    if table is not None:
        return (lambda bits: table.rows), True
    logger.warning('log differences use interval path sequence=%s', s.label())

    def build(bits):
        return pascal_rows([s.log_expr(n).interval(bits) for n in range(N + K + 1)], K)
    return build, False


def _safe_build(build, bits):
    try:
        return build(bits)
    except UndecidedError:
        return None


def sweep(test, s, orders, K, N, bad, rows_source, config=None, side_conditions=None):
    """Scan the cells of `orders` x [0..N] for a sign equal to `bad`."""
    config = resolve(config)
    build, exact = rows_source
    bits = None if exact else config.start_bits
    rows = _safe_build(build, bits)
    while rows is None and bits < config.max_bits:
        bits *= 2
        rows = _safe_build(build, bits)

    witness = None
    undecided = []
    if rows is None:
        undecided = [(k, n) for k in orders for n in range(N + 1)]
    else:
        for k in orders:
            for n in range(N + 1):
                sign = cell_sign(rows[k][n], config)
                if sign is bad:
                    witness = Witness(k, n, rows[k][n], sign)
                    break
                if sign is Sign.UNDECIDED:
                    undecided.append((k, n))
            if witness is not None:
                break

    while undecided and bits is not None and bits < config.max_bits:
        bits *= 2
        logger.debug('sweep escalating test=%s bits=%d undecided=%d', test, bits, len(undecided))
        rows = _safe_build(build, bits)
        if rows is None:
            continue
        still = []
        for k, n in undecided:
            sign = cell_sign(rows[k][n], config)
            if sign is bad:
                witness = Witness(k, n, rows[k][n], sign)
                break
            if sign is Sign.UNDECIDED:
                still.append((k, n))
        undecided = [c for c in still if witness is None or c < (witness.k, witness.n)]

    if witness is not None:
        status = Status.FAIL
    elif undecided:
        status = Status.UNDECIDED
    else:
        status = Status.PASS
    verdict = Verdict(status, K, N, test, s.label(), witness, tuple(undecided), dict(side_conditions or {}))
    logger.info('verdict test=%s sequence=%s status=%s K=%d N=%d', test, s.label(), status.value, K, N)
    return verdict


def _scope(K, N, config):
    config = resolve(config)
    K = config.default_K if K is None else K
    N = config.default_N if N is None else N
    check_index(K, 'K')
    check_index(N, 'N')
    return K, N, config


# ---------------------------------------------------------------------------
# Sequence classes
# ---------------------------------------------------------------------------

def k_alternating_verdict(s, k, N=None, config=None):
    """PASS iff nabla^k s(n) <= 0 for 0 <= n <= N."""
    k, N, config = _scope(k, N, config)
    if k < 1:
        raise DomainError(f'k must be >= 1, got {k}')
    return sweep(f'{k}-alternating', s, [k], k, N, Sign.POSITIVE, value_rows(s, k, N), config)


def completely_alternating_verdict(s, K=None, N=None, config=None):
    K, N, config = _scope(K, N, config)
    if K < 1:
        raise DomainError(f'K must be >= 1, got {K}')
    return sweep('ca', s, range(1, K + 1), K, N, Sign.POSITIVE, value_rows(s, K, N), config)


def completely_monotone_verdict(s, K=None, N=None, config=None):
    K, N, config = _scope(K, N, config)
    return sweep('cm', s, range(0, K + 1), K, N, Sign.NEGATIVE, value_rows(s, K, N), config)


def log_completely_alternating_verdict(s, K=None, N=None, config=None, test='log-ca', side_conditions=None):
    K, N, config = _scope(K, N, config)
    if K < 1:
        raise DomainError(f'K must be >= 1, got {K}')
    return sweep(test, s, range(1, K + 1), K, N, Sign.POSITIVE, log_rows(s, K, N), config, side_conditions)


def log_completely_monotone_verdict(s, K=None, N=None, config=None):
    """nabla^k ln s(n) >= 0 for 1 <= k <= K (weights of hyperexpansive shifts)."""
    K, N, config = _scope(K, N, config)
    if K < 1:
        raise DomainError(f'K must be >= 1, got {K}')
    return sweep('log-cm', s, range(1, K + 1), K, N, Sign.NEGATIVE, log_rows(s, K, N), config)


# ---------------------------------------------------------------------------
# Shifts
# ---------------------------------------------------------------------------

def contractivity_certificate(s, window, config=None):
    """Evidence that sup alpha <= 1, or ContractivityError."""
    config = resolve(config)
    bound = s.sup_bound()
    if bound is not None and bound <= 1:
        return {'method': 'sup_bound', 'bound': format_rational(bound)}

    squares = s.square_values(window + 1)
    if all(q is not None for q in squares):
        ok = all(a <= b for a, b in zip(squares, squares[1:])) and squares[-1] <= 1
    else:
        ivs = [iv ** 2 for iv in s.intervals(window + 1, config.start_bits)]
        ok = all(a.hi <= b.lo for a, b in zip(ivs, ivs[1:])) and ivs[-1].hi <= 1
    if ok:
        logger.warning('contractivity accepted from window check sequence=%s window=%d', s.label(), window)
        return {'method': 'window', 'window': window}
    raise ContractivityError(
        f'{s.label()} has no certificate that sup alpha <= 1; '
        f'normalize the weights (for example with exp_normalized) before testing MID')


def mid_verdict(s, K=None, N=None, config=None):
    """Moment infinite divisibility of a contractive shift: log-CA of the weights squared."""
    K, N, config = _scope(K, N, config)
    certificate = contractivity_certificate(s, N + K, config)
    return log_completely_alternating_verdict(PowerOf(s, 2), K, N, config, test='mid',
                                              side_conditions={'contractive': certificate})


def n_contractive_verdict(s, n, M=None, config=None):
    """PASS iff sum_j (-1)^j C(n,j) gamma_{m+j} >= 0 for 0 <= m <= M."""
    n, M, config = _scope(n, M, config)
    if n < 1:
        raise DomainError(f'n must be >= 1, got {n}')
    moments = MomentSequence(s)
    verdict = sweep(f'{n}-contractive', moments, [n], n, M, Sign.NEGATIVE, value_rows(moments, n, M), config)
    return verdict


def hyperexpansive_verdict(s, K=None, N=None, config=None):
    """Complete hyperexpansivity: the moments are completely alternating."""
    K, N, config = _scope(K, N, config)
    moments = MomentSequence(s)
    verdict = sweep('hyperexpansive', moments, range(1, K + 1), K, N, Sign.POSITIVE,
                    value_rows(moments, K, N), config)
    if verdict.status is not Status.PASS:
        return verdict
    squares = s.square_values(N + K + 1)
    if all(q is not None for q in squares):
        at_least_one = all(q >= 1 for q in squares)
    else:
        at_least_one = all(iv.lo >= 1 for iv in s.intervals(N + K + 1, config.start_bits))
    verdict.side_conditions['weights_at_least_one'] = at_least_one
    return verdict


def exp_family_cm_verdict(s, t, K=None, N=None, config=None):
    """CM verdict of exp(-t * s(n))."""
    t = to_rational(t)
    if t <= 0:
        raise DomainError(f't must be positive, got {t}')
    K, N, config = _scope(K, N, config)
    lifted = ExpOf(s, -t)
    return sweep('exp-cm', lifted, range(0, K + 1), K, N, Sign.NEGATIVE, value_rows(lifted, K, N), config,
                 {'t': format_rational(t)})


# ---------------------------------------------------------------------------
# Failure orders
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class OrderReport:
    sequence: str
    K_max: int
    max_alternating_order: int
    failure_witness: Witness
    window_used: int
    status: str

    def to_json(self):
        return {
            'sequence': self.sequence,
            'K_max': self.K_max,
            'max_alternating_order': self.max_alternating_order,
            'failure_witness': None if self.failure_witness is None else self.failure_witness.to_json(),
            'window_used': self.window_used,
            'status': self.status,
        }


def alternating_order(s, K_max, N_start=None, config=None):
    """Largest k such that s is k-hyperalternating, with a witness at order k+1.

    The window doubles from N_start until a violation shows up or the
    configured witness_window_cap is exceeded.
    """
    config = resolve(config)
    N = config.default_N if N_start is None else N_start
    check_index(K_max, 'K_max')
    check_index(N, 'N_start')
    if K_max < 1:
        raise DomainError(f'K_max must be >= 1, got {K_max}')

    while True:
        top = K_max + 1
        verdict = sweep('order', s, range(1, top + 1), top, N, Sign.POSITIVE, value_rows(s, top, N), config)
        if verdict.status is Status.FAIL:
            w = verdict.witness
            status = 'decided' if not verdict.undecided_cells else 'undecided'
            return OrderReport(s.label(), K_max, w.k - 1, w, N, status)
        if N >= config.witness_window_cap:
            logger.warning('no alternating witness sequence=%s K_max=%d window=%d', s.label(), K_max, N)
            return OrderReport(s.label(), K_max, K_max, None, N, 'undecided')
        N = min(max(1, 2 * N), config.witness_window_cap)


# ---------------------------------------------------------------------------
# 2-expansivity under powers
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ExpansivityPoint:
    p: Fraction
    value: object
    satisfied: bool

    def to_json(self):
        return {'p': format_rational(self.p), 'value': json_value(self.value), 'satisfied': self.satisfied}


def expansivity_power_profile(a0_sq, a1_sq, p_values, config=None):
    """f(p) = 1 - 2 a0^p + (a0 a1)^p and whether f(p) <= 0."""
    config = resolve(config)
    a0, a1 = to_rational(a0_sq), to_rational(a1_sq)
    if a0 <= 0 or a1 <= 0:
        raise DomainError(f'squared weights must be positive, got {a0}, {a1}')
    points = []
    for p in p_values:
        p = to_rational(p)
        if p.denominator == 1:
            value = 1 - 2 * a0 ** int(p) + (a0 * a1) ** int(p)
            points.append(ExpansivityPoint(p, value, value <= 0))
            continue
        expr = Const(Fraction(1)) - 2 * Pow(Const(a0), p) + Pow(Const(a0 * a1), p)
        sign = sign_adaptive(expr, config=config)
        exact = expr.exact()
        value = exact if exact is not None else expr.interval(config.start_bits)
        satisfied = None if sign is Sign.UNDECIDED else sign in (Sign.NEGATIVE, Sign.ZERO)
        points.append(ExpansivityPoint(p, value, satisfied))
    return points


def expansivity_exponent_set(a0_sq, a1_sq, p_grid, config=None):
    """Grid points p where the p-power 2-expansivity inequality holds."""
    return [pt.p for pt in expansivity_power_profile(a0_sq, a1_sq, p_grid, config) if pt.satisfied]
