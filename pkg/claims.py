"""
Registry of reproducible claims about weighted shifts.
Each record pairs an exact check with its expected outcome. Evidence-only
records report what was observed and are never compared.
"""

import logging
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from config import resolve
from errors import ShiftLabError, UnknownClaimError
from numerics import Interval, format_rational
from classifiers import (alternating_order, completely_alternating_verdict, completely_monotone_verdict,
                         expansivity_power_profile, hyperexpansive_verdict,
                         log_completely_alternating_verdict, mid_verdict)
from sequences import (Agler, Dirichlet, Euler, ExpOf, Explicit, GeometricGap, MomentSequence, PowerOf,
                       Sabcd, difference, log_difference_table)
from transforms import (Aluthge, ExpMoment, GeneralizedMean, Reciprocal, cesaro_difference_identity_check,
                        gamma_cesaro_sequence, gamma_cesaro_weights)
from measures import (LOG_POWER_EXPONENT_NOTE, LogPowerDensity, agler_berger_measure, agler_lk_triple,
                      berger_moment, lk_sequence)

logger = logging.getLogger(__name__)

# Scope used by the MID and CA claims; large enough to show every stated failure.
CLAIM_K = 12
CLAIM_N = 40

# Full default scope for the order, link and Euler claims.
FULL_K = 16
FULL_N = 64
LINK_K = 12
LINK_N = 30
LINK_SAMPLES = 100
LINK_SEED = 2129
CESARO_MAX = 8
UNDECIDED_RATIO = Fraction(1, 20)

MATCH = 'match'
MISMATCH = 'mismatch'
EVIDENCE = 'evidence'
ERROR = 'error'


@dataclass(frozen=True)
class ClaimRecord:
    id: str
    description: str
    expected: object
    citation: str
    check: object = field(repr=False)
    evidence_only: bool = False


@dataclass(frozen=True)
class ClaimResult:
    id: str
    description: str
    citation: str
    expected: object
    observed: object
    status: str
    seconds: float = 0.0
    notes: tuple = ()

    @property
    def ok(self):
        return self.status in (MATCH, EVIDENCE)

    def to_json(self):
        return {
            'id': self.id,
            'description': self.description,
            'citation': self.citation,
            'expected': self.expected,
            'observed': self.observed,
            'status': self.status,
            'notes': list(self.notes),
        }


def bergman_squared_power(m):
    """((n+1)/(n+2))^m as an exact sequence."""
    return PowerOf(Agler(2), 2 * m)


# ---------------------------------------------------------------------------
# Checks; each returns (observed, notes)
# ---------------------------------------------------------------------------

def _power_orders(config):
    reports = [alternating_order(bergman_squared_power(m), FULL_K, config=config) for m in (2, 3, 4, 5)]
    notes = tuple(f'm={m} witness={r.failure_witness.to_json() if r.failure_witness else None}'
                  for m, r in zip((2, 3, 4, 5), reports))
    return [r.max_alternating_order for r in reports], notes


def _cube_not_ca(config):
    cube = bergman_squared_power(3)
    log_ca = log_completely_alternating_verdict(cube, 16, 64, config)
    ca = completely_alternating_verdict(cube, 16, 64, config)
    order = ca.witness.k if ca.witness is not None else None
    return {'log_ca': log_ca.status.value, 'ca': ca.status.value, 'ca_witness_order': order}, ()


def _sabcd_closed_form(config):
    pairs = [(Fraction(1), Fraction(2)), (Fraction(1, 2), Fraction(3)), (Fraction(2, 3), Fraction(5, 4)),
             (Fraction(3), Fraction(7))]
    for s, t in pairs:
        squares = PowerOf(Sabcd(1, s, 1, t), 2)
        for m in range(1, 11):
            for n in range(21):
                closed = math.factorial(m) * (s - t) / math.prod(n + t + i for i in range(m + 1))
                if difference(squares, m, n) != closed:
                    return False, (f's={s} t={t} m={m} n={n}',)
    return True, ()


def random_weight_samples(count, length, seed=LINK_SEED):
    """Reproducible positive rational weight prefixes."""
    rng = np.random.default_rng(seed)
    return [Explicit(tuple(Fraction(int(p), int(q)) for p, q in rng.integers(1, 51, size=(length, 2))))
            for _ in range(count)]


def _link_identity(config):
    samples = [Agler(3), Sabcd(1, Fraction(1, 2), 1, 2), GeometricGap((Fraction(1, 3),)), Dirichlet()]
    samples += random_weight_samples(LINK_SAMPLES, LINK_N + LINK_K + 2)
    for s in samples:
        moments = log_difference_table(MomentSequence(s), LINK_K + 1, LINK_N)
        squares = log_difference_table(PowerOf(s, 2), LINK_K, LINK_N)
        for k in range(LINK_K + 1):
            for n in range(LINK_N + 1):
                if not (moments.rows[k + 1][n] + squares.rows[k][n]).is_zero():
                    return False, (f'{s.label()} k={k} n={n}',)
    return True, (f'{len(samples)} sequences, k <= {LINK_K}, n <= {LINK_N}',)


def _cesaro_identity(config):
    for j in (2, 3, 4):
        x = PowerOf(Agler(j), 2)
        for m in range(1, CESARO_MAX + 1):
            for i in range(CESARO_MAX + 1):
                if not cesaro_difference_identity_check(x, m, i):
                    return False, (f'agler({j}) m={m} j={i}',)
    return True, ()


def _lk_agler(config):
    for j in range(2, 7):
        T = agler_lk_triple(j)
        for n in range(51):
            if lk_sequence(T, n) != Fraction(n + 1, n + j):
                return False, (f'j={j} n={n}',)
    return True, ()


def _berger_agler(config):
    for j in range(2, 7):
        mu = agler_berger_measure(j)
        moments = MomentSequence(Agler(j)).exact_values(31)
        for n in range(31):
            if berger_moment(mu, n) != moments[n]:
                return False, (f'j={j} n={n}',)
    return True, ()


def _berger_logpower(config):
    integer_ok = all(berger_moment(LogPowerDensity(q), n) == Fraction(1, (n + 1) ** q)
                     for q in range(1, 6) for n in range(21))
    width = Fraction(1, 1 << 96)
    fractional_ok = True
    for n in range(21):
        iv = berger_moment(LogPowerDensity(Fraction(3, 2)), n, bits=256, config=config)
        if not isinstance(iv, Interval) or iv.width > width:
            fractional_ok = False
            break
    return {'integer_q_exact': integer_ok, 'fractional_q_enclosed': fractional_ok}, (LOG_POWER_EXPONENT_NOTE,)


def _geometric_gap_ca(config):
    single = GeometricGap((Fraction(1, 2),))
    double = GeometricGap((Fraction(1, 2), Fraction(1, 3)))
    observed = {
        'weights_squared_ca': completely_alternating_verdict(PowerOf(single, 2), CLAIM_K, CLAIM_N, config).status.value,
        'mid': mid_verdict(single, CLAIM_K, CLAIM_N, config).status.value,
        'mid_product': mid_verdict(double, CLAIM_K, CLAIM_N, config).status.value,
    }
    return observed, ()


def _undecided_ratio(verdict):
    return Fraction(len(verdict.undecided_cells), verdict.K * (verdict.N + 1))


def _euler_ca(config):
    euler = Euler()
    ca = completely_alternating_verdict(euler, FULL_K, FULL_N, config)
    mid = mid_verdict(euler, FULL_K, FULL_N, config)
    notes = (f'ca undecided cells={len(ca.undecided_cells)}', f'mid undecided cells={len(mid.undecided_cells)}')
    observed = {
        'ca_fail': ca.status.value == 'fail',
        'mid_fail': mid.status.value == 'fail',
        'undecided_within_bound': max(_undecided_ratio(ca), _undecided_ratio(mid)) <= UNDECIDED_RATIO,
    }
    return observed, notes


def _exp_moment_cm(config):
    moments = MomentSequence(ExpMoment(Agler(2)))
    verdict = completely_monotone_verdict(moments, CLAIM_K, CLAIM_N, config)
    return verdict.status.value, ()


def _gamma_cesaro(config):
    # gamma_cesaro_weights raises when the exact value leaves the harmonic closed form
    enclosed_ok = True
    for n in range(31):
        exact, iv = gamma_cesaro_weights(n, bits=256, config=config)
        if n <= 20 and not iv.contains(exact):
            enclosed_ok = False
    ca = completely_alternating_verdict(gamma_cesaro_sequence(), CLAIM_K, CLAIM_N, config)
    return {'closed_form': True, 'digamma_enclosure': enclosed_ok, 'ca': ca.status.value}, ()


def _aluthge_mid(config):
    return mid_verdict(Aluthge(Agler(2)), CLAIM_K, CLAIM_N, config).status.value, ()


def _mean_transform_bergman(config):
    observed = {}
    for t in (Fraction(0), Fraction(1, 4), Fraction(1, 2)):
        verdict = mid_verdict(GeneralizedMean(Agler(2), t), CLAIM_K, CLAIM_N, config)
        observed[format_rational(t)] = verdict.status.value
    return observed, ()


def _hyperexpansive_reciprocal(config):
    hyper = hyperexpansive_verdict(Dirichlet(), 16, 64, config)
    mid = mid_verdict(Reciprocal(Dirichlet()), 16, 64, config)
    observed = {
        'hyperexpansive': hyper.status.value,
        'weights_at_least_one': hyper.side_conditions.get('weights_at_least_one'),
        'reciprocal_mid': mid.status.value,
    }
    return observed, ()


def _expansivity_p(config):
    return [pt.to_json() for pt in expansivity_power_profile(2, Fraction(3, 2), [1, 2], config)], ()


def _remark52_evidence(config):
    lifted = ExpOf(bergman_squared_power(1), 1, -1)
    verdict = completely_alternating_verdict(lifted, CLAIM_K, CLAIM_N, config)
    return verdict.to_json(), ()


# ---------------------------------------------------------------------------
# Registry
# ---------------------------------------------------------------------------

REGISTRY = (
    ClaimRecord('power-orders', 'k-alternating orders of ((n+1)/(n+2))^m for m = 2, 3, 4, 5',
                [8, 3, 2, 1], 'orders of Bergman powers', _power_orders),
    ClaimRecord('cube-not-ca', '((n+1)/(n+2))^3 is log completely alternating but not completely alternating',
                {'log_ca': 'pass', 'ca': 'fail', 'ca_witness_order': 4}, 'log-CA does not imply CA', _cube_not_ca),
    ClaimRecord('sabcd-closed-form', 'nabla^m of S(1,s,1,t) weights squared equals m!(s-t)/prod(n+t+i)',
                True, 'S(a,b,c,d) shifts are MID', _sabcd_closed_form),
    ClaimRecord('link-identity', 'nabla^(k+1) ln gamma = -nabla^k ln alpha^2', True,
                'moments and weights, log differences', _link_identity),
    ClaimRecord('cesaro-identity', 'Cesaro difference identity on Agler weights squared', True,
                'Cesaro transform preserves CA', _cesaro_identity),
    ClaimRecord('lk-agler', 'the Agler triple reproduces the weights squared (n+1)/(n+j), j = 2..6', True,
                'Levy-Khintchin triples of Agler shifts', _lk_agler),
    ClaimRecord('berger-agler', 'density (j-1)(1-t)^(j-2) has the Agler moments, j = 2..6', True,
                'Berger measures of Agler shifts', _berger_agler),
    ClaimRecord('berger-logpower', 'log-power density moments equal (n+1)^(-q)',
                {'integer_q_exact': True, 'fractional_q_enclosed': True}, 'log-power Berger densities',
                _berger_logpower),
    ClaimRecord('geometric-gap-ca', 'geometric-gap weights squared are CA and the shifts are MID',
                {'weights_squared_ca': 'pass', 'mid': 'pass', 'mid_product': 'pass'}, 'geometric-gap shifts are MID',
                _geometric_gap_ca),
    ClaimRecord('euler-ca', 'H_(n+1) - ln(n+2) is completely alternating and MID',
                {'ca_fail': False, 'mid_fail': False, 'undecided_within_bound': True}, 'Euler-constant weights',
                _euler_ca),
    ClaimRecord('exp-moment-cm', 'moments e^(1/(n+1) - 1) are completely monotone', 'pass',
                'exponential moment shifts', _exp_moment_cm),
    ClaimRecord('gamma-cesaro', 'Cesaro transform of Bergman weights squared via digamma',
                {'closed_form': True, 'digamma_enclosure': True, 'ca': 'pass'}, 'Cesaro weights via digamma',
                _gamma_cesaro),
    ClaimRecord('aluthge-mid', 'the Aluthge transform of the Bergman shift is MID', 'pass',
                'Aluthge transform preserves MID', _aluthge_mid),
    ClaimRecord('mean-transform-bergman', 'generalized mean transforms of the Bergman shift are MID',
                {'0': 'pass', '1/4': 'pass', '1/2': 'pass'}, 'mean transforms preserve MID', _mean_transform_bergman),
    ClaimRecord('hyperexpansive-reciprocal', 'the Dirichlet shift is completely hyperexpansive and its reciprocal MID',
                {'hyperexpansive': 'pass', 'weights_at_least_one': True, 'reciprocal_mid': 'pass'},
                'hyperexpansive shifts and reciprocals', _hyperexpansive_reciprocal),
    ClaimRecord('expansivity-p', '2-expansivity of alpha_0^2 = 2, alpha_1^2 = 3/2 under p-th powers',
                [{'p': '1', 'value': '0', 'satisfied': True}, {'p': '2', 'value': '2', 'satisfied': False}],
                'p-powers and 2-expansivity', _expansivity_p),
    ClaimRecord('remark52-evidence', 'is e^((n+1)/(n+2) - 1) completely alternating? (open)', None,
                'open: exponentials of CA sequences', _remark52_evidence, evidence_only=True),
)

CLAIMS = {record.id: record for record in REGISTRY}


def claim_ids():
    return [record.id for record in REGISTRY]


def get_claim(claim_id):
    try:
        return CLAIMS[claim_id]
    except KeyError:
        raise UnknownClaimError(f'unknown claim {claim_id!r}; known: {", ".join(claim_ids())}')


def run_claim(record, config=None):
    config = resolve(config)
    started = time.perf_counter()
    try:
        observed, notes = record.check(config)
    except ShiftLabError as e:
        logger.error('claim failed id=%s error=%s', record.id, e)
        return ClaimResult(record.id, record.description, record.citation, record.expected, None, ERROR,
                           time.perf_counter() - started, (str(e),))
    if record.evidence_only:
        status = EVIDENCE
    else:
        status = MATCH if observed == record.expected else MISMATCH
    seconds = time.perf_counter() - started
    logger.info('claim id=%s status=%s seconds=%.3f', record.id, status, seconds)
    return ClaimResult(record.id, record.description, record.citation, record.expected, observed, status,
                       seconds, tuple(notes))


def run_claims(ids=None, config=None, workers=None):
    """Run claims in a thread pool; results come back in registry order."""
    config = resolve(config)
    records = list(REGISTRY)
    if ids:
        wanted = {get_claim(i).id for i in ids}
        records = [r for r in REGISTRY if r.id in wanted]
    workers = workers or config.workers
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(lambda r: run_claim(r, config), records))
