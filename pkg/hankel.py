"""
Moment Hankel matrices for shiftlab.
H(n,k) = (gamma_{n+i+j}) for 0 <= i, j <= k, exact positive-semidefiniteness by
LDL^T with symmetric pivoting, Bram-Halmos sweeps and Schur-power probes.
"""

import logging
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction

import numpy as np

from config import resolve
from errors import DomainError
from numerics import Const, Pow, Sign, format_rational, to_rational
from classifiers import Status, Verdict, Witness
from sequences import MomentSequence, SequenceDef, check_index

logger = logging.getLogger(__name__)


class PsdStatus(Enum):
    PSD = 'psd'
    NOT_PSD = 'not_psd'
    UNDECIDED = 'undecided'


@dataclass(frozen=True)
class HankelMatrix:
    n: int
    k: int
    entries: tuple

    @property
    def size(self):
        return self.k + 1

    def to_numpy(self):
        return np.array([list(row) for row in self.entries], dtype=object)

    def to_rows(self):
        return [[format_rational(v) for v in row] for row in self.entries]


def _moment_values(gamma, count):
    if isinstance(gamma, SequenceDef):
        values = gamma.exact_values(count)
    else:
        values = [to_rational(g) for g in gamma[:count]]
        if len(values) < count:
            raise DomainError(f'need {count} moments, got {len(values)}')
    if any(v is None for v in values):
        raise DomainError('Hankel matrices need exactly representable moments')
    return values


def hankel_matrix(gamma, n, k, config=None):
    """H(n,k) from a moment sequence (SequenceDef or list of rationals)."""
    config = resolve(config)
    check_index(n)
    check_index(k, 'k')
    if k < 1:
        raise DomainError(f'k must be >= 1, got {k}')
    if k > config.hankel_cap:
        raise DomainError(f'k={k} exceeds hankel_cap={config.hankel_cap}')
    values = _moment_values(gamma, n + 2 * k + 1)
    entries = tuple(tuple(values[n + i + j] for j in range(k + 1)) for i in range(k + 1))
    return HankelMatrix(n, k, entries)


def hankel_from_weights(s, n, k, config=None):
    return hankel_matrix(MomentSequence(s), n, k, config)


# ---------------------------------------------------------------------------
# LDL^T
# ---------------------------------------------------------------------------

def _as_square(M):
    if isinstance(M, HankelMatrix):
        A = M.to_numpy()
    else:
        A = np.array(M, dtype=object)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise DomainError(f'expected a square matrix, got shape {A.shape}')
    return A


@dataclass(frozen=True)
class LdlResult:
    psd: bool
    pivots: tuple
    reason: str = ''
    offending: Fraction = None


def ldl_decompose(M):
    """Exact LDL^T with the largest remaining diagonal entry as pivot."""
    A = _as_square(M)
    A = np.vectorize(to_rational, otypes=[object])(A) if A.size else A
    for i in range(A.shape[0]):
        for j in range(i + 1, A.shape[0]):
            if A[i, j] != A[j, i]:
                raise DomainError(f'matrix is not symmetric at ({i}, {j})')

    pivots = []
    while A.shape[0] > 0:
        diag = [A[i, i] for i in range(A.shape[0])]
        if min(diag) < 0:
            return LdlResult(False, tuple(pivots), 'negative diagonal entry', min(diag))
        i = max(range(len(diag)), key=lambda j: diag[j])
        pivot = diag[i]
        if pivot == 0:
            # every remaining diagonal entry is zero
            if np.any(A != 0):
                off = max(abs(v) for v in A.flat)
                # the 2x2 principal minor through that entry is -off^2
                return LdlResult(False, tuple(pivots), 'zero diagonal with nonzero off-diagonal entry', -off * off)
            pivots.extend([Fraction(0)] * A.shape[0])
            break
        perm = [i] + [j for j in range(A.shape[0]) if j != i]
        A = A[np.ix_(perm, perm)]
        c = A[1:, 0]
        A = A[1:, 1:] - np.outer(c, c) / pivot
        pivots.append(pivot)
    return LdlResult(True, tuple(pivots))


def is_psd_exact(M):
    """True iff the symmetric rational matrix M is positive semidefinite."""
    return ldl_decompose(M).psd


def interval_ldl_status(A):
    """PSD if every pivot interval is positive; NOT_PSD on a negative pivot."""
    A = np.array(A, dtype=object)
    while A.shape[0] > 0:
        diag = [A[i, i] for i in range(A.shape[0])]
        if any(d.hi < 0 for d in diag):
            return PsdStatus.NOT_PSD
        i = max(range(len(diag)), key=lambda j: diag[j].mid)
        pivot = diag[i]
        if pivot.lo <= 0:
            return PsdStatus.UNDECIDED
        perm = [i] + [j for j in range(A.shape[0]) if j != i]
        A = A[np.ix_(perm, perm)]
        c = A[1:, 0]
        inv = pivot.reciprocal()
        rest = A[1:, 1:].copy()
        for r in range(rest.shape[0]):
            for s in range(rest.shape[1]):
                rest[r, s] = rest[r, s] - c[r] * c[s] * inv
        A = rest
    return PsdStatus.PSD


# ---------------------------------------------------------------------------
# Sweeps and probes
# ---------------------------------------------------------------------------

def bram_halmos_verdict(s, N, K, max_total=None, config=None):
    """PASS iff H(n,k) is PSD for 0 <= n <= N, 1 <= k <= K (and n + k <= max_total)."""
    config = resolve(config)
    check_index(N, 'N')
    check_index(K, 'K')
    if K < 1:
        raise DomainError(f'K must be >= 1, got {K}')
    if K > config.hankel_cap:
        raise DomainError(f'K={K} exceeds hankel_cap={config.hankel_cap}')
    moments = MomentSequence(s) if not isinstance(s, MomentSequence) else s

    witness = None
    for n in range(N + 1):
        top = K if max_total is None else min(K, max_total - n)
        if top < 1:
            continue
        # principal submatrices of a PSD matrix are PSD
        if is_psd_exact(hankel_matrix(moments, n, top, config)):
            continue
        for k in range(1, top + 1):
            result = ldl_decompose(hankel_matrix(moments, n, k, config))
            if not result.psd:
                witness = Witness(k, n, result.offending, Sign.NEGATIVE)
                break
        break

    status = Status.PASS if witness is None else Status.FAIL
    side = {} if max_total is None else {'max_total': max_total}
    logger.info('verdict test=bram-halmos sequence=%s status=%s K=%d N=%d', moments.label(), status.value, K, N)
    return Verdict(status, K, N, 'bram-halmos', moments.label(), witness, (), side)


@dataclass(frozen=True)
class ProbeResult:
    p: Fraction
    status: PsdStatus
    bits: int = None

    def to_json(self):
        return {'status': self.status.value, 'bits': self.bits}


def schur_power_psd_probe(gamma, p_list, n, k, max_precision=None, config=None):
    """Is the entrywise p-th power of H(n,k) PSD, for each p?"""
    config = resolve(config)
    max_bits = max_precision or config.max_bits
    H = hankel_matrix(gamma, n, k, config)
    if any(v <= 0 for row in H.entries for v in row):
        raise DomainError('Schur powers need positive moments')

    results = []
    for p in p_list:
        p = to_rational(p)
        if p.denominator == 1:
            powered = [[v ** int(p) for v in row] for row in H.entries]
            status = PsdStatus.PSD if is_psd_exact(powered) else PsdStatus.NOT_PSD
            results.append(ProbeResult(p, status))
            continue
        bits = config.start_bits
        status = PsdStatus.UNDECIDED
        while bits <= max_bits:
            powered = [[Pow(Const(v), p).interval(bits) for v in row] for row in H.entries]
            status = interval_ldl_status(powered)
            if status is not PsdStatus.UNDECIDED:
                break
            logger.debug('schur probe escalating p=%s bits=%d', p, bits * 2)
            bits *= 2
        results.append(ProbeResult(p, status, min(bits, max_bits)))
    return results


def probe_report(results):
    """Probe results keyed by p."""
    return {format_rational(r.p): r.to_json() for r in results}
