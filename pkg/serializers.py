"""
JSON and CSV formats for shiftlab.
Parsing of sequence, transform and measure documents, report assembly and the
table writers used by the export command. Parse errors carry a location of the
form $.transform.of.explicit.weights[2].
"""

import csv
import io
import json
import logging
from fractions import Fraction

from config import VERSION, resolve
from errors import DomainError, SpecParseError
from numerics import Interval, format_rational, to_rational
from classifiers import json_value
from sequences import (Agler, Constant, Dirichlet, Euler, ExpOf, Explicit, GeometricGap,
                       MomentSequence, PowerOf, Sabcd, Unilateral)
from transforms import TransformTag, apply
from measures import AtomicMeasure, LogPowerDensity, MeasureMoments, PolyDensity

logger = logging.getLogger(__name__)


# ---------------------------------------------------------------------------
# Helpers
# ---------------------------------------------------------------------------

def _rational(value, location):
    try:
        return to_rational(value)
    except DomainError as e:
        raise SpecParseError(str(e), location)


def _integer(value, location):
    if isinstance(value, str) and value.strip().lstrip('-').isdigit():
        value = int(value)
    if isinstance(value, bool) or not isinstance(value, int):
        raise SpecParseError(f'expected an integer, got {value!r}', location)
    return value


def _require(doc, key, location):
    if key not in doc:
        raise SpecParseError(f'missing required member {key!r}', location)
    return doc[key]


def _object(doc, location):
    if not isinstance(doc, dict):
        raise SpecParseError(f'expected a JSON object, got {type(doc).__name__}', location)
    return doc


def _list(doc, location):
    if not isinstance(doc, list):
        raise SpecParseError(f'expected a JSON array, got {type(doc).__name__}', location)
    return doc


def _build(location, factory, *args):
    """Run a constructor, turning domain errors into parse errors at `location`."""
    try:
        return factory(*args)
    except SpecParseError:
        raise
    except DomainError as e:
        raise SpecParseError(str(e), location)


def load_json(path):
    """Read a JSON document from an explicit path."""
    try:
        with open(path) as f:
            return json.load(f)
    except json.JSONDecodeError as e:
        raise SpecParseError(f'invalid JSON in {path}: {e.msg} (line {e.lineno}, column {e.colno})')
    except OSError as e:
        raise SpecParseError(f'cannot read {path}: {e.strerror}')


# ---------------------------------------------------------------------------
# Sequence documents
# ---------------------------------------------------------------------------

def _family(doc, loc):
    name = _require(doc, 'family', loc)
    if name == 'agler':
        return _build(loc, Agler, _integer(_require(doc, 'j', loc), f'{loc}.j'))
    if name == 'bergman':
        return Agler(2)
    if name == 'sabcd':
        args = [_rational(_require(doc, k, loc), f'{loc}.{k}') for k in 'abcd']
        return _build(loc, Sabcd, *args)
    if name == 'geometric_gap':
        raw = _require(doc, 'p', loc)
        if isinstance(raw, list):
            ps = tuple(_rational(p, f'{loc}.p[{i}]') for i, p in enumerate(raw))
        else:
            ps = (_rational(raw, f'{loc}.p'),)
        return _build(f'{loc}.p', GeometricGap, ps)
    if name == 'euler':
        return Euler()
    if name == 'dirichlet':
        return Dirichlet()
    if name == 'unilateral':
        return Unilateral()
    if name == 'constant':
        return _build(f'{loc}.c', Constant, _rational(_require(doc, 'c', loc), f'{loc}.c'))
    if name == 'power_of':
        m = _integer(_require(doc, 'm', loc), f'{loc}.m')
        base = parse_sequence(_require(doc, 'base', loc), f'{loc}.base')
        return _build(loc, PowerOf, base, m)
    raise SpecParseError(f'unknown family {name!r}', f'{loc}.family')


def _explicit(body, loc):
    body = _object(body, loc)
    tail = parse_sequence(body['tail'], f'{loc}.tail') if body.get('tail') is not None else None
    keys = [k for k in ('weights', 'weights_squared', 'moments') if k in body]
    if len(keys) > 1:
        raise SpecParseError(f'give one of weights, weights_squared, moments; got {", ".join(keys)}', loc)
    if not keys:
        if tail is None:
            raise SpecParseError('explicit sequence needs weights, weights_squared or moments', loc)
        return _build(loc, Explicit, (), tail)
    key = keys[0]
    values = [_rational(v, f'{loc}.{key}[{i}]') for i, v in enumerate(_list(body[key], f'{loc}.{key}'))]
    if key == 'moments':
        return _build(f'{loc}.moments', Explicit.from_moments, values, tail)
    return _build(f'{loc}.{key}', Explicit, tuple(values), tail, key == 'weights_squared')


def _transform(body, loc):
    body = _object(body, loc)
    name = _require(body, 'name', loc)
    inner = parse_sequence(_require(body, 'of', loc), f'{loc}.of')
    params = {k: v for k, v in body.items() if k not in ('name', 'of')}
    return _build(loc, apply, TransformTag(name, params), inner)


def parse_sequence(doc, location='$'):
    """Build a SequenceDef from its JSON document."""
    doc = _object(doc, location)
    if 'family' in doc:
        s = _family(doc, location)
    elif 'explicit' in doc:
        s = _explicit(doc['explicit'], f'{location}.explicit')
    elif 'transform' in doc:
        s = _transform(doc['transform'], f'{location}.transform')
    elif 'moments_of' in doc:
        s = MomentSequence(parse_sequence(doc['moments_of'], f'{location}.moments_of'))
    elif 'exp_of' in doc:
        inner = parse_sequence(doc['exp_of'], f'{location}.exp_of')
        scale = _rational(doc.get('scale', 1), f'{location}.scale')
        shift = _rational(doc.get('shift', 0), f'{location}.shift')
        s = ExpOf(inner, scale, shift)
    elif 'measure_moments' in doc:
        s = MeasureMoments(parse_measure(doc['measure_moments'], f'{location}.measure_moments'))
    else:
        raise SpecParseError('expected one of family, explicit, transform, moments_of, exp_of, '
                             'measure_moments', location)
    squared = doc.get('squared', False)
    if not isinstance(squared, bool):
        raise SpecParseError(f'expected true or false, got {squared!r}', f'{location}.squared')
    return s.squared() if squared else s


def load_sequence(path):
    document = load_json(path)
    s = parse_sequence(document)
    logger.info('sequence loaded path=%s label=%s', path, s.label())
    return document, s


# ---------------------------------------------------------------------------
# Measures and chains
# ---------------------------------------------------------------------------

def parse_measure(doc, location='$'):
    doc = _object(doc, location)
    if 'atomic' in doc:
        loc = f'{location}.atomic'
        atoms = []
        for i, atom in enumerate(_list(doc['atomic'], loc)):
            if not isinstance(atom, list) or len(atom) != 2:
                raise SpecParseError('an atom is a [location, mass] pair', f'{loc}[{i}]')
            atoms.append((_rational(atom[0], f'{loc}[{i}][0]'), _rational(atom[1], f'{loc}[{i}][1]')))
        return _build(loc, AtomicMeasure, tuple(atoms))
    if 'poly_density' in doc:
        loc = f'{location}.poly_density'
        coefficients = [_rational(c, f'{loc}[{i}]') for i, c in enumerate(_list(doc['poly_density'], loc))]
        return _build(loc, PolyDensity, tuple(coefficients))
    if 'log_power' in doc:
        loc = f'{location}.log_power'
        body = _object(doc['log_power'], loc)
        return _build(loc, LogPowerDensity, _rational(_require(body, 'q', loc), f'{loc}.q'))
    raise SpecParseError('expected one of atomic, poly_density, log_power', location)


def parse_chain(items):
    """Transform tags from ['aluthge', 'generalized_mean:t=1/4', ...], innermost first."""
    tags = []
    for i, item in enumerate(items):
        loc = f'chain[{i}]'
        name, _, rest = item.strip().partition(':')
        if not name:
            raise SpecParseError('empty transform name', loc)
        params = {}
        for pair in filter(None, (p.strip() for p in rest.split(','))):
            key, eq, value = pair.partition('=')
            if not eq or not key.strip():
                raise SpecParseError(f'expected key=value, got {pair!r}', loc)
            value = value.strip()
            if value in ('true', 'false'):
                params[key.strip()] = value == 'true'
            else:
                params[key.strip()] = value
        tags.append(TransformTag(name, params))
    return tags


# ---------------------------------------------------------------------------
# Reports
# ---------------------------------------------------------------------------

def precision_stats(verdicts, config=None):
    config = resolve(config)
    undecided = sum(len(getattr(v, 'undecided_cells', ())) for v in verdicts)
    return {'start_bits': config.start_bits, 'max_bits': config.max_bits, 'undecided_cells': undecided}


def build_report(command, spec, verdicts, tables=None, timing=None, config=None, extra=None):
    """The report document written by --json-out."""
    config = resolve(config)
    report = {
        'tool': 'shiftlab',
        'version': VERSION,
        'command': command,
        'input': spec,
        'config': config.to_dict(),
        'verdicts': [v.to_json() for v in verdicts],
        'tables': tables or {},
        'precision': precision_stats(verdicts, config),
        'timing': timing or {},
    }
    if extra:
        report.update(extra)
    return report


def dumps(document):
    """Deterministic JSON text."""
    return json.dumps(document, indent=2, sort_keys=True, ensure_ascii=False) + '\n'


def write_json(document, path):
    with open(path, 'w') as f:
        f.write(dumps(document))
    logger.info('json written path=%s', path)


# ---------------------------------------------------------------------------
# Tables
# ---------------------------------------------------------------------------

def cell_text(value):
    """Exact rational string, or the decimal enclosure of an interval."""
    if isinstance(value, (Fraction, int)):
        return format_rational(value)
    if isinstance(value, Interval):
        return str(value)
    return str(value)


def _csv(rows, header=None):
    out = io.StringIO()
    writer = csv.writer(out, lineterminator='\n')
    if header:
        writer.writerow(header)
    writer.writerows(rows)
    return out.getvalue()


def difference_table_csv(table):
    return _csv(([k, n, cell_text(v)] for k, n, v in table.cells()), ['k', 'n', 'value'])


def difference_table_json(table):
    return {
        'sequence': table.source.label(),
        'K': table.K,
        'N': table.N,
        'exact': table.exact,
        'cells': [{'k': k, 'n': n, 'value': json_value(v)} for k, n, v in table.cells()],
    }


def moments_csv(values):
    return _csv([n, cell_text(v)] for n, v in enumerate(values))


def moments_json(values):
    return {'N': len(values) - 1, 'moments': [json_value(v) for v in values]}


def hankel_csv(H):
    return _csv(H.to_rows())


def hankel_json(H):
    return {'n': H.n, 'k': H.k, 'rows': H.to_rows()}
