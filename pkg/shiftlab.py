#!/usr/bin/env python3
"""
shiftlab command line.

    python shiftlab.py analyze SPEC.json --tests mid,ca --K 16 --N 64
    python shiftlab.py transform SPEC.json aluthge generalized_mean:t=1/4 --tests mid
    python shiftlab.py verify-claims --all
    python shiftlab.py export SPEC.json --what moments --N 3 --format csv

Exit codes: 0 ok, 1 input or evaluation error, 2 claim mismatch,
3 undecided result with --strict.
"""

import argparse
import json
import logging
import re
import sys
import time

from tabulate import tabulate

from config import DOCS_MAP, VERSION, load_config, set_current_config
from errors import ShiftLabError, SpecParseError
from classifiers import (Status, alternating_order, completely_alternating_verdict, completely_monotone_verdict,
                         hyperexpansive_verdict, log_completely_alternating_verdict, mid_verdict,
                         n_contractive_verdict)
from hankel import bram_halmos_verdict, hankel_from_weights
from sequences import difference_table, moments_from_weights
from transforms import apply_chain
import claims
import serializers

logger = logging.getLogger('shiftlab')

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_MISMATCH = 2
EXIT_UNDECIDED = 3

TEST_NAMES = ('cm', 'ca', 'log-ca', 'mid', 'contractive(n)', 'bram-halmos', 'hyperexpansive', 'order')

_CONTRACTIVE = re.compile(r'^contractive(?:\((\d+)\)|:(\d+))?$')

STATUS_ICONS = {
    'pass': '✅ pass',
    'fail': '❌ fail',
    'undecided': '❓ undecided',
    'decided': '✅ decided',
    claims.MATCH: '✅ match',
    claims.MISMATCH: '❌ mismatch',
    claims.EVIDENCE: '📎 evidence',
    claims.ERROR: '❌ error',
}


def parse_tests(text):
    """'mid,contractive(2),order' -> [('mid', None), ('contractive', 2), ('order', None)]."""
    tests = []
    for i, raw in enumerate(filter(None, (t.strip() for t in text.split(',')))):
        m = _CONTRACTIVE.match(raw)
        if m:
            tests.append(('contractive', int(m.group(1) or m.group(2) or 1)))
        elif raw in TEST_NAMES:
            tests.append((raw, None))
        else:
            raise SpecParseError(f'unknown test {raw!r}; expected one of {", ".join(TEST_NAMES)}', f'--tests[{i}]')
    if not tests:
        raise SpecParseError('no tests requested', '--tests')
    return tests


def run_test(name, arg, s, config):
    K, N = config.default_K, config.default_N
    if name == 'cm':
        return completely_monotone_verdict(s, K, N, config)
    if name == 'ca':
        return completely_alternating_verdict(s, K, N, config)
    if name == 'log-ca':
        return log_completely_alternating_verdict(s, K, N, config)
    if name == 'mid':
        return mid_verdict(s, K, N, config)
    if name == 'contractive':
        return n_contractive_verdict(s, arg, N, config)
    if name == 'bram-halmos':
        k = min(K, config.hankel_cap)
        if k < K:
            logger.info('bram-halmos order capped K=%d hankel_cap=%d', K, config.hankel_cap)
        return bram_halmos_verdict(s, N, k, config=config)
    if name == 'hyperexpansive':
        return hyperexpansive_verdict(s, K, N, config)
    if name == 'order':
        return alternating_order(s, K, N, config)
    raise SpecParseError(f'unknown test {name!r}', '--tests')


def _is_undecided(result):
    status = result.status
    return (status.value if isinstance(status, Status) else status) == 'undecided'


def _status_text(result):
    status = result.status
    return status.value if isinstance(status, Status) else status


def _witness_text(result):
    w = getattr(result, 'witness', None) or getattr(result, 'failure_witness', None)
    if w is None:
        return ''
    value = w.to_json()['value']
    if isinstance(value, dict):
        value = f"[{value['lo']}, {value['hi']}]"
    return f'k={w.k} n={w.n} value={value}'


def print_results(label, results):
    print(f'📊 Results for {label}:')
    rows = []
    for result in results:
        test = getattr(result, 'test', 'order')
        scope = f'K={result.K} N={result.N}' if hasattr(result, 'K') else f'K_max={result.K_max} N={result.window_used}'
        extra = f' order={result.max_alternating_order}' if hasattr(result, 'max_alternating_order') else ''
        rows.append([test, STATUS_ICONS.get(_status_text(result), _status_text(result)), scope + extra,
                     _witness_text(result)])
    print(tabulate(rows, headers=['Test', 'Status', 'Scope', 'Witness'], tablefmt='grid'))


# ---------------------------------------------------------------------------
# Commands
# ---------------------------------------------------------------------------

def analyze_sequence(s, args, config):
    tests = parse_tests(args.tests)
    started = time.perf_counter()
    results, per_test = [], {}
    for name, arg in tests:
        t0 = time.perf_counter()
        results.append(run_test(name, arg, s, config))
        per_test[name if arg is None else f'{name}({arg})'] = round(time.perf_counter() - t0, 6)
    timing = {'total_seconds': round(time.perf_counter() - started, 6), 'tests': per_test}

    print_results(s.label(), results)
    report = serializers.build_report('analyze', s.to_dict(), results, timing=timing, config=config)
    if args.json_out:
        serializers.write_json(report, args.json_out)
        print(f'✅ Report written to {args.json_out}')

    if args.strict and any(_is_undecided(r) for r in results):
        print('❌ Undecided cells remain at the precision cap (--strict)')
        return EXIT_UNDECIDED
    return EXIT_OK


def cmd_analyze(args, config):
    _, s = serializers.load_sequence(args.spec)
    return analyze_sequence(s, args, config)


def cmd_transform(args, config):
    _, s = serializers.load_sequence(args.spec)
    tags = serializers.parse_chain(args.chain)
    transformed = apply_chain(tags, s)
    print(f"🔄 {s.label()} -> {transformed.label()}")
    return analyze_sequence(transformed, args, config)


def cmd_verify_claims(args, config):
    if args.list:
        rows = [[r.id, r.citation, 'yes' if r.evidence_only else '', r.description] for r in claims.REGISTRY]
        print('📋 Claims registry:')
        print(tabulate(rows, headers=['Claim', 'Citation', 'Evidence only', 'Description'], tablefmt='grid'))
        print('\n📚 Command map:')
        print(tabulate(sorted(DOCS_MAP.items()), headers=['Command', 'Checks'], tablefmt='grid'))
        return EXIT_OK
    if not args.all and not args.ids:
        raise SpecParseError('give claim ids or --all', 'verify-claims')

    started = time.perf_counter()
    results = claims.run_claims(None if args.all else args.ids, config, args.workers)
    rows = [[r.id, _compact(r.expected), _compact(r.observed), STATUS_ICONS.get(r.status, r.status)]
            for r in results]
    print('🔍 Claim verification:')
    print(tabulate(rows, headers=['Claim', 'Expected', 'Observed', 'Status'], tablefmt='grid'))
    for r in results:
        for note in r.notes:
            logger.info('claim note id=%s note=%s', r.id, note)

    if args.json_out:
        report = {
            'tool': 'shiftlab',
            'version': VERSION,
            'command': 'verify-claims',
            'config': config.to_dict(),
            'claims': [r.to_json() for r in results],
            'timing': {'total_seconds': round(time.perf_counter() - started, 6),
                       'claims': {r.id: round(r.seconds, 6) for r in results}},
        }
        serializers.write_json(report, args.json_out)
        print(f'✅ Report written to {args.json_out}')

    failed = [r.id for r in results if not r.ok]
    if failed:
        print(f"❌ {len(failed)} claim(s) did not match: {', '.join(failed)}")
        return EXIT_MISMATCH
    print(f'✅ All {len(results)} claim(s) verified')
    return EXIT_OK


def _compact(value, width=60):
    text = json.dumps(value, sort_keys=True, separators=(',', ':'))
    return text if len(text) <= width else text[:width - 3] + '...'


def cmd_export(args, config):
    _, s = serializers.load_sequence(args.spec)
    if args.what == 'diff-table':
        table = difference_table(s, config.default_K, config.default_N, config=config)
        body = serializers.difference_table_csv(table) if args.format == 'csv' \
            else serializers.difference_table_json(table)
    elif args.what == 'moments':
        values = moments_from_weights(s, config.default_N, config)
        body = serializers.moments_csv(values) if args.format == 'csv' else serializers.moments_json(values)
    else:
        H = hankel_from_weights(s, args.n, args.k, config)
        body = serializers.hankel_csv(H) if args.format == 'csv' else serializers.hankel_json(H)

    if not isinstance(body, str):
        body = serializers.dumps({'tool': 'shiftlab', 'version': VERSION, 'input': s.to_dict(), 'export': body})
    if args.out:
        with open(args.out, 'w') as f:
            f.write(body)
        print(f'✅ Exported {args.what} to {args.out}')
    else:
        sys.stdout.write(body)
    return EXIT_OK


# ---------------------------------------------------------------------------
# Argument parsing
# ---------------------------------------------------------------------------

def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument('--config', help='JSON configuration file')
    common.add_argument('--max-bits', type=int, help='precision cap for interval escalation')
    common.add_argument('--workers', type=int, help='worker threads for the claims pool')
    common.add_argument('-v', '--verbose', action='count', default=0, help='-v for INFO, -vv for DEBUG')

    scope = argparse.ArgumentParser(add_help=False)
    scope.add_argument('--K', type=int, help='largest difference order (default from config)')
    scope.add_argument('--N', type=int, help='largest start index (default from config)')

    analyze_flags = argparse.ArgumentParser(add_help=False)
    analyze_flags.add_argument('--tests', default='mid', help=f'comma separated subset of {", ".join(TEST_NAMES)}')
    analyze_flags.add_argument('--json-out', help='write the JSON report to this path')
    analyze_flags.add_argument('--strict', action='store_true', help='exit 3 when any result is undecided')

    parser = argparse.ArgumentParser(prog='shiftlab', description='Exact classification of weighted shifts')
    parser.add_argument('--version', action='version', version=f'shiftlab {VERSION}')
    sub = parser.add_subparsers(dest='command', required=True)

    p = sub.add_parser('analyze', parents=[common, scope, analyze_flags], help='classify a sequence')
    p.add_argument('spec', help='sequence spec JSON file')
    p.set_defaults(handler=cmd_analyze)

    p = sub.add_parser('transform', parents=[common, scope, analyze_flags], help='transform, then classify')
    p.add_argument('spec', help='sequence spec JSON file')
    p.add_argument('chain', nargs='+', help='transforms innermost first, e.g. aluthge generalized_mean:t=1/4')
    p.set_defaults(handler=cmd_transform)

    p = sub.add_parser('verify-claims', parents=[common], help='run the claims registry')
    p.add_argument('ids', nargs='*', help='claim ids')
    p.add_argument('--all', action='store_true', help='run every claim')
    p.add_argument('--list', action='store_true', help='list the registry')
    p.add_argument('--json-out', help='write the JSON report to this path')
    p.set_defaults(handler=cmd_verify_claims)

    p = sub.add_parser('export', parents=[common, scope], help='export tables')
    p.add_argument('spec', help='sequence spec JSON file')
    p.add_argument('--what', choices=['diff-table', 'hankel', 'moments'], required=True)
    p.add_argument('--format', choices=['csv', 'json'], default='csv')
    p.add_argument('--n', type=int, default=0, help='Hankel start index')
    p.add_argument('--k', type=int, default=2, help='Hankel order')
    p.add_argument('--out', help='output path (stdout when omitted)')
    p.set_defaults(handler=cmd_export)
    return parser


def configure_logging(verbosity):
    level = logging.WARNING if verbosity <= 0 else logging.INFO if verbosity == 1 else logging.DEBUG
    logging.basicConfig(level=level, format='%(levelname)s %(name)s %(message)s', stream=sys.stderr)


def main(argv=None):
    args = build_parser().parse_args(argv)
    configure_logging(args.verbose)
    try:
        overrides = {
            'default_K': getattr(args, 'K', None),
            'default_N': getattr(args, 'N', None),
            'max_bits': args.max_bits,
            'workers': args.workers,
        }
        config = load_config(args.config, overrides)
        set_current_config(config)
        return args.handler(args, config)
    except ShiftLabError as e:
        print(f'❌ {type(e).__name__}: {e}')
        return EXIT_ERROR


if __name__ == '__main__':
    sys.exit(main())
