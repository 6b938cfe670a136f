#!/usr/bin/env python3
"""
End-to-end tests for the shiftlab command line and its JSON formats.
"""

import json

import pytest

import config as config_module
import shiftlab
from config import MAX_BITS_ENV
from errors import SpecParseError
from serializers import parse_chain, parse_measure, parse_sequence
from sequences import Agler, Explicit, PowerOf


@pytest.fixture(autouse=True)
def isolated_config(monkeypatch):
    monkeypatch.delenv(MAX_BITS_ENV, raising=False)
    monkeypatch.setattr(config_module, '_current', None)


@pytest.fixture
def spec(tmp_path):
    def write(document, name='spec.json'):
        path = tmp_path / name
        path.write_text(json.dumps(document))
        return str(path)
    return write


def read_json(path):
    with open(path) as f:
        return json.load(f)


def test_analyze_bergman_mid(spec, tmp_path, capsys):
    out = tmp_path / 'report.json'
    code = shiftlab.main(['analyze', spec({'family': 'agler', 'j': 2}), '--tests', 'mid', '--K', '8', '--N', '20',
                          '--json-out', str(out)])
    assert code == shiftlab.EXIT_OK
    report = read_json(out)
    assert report['tool'] == 'shiftlab'
    assert report['command'] == 'analyze'
    assert report['input'] == {'family': 'agler', 'j': 2}
    assert report['config']['default_K'] == 8
    assert [v['status'] for v in report['verdicts']] == ['pass']
    assert set(report) >= {'precision', 'timing', 'tables'}
    assert '📊 Results for' in capsys.readouterr().out


def test_analyze_constant_weights_ca(spec, tmp_path):
    out = tmp_path / 'report.json'
    code = shiftlab.main(['analyze', spec({'explicit': {'weights': ['1']}}), '--tests', 'ca', '--K', '6',
                          '--N', '10', '--json-out', str(out)])
    assert code == 0
    assert read_json(out)['verdicts'][0]['status'] == 'pass'


def test_analyze_order_of_the_bergman_cube(spec, tmp_path):
    out = tmp_path / 'report.json'
    document = {'family': 'power_of', 'm': 6, 'base': {'family': 'bergman'}}
    code = shiftlab.main(['analyze', spec(document), '--tests', 'order', '--K', '10', '--json-out', str(out)])
    assert code == 0
    assert read_json(out)['verdicts'][0]['max_alternating_order'] == 3


def test_analyze_several_tests(spec, tmp_path):
    out = tmp_path / 'report.json'
    code = shiftlab.main(['analyze', spec({'family': 'bergman'}), '--tests', 'cm,contractive(2),bram-halmos',
                          '--K', '4', '--N', '6', '--json-out', str(out)])
    assert code == 0
    report = read_json(out)
    assert len(report['verdicts']) == 3
    assert set(report['timing']['tests']) == {'cm', 'contractive(2)', 'bram-halmos'}


def test_analyze_rejects_unknown_tests(spec, capsys):
    assert shiftlab.main(['analyze', spec({'family': 'bergman'}), '--tests', 'mid,normal']) == shiftlab.EXIT_ERROR
    assert '--tests[1]' in capsys.readouterr().out


def test_malformed_spec_exits_with_an_error(spec, capsys):
    path = spec({'explicit': {'weights': ['1/2', 'x']}})
    assert shiftlab.main(['analyze', path]) == shiftlab.EXIT_ERROR
    assert '$.explicit.weights[1]' in capsys.readouterr().out


def test_missing_spec_file(tmp_path):
    assert shiftlab.main(['analyze', str(tmp_path / 'nope.json')]) == shiftlab.EXIT_ERROR


def test_transform_aluthge_of_bergman(spec, tmp_path):
    out = tmp_path / 'report.json'
    code = shiftlab.main(['transform', spec({'family': 'bergman'}), 'aluthge', '--tests', 'mid', '--K', '8',
                          '--N', '20', '--json-out', str(out)])
    assert code == 0
    report = read_json(out)
    assert report['input'] == {'transform': {'name': 'aluthge', 'of': {'family': 'agler', 'j': 2}}}
    assert report['verdicts'][0]['status'] == 'pass'


def test_restriction_by_zero_matches_analyze(spec, tmp_path):
    path = spec({'family': 'sabcd', 'a': 1, 'b': 1, 'c': 1, 'd': 2})
    plain, restricted = tmp_path / 'plain.json', tmp_path / 'restricted.json'
    args = ['--tests', 'mid,ca', '--K', '6', '--N', '12']
    assert shiftlab.main(['analyze', path, *args, '--json-out', str(plain)]) == 0
    assert shiftlab.main(['transform', path, 'restriction:r=0', *args, '--json-out', str(restricted)]) == 0
    a, b = read_json(plain), read_json(restricted)
    for report in (a, b):
        report.pop('timing')
    assert a == b


def test_export_moments_csv(spec, tmp_path):
    out = tmp_path / 'moments.csv'
    code = shiftlab.main(['export', spec({'family': 'bergman'}), '--what', 'moments', '--N', '3', '--format', 'csv',
                          '--out', str(out)])
    assert code == 0
    assert out.read_text().splitlines() == ['0,1', '1,1/2', '2,1/3', '3,1/4']


@pytest.mark.parametrize('document', [
    {'family': 'agler', 'j': 3},
    {'family': 'bergman'},
    {'family': 'sabcd', 'a': 1, 'b': 2, 'c': 1, 'd': 3},
], ids=['agler3', 'bergman', 'sabcd'])
def test_exported_moments_reimport_with_the_same_verdicts(document, spec, tmp_path):
    csv_path = tmp_path / 'moments.csv'
    assert shiftlab.main(['export', spec(document), '--what', 'moments', '--N', '20', '--format', 'csv',
                          '--out', str(csv_path)]) == 0
    moments = [line.split(',')[1] for line in csv_path.read_text().splitlines()]
    assert len(moments) == 21
    reimported = spec({'explicit': {'moments': moments}}, name='reimported.json')

    reports = []
    for path, name in ((spec(document), 'original.json'), (reimported, 'copy.json')):
        out = tmp_path / name
        assert shiftlab.main(['analyze', path, '--tests', 'ca,log-ca,mid,contractive(2)', '--K', '6', '--N', '10',
                              '--json-out', str(out)]) == 0
        reports.append(read_json(out)['verdicts'])
    original, copy = reports
    assert len(original) == len(copy) == 4
    for a, b in zip(original, copy):
        assert (a['test'], a['status'], a['undecided_cells']) == (b['test'], b['status'], b['undecided_cells'])
        assert (a['witness'] or {}).get('k') == (b['witness'] or {}).get('k')
        assert (a['witness'] or {}).get('n') == (b['witness'] or {}).get('n')


def test_export_hankel_json(spec, capsys):
    code = shiftlab.main(['export', spec({'family': 'unilateral'}), '--what', 'hankel', '--k', '1',
                          '--format', 'json'])
    assert code == 0
    document = json.loads(capsys.readouterr().out)
    assert document['export'] == {'n': 0, 'k': 1, 'rows': [['1', '1'], ['1', '1']]}


def test_export_difference_table_csv(spec, capsys):
    code = shiftlab.main(['export', spec({'explicit': {'weights': ['1/2']}}), '--what', 'diff-table', '--K', '1',
                          '--N', '1'])
    assert code == 0
    lines = capsys.readouterr().out.splitlines()
    assert lines[0] == 'k,n,value'
    assert '1,0,0' in lines


def test_verify_claims_unknown_id():
    assert shiftlab.main(['verify-claims', 'no-such-claim']) == shiftlab.EXIT_ERROR


def test_verify_claims_needs_ids():
    assert shiftlab.main(['verify-claims']) == shiftlab.EXIT_ERROR


def test_verify_claims_list(capsys):
    assert shiftlab.main(['verify-claims', '--list']) == 0
    out = capsys.readouterr().out
    assert 'power-orders' in out and 'remark52-evidence' in out


def test_verify_selected_claims(tmp_path):
    out = tmp_path / 'claims.json'
    code = shiftlab.main(['verify-claims', 'sabcd-closed-form', 'expansivity-p', '--json-out', str(out)])
    assert code == 0
    report = read_json(out)
    assert [c['id'] for c in report['claims']] == ['sabcd-closed-form', 'expansivity-p']
    assert all(c['status'] == 'match' for c in report['claims'])


def test_config_file_and_max_bits_flag(spec, tmp_path, monkeypatch):
    monkeypatch.setenv(MAX_BITS_ENV, '2048')
    cfg = tmp_path / 'config.json'
    cfg.write_text(json.dumps({'default_K': 4, 'default_N': 6}))
    out = tmp_path / 'report.json'
    code = shiftlab.main(['analyze', spec({'family': 'bergman'}), '--config', str(cfg), '--max-bits', '1024',
                          '--json-out', str(out)])
    assert code == 0
    config = read_json(out)['config']
    assert (config['default_K'], config['default_N'], config['max_bits']) == (4, 6, 1024)


def test_bad_config_file(spec, tmp_path):
    cfg = tmp_path / 'config.json'
    cfg.write_text(json.dumps({'colour': 'blue'}))
    assert shiftlab.main(['analyze', spec({'family': 'bergman'}), '--config', str(cfg)]) == shiftlab.EXIT_ERROR


def test_parse_sequence_documents():
    assert parse_sequence({'family': 'bergman', 'squared': True}) == PowerOf(Agler(2), 2)
    s = parse_sequence({'explicit': {'weights': ['1/5'], 'tail': {'family': 'bergman'}}})
    assert isinstance(s, Explicit) and s.tail == Agler(2)
    moments = parse_sequence({'explicit': {'moments': [1, '1/2', '1/3']}})
    assert moments.square_exact(1) == parse_sequence({'family': 'bergman'}).square_exact(1)


@pytest.mark.parametrize('document,location', [
    ([], '$'),
    ({}, '$'),
    ({'family': 'agler'}, '$'),
    ({'family': 'agler', 'j': 0}, '$'),
    ({'family': 'hardy'}, '$.family'),
    ({'explicit': {'weights': [1], 'moments': [1]}}, '$.explicit'),
    ({'transform': {'name': 'aluthge', 'of': {'family': 'euler', 'squared': 'yes'}}}, '$.transform.of.squared'),
    ({'transform': {'name': 'fourier', 'of': {'family': 'bergman'}}}, '$.transform'),
])
def test_parse_errors_carry_a_location(document, location):
    with pytest.raises(SpecParseError) as e:
        parse_sequence(document)
    assert e.value.location == location


def test_parse_measures_and_chains():
    assert parse_measure({'log_power': {'q': '3/2'}}).to_dict() == {'log_power': {'q': '3/2'}}
    with pytest.raises(SpecParseError) as e:
        parse_measure({'atomic': [[2, 1]]})
    assert e.value.location == '$.atomic'
    tags = parse_chain(['aluthge', 'perturb_zeroth:alpha0=1/3,allow_increase=true'])
    assert [t.name for t in tags] == ['aluthge', 'perturb_zeroth']
    assert tags[1].params == {'alpha0': '1/3', 'allow_increase': True}
    with pytest.raises(SpecParseError):
        parse_chain(['cesaro_window:k'])
