import json
import os

import pytest

from run import main
from src.harness.testset import load_test_set
from src.kb.snapshot import read_manifest
from src.utils import read_jsonl, write_jsonl
from tests.conftest import DIABETES, INSULIN, PPARG, TYPE2, corpus_path
from tests.helpers import assess, call, fenced, propose, rule


@pytest.fixture(autouse=True)
def logs_dir(tmp_path, monkeypatch):
    monkeypatch.setenv('LOGS_DIR', str(tmp_path))


@pytest.fixture
def snapshot(tmp_path) -> str:
    out = str(tmp_path / 'kb')
    assert main(['-q', 'ingest', '--triplets', corpus_path('triplets.jsonl'), '--articles',
                 corpus_path('articles.jsonl'), '--mesh', corpus_path('mesh.jsonl'), '--out', out]) == 0
    return out


@pytest.fixture
def tests_path(tmp_path, snapshot) -> str:
    out = str(tmp_path / 'tests')
    assert main(['-q', 'build-tests', '--kb', snapshot, '--triplets', corpus_path('candidates.jsonl'),
                 '--articles', corpus_path('articles.jsonl'), '--impact', corpus_path('impact.json'),
                 '--target', DIABETES, '--top-journals', '5', '--out', out]) == 0
    return os.path.join(out, 'tests.jsonl')


@pytest.fixture
def replay(tmp_path) -> str:
    path = str(tmp_path / 'replay.jsonl')
    write_jsonl(path, [
        rule(call('get_relations(head_entities=[Entity(id="D003920")])'), module='generation', inner=1),
        rule(propose('inhibit', 'The entity lowers disease progression.'), module='generation'),
        rule(assess(80), module='evaluation'),
        rule(fenced('json', '{"Novelty Score": "70", "Alignment Score": "50"}'), module='judge'),
    ])
    return path


def run_agent(snapshot, tests_path, replay, out, *extra) -> int:
    return main(['-q', 'run', '--kb', snapshot, '--tests', tests_path, '--replay', replay, '--out', out, *extra])


def test_ingest_writes_snapshot(snapshot):
    assert read_manifest(snapshot)['counts'] == {'records': 6, 'articles': 6, 'entities': 7, 'mesh_entities': 6}


def test_missing_input_fails(tmp_path):
    assert main(['-q', 'ingest', '--triplets', str(tmp_path / 'nope.jsonl'), '--articles',
                 corpus_path('articles.jsonl'), '--out', str(tmp_path / 'kb')]) == 1


def test_synth_writes_corpus(tmp_path):
    out = tmp_path / 'synth'
    assert main(['-q', 'synth', '--out', str(out), '--seed', '1', '--triplets', '100', '--articles', '40']) == 0
    assert sorted(p for p in os.listdir(out) if not p.startswith('.')) == [
        'articles.jsonl', 'impact.json', 'mesh.jsonl', 'triplets.jsonl']


def test_build_tests(tests_path):
    cases = load_test_set(tests_path)
    assert [c.id for c in cases] == [f'{PPARG}|{DIABETES}', f'{INSULIN}|{TYPE2}']

    with open(os.path.join(os.path.dirname(tests_path), 'test_set_report.json'), encoding='utf-8') as f:
        assert json.load(f)['candidates'] == 8


def test_run_then_eval(tmp_path, snapshot, tests_path, replay):
    out = str(tmp_path / 'run')
    assert run_agent(snapshot, tests_path, replay, out) == 0

    results = list(read_jsonl(os.path.join(out, 'proposals.jsonl')))
    assert [r['case']['case_id'] for r in results] == [f'{PPARG}|{DIABETES}', f'{INSULIN}|{TYPE2}']
    assert all(r['terminated_by'] == 'threshold' for r in results)
    assert os.path.exists(os.path.join(out, 'traces', f'{PPARG}_{DIABETES}.jsonl'))

    trace = list(read_jsonl(os.path.join(out, 'traces', f'{INSULIN}_{TYPE2}.jsonl')))
    assert trace[-1]['result']['proposal']['Relation'] == 'inhibit'
    assert trace[0]['entry']['step_kind'] == 'thought'

    report_dir = str(tmp_path / 'report')
    assert main(['-q', 'eval', '--proposals', os.path.join(out, 'proposals.jsonl'), '--tests', tests_path,
                 '--kb', snapshot, '--judge-replay', replay, '--setting', 'single', '--et', '50',
                 '--out', report_dir]) == 0

    with open(os.path.join(report_dir, 'report.json'), encoding='utf-8') as f:
        aggregates = json.load(f)['aggregates']
    assert aggregates['novelty_r'] == 100.0
    assert aggregates['alignment_r'] == 50.0
    assert aggregates['novelty_d'] == {'mean': 70.0, 'std': 0.0}

    with open(os.path.join(report_dir, 'report.txt'), encoding='utf-8') as f:
        assert 'single' in f.read()


def test_parallelism_does_not_change_results(tmp_path, snapshot, tests_path, replay):
    serial, parallel = str(tmp_path / 'serial'), str(tmp_path / 'parallel')
    assert run_agent(snapshot, tests_path, replay, serial, '--parallelism', '1') == 0
    assert run_agent(snapshot, tests_path, replay, parallel, '--parallelism', '4') == 0

    with open(os.path.join(serial, 'proposals.jsonl'), 'rb') as a, \
            open(os.path.join(parallel, 'proposals.jsonl'), 'rb') as b:
        assert a.read() == b.read()


def test_baseline_run(tmp_path, snapshot, tests_path):
    path = str(tmp_path / 'baseline.jsonl')
    write_jsonl(path, [rule(propose('treat', 'x'), module='baseline')])
    out = str(tmp_path / 'cot')
    assert run_agent(snapshot, tests_path, path, out, '--baseline', 'cot') == 0
    assert all(r['terminated_by'] == 'baseline' for r in read_jsonl(os.path.join(out, 'proposals.jsonl')))


def test_all_failed_episodes_exit_nonzero(tmp_path, snapshot, tests_path):
    path = str(tmp_path / 'empty.jsonl')
    write_jsonl(path, [rule('no action', module='extractor')])
    assert run_agent(snapshot, tests_path, path, str(tmp_path / 'out')) == 1


def test_run_needs_a_backend(tmp_path, snapshot, tests_path):
    assert main(['-q', 'run', '--kb', snapshot, '--tests', tests_path, '--out', str(tmp_path / 'out')]) == 1


def test_eval_without_proposals(tmp_path, snapshot, tests_path):
    assert main(['-q', 'eval', '--proposals', str(tmp_path / 'none.jsonl'), '--tests', tests_path,
                 '--kb', snapshot, '--out', str(tmp_path / 'report')]) == 1
