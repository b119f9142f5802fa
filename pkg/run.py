import argparse
import logging
import os
import sys
from contextlib import contextmanager
from datetime import date

import filelock
from dotenv import load_dotenv
from filelock import Timeout

load_dotenv()

from src.agent.backend import make_backend
from src.app import HypothesisRunner, succeeded, write_results
from src.config import BackendConfig, RunConfig
from src.enum import Architecture, BaselineKind, Preset, RelatedMode
from src.errors import HypogenError
from src.harness.report import evaluate, render_table
from src.harness.testset import (ImpactTable, TestSetReport, build_test_set, default_articles_path,
                                 load_test_articles, load_test_set, write_test_set)
from src.kb.ingest import ingest_paths
from src.kb.snapshot import load_snapshot, write_snapshot
from src.kb.synthetic import TARGET_DISEASE, generate_corpus, write_corpus
from src.query.service import KBService
from src.server import serve
from src.utils import read_jsonl, read_lines, write_json

dir_path = os.path.dirname(os.path.realpath(__file__))
logger = logging.getLogger('debug')
FORMAT = '%(asctime)s:%(levelname)s:[%(module)s] %(message)s'


def setup_logging(quiet: bool = False):
    if logger.handlers:
        return

    logs_dir = os.getenv('LOGS_DIR', dir_path)
    logger.setLevel(logging.DEBUG)
    handler = logging.FileHandler(filename=os.path.join(logs_dir, 'debug.log'), encoding='utf-8', mode='a')
    handler.setFormatter(logging.Formatter(FORMAT))
    logger.addHandler(handler)

    handler = logging.StreamHandler(sys.stdout)
    handler.setFormatter(logging.Formatter(FORMAT))
    handler.setLevel(logging.WARNING if quiet else logging.INFO)
    logger.addHandler(handler)


@contextmanager
def output_lock(out_dir: str):
    """Holds <out>/.lock so two commands never write the same directory."""
    os.makedirs(out_dir, exist_ok=True)
    lockfile = filelock.FileLock(os.path.join(out_dir, '.lock'))
    try:
        lockfile.acquire(timeout=1)
    except Timeout:
        logger.info(f'Could not acquire lock file in {out_dir}. Aborting')
        yield False
        return

    try:
        yield True
    finally:
        lockfile.release()


def cmd_ingest(args) -> int:
    with output_lock(args.out) as locked:
        if not locked:
            return 1

        kb, report = ingest_paths(args.triplets, args.articles, args.cutoff, args.mesh)
        write_snapshot(kb, args.out, report)
        print(report.summary())
        return 0


def cmd_synth(args) -> int:
    with output_lock(args.out) as locked:
        if not locked:
            return 1

        corpus = generate_corpus(seed=args.seed, n_triplets=args.triplets, n_articles=args.articles)
        paths = write_corpus(corpus, args.out)
        print('\n'.join(f'{k}: {v}' for k, v in sorted(paths.items())))
        return 0


def cmd_build_tests(args) -> int:
    with output_lock(args.out) as locked:
        if not locked:
            return 1

        kb = load_snapshot(args.kb)
        report = TestSetReport()
        cases, articles = build_test_set(read_lines(args.triplets), read_lines(args.articles), kb, args.target,
                                         ImpactTable.load(args.impact), args.top_journals, args.start, args.end,
                                         args.related_mode, report)
        path = write_test_set(cases, articles, args.out)
        write_json(os.path.join(args.out, 'test_set_report.json'), report.to_dict())
        print(f'{len(cases)} test cases written to {path}')
        return 0


def cmd_run(args) -> int:
    config = RunConfig.load(args.config, **{
        'kb': args.kb,
        'tests': args.tests,
        'out': args.out,
        'parallelism': args.parallelism,
        'preset': args.preset,
        'baseline': args.baseline,
        'backend.replay': args.replay,
        'backend.endpoint': args.endpoint,
        'backend.model': args.model,
        'query.service_url': args.service,
        'agent.evaluation_threshold': args.threshold,
        'agent.architecture': args.architecture,
    })
    if config.kb is None or config.tests is None or config.out is None:
        logger.error('run needs --kb, --tests and --out')
        return 1

    with output_lock(str(config.out)) as locked:
        if not locked:
            return 1

        kb = load_snapshot(str(config.kb))
        tests = load_test_set(str(config.tests), kb)
        runner = HypothesisRunner(config, kb)
        results = runner.run_tests(tests)
        path = write_results(results, str(config.out))

        ok = succeeded(results)
        print(f'{ok} of {len(results)} episodes succeeded. Proposals written to {path}')
        return 0 if ok or not results else 1


def cmd_eval(args) -> int:
    config = RunConfig.load(args.config, **{
        'backend.replay': args.judge_replay,
        'backend.endpoint': args.endpoint,
        'backend.model': args.model,
        'eval.related_mode': args.related_mode,
    })
    if not os.path.exists(args.proposals):
        logger.error(f'Proposals file {args.proposals} does not exist')
        return 1

    with output_lock(args.out) as locked:
        if not locked:
            return 1

        kb = load_snapshot(args.kb)
        tests = load_test_set(args.tests, kb)
        test_articles = load_test_articles(args.test_articles or default_articles_path(args.tests))
        results = list(read_jsonl(args.proposals))

        judge = None
        backend: BackendConfig = config.backend
        if backend.replay is not None or backend.endpoint is not None:
            judge = make_backend(backend)

        report = evaluate(results, tests, kb, test_articles, judge, config.agent.temperature_extract,
                          config.eval.related_mode, config.agent.undirected_novelty, config.parallelism)
        table = render_table(report, args.setting, args.et)
        write_json(os.path.join(args.out, 'report.json'), report.to_dict())
        with open(os.path.join(args.out, 'report.txt'), 'w', encoding='utf-8') as f:
            f.write(table)

        print(table, end='')
        return 0


def cmd_serve(args) -> int:
    kb = load_snapshot(args.kb)
    try:
        serve(KBService(kb), args.host, args.port)
    except (OSError, SystemExit):
        logger.exception(f'Could not serve on {args.host}:{args.port}')
        return 1
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog='run.py')
    parser.add_argument('-q', '--quiet', action='store_true', default=False)
    sub = parser.add_subparsers(dest='command', required=True)

    p = sub.add_parser('ingest')
    p.add_argument('--triplets', required=True)
    p.add_argument('--articles', required=True)
    p.add_argument('--mesh')
    p.add_argument('--cutoff', type=date.fromisoformat, default=date(2024, 1, 1))
    p.add_argument('--out', required=True)
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser('synth')
    p.add_argument('--out', required=True)
    p.add_argument('--seed', type=int, default=0)
    p.add_argument('--triplets', type=int, default=1000)
    p.add_argument('--articles', type=int, default=400)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser('build-tests')
    p.add_argument('--kb', required=True)
    p.add_argument('--triplets', required=True)
    p.add_argument('--articles', required=True)
    p.add_argument('--impact', required=True)
    p.add_argument('--target', default=TARGET_DISEASE)
    p.add_argument('--top-journals', type=int, default=50)
    p.add_argument('--start', type=date.fromisoformat, default=date(2024, 1, 1))
    p.add_argument('--end', type=date.fromisoformat, default=date(2024, 12, 31))
    p.add_argument('--related-mode', type=RelatedMode, default=RelatedMode.either)
    p.add_argument('--out', required=True)
    p.set_defaults(func=cmd_build_tests)

    p = sub.add_parser('run')
    p.add_argument('--kb')
    p.add_argument('--tests')
    p.add_argument('--config')
    backend = p.add_mutually_exclusive_group()
    backend.add_argument('--replay')
    backend.add_argument('--endpoint')
    p.add_argument('--model')
    p.add_argument('--service', help='URL of a running KB service to use for tool calls')
    p.add_argument('--parallelism', type=int)
    p.add_argument('--threshold', type=int)
    p.add_argument('--architecture', choices=[a.value for a in Architecture])
    p.add_argument('--preset', choices=[x.value for x in Preset])
    p.add_argument('--baseline', choices=[b.value for b in BaselineKind])
    p.add_argument('--out')
    p.set_defaults(func=cmd_run)

    p = sub.add_parser('eval')
    p.add_argument('--proposals', required=True)
    p.add_argument('--tests', required=True)
    p.add_argument('--kb', required=True)
    p.add_argument('--test-articles')
    p.add_argument('--config')
    judge = p.add_mutually_exclusive_group()
    judge.add_argument('--judge-replay')
    judge.add_argument('--endpoint')
    p.add_argument('--model')
    p.add_argument('--related-mode', choices=[m.value for m in RelatedMode])
    p.add_argument('--setting', default='default')
    p.add_argument('--et', type=int)
    p.add_argument('--out', required=True)
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser('serve')
    p.add_argument('--kb', required=True)
    p.add_argument('--host', default='127.0.0.1')
    p.add_argument('--port', type=int, default=8000)
    p.set_defaults(func=cmd_serve)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    setup_logging(args.quiet)

    try:
        return args.func(args)
    except HypogenError:
        logger.exception(f'{args.command} failed')
        return 1


if __name__ == '__main__':
    sys.exit(main())
