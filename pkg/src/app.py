import logging
import os
import re
from concurrent.futures import ThreadPoolExecutor
from typing import Sequence

from src.agent.backend import ChatBackend, make_backend
from src.agent.baselines import run_baseline
from src.agent.models import EpisodeResult, QueryCase
from src.agent.runtime import run_episode
from src.agent.tools import ToolRegistry
from src.api import connect
from src.config import RunConfig
from src.errors import ConfigError
from src.harness.testset import TestCase
from src.kb.knowledge_base import KnowledgeBase
from src.query.service import KBService
from src.utils import write_jsonl

logger = logging.getLogger('debug')

PROPOSALS_FILE = 'proposals.jsonl'
TRACES_DIR = 'traces'

_unsafe = re.compile(r'[^A-Za-z0-9._-]+')


def trace_filename(case_id: str) -> str:
    return f'{_unsafe.sub("_", case_id)}.jsonl'


class HypothesisRunner:
    """Runs one agent setting over a list of query cases with a bounded worker pool."""

    def __init__(self, config: RunConfig, kb: KnowledgeBase, backend: ChatBackend = None, service=None):
        self.config = config
        self.agent = config.effective_agent
        self.kb = kb

        if service is None:
            if config.query.service_url:
                service = connect(config.query.service_url, config.query.timeout)
            else:
                service = KBService(kb, max_paths=config.graph.max_paths, max_hops=config.graph.max_hops)
        self.service = service

        if backend is None:
            config.require_backend()
            backend = make_backend(config.backend)
        self.backend = backend

        try:
            self.registry = ToolRegistry(service, self.agent.tools)
        except ValueError as e:
            raise ConfigError(str(e)) from e

    def run_case(self, case: QueryCase) -> EpisodeResult:
        if self.config.baseline is not None:
            return run_baseline(self.config.baseline, case, self.service, self.backend, self.agent)
        return run_episode(case, self.agent, self.registry, self.kb, self.backend)

    def run(self, cases: Sequence[QueryCase]) -> list[EpisodeResult]:
        logger.info(f'Running {len(cases)} cases with {self.config.parallelism} workers')
        with ThreadPoolExecutor(max_workers=self.config.parallelism) as executor:
            # map keeps input order whatever the completion order is
            results = list(executor.map(self.run_case, cases))

        failed = [r.case.id for r in results if r.failed]
        if failed:
            logger.warning(f'{len(failed)} of {len(results)} episodes failed: {", ".join(failed)}')
        return results

    def run_tests(self, tests: Sequence[TestCase]) -> list[EpisodeResult]:
        return self.run([t.query for t in tests])


def write_results(results: Sequence[EpisodeResult], out_dir: str) -> str:
    """One trace file per case plus the proposals file. Returns the proposals path."""
    for result in results:
        write_jsonl(os.path.join(out_dir, TRACES_DIR, trace_filename(result.case.id)), result.trace_lines())

    path = os.path.join(out_dir, PROPOSALS_FILE)
    write_jsonl(path, (r.to_dict() for r in results))
    return path


def succeeded(results: Sequence[EpisodeResult]) -> int:
    return sum(1 for r in results if not r.failed)
