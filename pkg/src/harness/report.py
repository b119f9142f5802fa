import logging
import time
from collections import Counter
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Mapping, Optional, Sequence

import numpy as np

from src.agent.backend import ChatBackend
from src.enum import RelatedMode, RelationType
from src.harness.judge import judge_descriptions
from src.harness.metrics import JudgeScores, MetricReport, MetricRow, aggregate, alignment_r, novelty_r
from src.harness.testset import TestCase
from src.kb.knowledge_base import KnowledgeBase
from src.kb.models import Article, Triplet

logger = logging.getLogger('debug')

TABLE_COLUMNS = ('Setting', 'ET', 'novelty_r', 'alignment_r', 'novelty_d', 'novelty_d (σ)',
                 'alignment_d', 'alignment_d (σ)')


def _mean(values) -> float:
    values = list(values)
    return round(float(np.mean(values)), 2) if values else 0.0


def usage_summary(results: Sequence[dict]) -> dict:
    """Iteration and API usage over serialized episode results."""
    ok = [r for r in results if not r.get('failed')]
    calls = Counter(c['function_name'] for r in ok for c in r.get('api_call_log', []))
    total_calls = sum(calls.values())

    inner = {}
    for module in ('generation', 'evaluation'):
        per_outer = [n for r in ok for n in (r.get('inner_iterations') or {}).get(module, [])]
        inner[module] = _mean(per_outer)

    return {
        'cases': len(ok),
        'mean_outer_iterations': _mean(r.get('outer_iterations_used', 0) for r in ok),
        'mean_inner_iterations': inner,
        'mean_api_calls': _mean(len(r.get('api_call_log', [])) for r in ok),
        'api_call_distribution': {name: round(100 * n / total_calls, 2) for name, n in sorted(calls.items())},
        'terminated_by': dict(sorted(Counter(r.get('terminated_by') for r in ok if r.get('terminated_by')).items())),
    }


def relation_distribution(rows: Sequence[MetricRow], tests: Sequence[TestCase]) -> dict:
    proposed = Counter(r.relation.value for r in rows)
    truth = Counter(rel.value for case in tests for rel in case.truth_relations)
    return {'proposed': dict(sorted(proposed.items())), 'ground_truth': dict(sorted(truth.items()))}


def _cell(value: Optional[float]) -> str:
    return '-' if value is None else f'{value:.2f}'


def render_table(report: MetricReport, setting: str, et: Optional[int]) -> str:
    values = [
        setting,
        '-' if et is None else str(et),
        _cell(report.novelty_r),
        _cell(report.alignment_r),
        _cell(report.novelty_d.mean if report.novelty_d else None),
        _cell(report.novelty_d.std if report.novelty_d else None),
        _cell(report.alignment_d.mean if report.alignment_d else None),
        _cell(report.alignment_d.std if report.alignment_d else None),
    ]
    widths = [max(len(h), len(v)) for h, v in zip(TABLE_COLUMNS, values)]
    header = ' | '.join(h.ljust(w) for h, w in zip(TABLE_COLUMNS, widths))
    line = '-+-'.join('-' * w for w in widths)
    row = ' | '.join(v.ljust(w) for v, w in zip(values, widths))
    return f'{header}\n{line}\n{row}\n'


def evaluate(results: Sequence[dict], tests: Sequence[TestCase], kb: KnowledgeBase,
             test_articles: Mapping[int, Article], judge: Optional[ChatBackend] = None,
             temperature: float = 0.2, related_mode: RelatedMode = RelatedMode.either,
             undirected: bool = False, parallelism: int = 1,
             sleep: Callable[[float], None] = time.sleep) -> MetricReport:
    """
    Metric rows for serialized episode results. Failed episodes and results
    without a matching test case are left out of the rows and listed as failed.
    """
    cases = {c.id: c for c in tests}
    failed = []
    pending: list[tuple[TestCase, RelationType, str]] = []
    for result in results:
        case_id = result['case']['case_id']
        case = cases.get(case_id)
        if case is None:
            logger.warning(f'Result for {case_id} has no test case')
            failed.append(case_id)
            continue
        if result.get('failed') or not result.get('proposal'):
            failed.append(case_id)
            continue

        proposal = result['proposal']
        pending.append((case, RelationType(proposal['Relation']), proposal['Hypothesis Description']))

    def score(item: tuple[TestCase, RelationType, str]) -> MetricRow:
        case, relation, description = item
        triplet = Triplet(case.subject, relation, case.object)
        scores = JudgeScores()
        if judge is not None:
            scores = judge_descriptions(judge, case, description, kb, test_articles, temperature,
                                        related_mode, sleep=sleep)
        return MetricRow(case.id, relation, novelty_r(kb, triplet, undirected), alignment_r(case, triplet), scores)

    with ThreadPoolExecutor(max_workers=parallelism) as executor:
        rows = list(executor.map(score, pending))

    if failed:
        logger.warning(f'{len(failed)} cases excluded from metrics: {", ".join(sorted(failed))}')

    report = aggregate(rows, failed)
    report.extras = {
        'usage': usage_summary(results),
        'relation_distribution': relation_distribution(rows, [cases[r.case_id] for r in rows]),
    }
    return report
