from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from src.enum import RelationType
from src.errors import ContractError
from src.harness.testset import TestCase
from src.kb.knowledge_base import KnowledgeBase
from src.kb.models import Triplet


def novelty_r(kb: KnowledgeBase, proposal: Triplet, undirected: bool = False) -> int:
    return int(not kb.contains(proposal, undirected=undirected))


def alignment_r(case: TestCase, proposal: Triplet) -> int:
    if proposal.subject.id != case.subject.id or proposal.object.id != case.object.id:
        raise ContractError(f'Proposal {proposal} does not match test case {case.id}')

    return int(proposal.relation in case.truth_relations)


@dataclass(frozen=True)
class JudgeScores:
    novelty_d: Optional[int] = None
    alignment_d: Optional[int] = None

    @property
    def missing(self) -> bool:
        return self.novelty_d is None or self.alignment_d is None

    def to_dict(self) -> dict:
        return {'novelty_d': self.novelty_d, 'alignment_d': self.alignment_d}


@dataclass(frozen=True)
class MetricRow:
    case_id: str
    relation: RelationType
    novelty_r: int
    alignment_r: int
    judge: JudgeScores = JudgeScores()

    def to_dict(self) -> dict:
        return {
            'case_id': self.case_id,
            'relation': self.relation.value,
            'novelty_r': self.novelty_r,
            'alignment_r': self.alignment_r,
            **self.judge.to_dict(),
            'judge_missing': self.judge.missing,
        }


@dataclass(frozen=True)
class Spread:
    mean: float
    std: float

    def to_dict(self) -> dict:
        return {'mean': round(self.mean, 2), 'std': round(self.std, 2)}


@dataclass
class MetricReport:
    rows: list[MetricRow]
    novelty_r: float
    alignment_r: float
    novelty_d: Optional[Spread]
    alignment_d: Optional[Spread]
    relation_histogram: dict[str, int]
    failed_cases: list[str] = field(default_factory=list)
    extras: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            'aggregates': {
                'cases': len(self.rows),
                'novelty_r': round(self.novelty_r, 2),
                'alignment_r': round(self.alignment_r, 2),
                'novelty_d': self.novelty_d.to_dict() if self.novelty_d else None,
                'alignment_d': self.alignment_d.to_dict() if self.alignment_d else None,
                'judge_missing': sum(1 for r in self.rows if r.judge.missing),
            },
            'relation_histogram': dict(sorted(self.relation_histogram.items())),
            'failed_cases': list(self.failed_cases),
            'rows': [r.to_dict() for r in self.rows],
            **self.extras,
        }


def _spread(values: Sequence[Optional[int]]) -> Optional[Spread]:
    present = np.array([v for v in values if v is not None], dtype=float)
    if present.size == 0:
        return None
    # Population standard deviation
    return Spread(float(present.mean()), float(present.std(ddof=0)))


def percentage(values: Sequence[int]) -> float:
    return float(100 * np.mean(np.asarray(values, dtype=float)))


def aggregate(rows: Sequence[MetricRow], failed_cases: Sequence[str] = ()) -> MetricReport:
    if not rows:
        raise ContractError('Cannot aggregate an empty set of rows')

    histogram: dict[str, int] = {}
    for row in rows:
        histogram[row.relation.value] = histogram.get(row.relation.value, 0) + 1

    return MetricReport(
        rows=list(rows),
        novelty_r=percentage([r.novelty_r for r in rows]),
        alignment_r=percentage([r.alignment_r for r in rows]),
        novelty_d=_spread([r.judge.novelty_d for r in rows]),
        alignment_d=_spread([r.judge.alignment_d for r in rows]),
        relation_histogram=histogram,
        failed_cases=sorted(failed_cases),
    )
