import json
import logging
import os
from collections import defaultdict
from dataclasses import dataclass, field
from datetime import date
from typing import Iterable, Mapping, Optional

from src.agent.models import QueryCase
from src.enum import EntityType, RelatedMode, RelationType
from src.errors import IngestError
from src.graph.mesh import mesh_descendants
from src.kb.ingest import IngestReport, RawLine, _admit_articles, _admit_triplets, merge_records
from src.kb.knowledge_base import KnowledgeBase
from src.kb.models import Article, Entity
from src.utils import read_jsonl, write_jsonl

logger = logging.getLogger('debug')

TESTS_FILE = 'tests.jsonl'
TEST_ARTICLES_FILE = 'test_articles.jsonl'


@dataclass(frozen=True)
class TestCase:
    __test__ = False

    subject: Entity
    object: Entity
    truth_relations: frozenset[RelationType]
    truth_pmids: frozenset[int] = frozenset()
    related_past_pmids: frozenset[int] = frozenset()

    @property
    def id(self) -> str:
        return f'{self.subject.id}|{self.object.id}'

    @property
    def query(self) -> QueryCase:
        return QueryCase(self.subject, self.object, self.id)

    def to_dict(self) -> dict:
        return {
            'subject_id': self.subject.id,
            'subject_name': self.subject.name,
            'subject_type': self.subject.entity_type.value,
            'object_id': self.object.id,
            'object_name': self.object.name,
            'object_type': self.object.entity_type.value,
            'truth_relations': sorted(r.value for r in self.truth_relations),
            'truth_pmids': sorted(self.truth_pmids),
            'related_past_pmids': sorted(self.related_past_pmids),
        }

    @classmethod
    def from_dict(cls, d: dict, kb: KnowledgeBase = None):
        def entity(prefix: str) -> Entity:
            entity_id = d[f'{prefix}_id']
            name = d.get(f'{prefix}_name')
            if name is None and kb is not None and entity_id in kb.entities:
                name = kb.entities[entity_id].name
            return Entity(entity_id, name or '', EntityType(d[f'{prefix}_type']))

        truth = frozenset(RelationType(r) for r in d['truth_relations'])
        if not truth:
            raise ValueError(f'Test case {d["subject_id"]}|{d["object_id"]} has no truth relations')

        return cls(
            subject=entity('subject'),
            object=entity('object'),
            truth_relations=truth,
            truth_pmids=frozenset(int(p) for p in d.get('truth_pmids') or []),
            related_past_pmids=frozenset(int(p) for p in d.get('related_past_pmids') or []),
        )


class ImpactTable:
    """Journal name to impact score."""

    def __init__(self, scores: Mapping[str, float]):
        for journal, score in scores.items():
            if score < 0:
                raise ValueError(f'Impact of {journal} is negative: {score}')
        self.scores = dict(scores)

    @classmethod
    def load(cls, path: str) -> 'ImpactTable':
        try:
            with open(path, 'r', encoding='utf-8') as f:
                return cls({str(k): float(v) for k, v in json.load(f).items()})
        except (OSError, ValueError, AttributeError) as e:
            raise IngestError(f'Could not read impact table {path}: {e}') from e

    def ranking(self) -> list[str]:
        return [j for j, _ in sorted(self.scores.items(), key=lambda kv: (-kv[1], kv[0]))]

    def top(self, n: int) -> frozenset[str]:
        return frozenset(self.ranking()[:n])


def related_past_pmids(kb: KnowledgeBase, subject_id: str, object_id: str,
                       mode: RelatedMode = RelatedMode.either) -> frozenset[int]:
    """KB articles supporting records that share the query entities."""
    if mode is RelatedMode.both:
        records = [r for r in kb.records_touching(subject_id) if object_id in (r.subject.id, r.object.id)]
    else:
        records = kb.records_touching(subject_id) + kb.records_touching(object_id)

    return frozenset(p for r in records for p in r.pmids)


def target_entities(kb: KnowledgeBase, target: str) -> frozenset[str]:
    if target in kb.mesh:
        return frozenset([target, *mesh_descendants(kb.mesh, target)])
    return frozenset([target])


@dataclass
class TestSetReport:
    __test__ = False

    candidates: int = 0
    outside_window: int = 0
    in_kb: int = 0
    off_target: int = 0
    low_impact: int = 0
    unknown_entity: int = 0
    cases: int = 0
    ingest: IngestReport = field(default_factory=IngestReport)

    def to_dict(self) -> dict:
        return {
            'candidates': self.candidates,
            'outside_window': self.outside_window,
            'in_kb': self.in_kb,
            'off_target': self.off_target,
            'low_impact': self.low_impact,
            'unknown_entity': self.unknown_entity,
            'cases': self.cases,
            'ingest': self.ingest.counters(),
        }


def build_test_set(candidate_lines: Iterable[RawLine], article_lines: Iterable[RawLine], kb: KnowledgeBase,
                   target: str, impact: ImpactTable, top_journals: int = 50,
                   start: date = date(2024, 1, 1), end: date = date(2024, 12, 31),
                   related_mode: RelatedMode = RelatedMode.either,
                   report: Optional[TestSetReport] = None) -> tuple[list[TestCase], dict[int, Article]]:
    """
    Builds the ground-truth cases from a stream of post-cutoff triplet lines.

    Candidates are cleaned like KB input, then kept only when new to the KB,
    touching the target or one of its MeSH descendants and backed by an article
    of a top impact journal inside the test window.
    """
    report = report if report is not None else TestSetReport()
    articles = _admit_articles(article_lines, report.ingest)
    groups = _admit_triplets(candidate_lines, report.ingest)
    targets = target_entities(kb, target)
    top = impact.top(top_journals)

    by_pair: dict[tuple[str, str], list] = defaultdict(list)
    for key in sorted(groups):
        report.candidates += 1
        record = merge_records(groups[key], articles, report.ingest)
        window = frozenset(p for p in (record.pmids if record else ())
                           if start <= articles[p].pub_date <= end and p not in kb.articles)
        if not window:
            report.outside_window += 1
            continue

        if kb.contains(record.triplet):
            report.in_kb += 1
            continue

        if record.subject.id not in targets and record.object.id not in targets:
            report.off_target += 1
            continue

        # A candidate qualifies through its highest impact supporting journal
        supporting = frozenset(p for p in window if articles[p].journal in top)
        if not supporting:
            report.low_impact += 1
            continue

        if record.subject.id not in kb.entities or record.object.id not in kb.entities:
            report.unknown_entity += 1
            continue

        by_pair[(record.subject.id, record.object.id)].append((record.relation, supporting))

    cases = []
    for (s, o), found in sorted(by_pair.items()):
        cases.append(TestCase(
            subject=kb.entities[s],
            object=kb.entities[o],
            truth_relations=frozenset(rel for rel, _ in found),
            truth_pmids=frozenset(p for _, pmids in found for p in pmids),
            related_past_pmids=related_past_pmids(kb, s, o, related_mode),
        ))

    report.cases = len(cases)
    if not cases:
        logger.warning(f'Test set for target {target} is empty: {report.to_dict()}')
    elif report.unknown_entity:
        logger.warning(f'Dropped {report.unknown_entity} candidates whose entities are not in the KB catalog')

    used = {p for c in cases for p in c.truth_pmids}
    test_articles = {p: articles[p] for p in sorted(used)}
    logger.info(f'Built {len(cases)} test cases from {report.candidates} candidates')
    return cases, test_articles


def write_test_set(cases: Iterable[TestCase], test_articles: Mapping[int, Article], out_dir: str) -> str:
    path = os.path.join(out_dir, TESTS_FILE)
    write_jsonl(path, (c.to_dict() for c in cases))
    write_jsonl(os.path.join(out_dir, TEST_ARTICLES_FILE), (a.to_dict() for _, a in sorted(test_articles.items())))
    return path


def load_test_set(path: str, kb: KnowledgeBase = None) -> list[TestCase]:
    try:
        return [TestCase.from_dict(d, kb) for d in read_jsonl(path)]
    except (KeyError, ValueError) as e:
        raise IngestError(f'Invalid test set {path}: {e}') from e


def load_test_articles(path: str) -> dict[int, Article]:
    if not os.path.exists(path):
        logger.warning(f'No test articles at {path}, ground-truth literature will be empty')
        return {}

    try:
        return {a.pmid: a for a in (Article.from_dict(d) for d in read_jsonl(path))}
    except (KeyError, ValueError) as e:
        raise IngestError(f'Invalid test articles {path}: {e}') from e


def default_articles_path(tests_path: str) -> str:
    return os.path.join(os.path.dirname(os.path.abspath(tests_path)), TEST_ARTICLES_FILE)
