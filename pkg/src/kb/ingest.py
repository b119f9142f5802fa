import json
import logging
from collections import defaultdict
from dataclasses import dataclass, field, asdict
from datetime import date
from typing import Iterable, List, Optional, Union

from pydantic import BaseModel, ValidationError, validator

from src.enum import EntityType, RelationType
from src.graph.mesh import MeshTree
from src.kb.knowledge_base import KnowledgeBase
from src.kb.models import Article, Entity, HypothesisRecord, IdentityKey, Triplet
from src.kb.validity import validate_pair
from src.utils import parse_date, read_lines

logger = logging.getLogger('debug')

RawLine = Union[str, dict]


def _blank_to_empty(v):
    if v is None:
        return ''
    return str(v).strip()


class TripletLine(BaseModel):
    subject_id: str
    subject_name: Optional[str] = ''
    subject_type: EntityType
    relation: RelationType
    object_id: str
    object_name: Optional[str] = ''
    object_type: EntityType
    pmids: List[int] = []

    _names = validator('subject_name', 'object_name', pre=True, allow_reuse=True)(_blank_to_empty)

    @validator('subject_id', 'object_id')
    def validate_id(cls, v):
        v = v.strip()
        if not v:
            raise ValueError('entity id must not be empty')
        return v

    @validator('pmids', each_item=True)
    def validate_pmid(cls, v):
        if v <= 0:
            raise ValueError('pmid must be positive')
        return v

    @property
    def subject(self) -> Entity:
        return Entity(self.subject_id, self.subject_name, self.subject_type)

    @property
    def object(self) -> Entity:
        return Entity(self.object_id, self.object_name, self.object_type)

    @property
    def triplet(self) -> Triplet:
        return Triplet(self.subject, self.relation, self.object)


class ArticleLine(BaseModel):
    pmid: int
    title: Optional[str] = ''
    abstract: Optional[str] = ''
    pub_date: Optional[str] = None
    journal: Optional[str] = ''

    _text = validator('title', 'abstract', 'journal', pre=True, allow_reuse=True)(_blank_to_empty)

    @validator('pmid')
    def validate_pmid(cls, v):
        if v <= 0:
            raise ValueError('pmid must be positive')
        return v


class MeshLine(BaseModel):
    entity_id: str
    tree_numbers: List[str] = []


@dataclass
class Rejection:
    source: str
    line: int
    reason: str
    detail: str = ''


@dataclass
class IngestReport:
    invalid_pair: int = 0
    missing_name: int = 0
    no_articles: int = 0
    missing_date: int = 0
    past_cutoff: int = 0
    records_merged: int = 0
    records_kept: int = 0

    malformed: int = 0
    missing_text: int = 0
    duplicate_pmid: int = 0
    unresolved_pmids: int = 0
    articles_kept: int = 0
    mesh_conflicts: int = 0
    raw_admitted: int = 0
    rejections: list[Rejection] = field(default_factory=list)

    def reject(self, source: str, line: int, reason: str, detail: str = ''):
        self.rejections.append(Rejection(source, line, reason, detail))

    def counters(self) -> dict[str, int]:
        return {k: v for k, v in asdict(self).items() if k != 'rejections'}

    def to_dict(self) -> dict:
        return {**self.counters(), 'rejections': [asdict(r) for r in self.rejections]}

    def summary(self) -> str:
        return ', '.join(f'{k}={v}' for k, v in self.counters().items())


def _iter_objects(lines: Iterable[RawLine], source: str, report: IngestReport, schema):
    for idx, line in enumerate(lines, start=1):
        if isinstance(line, str):
            if not line.strip():
                continue

            try:
                line = json.loads(line)
            except json.JSONDecodeError as e:
                report.malformed += 1
                report.reject(source, idx, 'malformed', f'invalid JSON: {e.msg}')
                logger.warning(f'{source} line {idx} is not valid JSON')
                continue

        if not isinstance(line, dict):
            report.malformed += 1
            report.reject(source, idx, 'malformed', 'line is not a JSON object')
            continue

        try:
            yield idx, schema.parse_obj(line)
        except ValidationError as e:
            report.malformed += 1
            fields = ', '.join('.'.join(str(p) for p in err['loc']) for err in e.errors())
            report.reject(source, idx, 'malformed', f'invalid fields: {fields}')
            logger.warning(f'{source} line {idx} failed validation ({fields})')


def _admit_articles(article_lines: Iterable[RawLine], report: IngestReport) -> dict[int, Article]:
    articles: dict[int, Article] = {}
    for idx, line in _iter_objects(article_lines, 'articles', report, ArticleLine):
        if line.pmid in articles:
            report.duplicate_pmid += 1
            report.reject('articles', idx, 'duplicate_pmid', str(line.pmid))
            continue

        pub_date = parse_date(line.pub_date)
        if pub_date is None:
            report.missing_date += 1
            report.reject('articles', idx, 'missing_date', str(line.pmid))
            continue

        if not (line.title or line.abstract):
            report.missing_text += 1
            report.reject('articles', idx, 'missing_text', str(line.pmid))
            continue

        articles[line.pmid] = Article(line.pmid, line.title, line.abstract, pub_date, line.journal)

    return articles


def _admit_triplets(triplet_lines: Iterable[RawLine], report: IngestReport) -> dict[IdentityKey, list[TripletLine]]:
    groups: dict[IdentityKey, list[TripletLine]] = defaultdict(list)
    for idx, line in _iter_objects(triplet_lines, 'triplets', report, TripletLine):
        if not validate_pair(line.relation, line.subject_type, line.object_type):
            report.invalid_pair += 1
            report.reject('triplets', idx, 'invalid_pair',
                          f'{line.relation.value}({line.subject_type.value}, {line.object_type.value})')
            continue

        if (not line.subject_name and not line.subject_type.is_mutation_class) or \
                (not line.object_name and not line.object_type.is_mutation_class):
            report.missing_name += 1
            report.reject('triplets', idx, 'missing_name')
            continue

        report.raw_admitted += 1
        triplet = line.triplet
        groups[triplet.key].append(line)

    return groups


def merge_records(group: Iterable[TripletLine], articles: dict[int, Article],
                  report: IngestReport = None) -> Optional[HypothesisRecord]:
    """
    Merges raw lines sharing one directed identity. Pmids without an admitted
    article are dropped. Returns None when no supporting article survives.
    """
    group = list(group)
    if not group:
        raise ValueError('Cannot merge an empty group')

    pmids = set()
    for line in group:
        pmids.update(line.pmids)

    resolved = frozenset(p for p in pmids if p in articles)
    if report is not None:
        report.unresolved_pmids += len(pmids) - len(resolved)

    if not resolved:
        return None

    discovery = min(articles[p].pub_date for p in resolved)
    return HypothesisRecord(group[0].triplet, resolved, discovery)


def _entity_catalog(records: Iterable[HypothesisRecord]) -> dict[str, Entity]:
    catalog: dict[str, Entity] = {}
    for record in sorted(records, key=lambda r: r.key):
        for entity in (record.subject, record.object):
            seen = catalog.get(entity.id)
            if seen is None:
                catalog[entity.id] = entity
            elif seen.entity_type is not entity.entity_type:
                logger.warning(f'Entity id {entity.id} appears as {seen.entity_type.value} and '
                               f'{entity.entity_type.value}, keeping {seen.entity_type.value}')

    return catalog


def ingest(triplet_lines: Iterable[RawLine], article_lines: Iterable[RawLine], cutoff: date,
           mesh_lines: Iterable[RawLine] = None) -> tuple[KnowledgeBase, IngestReport]:
    report = IngestReport()

    all_articles = _admit_articles(article_lines, report)
    groups = _admit_triplets(triplet_lines, report)
    report.records_merged = report.raw_admitted - len(groups)

    kept: list[HypothesisRecord] = []
    for key in sorted(groups):
        record = merge_records(groups[key], all_articles, report)
        if record is None:
            report.no_articles += 1
            continue

        if record.discovery_date >= cutoff:
            report.past_cutoff += 1
            continue

        pmids = frozenset(p for p in record.pmids if all_articles[p].pub_date < cutoff)
        if pmids != record.pmids:
            record = HypothesisRecord(record.triplet, pmids, record.discovery_date)

        kept.append(record)

    report.records_kept = len(kept)
    articles = {pmid: a for pmid, a in all_articles.items() if a.pub_date < cutoff}
    report.articles_kept = len(articles)

    mesh = None
    if mesh_lines is not None:
        numbers: dict[str, set[str]] = defaultdict(set)
        for _, line in _iter_objects(mesh_lines, 'mesh', report, MeshLine):
            numbers[line.entity_id.strip()].update(line.tree_numbers)

        mesh = MeshTree(numbers)
        report.mesh_conflicts = mesh.conflicts

    kb = KnowledgeBase(_entity_catalog(kept), kept, articles, cutoff, mesh)
    logger.info(f'Ingested {len(kb)} records and {len(articles)} articles. {report.summary()}')
    return kb, report


def ingest_paths(triplets_path: str, articles_path: str, cutoff: date,
                 mesh_path: str = None) -> tuple[KnowledgeBase, IngestReport]:
    mesh_lines = read_lines(mesh_path) if mesh_path else None
    return ingest(read_lines(triplets_path), read_lines(articles_path), cutoff, mesh_lines)
