from collections import defaultdict
from datetime import date
from types import MappingProxyType
from typing import Iterable, Mapping, Optional

from src.graph.mesh import MeshTree
from src.kb.models import Article, Entity, HypothesisRecord, IdentityKey, Triplet


class KnowledgeBase:
    """
    Immutable store of the merged pre-cutoff hypothesis records (the set H),
    their supporting articles and the entity catalog.

    Built once by ingestion and only read afterwards, so instances can be shared
    between threads without locking.
    """

    __slots__ = ('_entities', '_records', '_articles', '_cutoff', '_mesh', '_by_subject', '_by_object',
                 '_by_pmid', '_by_entity')

    def __init__(self, entities: Mapping[str, Entity], records: Iterable[HypothesisRecord],
                 articles: Mapping[int, Article], cutoff: date, mesh: Optional[MeshTree] = None):
        record_map = {r.key: r for r in sorted(records, key=lambda r: r.key)}

        by_subject: dict[str, list[HypothesisRecord]] = defaultdict(list)
        by_object: dict[str, list[HypothesisRecord]] = defaultdict(list)
        by_pmid: dict[int, list[HypothesisRecord]] = defaultdict(list)
        for record in record_map.values():
            by_subject[record.subject.id].append(record)
            by_object[record.object.id].append(record)
            for pmid in record.pmids:
                by_pmid[pmid].append(record)

        by_entity: dict[str, set[IdentityKey]] = defaultdict(set)
        for key in record_map:
            by_entity[key[0]].add(key)
            by_entity[key[2]].add(key)

        self._entities = MappingProxyType(dict(sorted(entities.items())))
        self._records = MappingProxyType(record_map)
        self._articles = MappingProxyType(dict(sorted(articles.items())))
        self._cutoff = cutoff
        self._mesh = mesh if mesh is not None else MeshTree()
        self._by_subject = MappingProxyType({k: tuple(v) for k, v in by_subject.items()})
        self._by_object = MappingProxyType({k: tuple(v) for k, v in by_object.items()})
        self._by_pmid = MappingProxyType({k: tuple(v) for k, v in by_pmid.items()})
        self._by_entity = MappingProxyType({k: frozenset(v) for k, v in by_entity.items()})

    def __setattr__(self, key, value):
        if hasattr(self, key):
            raise AttributeError('KnowledgeBase is immutable')

        object.__setattr__(self, key, value)

    @property
    def entities(self) -> Mapping[str, Entity]:
        return self._entities

    @property
    def records(self) -> Mapping[IdentityKey, HypothesisRecord]:
        return self._records

    @property
    def articles(self) -> Mapping[int, Article]:
        return self._articles

    @property
    def cutoff(self) -> date:
        return self._cutoff

    @property
    def mesh(self) -> MeshTree:
        return self._mesh

    def __len__(self):
        return len(self._records)

    def contains(self, t: Triplet, undirected: bool = False) -> bool:
        if t.key in self._records:
            return True

        return undirected and t.reverse_key in self._records

    def get_record(self, key: IdentityKey) -> Optional[HypothesisRecord]:
        return self._records.get(key)

    def records_with_subject(self, entity_id: str) -> tuple[HypothesisRecord, ...]:
        return self._by_subject.get(entity_id, ())

    def records_with_object(self, entity_id: str) -> tuple[HypothesisRecord, ...]:
        return self._by_object.get(entity_id, ())

    def records_citing(self, pmid: int) -> tuple[HypothesisRecord, ...]:
        return self._by_pmid.get(pmid, ())

    def records_touching(self, entity_id: str) -> list[HypothesisRecord]:
        return [self._records[k] for k in sorted(self._by_entity.get(entity_id, ()))]


def contains(kb: KnowledgeBase, t: Triplet, undirected: bool = False) -> bool:
    return kb.contains(t, undirected=undirected)
