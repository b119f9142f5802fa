import logging
from collections import Counter, defaultdict
from typing import Iterable, Optional, Union

from src.enum import EntityType, MeshDirection, RelationType
from src.errors import InvalidFilterError, NotFoundError
from src.graph.knowledge_graph import EntityPath, KnowledgeGraph, build_graph, shortest_entity_paths, walk
from src.kb.knowledge_base import KnowledgeBase
from src.kb.models import Article, Entity, HypothesisRecord, Triplet
from src.kb.validity import describe_relation
from src.query.filters import BrowseResult, EntityRef, QueryFilter, RankedHit, RelationCount
from src.query.text_index import TextIndex, build_name_index, build_text_index

logger = logging.getLogger('debug')

EntityLike = Union[EntityRef, Entity, str, dict]


class KBService:
    """
    The retrieval surface agents query. Everything here is a pure read over
    the immutable knowledge base, so one instance serves any number of threads.
    """

    def __init__(self, kb: KnowledgeBase, graph: KnowledgeGraph = None, max_paths: int = 5,
                 max_hops: Optional[int] = 4):
        self.kb = kb
        self.graph = graph or build_graph(kb)
        self.article_index: TextIndex = build_text_index(kb.articles)
        self.name_index: TextIndex = build_name_index(kb.entities)
        self.max_paths = max_paths
        self.max_hops = max_hops

        by_name: dict[str, list[str]] = defaultdict(list)
        for entity in kb.entities.values():
            if entity.name:
                by_name[entity.name.lower()].append(entity.id)
        self._by_name = {k: sorted(v) for k, v in by_name.items()}

    # Entity resolution

    @staticmethod
    def _as_ref(entity: EntityLike) -> EntityRef:
        if isinstance(entity, EntityRef):
            return entity
        if isinstance(entity, Entity):
            return EntityRef.of(entity)
        if isinstance(entity, str):
            return EntityRef(id=entity)
        return EntityRef.parse_obj(entity)

    def resolve(self, ref: EntityLike) -> list[Entity]:
        """Catalog entities a prototype refers to: by id when given, else by exact name."""
        ref = self._as_ref(ref)
        if ref.id:
            entity = self.kb.entities.get(ref.id)
            candidates = [entity] if entity else []
        else:
            ids = self._by_name.get((ref.name or '').strip().lower(), [])
            candidates = [self.kb.entities[i] for i in ids]

        return [e for e in candidates if ref.matches(e)]

    def resolve_one(self, ref: EntityLike) -> Entity:
        found = self.resolve(ref)
        if not found:
            raise NotFoundError(f'Entity {self._as_ref(ref)} not found')
        return found[0]

    def _resolve_ids(self, refs: Optional[list[EntityRef]]) -> Optional[set[str]]:
        if not refs:
            return None
        return {e.id for ref in refs for e in self.resolve(ref)}

    # Record matching

    def _match_records(self, f: QueryFilter) -> list[HypothesisRecord]:
        heads = self._resolve_ids(f.head_entities)
        tails = self._resolve_ids(f.tail_entities)
        relations = set(f.relations) if f.relations else None
        pmids = set(f.pmids) if f.pmids else None

        if heads is not None:
            pool = [r for eid in heads for r in self.kb.records_with_subject(eid)]
        elif tails is not None:
            pool = [r for eid in tails for r in self.kb.records_with_object(eid)]
        elif pmids is not None:
            pool = list({r.key: r for p in pmids for r in self.kb.records_citing(p)}.values())
        else:
            pool = list(self.kb.records.values())

        matched = []
        for r in pool:
            if heads is not None and r.subject.id not in heads:
                continue
            if tails is not None and r.object.id not in tails:
                continue
            if relations is not None and r.relation not in relations:
                continue
            if pmids is not None and not (r.pmids & pmids):
                continue
            matched.append(r)

        return sorted(matched, key=lambda r: r.key)

    # Query operations

    def get_entities(self, f: QueryFilter) -> list[RankedHit]:
        if f.text is None and not f.has_entities:
            raise InvalidFilterError('get_entities needs text_description or entity prototypes')

        refs = (f.head_entities or []) + (f.tail_entities or [])
        if f.text is None:
            found = {e.id: e for ref in refs for e in self.resolve(ref)}
            return [RankedHit(found[k]) for k in sorted(found)][:f.limit]

        types = {ref.entity_type for ref in refs if ref.entity_type is not None}
        candidates = None
        if types:
            candidates = [eid for eid, e in self.kb.entities.items() if e.entity_type in types]

        ranked = self.name_index.rank(f.text, candidates)
        return [RankedHit(self.kb.entities[eid], score) for eid, score in ranked[:f.limit]]

    def get_relations(self, f: QueryFilter) -> list[RelationCount]:
        if not f.has_entities:
            raise InvalidFilterError('get_relations needs head_entities or tail_entities')

        counts = Counter(r.relation for r in self._match_records(f))
        ordered = sorted(counts.items(), key=lambda kv: (-kv[1], kv[0].value))
        return [RelationCount(rel, n) for rel, n in ordered[:f.limit]]

    def get_triplets(self, f: QueryFilter) -> list[RankedHit]:
        if f.is_empty():
            raise InvalidFilterError('get_triplets needs at least one filter field')

        records = self._match_records(f)
        if f.text is None:
            records.sort(key=lambda r: (-len(r.pmids), r.key))
            return [RankedHit(r) for r in records[:f.limit]]

        article_scores = dict(self.article_index.rank(f.text))
        scored = []
        for r in records:
            score = max(article_scores.get(p, 0.0) for p in r.pmids)
            if score > 0 or f.has_structure:
                scored.append((r, score))

        scored.sort(key=lambda rs: (-rs[1], rs[0].key))
        return [RankedHit(r, s) for r, s in scored[:f.limit]]

    def get_articles(self, f: QueryFilter) -> list[RankedHit]:
        if f.is_empty():
            raise InvalidFilterError('get_articles needs at least one filter field')

        if f.has_entities or f.relations:
            pool = {p for r in self._match_records(f) for p in r.pmids}
            if f.pmids:
                pool &= set(f.pmids)
        elif f.pmids:
            pool = {p for p in f.pmids if p in self.kb.articles}
        else:
            pool = None

        if f.text is None:
            return [RankedHit(p) for p in sorted(pool)[:f.limit]]

        ranked = self.article_index.rank(f.text, pool, keep_zero=pool is not None)
        return [RankedHit(p, s) for p, s in ranked[:f.limit]]

    def browse_articles(self, pmids: Iterable[int]) -> BrowseResult:
        pmids = list(pmids or [])
        if not pmids:
            raise InvalidFilterError('browse_articles needs at least one pmid')

        found: list[Article] = []
        missing: list[int] = []
        for p in pmids:
            article = self.kb.articles.get(p)
            if article is None:
                missing.append(p)
            else:
                found.append(article)

        if not found:
            raise NotFoundError(f'None of the pmids {pmids} are in the article catalog')

        return BrowseResult(found, missing)

    def get_shortest_entity_paths(self, src: EntityLike, dst: EntityLike,
                                  max_paths: int = None) -> list[EntityPath]:
        s = self.resolve_one(src)
        d = self.resolve_one(dst)
        return shortest_entity_paths(self.graph, s.id, d.id, max_paths or self.max_paths, self.max_hops)

    def walk(self, entity: EntityLike, depth: int = 2, limit: int = 20) -> list[HypothesisRecord]:
        return walk(self.graph, self.resolve_one(entity).id, depth, limit)

    def _mesh_entity(self, entity_id: str) -> Entity:
        entity = self.kb.entities.get(entity_id)
        if entity is not None:
            return entity

        # MeSH category C holds diseases; chemicals and drugs live under D
        numbers = sorted(self.kb.mesh.numbers.get(entity_id, ()))
        branch = numbers[0][:1] if numbers else ''
        return Entity(entity_id, '', EntityType.disease if branch == 'C' else EntityType.chemical)

    def get_mesh(self, entity: EntityLike, direction: MeshDirection) -> list[Entity]:
        ref = self._as_ref(entity)
        entity_id = ref.id
        if not entity_id:
            entity_id = self.resolve_one(ref).id

        return [self._mesh_entity(e) for e in getattr(self.kb.mesh, direction.value)(entity_id)]

    def get_mesh_parents(self, entity: EntityLike) -> list[Entity]:
        return self.get_mesh(entity, MeshDirection.parents)

    def get_mesh_children(self, entity: EntityLike) -> list[Entity]:
        return self.get_mesh(entity, MeshDirection.children)

    def get_mesh_siblings(self, entity: EntityLike) -> list[Entity]:
        return self.get_mesh(entity, MeshDirection.siblings)

    def get_relation_description(self, relation: Union[RelationType, str]) -> str:
        return describe_relation(RelationType(relation))

    def get_entity_description(self, entity: EntityLike) -> dict:
        e = self.resolve_one(entity)
        as_subject = self.kb.records_with_subject(e.id)
        as_object = self.kb.records_with_object(e.id)
        relations = Counter(r.relation for r in as_subject + as_object)

        return {
            **e.to_dict(),
            'mesh_tree_numbers': sorted(self.kb.mesh.numbers.get(e.id, ())),
            'records_as_subject': len(as_subject),
            'records_as_object': len(as_object),
            'top_relations': [[rel.value, n] for rel, n in sorted(relations.items(),
                                                                  key=lambda kv: (-kv[1], kv[0].value))[:5]],
        }

    def contains(self, t: Triplet, undirected: bool = False) -> bool:
        return self.kb.contains(t, undirected=undirected)
