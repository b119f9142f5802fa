import logging
from dataclasses import dataclass
from typing import Iterator, Optional

import networkx as nx

from src.enum import RelationType
from src.errors import NotFoundError
from src.kb.knowledge_base import KnowledgeBase
from src.kb.models import HypothesisRecord

logger = logging.getLogger('debug')


@dataclass(frozen=True)
class PathStep:
    entity_id: str
    relation: Optional[RelationType] = None
    name: str = ''
    # True when the stored edge points from the previous step to this one
    forward: Optional[bool] = None

    def to_dict(self) -> dict:
        return {
            'entity_id': self.entity_id,
            'name': self.name,
            'relation': self.relation.value if self.relation else None,
            'forward': self.forward,
        }


@dataclass(frozen=True)
class EntityPath:
    steps: tuple[PathStep, ...]

    @property
    def nodes(self) -> tuple[str, ...]:
        return tuple(s.entity_id for s in self.steps)

    @property
    def hops(self) -> int:
        return len(self.steps) - 1

    def to_dict(self) -> dict:
        return {'steps': [s.to_dict() for s in self.steps]}

    @classmethod
    def from_dict(cls, d: dict):
        return cls(tuple(
            PathStep(s['entity_id'], RelationType(s['relation']) if s.get('relation') else None,
                     s.get('name') or '', s.get('forward'))
            for s in d['steps']
        ))


class KnowledgeGraph:
    """
    Directed multigraph with one edge per hypothesis record, keyed by relation.
    Path search runs over an undirected view of the same graph.
    """

    def __init__(self, graph: nx.MultiDiGraph):
        self.graph = graph
        self._undirected = graph.to_undirected(as_view=True)

    @property
    def undirected(self):
        return self._undirected

    @property
    def nodes(self):
        return self.graph.nodes

    def __contains__(self, entity_id: str):
        return entity_id in self.graph

    def name(self, entity_id: str) -> str:
        return self.graph.nodes[entity_id].get('name', '')

    def edge_count(self) -> int:
        return self.graph.number_of_edges()

    def neighbours(self, entity_id: str) -> list[str]:
        return sorted(n for n in self._undirected.neighbors(entity_id) if n != entity_id)

    def edges_from(self, entity_id: str) -> list[HypothesisRecord]:
        return [d['record'] for _, _, d in self.graph.out_edges(entity_id, data=True)]

    def hop(self, u: str, v: str) -> PathStep:
        """Smallest relation over the stored edges between u and v, in either direction."""
        options = []
        for relation in self.graph.get_edge_data(u, v, default={}):
            options.append((relation, False))
        for relation in self.graph.get_edge_data(v, u, default={}):
            options.append((relation, True))

        relation, backward = min(options)
        return PathStep(v, RelationType(relation), self.name(v), not backward)

    def records_between(self, u: str, v: str) -> list[HypothesisRecord]:
        data = self.graph.get_edge_data(u, v, default={})
        return [data[k]['record'] for k in sorted(data)]


def build_graph(kb: KnowledgeBase) -> KnowledgeGraph:
    g = nx.MultiDiGraph()
    g.add_nodes_from((eid, {'name': e.name}) for eid, e in sorted(kb.entities.items()))

    for record in kb.records.values():
        g.add_edge(record.subject.id, record.object.id, key=record.relation.value,
                   relation=record.relation, pmids=record.pmids, record=record)

    logger.debug(f'Built knowledge graph with {g.number_of_nodes()} nodes and {g.number_of_edges()} edges')
    return KnowledgeGraph(g)


def _require(g: KnowledgeGraph, entity_id: str):
    if entity_id not in g:
        raise NotFoundError(f'Entity {entity_id} is not in the knowledge graph')


def shortest_entity_paths(g: KnowledgeGraph, src: str, dst: str, max_paths: int = 5,
                          max_hops: Optional[int] = 4) -> list[EntityPath]:
    _require(g, src)
    _require(g, dst)
    if max_paths < 1:
        raise ValueError('max_paths must be at least 1')

    if src == dst:
        return [EntityPath((PathStep(src, name=g.name(src)),))]

    # Hop distance of every node to dst. Only nodes one layer closer are followed.
    dist = nx.single_source_shortest_path_length(g.undirected, dst, cutoff=max_hops)
    if src not in dist:
        return []

    paths: list[EntityPath] = []

    def descend(node: str, prefix: list[str]) -> Iterator[list[str]]:
        if node == dst:
            yield prefix
            return

        for n in g.neighbours(node):
            if dist.get(n) == dist[node] - 1:
                yield from descend(n, prefix + [n])

    for nodes in descend(src, [src]):
        steps = [PathStep(src, name=g.name(src))]
        steps.extend(g.hop(u, v) for u, v in zip(nodes, nodes[1:]))
        paths.append(EntityPath(tuple(steps)))
        if len(paths) >= max_paths:
            break

    return paths


def walk(g: KnowledgeGraph, entity_id: str, depth: int = 2, limit: int = 20) -> list[HypothesisRecord]:
    """Records touching nodes reachable within `depth` hops, nearest layer first."""
    _require(g, entity_id)

    layers = nx.single_source_shortest_path_length(g.undirected, entity_id, cutoff=max(depth - 1, 0))
    order = sorted(layers, key=lambda n: (layers[n], n))

    seen = set()
    found: list[HypothesisRecord] = []
    for node in order:
        touching = g.edges_from(node) + [d['record'] for _, _, d in g.graph.in_edges(node, data=True)]
        for record in sorted(touching, key=lambda r: r.key):
            if record.key in seen:
                continue
            seen.add(record.key)
            found.append(record)
            if len(found) >= limit:
                return found

    return found
