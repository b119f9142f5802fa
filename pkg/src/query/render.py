from typing import Mapping, Sequence

from src.graph.knowledge_graph import EntityPath
from src.kb.models import Entity
from src.query.filters import BrowseResult, RankedHit, RelationCount

EMPTY = 'No results.'


def _score(score: float) -> str:
    return f'(score={score:.4f})'


def _label(entity_id: str, name: str) -> str:
    return f'{name} [{entity_id}]' if name else entity_id


def render_entities(hits: Sequence[RankedHit]) -> str:
    if not hits:
        return EMPTY

    return '\n'.join(f'{i}. {h.item.display_name} ({h.item.id}, {h.item.entity_type.value}) {_score(h.score)}'
                     for i, h in enumerate(hits, start=1))


def render_relations(counts: Sequence[RelationCount]) -> str:
    if not counts:
        return EMPTY

    return '\n'.join(f'{i}. {c.relation.value} (count={c.frequency})' for i, c in enumerate(counts, start=1))


def render_triplets(hits: Sequence[RankedHit]) -> str:
    if not hits:
        return EMPTY

    lines = []
    for i, h in enumerate(hits, start=1):
        r = h.item
        lines.append(f'{i}. {r.triplet} pmids={sorted(r.pmids)} discovered={r.discovery_date.isoformat()} '
                     f'{_score(h.score)}')
    return '\n'.join(lines)


def render_articles(hits: Sequence[RankedHit]) -> str:
    if not hits:
        return EMPTY

    return '\n'.join(f'{i}. PMID {h.item} {_score(h.score)}' for i, h in enumerate(hits, start=1))


def render_browse(result: BrowseResult) -> str:
    lines = [f'{i}. PMID {a.pmid} ({a.pub_date.isoformat()}): {a.title}\n{a.abstract}'
             for i, a in enumerate(result.articles, start=1)]
    if result.missing:
        lines.append(f'Unknown PMIDs: {", ".join(str(p) for p in result.missing)}')
    return '\n'.join(lines) or EMPTY


def render_paths(paths: Sequence[EntityPath]) -> str:
    if not paths:
        return EMPTY

    lines = []
    for i, path in enumerate(paths, start=1):
        parts = [_label(path.steps[0].entity_id, path.steps[0].name)]
        for step in path.steps[1:]:
            arrow = f'-[{step.relation.value}]->' if step.forward else f'<-[{step.relation.value}]-'
            parts.append(f'{arrow} {_label(step.entity_id, step.name)}')
        lines.append(f'{i}. {" ".join(parts)} (hops={path.hops})')
    return '\n'.join(lines)


def render_entity_list(entities: Sequence[Entity]) -> str:
    if not entities:
        return EMPTY

    return '\n'.join(f'{i}. {_label(e.id, e.name)}' for i, e in enumerate(entities, start=1))


def render_mapping(d: Mapping) -> str:
    return '\n'.join(f'{k}: {v}' for k, v in d.items()) or EMPTY
