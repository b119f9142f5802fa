import numpy as np
import pytest

from src.enum import EntityType, MeshDirection, RelationType
from src.errors import InvalidFilterError, NotFoundError
from src.query import render
from src.query.filters import EntityRef, QueryFilter
from src.query.text_index import TextIndex, build_name_index, build_text_index
from src.utils import tokenize
from tests.conftest import DIABETES, INS, INSULIN, METFORMIN, PPARG, RS7903146, TYPE1, TYPE2


def ref(**kw) -> EntityRef:
    return EntityRef(**kw)


def test_tokenize():
    assert tokenize('Type-2 diabetes_mellitus, a (b) C3!') == ['type', 'diabetes', 'mellitus', 'c3']
    assert tokenize('') == []


def test_text_scores_are_tf_idf():
    index = TextIndex({1: 'insulin insulin glucose', 2: 'glucose', 3: 'other words'})
    idf_insulin = np.log(1 + 3 / 1)
    idf_glucose = np.log(1 + 3 / 2)
    assert index.score('Insulin glucose', 1) == pytest.approx(2 * idf_insulin + idf_glucose)
    assert index.rank('glucose insulin') == [(1, index.score('glucose insulin', 1)),
                                             (2, index.score('glucose insulin', 2))]
    assert index.rank('nothing') == []
    assert index.rank('nothing', candidates=[3, 2], keep_zero=True) == [(2, 0.0), (3, 0.0)]
    with pytest.raises(NotFoundError):
        index.score('x', 99)


def test_filter_validation():
    with pytest.raises(InvalidFilterError):
        QueryFilter.build(limit=0)
    with pytest.raises(InvalidFilterError):
        QueryFilter.build(colour='red')
    with pytest.raises(InvalidFilterError):
        QueryFilter.build(head_entities=[{'entity_type': 'gene'}])

    assert QueryFilter(text_description=' ,. ').text is None
    assert QueryFilter(text_description=' ,. ').is_empty()


def test_resolve_by_name_and_type(service):
    assert [e.id for e in service.resolve(ref(name='metformin'))] == [METFORMIN]
    assert service.resolve(ref(name='Metformin', entity_type=EntityType.gene)) == []
    assert [e.id for e in service.resolve(ref(id=PPARG))] == [PPARG]
    with pytest.raises(NotFoundError):
        service.resolve_one(ref(name='Unknown'))


def test_get_entities_by_text(service):
    hits = service.get_entities(QueryFilter(text_description='diabetes'))
    assert [h.item.id for h in hits] == [DIABETES, TYPE2]
    assert hits[0].score == hits[1].score

    hits = service.get_entities(QueryFilter(text_description='type 2 diabetes'))
    assert [h.item.id for h in hits] == [TYPE2, DIABETES]
    assert hits[0].score > hits[1].score

    typed = service.get_entities(QueryFilter(text_description='ins', head_entities=[ref(name='x',
                                                                                      entity_type='gene')]))
    assert [h.item.id for h in typed] == [INS]

    assert [h.item.id for h in service.get_entities(QueryFilter(head_entities=[ref(id=INSULIN)]))] == [INSULIN]
    with pytest.raises(InvalidFilterError):
        service.get_entities(QueryFilter(relations=['treat']))


def test_get_relations_counts(service):
    counts = service.get_relations(QueryFilter(head_entities=[ref(name='Metformin')]))
    assert [(c.relation, c.frequency) for c in counts] == [
        (RelationType.associate, 1), (RelationType.interact, 1), (RelationType.treat, 1)]
    assert render.render_relations(counts) == '1. associate (count=1)\n2. interact (count=1)\n3. treat (count=1)'
    with pytest.raises(InvalidFilterError):
        service.get_relations(QueryFilter(text_description='metformin'))


def test_get_triplets_unranked_and_ranked(service):
    hits = service.get_triplets(QueryFilter(tail_entities=[ref(id=TYPE2)]))
    assert [h.item.key for h in hits] == [(METFORMIN, 'treat', TYPE2), (RS7903146, 'cause', TYPE2)]

    ranked = service.get_triplets(QueryFilter(text_description='variant risk'))
    assert [h.item.key for h in ranked] == [(RS7903146, 'cause', TYPE2)]
    assert ranked[0].score > 0

    with pytest.raises(InvalidFilterError):
        service.get_triplets(QueryFilter())


def test_get_articles(service):
    assert [h.item for h in service.get_articles(QueryFilter(head_entities=[ref(id=METFORMIN)]))] == [101, 104, 105]

    hits = service.get_articles(QueryFilter(text_description='metformin'))
    assert [h.item for h in hits] == [101, 105]

    pooled = service.get_articles(QueryFilter(pmids=[102, 105, 777], text_description='metformin'))
    assert [(h.item, h.score > 0) for h in pooled] == [(105, True), (102, False)]


def test_browse_articles(service):
    result = service.browse_articles([105, 999, 101])
    assert [a.pmid for a in result.articles] == [105, 101]
    assert result.missing == [999]
    assert render.render_browse(result).endswith('Unknown PMIDs: 999')

    with pytest.raises(NotFoundError):
        service.browse_articles([998])
    with pytest.raises(InvalidFilterError):
        service.browse_articles([])


def test_mesh_operations_return_entities(service):
    children = service.get_mesh(ref(name='Diabetes Mellitus'), MeshDirection.children)
    assert [(e.id, e.name, e.entity_type) for e in children] == [
        (TYPE1, '', EntityType.disease), (TYPE2, 'Diabetes Mellitus, Type 2', EntityType.disease)]
    assert render.render_entity_list(children) == f'1. {TYPE1}\n2. Diabetes Mellitus, Type 2 [{TYPE2}]'
    assert service.get_mesh_parents(ref(id=TYPE2))[0].id == DIABETES


def test_entity_description(service):
    d = service.get_entity_description(ref(id=METFORMIN))
    assert d['mesh_tree_numbers'] == ['D02.078.370.141.450']
    assert d['records_as_subject'] == 3
    assert d['records_as_object'] == 0
    assert d['top_relations'] == [['associate', 1], ['interact', 1], ['treat', 1]]


def test_render_paths(service):
    text = render.render_paths(service.get_shortest_entity_paths(ref(id=INSULIN), ref(id=TYPE2)))
    assert text == (f'1. Insulin [{INSULIN}] -[treat]-> Diabetes Mellitus [{DIABETES}] <-[associate]- '
                    f'Metformin [{METFORMIN}] -[treat]-> Diabetes Mellitus, Type 2 [{TYPE2}] (hops=3)')
    assert render.render_paths([]) == 'No results.'


WORDS = ['metformin', 'insulin', 'diabetes', 'variant', 'pparg', 'blood', 'signaling', 'type', 'zebra']
TYPES = list(EntityType)


def _random_ref(rng, kb) -> EntityRef:
    ids = sorted(kb.entities)
    entity = kb.entities[ids[int(rng.integers(len(ids)))]]
    kw = {}
    roll = rng.random()
    if roll < 0.1:
        kw['name'] = 'Zebra'
    elif roll < 0.4 and entity.name:
        kw['name'] = entity.name.upper() if rng.random() < 0.5 else entity.name
    else:
        kw['id'] = entity.id
    if rng.random() < 0.2:
        kw['entity_type'] = TYPES[int(rng.integers(len(TYPES)))]
    return EntityRef(**kw)


def _random_filters(seed: int, kb, n: int = 200):
    rng = np.random.default_rng(seed)
    for _ in range(n):
        kw = {'limit': int(rng.integers(1, 8))}
        if rng.random() < 0.5:
            kw['head_entities'] = [_random_ref(rng, kb) for _ in range(int(rng.integers(1, 3)))]
        if rng.random() < 0.3:
            kw['tail_entities'] = [_random_ref(rng, kb) for _ in range(int(rng.integers(1, 3)))]
        if rng.random() < 0.3:
            kw['relations'] = [RelationType(str(r)) for r in rng.choice(['treat', 'cause', 'interact', 'associate'],
                                                                        size=2)]
        if rng.random() < 0.2:
            kw['pmids'] = [int(p) for p in rng.choice([101, 102, 103, 104, 105, 106, 201, 777], size=2)]
        if rng.random() < 0.5:
            kw['text_description'] = ' '.join(str(w) for w in rng.choice(WORDS, size=int(rng.integers(1, 3))))
        yield QueryFilter(**kw)


def _scan_refs(kb, refs):
    """Catalog ids any prototype refers to, found by scanning the whole catalog."""
    if not refs:
        return None

    found = set()
    for r in refs:
        for e in kb.entities.values():
            if r.entity_type is not None and r.entity_type is not e.entity_type:
                continue
            if r.id and r.id == e.id or not r.id and r.name.strip().lower() == e.name.lower():
                found.add(e.id)
    return found


def _scan_records(kb, f: QueryFilter):
    heads = _scan_refs(kb, f.head_entities)
    tails = _scan_refs(kb, f.tail_entities)
    for record in kb.records.values():
        if heads is not None and record.subject.id not in heads:
            continue
        if tails is not None and record.object.id not in tails:
            continue
        if f.relations and record.relation not in f.relations:
            continue
        if f.pmids and not record.pmids & set(f.pmids):
            continue
        yield record


def _oracle_triplets(kb, index, f: QueryFilter):
    out = []
    for record in _scan_records(kb, f):
        if f.text is None:
            out.append((record.key, 0.0, (-len(record.pmids), record.key)))
            continue
        score = max(index.score(f.text, p) for p in record.pmids)
        if score > 0 or f.has_structure:
            out.append((record.key, score, (-score, record.key)))
    out.sort(key=lambda t: t[2])
    return [(k, s) for k, s, _ in out[:f.limit]]


def _oracle_entities(kb, names, f: QueryFilter):
    refs = (f.head_entities or []) + (f.tail_entities or [])
    if f.text is None:
        return [(i, 0.0) for i in sorted(_scan_refs(kb, refs))][:f.limit]

    types = {r.entity_type for r in refs if r.entity_type is not None}
    scored = [(eid, names.score(f.text, eid)) for eid, e in kb.entities.items()
              if not types or e.entity_type in types]
    scored = sorted((s for s in scored if s[1] > 0), key=lambda s: (-s[1], s[0]))
    return scored[:f.limit]


def _oracle_relations(kb, f: QueryFilter):
    counts = {}
    for record in _scan_records(kb, f):
        counts[record.relation] = counts.get(record.relation, 0) + 1
    return sorted(counts.items(), key=lambda kv: (-kv[1], kv[0].value))[:f.limit]


def _oracle_articles(kb, index, f: QueryFilter):
    if f.has_entities or f.relations:
        pool = {p for r in _scan_records(kb, f) for p in r.pmids}
        if f.pmids:
            pool = {p for p in pool if p in f.pmids}
    elif f.pmids:
        pool = {p for p in f.pmids if p in kb.articles}
    else:
        pool = set(kb.articles)

    if f.text is None:
        return [(p, 0.0) for p in sorted(pool)][:f.limit]

    keep_zero = f.has_structure
    scored = [(p, index.score(f.text, p)) for p in pool]
    scored = sorted((s for s in scored if keep_zero or s[1] > 0), key=lambda s: (-s[1], s[0]))
    return scored[:f.limit]


def test_triplets_match_linear_scan(kb, service):
    index = build_text_index(kb.articles)
    for f in _random_filters(2, kb):
        if f.is_empty():
            continue
        got = [(h.item.key, h.score) for h in service.get_triplets(f)]
        assert got == _oracle_triplets(kb, index, f)


def test_entities_match_linear_scan(kb, service):
    names = build_name_index(kb.entities)
    for f in _random_filters(3, kb):
        if f.text is None and not f.has_entities:
            with pytest.raises(InvalidFilterError):
                service.get_entities(f)
            continue
        got = [(h.item.id, h.score) for h in service.get_entities(f)]
        assert got == _oracle_entities(kb, names, f)


def test_relations_match_linear_scan(kb, service):
    for f in _random_filters(4, kb):
        if not f.has_entities:
            with pytest.raises(InvalidFilterError):
                service.get_relations(f)
            continue
        got = [(c.relation, c.frequency) for c in service.get_relations(f)]
        assert got == _oracle_relations(kb, f)


def test_articles_match_linear_scan(kb, service):
    index = build_text_index(kb.articles)
    for f in _random_filters(5, kb):
        if f.is_empty():
            with pytest.raises(InvalidFilterError):
                service.get_articles(f)
            continue
        got = [(h.item, h.score) for h in service.get_articles(f)]
        assert got == _oracle_articles(kb, index, f)


def test_browse_matches_linear_scan(kb, service):
    rng = np.random.default_rng(6)
    choices = [101, 102, 103, 104, 105, 106, 108, 201, 999]
    for _ in range(200):
        pmids = [int(p) for p in rng.choice(choices, size=int(rng.integers(0, 5)))]
        found = [kb.articles[p] for p in pmids if p in kb.articles]
        missing = [p for p in pmids if p not in kb.articles]

        if not pmids:
            with pytest.raises(InvalidFilterError):
                service.browse_articles(pmids)
        elif not found:
            with pytest.raises(NotFoundError):
                service.browse_articles(pmids)
        else:
            result = service.browse_articles(pmids)
            assert (result.articles, result.missing) == (found, missing)
