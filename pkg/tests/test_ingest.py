import filecmp
import json
import os
from collections import defaultdict
from datetime import date

import pytest

from src.enum import EntityType, RelationType
from src.errors import IngestError
from src.kb.ingest import ingest, ingest_paths, merge_records, TripletLine
from src.kb.models import Article, Entity, Triplet
from src.kb.snapshot import load_snapshot, read_manifest, write_snapshot
from src.kb.synthetic import generate_corpus, write_corpus
from src.kb.validity import validate_pair
from src.utils import parse_date
from tests.conftest import (CUTOFF, DIABETES, HYPERTENSION, INS, INSULIN, METFORMIN, PPARG, RS7903146, TYPE2,
                            corpus_path)


def test_fixture_counters(report):
    assert report.counters() == {
        'invalid_pair': 2,
        'missing_name': 1,
        'no_articles': 1,
        'missing_date': 1,
        'past_cutoff': 1,
        'records_merged': 1,
        'records_kept': 6,
        'malformed': 2,
        'missing_text': 1,
        'duplicate_pmid': 1,
        'unresolved_pmids': 1,
        'articles_kept': 6,
        'mesh_conflicts': 0,
        'raw_admitted': 9,
    }


def test_rejections_keep_line_numbers(report):
    by_reason = defaultdict(list)
    for r in report.rejections:
        by_reason[(r.source, r.reason)].append(r.line)

    assert by_reason[('triplets', 'invalid_pair')] == [7, 12]
    assert by_reason[('triplets', 'missing_name')] == [8]
    assert by_reason[('triplets', 'malformed')] == [13]
    assert by_reason[('articles', 'duplicate_pmid')] == [9]
    assert by_reason[('articles', 'missing_date')] == [10]
    assert by_reason[('articles', 'missing_text')] == [11]
    assert by_reason[('articles', 'malformed')] == [12]


def test_fixture_records(kb):
    assert sorted(kb.records) == sorted([
        (PPARG, 'positive_correlate', INS),
        (INSULIN, 'treat', DIABETES),
        (METFORMIN, 'associate', DIABETES),
        (METFORMIN, 'interact', PPARG),
        (METFORMIN, 'treat', TYPE2),
        (RS7903146, 'cause', TYPE2),
    ])

    merged = kb.get_record((METFORMIN, 'treat', TYPE2))
    assert merged.pmids == {101, 105}
    assert merged.discovery_date == date(2010, 5, 1)


def test_post_cutoff_pmids_are_trimmed(kb):
    record = kb.get_record((METFORMIN, 'associate', DIABETES))
    assert record.pmids == {104}
    assert record.discovery_date == date(2012, 1, 1)
    assert 201 not in kb.articles
    assert all(a.pub_date < CUTOFF for a in kb.articles.values())


def test_catalog_is_record_endpoints(kb):
    assert sorted(kb.entities) == sorted([PPARG, INS, DIABETES, TYPE2, INSULIN, METFORMIN, RS7903146])
    assert kb.entities[RS7903146].name == ''
    assert kb.entities[RS7903146].display_name == RS7903146
    assert HYPERTENSION not in kb.entities


def test_contains_is_directed_by_default(kb):
    metformin, t2 = kb.entities[METFORMIN], kb.entities[TYPE2]
    assert kb.contains(Triplet(metformin, RelationType.treat, t2))
    assert not kb.contains(Triplet(t2, RelationType.treat, metformin))
    assert kb.contains(Triplet(t2, RelationType.treat, metformin), undirected=True)
    assert not kb.contains(Triplet(metformin, RelationType.cause, t2), undirected=True)


def test_kb_is_immutable(kb):
    with pytest.raises(AttributeError):
        kb._records = {}
    with pytest.raises(TypeError):
        kb.records[('a', 'treat', 'b')] = None


def test_merge_records_drops_unresolved():
    line = TripletLine(subject_id='C1', subject_name='A', subject_type='chemical', relation='treat',
                       object_id='D1', object_name='B', object_type='disease', pmids=[1, 2])
    articles = {1: Article(1, 'T', 'A', date(2000, 1, 1))}
    record = merge_records([line], articles)
    assert record.pmids == {1}
    assert merge_records([line], {}) is None
    with pytest.raises(ValueError):
        merge_records([], articles)


def test_mutation_names_may_be_blank():
    triplets = [{'subject_id': 'rs1', 'subject_name': None, 'subject_type': 'snp', 'relation': 'cause',
                 'object_id': 'D1', 'object_name': 'Disease', 'object_type': 'disease', 'pmids': [1]}]
    articles = [{'pmid': 1, 'title': 'T', 'abstract': '', 'pub_date': '2000-02'}]
    kb, report = ingest(triplets, articles, CUTOFF)
    assert report.missing_name == 0
    assert kb.entities['rs1'] == Entity('rs1', '', EntityType.snp)
    assert kb.articles[1].pub_date == date(2000, 2, 1)


def test_entity_type_conflict_keeps_first_in_key_order():
    triplets = [
        {'subject_id': 'X1', 'subject_name': 'X', 'subject_type': 'gene', 'relation': 'interact',
         'object_id': 'X2', 'object_name': 'Y', 'object_type': 'gene', 'pmids': [1]},
        {'subject_id': 'X1', 'subject_name': 'X', 'subject_type': 'chemical', 'relation': 'treat',
         'object_id': 'D1', 'object_name': 'Z', 'object_type': 'disease', 'pmids': [1]},
    ]
    articles = [{'pmid': 1, 'title': 'T', 'pub_date': '2001-01-01'}]
    kb, _ = ingest(triplets, articles, CUTOFF)
    assert kb.entities['X1'].entity_type is EntityType.gene


def test_missing_input_is_fatal():
    with pytest.raises(IngestError):
        ingest_paths('does/not/exist.jsonl', corpus_path('articles.jsonl'), CUTOFF)


def test_snapshot_round_trip_is_bit_identical(kb, report, tmp_path):
    first, second = tmp_path / 'first', tmp_path / 'second'
    write_snapshot(kb, str(first), report)
    reloaded = load_snapshot(str(first))
    write_snapshot(reloaded, str(second))

    for name in ('triplets.jsonl', 'articles.jsonl', 'mesh.jsonl', 'manifest.json'):
        assert filecmp.cmp(first / name, second / name, shallow=False), name

    assert read_manifest(str(first)) == {
        'cutoff': '2024-01-01',
        'counts': {'records': 6, 'articles': 6, 'entities': 7, 'mesh_entities': 6},
    }
    assert reloaded.mesh.parents(TYPE2) == [DIABETES]


def test_snapshot_without_manifest(tmp_path):
    with pytest.raises(IngestError):
        load_snapshot(str(tmp_path))


def _oracle(triplet_lines, article_lines, cutoff):
    """Set-based recomputation of ingestion from the raw lines."""
    articles = {}
    for raw in article_lines:
        try:
            row = json.loads(raw)
        except json.JSONDecodeError:
            continue
        pub = parse_date(row.get('pub_date'))
        if row['pmid'] in articles or pub is None or not (row.get('title') or row.get('abstract')):
            continue
        articles[row['pmid']] = pub

    groups = defaultdict(set)
    raw_admitted = 0
    for raw in triplet_lines:
        try:
            row = json.loads(raw)
        except json.JSONDecodeError:
            continue
        s_type, o_type = EntityType(row['subject_type']), EntityType(row['object_type'])
        if not validate_pair(RelationType(row['relation']), s_type, o_type):
            continue
        if (not row['subject_name'] and not s_type.is_mutation_class) or \
                (not row['object_name'] and not o_type.is_mutation_class):
            continue
        raw_admitted += 1
        groups[(row['subject_id'], row['relation'], row['object_id'])].update(row['pmids'])

    records = {}
    for key, pmids in groups.items():
        resolved = {p for p in pmids if p in articles}
        if not resolved or min(articles[p] for p in resolved) >= cutoff:
            continue
        records[key] = ({p for p in resolved if articles[p] < cutoff}, min(articles[p] for p in resolved))

    return records, raw_admitted - len(groups)


def test_synthetic_corpus_matches_oracle():
    corpus = generate_corpus(seed=7, n_triplets=1000, n_articles=400)
    kb, report = ingest(corpus.triplet_lines, corpus.article_lines, CUTOFF, corpus.mesh_lines)
    records, merged = _oracle(corpus.triplet_lines, corpus.article_lines, CUTOFF)

    assert report.records_merged == merged
    assert report.records_kept == len(records) == len(kb)
    for key, (pmids, discovery) in records.items():
        record = kb.get_record(key)
        assert record.pmids == pmids
        assert record.discovery_date == discovery

    assert report.malformed >= 1
    assert report.invalid_pair >= 1
    assert report.missing_name >= 1
    assert report.unresolved_pmids >= 1
    assert report.missing_date >= 1
    assert report.past_cutoff >= 1


def test_synthetic_corpus_is_deterministic(tmp_path):
    a = generate_corpus(seed=3, n_triplets=200, n_articles=80)
    b = generate_corpus(seed=3, n_triplets=200, n_articles=80)
    assert a.triplet_lines == b.triplet_lines
    assert a.article_lines == b.article_lines
    assert generate_corpus(seed=4, n_triplets=200, n_articles=80).triplet_lines != a.triplet_lines

    paths = write_corpus(a, str(tmp_path))
    assert sorted(paths) == ['articles', 'impact', 'mesh', 'triplets']
    assert os.path.exists(paths['impact'])
