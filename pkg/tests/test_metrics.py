import itertools

import numpy as np
import pytest

from src.enum import EntityType, RelationType
from src.errors import ContractError
from src.harness.metrics import JudgeScores, MetricRow, aggregate, alignment_r, novelty_r, percentage
from src.harness.testset import TestCase
from src.kb.models import Entity, Triplet
from tests.conftest import DIABETES, METFORMIN, TYPE2


@pytest.fixture
def case(kb):
    return TestCase(kb.entities[METFORMIN], kb.entities[DIABETES], frozenset({RelationType.treat}))


def row(n: int, a: int = 0, nd=None, ad=None, relation=RelationType.treat) -> MetricRow:
    return MetricRow(f'c{nd}', relation, n, a, JudgeScores(nd, ad))


def test_novelty_r(kb):
    metformin, t2 = kb.entities[METFORMIN], kb.entities[TYPE2]
    assert novelty_r(kb, Triplet(metformin, RelationType.treat, t2)) == 0
    assert novelty_r(kb, Triplet(metformin, RelationType.prevent, t2)) == 1
    assert novelty_r(kb, Triplet(t2, RelationType.treat, metformin)) == 1
    assert novelty_r(kb, Triplet(t2, RelationType.treat, metformin), undirected=True) == 0


def test_alignment_r(kb, case):
    assert alignment_r(case, Triplet(case.subject, RelationType.treat, case.object)) == 1
    assert alignment_r(case, Triplet(case.subject, RelationType.cause, case.object)) == 0

    other = Entity('D000001', 'Other', EntityType.disease)
    with pytest.raises(ContractError):
        alignment_r(case, Triplet(case.subject, RelationType.treat, other))


def test_percentages_and_spread():
    report = aggregate([row(1, 1, 60, 40), row(0, 1, 70), row(1, 0), row(1, 1)])

    assert report.novelty_r == 75.0
    assert report.alignment_r == 75.0
    assert report.novelty_d.mean == 65.0
    assert report.novelty_d.std == 5.0
    assert report.alignment_d.mean == 40.0
    assert report.alignment_d.std == 0.0
    assert report.to_dict()['aggregates']['judge_missing'] == 3


def test_no_judge_scores():
    report = aggregate([row(1), row(0)])
    assert report.novelty_d is None
    assert report.to_dict()['aggregates']['novelty_d'] is None


def test_histogram_and_failed_cases():
    report = aggregate([row(1), row(1, relation=RelationType.cause), row(0)], failed_cases=['z', 'a'])
    assert report.relation_histogram == {'treat': 2, 'cause': 1}
    assert list(report.to_dict()['relation_histogram']) == ['cause', 'treat']
    assert report.failed_cases == ['a', 'z']


def test_empty_rows():
    with pytest.raises(ContractError):
        aggregate([])


def test_percentage_matches_counting():
    for n in range(1, 7):
        for bits in itertools.product((0, 1), repeat=n):
            assert percentage(bits) == pytest.approx(100 * sum(bits) / n)


def test_spread_matches_population_std():
    rng = np.random.default_rng(0)
    for _ in range(50):
        scores = [int(s) for s in rng.integers(0, 101, size=int(rng.integers(1, 12)))]
        report = aggregate([row(1, 1, s, s) for s in scores])
        mean = sum(scores) / len(scores)
        std = (sum((s - mean) ** 2 for s in scores) / len(scores)) ** 0.5
        assert report.novelty_d.mean == pytest.approx(mean)
        assert report.alignment_d.std == pytest.approx(std)
