import os
from datetime import date

import pytest

from src.agent.tools import ToolRegistry
from src.kb.ingest import ingest_paths
from src.query.service import KBService

FIXTURES = os.path.join(os.path.dirname(os.path.realpath(__file__)), 'fixtures')
CORPUS = os.path.join(FIXTURES, 'corpus')
GOLDEN = os.path.join(FIXTURES, 'golden')
CUTOFF = date(2024, 1, 1)

METFORMIN = 'D008687'
INSULIN = 'D007328'
DIABETES = 'D003920'
TYPE1 = 'D003922'
TYPE2 = 'D003924'
HYPERTENSION = 'D006973'
PPARG = '5468'
INS = '3630'
RS7903146 = 'rs7903146'


def corpus_path(name: str) -> str:
    return os.path.join(CORPUS, name)


@pytest.fixture(scope='session')
def ingested():
    return ingest_paths(corpus_path('triplets.jsonl'), corpus_path('articles.jsonl'), CUTOFF,
                        corpus_path('mesh.jsonl'))


@pytest.fixture(scope='session')
def kb(ingested):
    return ingested[0]


@pytest.fixture(scope='session')
def report(ingested):
    return ingested[1]


@pytest.fixture(scope='session')
def service(kb):
    return KBService(kb)


@pytest.fixture
def registry(service):
    return ToolRegistry(service)
