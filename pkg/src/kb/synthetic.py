"""
Deterministic desk-scale corpus in the triplet/article/MeSH line schemas.

The generated lines deliberately contain every kind of defect ingestion has
to cope with, so the corpus doubles as an ingestion stress fixture.
"""
import logging
import os
from dataclasses import dataclass, field
from datetime import date, timedelta

import numpy as np

from src.enum import EntityType, RelationType, UmbrellaType
from src.kb.validity import VALIDITY_MATRIX
from src.utils import dumps, write_json

logger = logging.getLogger('debug')

TARGET_DISEASE = 'D003920'

DISEASES = [
    ('D003920', 'Diabetes Mellitus', ['C19.246']),
    ('D003922', 'Diabetes Mellitus, Type 1', ['C19.246.267']),
    ('D003924', 'Diabetes Mellitus, Type 2', ['C19.246.300']),
    ('D048909', 'Diabetes Complications', ['C19.246.099']),
    ('D003928', 'Diabetic Nephropathies', ['C19.246.099.500']),
    ('D006973', 'Hypertension', ['C14.907.489']),
    ('D009765', 'Obesity', ['C18.654.726.500']),
    ('D007333', 'Insulin Resistance', ['C18.452.394.968']),
    ('D001145', 'Arrhythmias, Cardiac', ['C14.280.067']),
    ('D002318', 'Cardiovascular Diseases', ['C14']),
]

CHEMICALS = [
    ('D008687', 'Metformin', ['D02.078.370.141.450']),
    ('D007328', 'Insulin', ['D06.472.699.587.200']),
    ('D000068900', 'Empagliflozin', ['D03.633.100.473.500']),
    ('D005947', 'Glucose', ['D09.947.875.359.448']),
    ('D000069450', 'Liraglutide', ['D12.644.400.100']),
    ('D013256', 'Steroids', ['D04.210.500']),
    ('D000077205', 'Atorvastatin', ['D02.241.511.500']),
    ('D001241', 'Aspirin', ['D02.241.223.100.380.800']),
    ('D004491', 'Edetic Acid', ['D02.241.081.038.455']),
    ('D010100', 'Oxygen', ['D01.268.556.662']),
]

GENES = [
    ('3630', 'INS'), ('5468', 'PPARG'), ('6514', 'SLC2A2'), ('3667', 'IRS1'), ('5599', 'MAPK8'),
    ('2645', 'GCK'), ('6934', 'TCF7L2'), ('3767', 'KCNJ11'), ('7124', 'TNF'), ('3569', 'IL6'),
]

VARIANTS = [
    ('rs7903146', '', EntityType.snp), ('rs1801282', '', EntityType.snp),
    ('p.E23K', 'KCNJ11 E23K', EntityType.protein_mutation), ('c.34G>A', '', EntityType.dna_mutation),
    ('tmVar:p|SUB|P|12|A', 'PPARG P12A', EntityType.mutation), ('rs5219', '', EntityType.snp),
]

SPECIES = [('9606', 'Homo sapiens'), ('10090', 'Mus musculus')]

JOURNALS = [
    ('Lancet', 98.4), ('Nature Medicine', 82.9), ('Diabetes Care', 16.2), ('Diabetologia', 10.1),
    ('Diabetes', 7.7), ('Metabolism', 13.9), ('Journal of Diabetes Research', 4.0),
    ('Endocrine Journal', 2.0), ('Medical Hypotheses', 1.1), ('Regional Letters', 0.3),
]

WORDS = [
    'glucose', 'insulin', 'secretion', 'pancreatic', 'beta', 'cells', 'cohort', 'randomized', 'trial',
    'patients', 'expression', 'signaling', 'pathway', 'mice', 'treatment', 'risk', 'variant', 'association',
    'oxidative', 'stress', 'inflammation', 'renal', 'vascular', 'hepatic', 'lipid', 'metabolism',
    'receptor', 'inhibition', 'dose', 'response', 'outcomes', 'mechanism', 'tolerance', 'plasma',
]


@dataclass
class SyntheticCorpus:
    triplet_lines: list[str] = field(default_factory=list)
    article_lines: list[str] = field(default_factory=list)
    mesh_lines: list[str] = field(default_factory=list)
    impact: dict[str, float] = field(default_factory=dict)


def _entities_by_umbrella() -> dict[UmbrellaType, list[tuple[str, str, EntityType]]]:
    return {
        UmbrellaType.Chemical: [(i, n, EntityType.chemical) for i, n, _ in CHEMICALS],
        UmbrellaType.Disease: [(i, n, EntityType.disease) for i, n, _ in DISEASES],
        UmbrellaType.Gene: [(i, n, EntityType.gene) for i, n in GENES],
        UmbrellaType.Variant: list(VARIANTS),
    }


def _line(subject, relation: RelationType, obj, pmids) -> dict:
    return {
        'subject_id': subject[0], 'subject_name': subject[1], 'subject_type': subject[2].value,
        'relation': relation.value,
        'object_id': obj[0], 'object_name': obj[1], 'object_type': obj[2].value,
        'pmids': [int(p) for p in pmids],
    }


def generate_corpus(seed: int = 0, n_triplets: int = 1000, n_articles: int = 400,
                    cutoff: date = date(2024, 1, 1), start_year: int = 1995,
                    post_cutoff_share: float = 0.15) -> SyntheticCorpus:
    rng = np.random.default_rng(seed)
    corpus = SyntheticCorpus(impact=dict(JOURNALS))

    span = (cutoff - date(start_year, 1, 1)).days
    for pmid in range(1, n_articles + 1):
        roll = rng.random()
        if rng.random() < post_cutoff_share:
            pub = cutoff + timedelta(days=int(rng.integers(0, 365)))
        else:
            pub = date(start_year, 1, 1) + timedelta(days=int(rng.integers(0, span)))

        words = rng.choice(WORDS, size=int(rng.integers(12, 30)))
        row = {
            'pmid': pmid,
            'title': ' '.join(words[:6]).capitalize(),
            'abstract': ' '.join(words[6:]).capitalize() + '.',
            'pub_date': pub.isoformat(),
            'journal': JOURNALS[int(rng.integers(0, len(JOURNALS)))][0],
        }
        if roll < 0.03:
            row['pub_date'] = ''
        elif roll < 0.05:
            row['title'] = row['abstract'] = ''
        elif roll < 0.07:
            row['pub_date'] = str(pub.year)

        corpus.article_lines.append(dumps(row))
        if roll > 0.99:
            corpus.article_lines.append(dumps({**row, 'title': 'Duplicate entry'}))

    pools = _entities_by_umbrella()
    pairs = sorted(((r, s, o) for r, ps in VALIDITY_MATRIX.items() for s, o in ps),
                   key=lambda t: (t[0].value, t[1].value, t[2].value))
    emitted: list[dict] = []

    for _ in range(n_triplets):
        roll = rng.random()
        pmids = rng.integers(1, n_articles + 1, size=int(rng.integers(1, 4)))

        if roll < 0.01:
            corpus.triplet_lines.append('{"subject_id": "D008687", "relation": ')
            continue

        if roll < 0.08 and emitted:
            prev = emitted[int(rng.integers(0, len(emitted)))]
            row = {**prev, 'pmids': [int(p) for p in pmids]}
        else:
            relation, s_umb, o_umb = pairs[int(rng.integers(0, len(pairs)))]
            subject = pools[s_umb][int(rng.integers(0, len(pools[s_umb])))]
            obj = pools[o_umb][int(rng.integers(0, len(pools[o_umb])))]
            row = _line(subject, relation, obj, pmids)

            if roll < 0.12:
                species = SPECIES[int(rng.integers(0, len(SPECIES)))]
                row = _line((*species, EntityType.species), relation, obj, pmids)
            elif roll < 0.15:
                row = _line(obj, RelationType.treat, subject, pmids) if s_umb is not UmbrellaType.Chemical \
                    else _line((obj[0], obj[1], EntityType.gene), RelationType.treat, subject, pmids)
            elif roll < 0.18 and not subject[2].is_mutation_class:
                row['subject_name'] = ''
            else:
                emitted.append(row)

        if rng.random() < 0.03:
            row = {**row, 'pmids': row['pmids'] + [n_articles + int(rng.integers(1, 1000))]}

        corpus.triplet_lines.append(dumps(row))

    for entity_id, _, numbers in DISEASES + CHEMICALS:
        corpus.mesh_lines.append(dumps({'entity_id': entity_id, 'tree_numbers': numbers}))

    logger.info(f'Generated {len(corpus.triplet_lines)} triplet lines and {len(corpus.article_lines)} '
                f'article lines with seed {seed}')
    return corpus


def write_corpus(corpus: SyntheticCorpus, out_dir: str) -> dict[str, str]:
    os.makedirs(out_dir, exist_ok=True)
    paths = {
        'triplets': os.path.join(out_dir, 'triplets.jsonl'),
        'articles': os.path.join(out_dir, 'articles.jsonl'),
        'mesh': os.path.join(out_dir, 'mesh.jsonl'),
        'impact': os.path.join(out_dir, 'impact.json'),
    }
    for key, lines in (('triplets', corpus.triplet_lines), ('articles', corpus.article_lines),
                       ('mesh', corpus.mesh_lines)):
        with open(paths[key], 'w', encoding='utf-8', newline='\n') as f:
            f.writelines(line + '\n' for line in lines)

    write_json(paths['impact'], corpus.impact)
    return paths

