import itertools

import pytest

from src.enum import EntityType, RelationType
from src.kb.validity import PROPOSABLE_RELATIONS, describe_relation, valid_relations, validate_pair

CHEMICAL = {EntityType.chemical}
DISEASE = {EntityType.disease}
GENE = {EntityType.gene}
VARIANT = {EntityType.mutation, EntityType.protein_mutation, EntityType.dna_mutation, EntityType.snp}

# Valid (subject, object) classes per relation, written out independently of the module under test
ORACLE = {
    'associate': [(CHEMICAL, DISEASE), (CHEMICAL, GENE), (CHEMICAL, VARIANT), (DISEASE, GENE),
                  (DISEASE, VARIANT), (VARIANT, VARIANT)],
    'cause': [(CHEMICAL, DISEASE), (VARIANT, DISEASE)],
    'compare': [(CHEMICAL, CHEMICAL)],
    'cotreat': [(CHEMICAL, CHEMICAL)],
    'drug_interact': [(CHEMICAL, CHEMICAL)],
    'inhibit': [(CHEMICAL, VARIANT), (GENE, DISEASE)],
    'interact': [(CHEMICAL, GENE), (CHEMICAL, VARIANT), (GENE, GENE)],
    'negative_correlate': [(CHEMICAL, GENE), (CHEMICAL, VARIANT), (GENE, GENE)],
    'positive_correlate': [(CHEMICAL, CHEMICAL), (CHEMICAL, GENE), (GENE, GENE)],
    'prevent': [(VARIANT, DISEASE)],
    'stimulate': [(CHEMICAL, VARIANT), (GENE, DISEASE)],
    'treat': [(CHEMICAL, DISEASE)],
}

ALL_TYPES = list(EntityType)


def oracle(relation: RelationType, s: EntityType, o: EntityType) -> bool:
    return any(s in subj and o in obj for subj, obj in ORACLE[relation.value])


def test_matrix_matches_oracle_everywhere():
    checked = 0
    for relation, s, o in itertools.product(RelationType, ALL_TYPES, ALL_TYPES):
        assert validate_pair(relation, s, o) == oracle(relation, s, o), (relation, s, o)
        checked += 1

    assert checked == 12 * len(ALL_TYPES) ** 2


def test_exactly_26_umbrella_pairs():
    assert sum(len(pairs) for pairs in ORACLE.values()) == 26
    umbrella_reps = [EntityType.chemical, EntityType.disease, EntityType.gene, EntityType.snp]
    valid = [(r, s, o) for r, s, o in itertools.product(RelationType, umbrella_reps, umbrella_reps)
             if validate_pair(r, s, o)]
    assert len(valid) == 26


@pytest.mark.parametrize('relation, s, o, expected', [
    (RelationType.treat, EntityType.chemical, EntityType.disease, True),
    (RelationType.treat, EntityType.disease, EntityType.chemical, False),
    (RelationType.cause, EntityType.protein_mutation, EntityType.disease, True),
    (RelationType.associate, EntityType.dna_mutation, EntityType.snp, True),
    (RelationType.associate, EntityType.species, EntityType.disease, False),
    (RelationType.interact, EntityType.cellline, EntityType.gene, False),
])
def test_validate_pair(relation, s, o, expected):
    assert validate_pair(relation, s, o) is expected


def test_valid_relations_excludes_associate_when_proposing():
    assert valid_relations(EntityType.chemical, EntityType.disease) == [
        RelationType.associate, RelationType.cause, RelationType.treat]
    assert valid_relations(EntityType.chemical, EntityType.disease, proposable_only=True) == [
        RelationType.cause, RelationType.treat]
    assert RelationType.associate not in PROPOSABLE_RELATIONS


def test_describe_relation_lists_pairs():
    text = describe_relation(RelationType.inhibit)
    assert text.startswith('inhibit: Reduction in amount or degree')
    assert '(Chemical, Variant)' in text
    assert '(Gene, Disease)' in text


def test_entity_type_spellings():
    assert EntityType('ProteinMutation') is EntityType.protein_mutation
    assert EntityType('protein mutation') is EntityType.protein_mutation
    assert EntityType('DNAMutation') is EntityType.dna_mutation
    assert EntityType('Cell Line') is EntityType.cellline
    with pytest.raises(ValueError):
        EntityType('organism')
