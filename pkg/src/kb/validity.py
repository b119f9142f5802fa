from types import MappingProxyType
from typing import Optional

from src.enum import EntityType, RelationType, UmbrellaType

C, D, G, V = UmbrellaType.Chemical, UmbrellaType.Disease, UmbrellaType.Gene, UmbrellaType.Variant

# Ordered (subject, object) umbrella pairs admitted per relation
VALIDITY_MATRIX: MappingProxyType[RelationType, frozenset[tuple[UmbrellaType, UmbrellaType]]] = MappingProxyType({
    RelationType.associate: frozenset({(C, D), (C, G), (C, V), (D, G), (D, V), (V, V)}),
    RelationType.cause: frozenset({(C, D), (V, D)}),
    RelationType.compare: frozenset({(C, C)}),
    RelationType.cotreat: frozenset({(C, C)}),
    RelationType.drug_interact: frozenset({(C, C)}),
    RelationType.inhibit: frozenset({(C, V), (G, D)}),
    RelationType.interact: frozenset({(C, G), (C, V), (G, G)}),
    RelationType.negative_correlate: frozenset({(C, G), (C, V), (G, G)}),
    RelationType.positive_correlate: frozenset({(C, C), (C, G), (G, G)}),
    RelationType.prevent: frozenset({(V, D)}),
    RelationType.stimulate: frozenset({(C, V), (G, D)}),
    RelationType.treat: frozenset({(C, D)}),
})

RELATION_DESCRIPTIONS: MappingProxyType[RelationType, str] = MappingProxyType({
    RelationType.associate: 'Complex or unclear relationships',
    RelationType.cause: 'Triggering a disease by a specific agent',
    RelationType.compare: 'Comparing the effects of two chemicals or drugs',
    RelationType.cotreat: 'Simultaneous administration of multiple drugs',
    RelationType.drug_interact: 'Pharmacodynamic interactions between two chemicals',
    RelationType.inhibit: 'Reduction in amount or degree of one entity by another',
    RelationType.interact: 'Physical interactions, such as protein-binding',
    RelationType.negative_correlate: 'Increases in the amount or degree of one entity decreases '
                                     'the amount or degree of the other entity',
    RelationType.positive_correlate: 'The amount or degree of two entities increase or decrease together',
    RelationType.prevent: 'Prevention of a disease by a genetic variant',
    RelationType.stimulate: 'Increase in amount or degree of one entity by another',
    RelationType.treat: 'Treatment of a disease using a chemical or drug',
})

_UMBRELLA = {
    EntityType.chemical: C,
    EntityType.disease: D,
    EntityType.gene: G,
    EntityType.mutation: V,
    EntityType.protein_mutation: V,
    EntityType.dna_mutation: V,
    EntityType.snp: V,
}

# Relations a proposal may use
PROPOSABLE_RELATIONS = tuple(r for r in RelationType if r is not RelationType.associate)


def umbrella(entity_type: EntityType) -> Optional[UmbrellaType]:
    """Species and cellline have no umbrella class and take part in no relation."""
    return _UMBRELLA.get(entity_type)


def validate_pair(relation: RelationType, subject_type: EntityType, object_type: EntityType) -> bool:
    s, o = umbrella(subject_type), umbrella(object_type)
    if s is None or o is None:
        return False

    return (s, o) in VALIDITY_MATRIX[relation]


def valid_relations(subject_type: EntityType, object_type: EntityType, proposable_only: bool = False) -> list[RelationType]:
    relations = PROPOSABLE_RELATIONS if proposable_only else tuple(RelationType)
    return [r for r in relations if validate_pair(r, subject_type, object_type)]


def describe_relation(relation: RelationType) -> str:
    pairs = ', '.join(f'({s.value}, {o.value})' for s, o in sorted(VALIDITY_MATRIX[relation],
                                                                   key=lambda p: (p[0].value, p[1].value)))
    return f'{relation.value}: {RELATION_DESCRIPTIONS[relation]}. Valid entity pairs (subject, object): {pairs}'
