from enum import Enum


class EntityType(Enum):
    chemical = 'chemical'
    disease = 'disease'
    gene = 'gene'
    mutation = 'mutation'
    protein_mutation = 'protein_mutation'
    dna_mutation = 'dna_mutation'
    snp = 'snp'
    species = 'species'
    cellline = 'cellline'

    @classmethod
    def _missing_(cls, value):
        # Accepts 'protein mutation', 'ProteinMutation' and 'PROTEIN_MUTATION' spellings
        if isinstance(value, str):
            key = value.strip().replace(' ', '_').replace('-', '_').lower()
            key = {'proteinmutation': 'protein_mutation', 'dnamutation': 'dna_mutation',
                   'cell_line': 'cellline'}.get(key, key)
            for member in cls:
                if member.value == key:
                    return member

        return None

    @property
    def is_mutation_class(self) -> bool:
        return self in MUTATION_CLASS

    @property
    def prompt_name(self) -> str:
        return f'Entity_Type.{self.name.upper()}'


MUTATION_CLASS = frozenset({EntityType.mutation, EntityType.protein_mutation,
                            EntityType.dna_mutation, EntityType.snp})


class UmbrellaType(Enum):
    Chemical = 'Chemical'
    Disease = 'Disease'
    Gene = 'Gene'
    Variant = 'Variant'


class RelationType(Enum):
    associate = 'associate'
    cause = 'cause'
    compare = 'compare'
    cotreat = 'cotreat'
    drug_interact = 'drug_interact'
    inhibit = 'inhibit'
    interact = 'interact'
    negative_correlate = 'negative_correlate'
    positive_correlate = 'positive_correlate'
    prevent = 'prevent'
    stimulate = 'stimulate'
    treat = 'treat'

    @classmethod
    def _missing_(cls, value):
        if isinstance(value, str):
            key = value.strip().strip("'\"").replace(' ', '_').replace('-', '_').lower()
            for member in cls:
                if member.value == key:
                    return member

        return None

    @property
    def prompt_name(self) -> str:
        return f'Relation.{self.name.upper()}'


class Architecture(Enum):
    single = 'single'
    double = 'double'


class Module(Enum):
    generation = 'generation'
    evaluation = 'evaluation'
    extractor = 'extractor'
    judge = 'judge'
    baseline = 'baseline'


class StepKind(Enum):
    thought = 'thought'
    action = 'action'
    observation = 'observation'


class TerminatedBy(Enum):
    threshold = 'threshold'
    extractor = 'extractor'
    generation_only = 'generation_only'
    baseline = 'baseline'


class ExtractorContext(Enum):
    generation = 'generation'
    all = 'all'


class Preset(Enum):
    relation_only = 'relation_only'
    triplet_only = 'triplet_only'
    article_only = 'article_only'
    kg_only = 'kg_only'
    generation_only = 'generation_only'


class BaselineKind(Enum):
    cot = 'cot'
    triplet_rag = 'triplet_rag'
    article_rag = 'article_rag'


class RelatedMode(Enum):
    either = 'either'
    both = 'both'


class MeshDirection(Enum):
    parents = 'parents'
    children = 'children'
    siblings = 'siblings'
