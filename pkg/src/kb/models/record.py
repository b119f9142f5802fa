from dataclasses import dataclass
from datetime import date

from src.enum import RelationType
from .entity import Entity

IdentityKey = tuple[str, str, str]


@dataclass(frozen=True)
class Triplet:
    subject: Entity
    relation: RelationType
    object: Entity

    @property
    def key(self) -> IdentityKey:
        """Directed identity. The reverse orientation is a different key."""
        return self.subject.id, self.relation.value, self.object.id

    @property
    def reverse_key(self) -> IdentityKey:
        return self.object.id, self.relation.value, self.subject.id

    def to_dict(self) -> dict:
        return {
            'subject': self.subject.to_dict(),
            'relation': self.relation.value,
            'object': self.object.to_dict(),
        }

    @classmethod
    def from_dict(cls, d: dict):
        return cls(
            subject=Entity.from_dict(d['subject']),
            relation=RelationType(d['relation']),
            object=Entity.from_dict(d['object']),
        )

    def __str__(self):
        return f'({self.subject.display_name}, {self.relation.value}, {self.object.display_name})'


@dataclass(frozen=True)
class HypothesisRecord:
    triplet: Triplet
    pmids: frozenset[int]
    discovery_date: date

    @property
    def key(self) -> IdentityKey:
        return self.triplet.key

    @property
    def subject(self) -> Entity:
        return self.triplet.subject

    @property
    def object(self) -> Entity:
        return self.triplet.object

    @property
    def relation(self) -> RelationType:
        return self.triplet.relation

    def to_line(self) -> dict:
        """Serialized in the raw triplet-line schema, as stored in KB snapshots."""
        return {
            'subject_id': self.subject.id,
            'subject_name': self.subject.name,
            'subject_type': self.subject.entity_type.value,
            'relation': self.relation.value,
            'object_id': self.object.id,
            'object_name': self.object.name,
            'object_type': self.object.entity_type.value,
            'pmids': sorted(self.pmids),
        }

    def to_dict(self) -> dict:
        return {
            **self.triplet.to_dict(),
            'pmids': sorted(self.pmids),
            'discovery_date': self.discovery_date.isoformat(),
        }

    @classmethod
    def from_dict(cls, d: dict):
        return cls(
            triplet=Triplet.from_dict(d),
            pmids=frozenset(int(p) for p in d['pmids']),
            discovery_date=date.fromisoformat(d['discovery_date']),
        )
