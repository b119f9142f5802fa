from dataclasses import dataclass

from src.enum import EntityType


@dataclass(frozen=True, eq=False)
class Entity:
    id: str
    name: str
    entity_type: EntityType

    @property
    def key(self) -> tuple[str, EntityType]:
        return self.id, self.entity_type

    @property
    def display_name(self) -> str:
        return self.name or self.id

    def __eq__(self, other):
        if isinstance(other, Entity):
            return self.key == other.key

        return False

    def __hash__(self):
        return hash(self.key)

    def to_dict(self) -> dict:
        return {'id': self.id, 'name': self.name, 'entity_type': self.entity_type.value}

    @classmethod
    def from_dict(cls, d: dict):
        return cls(id=d['id'], name=d.get('name') or '', entity_type=EntityType(d['entity_type']))
