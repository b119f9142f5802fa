from dataclasses import dataclass, field
from typing import Any, List, Optional

from pydantic import BaseModel, ValidationError, root_validator, validator

from src.enum import EntityType, RelationType
from src.errors import InvalidFilterError
from src.kb.models import Article, Entity
from src.utils import tokenize

DEFAULT_LIMIT = 20


class EntityRef(BaseModel):
    """Entity prototype as written by an agent: an id, or a name with an optional type."""
    id: Optional[str] = None
    name: Optional[str] = None
    entity_type: Optional[EntityType] = None

    @root_validator
    def validate_id_or_name(cls, values):
        if not (values.get('id') or '').strip() and not (values.get('name') or '').strip():
            raise ValueError('entity needs an id or a name')
        return values

    @classmethod
    def of(cls, entity: Entity) -> 'EntityRef':
        return cls(id=entity.id, name=entity.name or None, entity_type=entity.entity_type)

    def matches(self, entity: Entity) -> bool:
        if self.entity_type is not None and self.entity_type is not entity.entity_type:
            return False

        if self.id:
            return self.id == entity.id

        return (self.name or '').strip().lower() == entity.name.lower()

    def __str__(self):
        label = self.id or self.name
        return f'{label}:{self.entity_type.value}' if self.entity_type else label


class QueryFilter(BaseModel):
    head_entities: Optional[List[EntityRef]] = None
    tail_entities: Optional[List[EntityRef]] = None
    relations: Optional[List[RelationType]] = None
    pmids: Optional[List[int]] = None
    text_description: Optional[str] = None
    limit: int = DEFAULT_LIMIT

    class Config:
        extra = 'forbid'

    @validator('limit')
    def validate_limit(cls, v):
        if v < 1:
            raise ValueError('limit must be at least 1')
        return v

    @classmethod
    def build(cls, **kwargs) -> 'QueryFilter':
        try:
            return cls(**{k: v for k, v in kwargs.items() if v is not None})
        except ValidationError as e:
            raise InvalidFilterError(str(e)) from e

    @property
    def text(self) -> Optional[str]:
        """text_description, or None when it has no indexable token."""
        if self.text_description and tokenize(self.text_description):
            return self.text_description
        return None

    @property
    def has_entities(self) -> bool:
        return bool(self.head_entities) or bool(self.tail_entities)

    @property
    def has_structure(self) -> bool:
        return self.has_entities or bool(self.relations) or bool(self.pmids)

    def is_empty(self) -> bool:
        return not self.has_structure and self.text is None

    def canonical(self) -> dict:
        return self.dict(exclude_none=True)


@dataclass(frozen=True)
class RankedHit:
    item: Any
    score: float = 0.0

    def to_dict(self) -> dict:
        item = self.item.to_dict() if hasattr(self.item, 'to_dict') else self.item
        return {'item': item, 'score': self.score}


@dataclass(frozen=True)
class RelationCount:
    relation: RelationType
    frequency: int

    def to_dict(self) -> dict:
        return {'relation': self.relation.value, 'frequency': self.frequency}


@dataclass(frozen=True)
class BrowseResult:
    articles: list[Article] = field(default_factory=list)
    missing: list[int] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {'articles': [a.to_dict() for a in self.articles], 'missing': list(self.missing)}
