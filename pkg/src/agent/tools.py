import logging
from dataclasses import dataclass
from typing import Any, Callable, Iterable, Optional

from pydantic import ValidationError

from src.agent.memory import MemoryLog
from src.agent.models import ApiCall
from src.enum import Module, RelationType
from src.errors import InvalidFilterError, NotFoundError, ServiceError, ToolArgumentError
from src.query import render
from src.query.filters import EntityRef, QueryFilter

logger = logging.getLogger('debug')

FILTER_PARAMS = ('head_entities', 'tail_entities', 'relations', 'pmids', 'text_description', 'limit')
FILTER_SIGNATURE = ('head_entities: list[Entity] = None, tail_entities: list[Entity] = None, '
                    'relations: list[Relation] = None, pmids: list[int] = None, '
                    'text_description: str = None, limit: int = 20')

API_PREAMBLE = '''class Entity:
    """Entity(name="Insulin", entity_type=Entity_Type.CHEMICAL) or Entity(id="D007328")"""
    id: str
    name: str
    entity_type: Entity_Type

class Triplet:
    subject_entity: Entity
    relation: Relation
    object_entity: Entity

class Article:
    pmid: int
    title: str
    abstract: str'''


@dataclass(frozen=True)
class Tool:
    name: str
    signature: str
    returns: str
    doc: str
    handler: Callable[[Any, dict], str]

    def describe(self) -> str:
        return f'def {self.name}({self.signature}) -> {self.returns}:\n    """{self.doc}"""'


def _check_params(args: dict, allowed: Iterable[str]):
    allowed = set(allowed)
    for key in sorted(args):
        if key not in allowed:
            raise ToolArgumentError(key, 'unexpected argument')


def build_filter(args: dict) -> QueryFilter:
    _check_params(args, FILTER_PARAMS)
    try:
        return QueryFilter(**{k: v for k, v in args.items() if v is not None})
    except ValidationError as e:
        err = e.errors()[0]
        parameter = str(err['loc'][0]) if err['loc'] else 'filter'
        raise ToolArgumentError(parameter, err['msg']) from None


def _entity(args: dict, key: str) -> EntityRef:
    if args.get(key) is None:
        raise ToolArgumentError(key, 'missing required argument')

    value = args[key]
    if isinstance(value, EntityRef):
        return value
    if isinstance(value, str):
        return EntityRef(id=value)
    if isinstance(value, dict):
        try:
            return EntityRef.parse_obj(value)
        except ValidationError as e:
            raise ToolArgumentError(key, e.errors()[0]['msg']) from None

    raise ToolArgumentError(key, f'expected an Entity, got {type(value).__name__}')


def _pmids(args: dict, key: str = 'pmids') -> list[int]:
    value = args.get(key)
    if value is None:
        raise ToolArgumentError(key, 'missing required argument')
    if not isinstance(value, list):
        value = [value]

    try:
        return [int(p) for p in value]
    except (TypeError, ValueError):
        raise ToolArgumentError(key, 'expected a list of integer PMIDs') from None


def _positive_int(args: dict, key: str) -> Optional[int]:
    value = args.get(key)
    if value is None:
        return None
    if isinstance(value, bool) or not isinstance(value, int) or value < 1:
        raise ToolArgumentError(key, 'expected a positive integer')
    return value


def _filter_tool(method: str, renderer: Callable) -> Callable[[Any, dict], str]:
    def handler(service, args: dict) -> str:
        return renderer(getattr(service, method)(build_filter(args)))
    return handler


def _browse(service, args: dict) -> str:
    _check_params(args, ('pmids',))
    return render.render_browse(service.browse_articles(_pmids(args)))


def _paths(service, args: dict) -> str:
    _check_params(args, ('entity1', 'entity2', 'max_paths'))
    paths = service.get_shortest_entity_paths(_entity(args, 'entity1'), _entity(args, 'entity2'),
                                              _positive_int(args, 'max_paths'))
    return render.render_paths(paths)


def _mesh_tool(method: str) -> Callable[[Any, dict], str]:
    def handler(service, args: dict) -> str:
        _check_params(args, ('entity',))
        return render.render_entity_list(getattr(service, method)(_entity(args, 'entity')))
    return handler


def _relation_description(service, args: dict) -> str:
    _check_params(args, ('relation',))
    value = args.get('relation')
    if value is None:
        raise ToolArgumentError('relation', 'missing required argument')
    try:
        relation = RelationType(value)
    except ValueError:
        raise ToolArgumentError('relation', f'unknown relation {value!r}') from None
    return service.get_relation_description(relation)


def _entity_description(service, args: dict) -> str:
    _check_params(args, ('entity',))
    return render.render_mapping(service.get_entity_description(_entity(args, 'entity')))


TOOLS: tuple[Tool, ...] = (
    Tool('get_entities', FILTER_SIGNATURE, 'list[Entity]',
         'Retrieves a list of entities matching specified filters. Entity names are matched against text_description.',
         _filter_tool('get_entities', render.render_entities)),
    Tool('get_relations', FILTER_SIGNATURE, 'list[tuple[Relation, int]]',
         'Retrieves a list of relations matching specified filters, with the number of triplets per relation.',
         _filter_tool('get_relations', render.render_relations)),
    Tool('get_triplets', FILTER_SIGNATURE, 'list[Triplet]',
         'Retrieves a list of triplets matching specified filters.',
         _filter_tool('get_triplets', render.render_triplets)),
    Tool('get_articles', FILTER_SIGNATURE, 'list[int]',
         'Retrieves a list of PMIDs matching specified filters.',
         _filter_tool('get_articles', render.render_articles)),
    Tool('browse_articles', 'pmids: list[int]', 'list[Article]',
         'Returns metadata (title, abstract) for given PubMed IDs.', _browse),
    Tool('get_shortest_entity_paths', 'entity1: Entity, entity2: Entity, max_paths: int = 5', 'list[list[Entity]]',
         'Finds shortest paths between two entities in the knowledge graph.', _paths),
    Tool('get_mesh_parents', 'entity: Entity', 'list[Entity]',
         'Returns parent entities in MeSH for a disease or chemical.', _mesh_tool('get_mesh_parents')),
    Tool('get_mesh_children', 'entity: Entity', 'list[Entity]',
         'Returns child entities in MeSH for a disease or chemical.', _mesh_tool('get_mesh_children')),
    Tool('get_mesh_siblings', 'entity: Entity', 'list[Entity]',
         'Returns sibling entities in MeSH for a disease or chemical.', _mesh_tool('get_mesh_siblings')),
    Tool('get_relation_description', 'relation: Relation', 'str',
         'Returns the meaning of a relation and its valid subject and object entity types.', _relation_description),
    Tool('get_entity_description', 'entity: Entity', 'str',
         'Returns catalog metadata of an entity: name, type, MeSH tree numbers and its most frequent relations.',
         _entity_description),
)

TOOL_NAMES = tuple(t.name for t in TOOLS)


class ToolRegistry:
    """Tools an agent may call, bound to a KB service (in-process or remote)."""

    def __init__(self, service, enabled: Optional[Iterable[str]] = None):
        self.service = service
        enabled = set(TOOL_NAMES if enabled is None else enabled)
        unknown = enabled - set(TOOL_NAMES)
        if unknown:
            raise ValueError(f'Unknown tools: {", ".join(sorted(unknown))}')

        self.tools = {t.name: t for t in TOOLS if t.name in enabled}

    @property
    def names(self) -> list[str]:
        return list(self.tools)

    def api_description(self) -> str:
        if not self.tools:
            return 'No API functions are available.'

        return '\n\n'.join([API_PREAMBLE] + [t.describe() for t in self.tools.values()])


def execute_tool(registry: ToolRegistry, call: ApiCall) -> str:
    """Runs a call and renders the result. Failures are rendered as error observations."""
    tool = registry.tools.get(call.function_name)
    if tool is None:
        available = ', '.join(registry.names) or 'none'
        return f'error: unknown function "{call.function_name}". Available functions: {available}'

    try:
        return tool.handler(registry.service, dict(call.arguments))
    except ToolArgumentError as e:
        return f'error: {e}'
    except InvalidFilterError as e:
        return f'error: invalid filter: {e}'
    except NotFoundError as e:
        return f'error: not found: {e}'
    except ServiceError as e:
        logger.warning(f'KB service failed for {call.function_name}: {e}')
        return f'error: service unavailable: {e}'
    except Exception as e:
        logger.exception(f'Tool {call.function_name} failed')
        return f'error: {call.function_name} failed: {e}'


def detect_repeat(memory: MemoryLog, module: Module, call: ApiCall) -> int:
    return memory.count_calls(module, call.canonical_key)
