import logging
from typing import Iterable, Union

import requests

from src.enum import MeshDirection, RelationType
from src.errors import InvalidFilterError, NotFoundError, ServiceError
from src.graph.knowledge_graph import EntityPath
from src.kb.models import Article, Entity, HypothesisRecord
from src.query.filters import BrowseResult, EntityRef, QueryFilter, RankedHit, RelationCount
from src.utils import dumps

logger = logging.getLogger('debug')


def _ref(entity) -> EntityRef:
    if isinstance(entity, EntityRef):
        return entity
    if isinstance(entity, Entity):
        return EntityRef.of(entity)
    if isinstance(entity, str):
        return EntityRef(id=entity)
    return EntityRef.parse_obj(entity)


class KBApi:
    """
    Client of a running KB service. Methods mirror KBService and return the
    same domain objects, so a ToolRegistry works over either.
    """

    def __init__(self, base_url: str, timeout: float = 30, session: requests.Session = None):
        self.base_url = base_url.rstrip('/')
        self.timeout = timeout
        self.session = session or requests.Session()

    def _request(self, method: str, path: str, body=None, params: dict = None) -> dict:
        url = f'{self.base_url}{path}'
        try:
            resp = self.session.request(
                method, url,
                data=dumps(body) if body is not None else None,
                params=params,
                headers={'Content-Type': 'application/json'},
                timeout=self.timeout,
            )
        except requests.RequestException as e:
            logger.exception(f'Request to {url} failed')
            raise ServiceError(f'{method} {path} failed: {e}') from e

        try:
            js = resp.json()
        except ValueError:
            raise ServiceError(f'{method} {path} returned non-JSON status {resp.status_code}') from None

        if resp.status_code < 400:
            return js

        message = (js.get('error') or {}).get('message', resp.text) if isinstance(js, dict) else resp.text
        if resp.status_code == 400:
            raise InvalidFilterError(message)
        if resp.status_code == 404:
            raise NotFoundError(message)
        raise ServiceError(f'{method} {path} returned {resp.status_code}: {message}')

    def health(self) -> bool:
        return self._request('GET', '/v1/health').get('status') == 'ok'

    def get_entities(self, f: QueryFilter) -> list[RankedHit]:
        js = self._request('POST', '/v1/entities', f)
        return [RankedHit(Entity.from_dict(i['item']), i['score']) for i in js['items']]

    def get_relations(self, f: QueryFilter) -> list[RelationCount]:
        js = self._request('POST', '/v1/relations', f)
        return [RelationCount(RelationType(i['relation']), i['frequency']) for i in js['items']]

    def get_triplets(self, f: QueryFilter) -> list[RankedHit]:
        js = self._request('POST', '/v1/triplets', f)
        return [RankedHit(HypothesisRecord.from_dict(i['item']), i['score']) for i in js['items']]

    def get_articles(self, f: QueryFilter) -> list[RankedHit]:
        js = self._request('POST', '/v1/articles', f)
        return [RankedHit(int(i['item']), i['score']) for i in js['items']]

    def browse_articles(self, pmids: Iterable[int]) -> BrowseResult:
        js = self._request('POST', '/v1/articles/browse', {'pmids': list(pmids or [])})
        return BrowseResult([Article.from_dict(a) for a in js['items']], list(js.get('missing', [])))

    def get_shortest_entity_paths(self, src, dst, max_paths: int = None) -> list[EntityPath]:
        body = {'src': _ref(src), 'dst': _ref(dst), 'max_paths': max_paths}
        js = self._request('POST', '/v1/graph/shortest_paths', body)
        return [EntityPath.from_dict(p) for p in js['items']]

    def walk(self, entity, depth: int = 2, limit: int = 20) -> list[HypothesisRecord]:
        js = self._request('POST', '/v1/graph/walk', {'entity': _ref(entity), 'depth': depth, 'limit': limit})
        return [HypothesisRecord.from_dict(r) for r in js['items']]

    def _entity_id(self, entity) -> str:
        ref = _ref(entity)
        if ref.id:
            return ref.id

        hits = self.get_entities(QueryFilter(head_entities=[ref], limit=1))
        if not hits:
            raise NotFoundError(f'Entity {ref} not found')
        return hits[0].item.id

    def get_mesh(self, entity, direction: MeshDirection) -> list[Entity]:
        js = self._request('GET', f'/v1/mesh/{direction.value}', params={'entity_id': self._entity_id(entity)})
        return [Entity.from_dict(e) for e in js['items']]

    def get_mesh_parents(self, entity) -> list[Entity]:
        return self.get_mesh(entity, MeshDirection.parents)

    def get_mesh_children(self, entity) -> list[Entity]:
        return self.get_mesh(entity, MeshDirection.children)

    def get_mesh_siblings(self, entity) -> list[Entity]:
        return self.get_mesh(entity, MeshDirection.siblings)

    def get_relation_description(self, relation: Union[RelationType, str]) -> str:
        relation = RelationType(relation)
        return self._request('GET', f'/v1/relations/{relation.value}/description')['description']

    def get_entity_description(self, entity) -> dict:
        return self._request('POST', '/v1/entities/describe', {'entity': _ref(entity)})['description']


def connect(base_url: str, timeout: float = 30) -> KBApi:
    """Client for a service that answers its health check."""
    api = KBApi(base_url, timeout)
    if not api.health():
        raise ServiceError(f'KB service at {base_url} is not healthy')
    return api
