import logging
from typing import List, Optional

import uvicorn
from fastapi import FastAPI, Request
from fastapi.exceptions import RequestValidationError
from fastapi.responses import Response
from pydantic import BaseModel, ValidationError, validator

from src.enum import MeshDirection, RelationType
from src.errors import InvalidFilterError, NotFoundError
from src.query.filters import EntityRef, QueryFilter
from src.query.service import KBService
from src.utils import dumps

logger = logging.getLogger('debug')


class BrowseBody(BaseModel):
    pmids: List[int]


class PathsBody(BaseModel):
    src: EntityRef
    dst: EntityRef
    max_paths: Optional[int] = None

    @validator('src', 'dst', pre=True)
    def validate_entity(cls, v):
        # a bare string is an entity id
        return {'id': v} if isinstance(v, str) else v


class WalkBody(BaseModel):
    entity: EntityRef
    depth: int = 2
    limit: int = 20


class EntityBody(BaseModel):
    entity: EntityRef


def json_response(payload, status_code: int = 200) -> Response:
    return Response(content=dumps(payload, sort_keys=True), status_code=status_code,
                    media_type='application/json')


def items(values: list, **extra) -> Response:
    return json_response({'items': [v.to_dict() if hasattr(v, 'to_dict') else v for v in values],
                          'count': len(values), **extra})


def error_response(status_code: int, code: str, message: str) -> Response:
    return json_response({'error': {'code': code, 'message': message}}, status_code)


def create_app(service: KBService) -> FastAPI:
    """HTTP/JSON surface of a KB service. Every endpoint is a thin wrapper over one service call."""
    app = FastAPI(title='hypogen KB service')
    app.state.service = service

    @app.exception_handler(InvalidFilterError)
    async def invalid_filter(request: Request, exc: InvalidFilterError):
        return error_response(400, InvalidFilterError.code, str(exc))

    @app.exception_handler(RequestValidationError)
    async def invalid_body(request: Request, exc: RequestValidationError):
        return error_response(400, InvalidFilterError.code, str(exc))

    @app.exception_handler(ValidationError)
    async def invalid_value(request: Request, exc: ValidationError):
        return error_response(400, InvalidFilterError.code, str(exc))

    @app.exception_handler(NotFoundError)
    async def not_found(request: Request, exc: NotFoundError):
        return error_response(404, NotFoundError.code, str(exc))

    @app.get('/v1/health')
    def health():
        return json_response({'status': 'ok'})

    @app.post('/v1/entities')
    def entities(f: QueryFilter):
        return items(service.get_entities(f))

    @app.post('/v1/relations')
    def relations(f: QueryFilter):
        return items(service.get_relations(f))

    @app.post('/v1/triplets')
    def triplets(f: QueryFilter):
        return items(service.get_triplets(f))

    @app.post('/v1/articles')
    def articles(f: QueryFilter):
        return items(service.get_articles(f))

    @app.post('/v1/articles/browse')
    def browse(body: BrowseBody):
        result = service.browse_articles(body.pmids)
        return items(result.articles, missing=result.missing)

    @app.post('/v1/graph/shortest_paths')
    def shortest_paths(body: PathsBody):
        return items(service.get_shortest_entity_paths(body.src, body.dst, body.max_paths))

    @app.post('/v1/graph/walk')
    def graph_walk(body: WalkBody):
        return items(service.walk(body.entity, body.depth, body.limit))

    @app.get('/v1/mesh/{direction}')
    def mesh(direction: MeshDirection, entity_id: str):
        return items(service.get_mesh(EntityRef(id=entity_id), direction))

    @app.get('/v1/relations/{relation}/description')
    def relation_description(relation: RelationType):
        return json_response({'description': service.get_relation_description(relation)})

    @app.post('/v1/entities/describe')
    def entity_description(body: EntityBody):
        return json_response({'description': service.get_entity_description(body.entity)})

    return app


def serve(service: KBService, host: str = '127.0.0.1', port: int = 8000):
    logger.info(f'Serving KB service on {host}:{port}')
    uvicorn.run(create_app(service), host=host, port=port, log_config=None)
