from datetime import date
from pathlib import Path
from typing import Optional, List, Union

import yaml
from pydantic import BaseModel, ValidationError, validator, root_validator

from src.enum.enums import Architecture, BaselineKind, ExtractorContext, Preset, RelatedMode
from src.errors import ConfigError

PRESET_TOOLS = {
    Preset.relation_only: ['get_relations'],
    Preset.triplet_only: ['get_triplets'],
    Preset.article_only: ['get_articles', 'browse_articles'],
    Preset.kg_only: [],
}


class AgentConfig(BaseModel):
    max_outer_iterations: int = 3
    max_inner_iterations: int = 10
    evaluation_threshold: int = 50
    max_retries: int = 1
    temperature_react: float = 0.7
    temperature_extract: float = 0.2
    architecture: Architecture = Architecture.single
    extractor_context: ExtractorContext = ExtractorContext.generation
    self_evaluation: bool = True
    undirected_novelty: bool = False

    # None enables every tool
    tools: Optional[List[str]] = None
    kg_walk_depth: Optional[int] = None
    kg_walk_limit: int = 20

    backend_retries: int = 2
    retry_delay: float = 1.0

    class Config:
        extra = 'forbid'

    @validator('max_outer_iterations', 'max_inner_iterations', 'max_retries', 'kg_walk_limit')
    def validate_count(cls, v, field):
        if v < 1:
            raise ValueError(f'{field.name} must be at least 1')
        return v

    @validator('evaluation_threshold')
    def validate_threshold(cls, v):
        if not 0 <= v <= 100:
            raise ValueError('evaluation_threshold must be between 0 and 100')
        return v

    @validator('backend_retries')
    def validate_retries(cls, v):
        if v < 0:
            raise ValueError('backend_retries must not be negative')
        return v

    @validator('kg_walk_depth')
    def validate_depth(cls, v):
        if v is not None and v < 1:
            raise ValueError('kg_walk_depth must be at least 1')
        return v


def apply_preset(config: AgentConfig, preset: Union[Preset, str, None]) -> AgentConfig:
    """Ablation setting on top of a base config. Architecture and threshold are kept."""
    if preset is None:
        return config

    preset = Preset(preset)
    if preset is Preset.generation_only:
        return config.copy(update={'self_evaluation': False})

    update = {'tools': list(PRESET_TOOLS[preset])}
    if preset is Preset.kg_only:
        update['kg_walk_depth'] = config.kg_walk_depth or 2
    return config.copy(update=update)


class BackendConfig(BaseModel):
    replay: Optional[Path] = None
    endpoint: Optional[str] = None
    model: str = 'gpt-4o-mini'
    api_key_env: str = 'OPENAI_API_KEY'
    timeout: float = 60

    @property
    def is_live(self) -> bool:
        return self.endpoint is not None


class GraphConfig(BaseModel):
    max_paths: int = 5
    max_hops: Optional[int] = 4

    @validator('max_paths')
    def validate_max_paths(cls, v):
        if v < 1:
            raise ValueError('max_paths must be at least 1')
        return v


class QueryConfig(BaseModel):
    # Remote KB service; the snapshot is queried in-process when unset
    service_url: Optional[str] = None
    timeout: float = 30


class EvalConfig(BaseModel):
    related_mode: RelatedMode = RelatedMode.either
    related_cap: int = 20
    target: str = 'D003920'
    top_journals: int = 50
    window_start: date = date(2024, 1, 1)
    window_end: date = date(2024, 12, 31)

    @validator('window_end')
    def validate_window(cls, v, values):
        start = values.get('window_start')
        if start and v < start:
            raise ValueError('window_end is before window_start')
        return v


class RunConfig(BaseModel):
    kb: Optional[Path] = None
    tests: Optional[Path] = None
    out: Optional[Path] = None
    parallelism: int = 1
    preset: Optional[Preset] = None
    baseline: Optional[BaselineKind] = None

    agent: AgentConfig = AgentConfig()
    backend: BackendConfig = BackendConfig()
    graph: GraphConfig = GraphConfig()
    query: QueryConfig = QueryConfig()
    eval: EvalConfig = EvalConfig()

    @validator('parallelism')
    def validate_parallelism(cls, v):
        if v < 1:
            raise ValueError('parallelism must be at least 1')
        return v

    @root_validator(skip_on_failure=True)
    def validate_backend(cls, values):
        backend: BackendConfig = values['backend']
        if backend.replay is not None and backend.endpoint is not None:
            raise ValueError('Set either backend.replay or backend.endpoint, not both')
        return values

    def require_backend(self):
        if self.backend.replay is None and self.backend.endpoint is None:
            raise ConfigError('Either a replay script or a live endpoint is required')

    @property
    def effective_agent(self) -> AgentConfig:
        return apply_preset(self.agent, self.preset)

    @classmethod
    def load(cls, path: Union[str, Path, None] = None, **overrides) -> 'RunConfig':
        """
        Reads a YAML config and applies overrides on top. Nested sections take
        dotted keys, e.g. ``**{'agent.evaluation_threshold': 70}``. None overrides are ignored.
        """
        data = {}
        if path is not None:
            try:
                with open(path, 'r', encoding='utf-8') as f:
                    data = yaml.load(f, yaml.SafeLoader) or {}
            except (OSError, yaml.YAMLError) as e:
                raise ConfigError(f'Could not read config {path}: {e}') from e

            if not isinstance(data, dict):
                raise ConfigError(f'Config {path} must be a mapping')

        for key, value in overrides.items():
            if value is None:
                continue

            section, _, name = key.rpartition('.')
            target = data
            if section:
                target = data.setdefault(section, {})
                if not isinstance(target, dict):
                    raise ConfigError(f'Config section {section} must be a mapping')
            target[name] = value

        try:
            return cls(**data)
        except ValidationError as e:
            raise ConfigError(str(e)) from e
