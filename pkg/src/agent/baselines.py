import logging
import time
from typing import Callable

from src.agent import prompts
from src.agent.backend import ChatBackend, Turn, complete_with_retry
from src.agent.models import EpisodeResult, Propose, QueryCase
from src.agent.parser import parse_action
from src.config import AgentConfig
from src.enum import BaselineKind, Module, TerminatedBy
from src.errors import ActionValidationError, EpisodeError, HypogenError, NotFoundError, ParseError
from src.query import render
from src.query.filters import EntityRef, QueryFilter, RankedHit

logger = logging.getLogger('debug')

INSTRUCTIONS = {
    BaselineKind.cot: "Let's think step by step about how the two entities could be related, "
                      'then give your answer in the JSON format above.',
    BaselineKind.triplet_rag: 'Use the following triplets from the historical dataset as context.',
    BaselineKind.article_rag: 'Use the following historical articles as context.',
}

ARTICLE_CONTEXT_SIZE = 5


def triplet_context(service, case: QueryCase, limit: int = 20) -> str:
    """Records touching either query entity, most supported first."""
    records = {}
    for entity in (case.subject, case.object):
        ref = EntityRef(id=entity.id)
        for f in (QueryFilter(head_entities=[ref], limit=limit), QueryFilter(tail_entities=[ref], limit=limit)):
            for hit in service.get_triplets(f):
                records[hit.item.key] = hit.item

    ordered = sorted(records.values(), key=lambda r: (-len(r.pmids), r.key))[:limit]
    return render.render_triplets([RankedHit(r) for r in ordered])


def article_context(service, case: QueryCase, limit: int = ARTICLE_CONTEXT_SIZE) -> str:
    """The articles most text-relevant to the entity names."""
    text = f'{case.subject.display_name} {case.object.display_name}'
    hits = service.get_articles(QueryFilter(text_description=text, limit=limit))
    if not hits:
        return render.EMPTY

    try:
        return render.render_browse(service.browse_articles([h.item for h in hits]))
    except NotFoundError:
        return render.EMPTY


def baseline_context(kind: BaselineKind, service, case: QueryCase) -> str:
    if kind is BaselineKind.triplet_rag:
        return triplet_context(service, case)
    if kind is BaselineKind.article_rag:
        return article_context(service, case)
    return ''


def run_baseline(kind: BaselineKind, case: QueryCase, service, backend: ChatBackend, config: AgentConfig,
                 sleep: Callable[[float], None] = time.sleep) -> EpisodeResult:
    """Single-completion baseline. Failures are returned as a failed result like episodes."""
    kind = BaselineKind(kind)
    result = EpisodeResult(case, None, None)

    try:
        params = {
            'entity1_name': case.subject.display_name,
            'entity1_type': case.subject.entity_type.prompt_name,
            'entity2_name': case.object.display_name,
            'entity2_type': case.object.entity_type.prompt_name,
            'instruction': INSTRUCTIONS[kind],
            'context': baseline_context(kind, service, case),
        }
        messages = [
            {'role': 'system', 'content': prompts.render_prompt(prompts.BASELINE_SYSTEM, {})},
            {'role': 'user', 'content': prompts.render_prompt(prompts.BASELINE_QUERY, params)},
        ]

        result.backend_calls += 1
        text = complete_with_retry(backend, messages, config.temperature_react, Turn(Module.baseline, 1, 1),
                                   retries=config.backend_retries, delay=config.retry_delay, sleep=sleep)
        try:
            proposal = parse_action(text, Module.baseline)
        except (ParseError, ActionValidationError) as e:
            raise EpisodeError(f'Baseline answer could not be parsed: {e}') from e
        if not isinstance(proposal, Propose):
            raise EpisodeError('Baseline answer is not a proposal')

    except HypogenError as e:
        logger.exception(f'Baseline {kind.value} failed for {case.id}')
        result.failed = True
        result.error = f'{type(e).__name__}: {e}'
        return result

    result.proposal = proposal
    result.proposals.append(proposal)
    result.outer_iterations_used = 1
    result.terminated_by = TerminatedBy.baseline
    return result
