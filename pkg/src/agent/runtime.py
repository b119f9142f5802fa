import logging
import time
from typing import Callable, Optional

from src.agent import prompts
from src.agent.backend import ChatBackend, Message, Turn, complete_with_retry
from src.agent.memory import EpisodeMemory, MemoryLog, render_entries
from src.agent.models import ApiCall, ApiCallRecord, Assess, AssessmentRecord, EpisodeResult, Propose, QueryCase
from src.agent.parser import parse_action, split_response
from src.agent.tools import ToolRegistry, detect_repeat, execute_tool
from src.config import AgentConfig
from src.enum import Module, StepKind, TerminatedBy
from src.errors import ActionValidationError, BackendError, EpisodeError, HypogenError, ParseError
from src.kb.knowledge_base import KnowledgeBase

logger = logging.getLogger('debug')

PARSE_RETRY_HINT = 'Respond with one fenced ```python API call or one fenced ```json answer.'
UNPARSED_ASSESSMENT = 'Assessment could not be parsed.'


def _entity_params(case: QueryCase) -> dict:
    return {
        'entity1_name': case.subject.display_name,
        'entity1_type': case.subject.entity_type.prompt_name,
        'entity2_name': case.object.display_name,
        'entity2_type': case.object.entity_type.prompt_name,
    }


def kg_context(registry: ToolRegistry, case: QueryCase, depth: int, limit: int) -> str:
    """Depth-limited graph neighbourhood of both query entities, rendered one triplet per line."""
    seen = set()
    lines = []
    for entity in (case.subject, case.object):
        try:
            records = registry.service.walk(entity.id, depth, limit)
        except HypogenError as e:
            logger.warning(f'Knowledge graph walk from {entity.id} failed: {e}')
            continue

        for record in records:
            if record.key not in seen:
                seen.add(record.key)
                lines.append(f'- {record.triplet}')

    return prompts.render_prompt(prompts.KG_CONTEXT, {'walk': '\n'.join(lines) or 'No results.'})


class Episode:
    """One query case worked through by the Generation and Evaluation modules."""

    def __init__(self, case: QueryCase, config: AgentConfig, registry: ToolRegistry, kb: KnowledgeBase,
                 backend: ChatBackend, sleep: Callable[[float], None] = time.sleep):
        self.case = case
        self.config = config
        self.registry = registry
        self.kb = kb
        self.backend = backend
        self.sleep = sleep
        self.memory = EpisodeMemory(config.architecture)
        self.result = EpisodeResult(case, None, None,
                                    inner_iterations={Module.generation.value: [], Module.evaluation.value: []})

        system_params = {
            'api_description': registry.api_description(),
            'max_outer_iterations': config.max_outer_iterations,
            'max_inner_iterations': config.max_inner_iterations,
            'evaluation_threshold': config.evaluation_threshold,
            'max_retries': config.max_retries,
        }
        self.system_prompts = {
            Module.generation: prompts.render_prompt(prompts.GENERATION_SYSTEM, system_params),
            Module.evaluation: prompts.render_prompt(prompts.EVALUATION_SYSTEM, system_params),
        }
        self.kg_block = ''
        if config.kg_walk_depth:
            self.kg_block = kg_context(registry, case, config.kg_walk_depth, config.kg_walk_limit)

    def novelty(self, proposal: Propose) -> bool:
        return not self.kb.contains(self.case.triplet(proposal.relation), undirected=self.config.undirected_novelty)

    def _complete(self, messages: list[Message], temperature: float, turn: Turn) -> str:
        self.result.backend_calls += 1
        return complete_with_retry(self.backend, messages, temperature, turn,
                                   retries=self.config.backend_retries, delay=self.config.retry_delay,
                                   sleep=self.sleep)

    def _messages(self, module: Module, query: str) -> list[Message]:
        if self.kg_block:
            query = f'{query}\n{self.kg_block}'
        return [{'role': 'system', 'content': self.system_prompts[module]}, {'role': 'user', 'content': query}]

    def _query(self, module: Module, log: MemoryLog, proposal: Optional[Propose]) -> str:
        params = {**_entity_params(self.case), 'scratchpad': log.render()}
        if module is Module.generation:
            last = self.result.assessments[-1].assessment if self.result.assessments else None
            params['last_assessment'] = str(last) if last else 'None'
            return prompts.render_prompt(prompts.GENERATION_QUERY, params)

        params['current_proposal'] = str(proposal)
        return prompts.render_prompt(prompts.EVALUATION_QUERY, params)

    def _run_call(self, module: Module, log: MemoryLog, outer: int, inner: int, call: ApiCall):
        key = call.canonical_key
        repeats = detect_repeat(log, module, call)
        log.append(StepKind.action, module, outer, inner, str(call), call_key=key)

        if repeats >= self.config.max_retries:
            observation = (f'repeat limit reached: {call.function_name} was already called with the same '
                           f'arguments {repeats} time(s). Use a different call or give your answer.')
            executed = False
            logger.debug(f'{self.case.id}: skipped repeated call {call}')
        else:
            observation = execute_tool(self.registry, call)
            executed = True

        log.append(StepKind.observation, module, outer, inner, observation)
        self.result.api_call_log.append(ApiCallRecord(module, outer, inner, call, observation, executed))

    def _react(self, module: Module, outer: int, proposal: Optional[Propose]):
        """Runs inner iterations until the module emits its answer. Returns (answer, inner) or (None, cap)."""
        log = self.memory.view(module)
        temperature = self.config.temperature_react

        for inner in range(1, self.config.max_inner_iterations + 1):
            text = self._complete(self._messages(module, self._query(module, log, proposal)), temperature,
                                  Turn(module, outer, inner))
            thought, block = split_response(text)
            if thought:
                log.append(StepKind.thought, module, outer, inner, thought)

            try:
                action = parse_action(text, module)
            except (ParseError, ActionValidationError) as e:
                log.append(StepKind.action, module, outer, inner, block or '(no action)')
                log.append(StepKind.observation, module, outer, inner, f'error: {e}. {PARSE_RETRY_HINT}')
                continue

            if isinstance(action, ApiCall):
                self._run_call(module, log, outer, inner, action)
                continue

            log.append(StepKind.action, module, outer, inner, str(action))
            self.result.inner_iterations[module.value].append(inner)
            return action

        self.result.inner_iterations[module.value].append(self.config.max_inner_iterations)
        return None

    def _forced(self, module: Module, outer: int, proposal: Optional[Propose]):
        log = self.memory.view(module)
        inner = self.config.max_inner_iterations + 1
        template = prompts.FORCED_PROPOSAL if module is Module.generation else prompts.FORCED_ASSESSMENT

        messages = self._messages(module, self._query(module, log, proposal))
        messages.append({'role': 'user', 'content': prompts.render_prompt(template, {})})
        text = self._complete(messages, self.config.temperature_react, Turn(module, outer, inner))

        try:
            action = parse_action(text, module)
        except (ParseError, ActionValidationError) as e:
            logger.warning(f'{self.case.id}: forced {module.value} turn at outer {outer} not parsed: {e}')
            action = None

        if isinstance(action, ApiCall):
            action = None
        if action is not None:
            log.append(StepKind.action, module, outer, inner, str(action))
        return action

    def run_generation(self, outer: int) -> Propose:
        proposal = self._react(Module.generation, outer, None)
        if proposal is None:
            proposal = self._forced(Module.generation, outer, None)

        if proposal is None:
            if not self.result.proposals:
                raise EpisodeError(f'No proposal could be obtained for case {self.case.id}')
            proposal = self.result.proposals[-1]
            logger.warning(f'{self.case.id}: falling back to the previous proposal at outer {outer}')

        self.result.proposals.append(proposal)
        self.memory.handoff(Module.evaluation, outer, f'Proposed hypothesis: {proposal}')
        return proposal

    def run_evaluation(self, outer: int, proposal: Propose) -> Assess:
        runtime_new = self.novelty(proposal)
        forced = False

        assessment = self._react(Module.evaluation, outer, proposal)
        if assessment is None:
            forced = True
            assessment = self._forced(Module.evaluation, outer, proposal)
        if assessment is None:
            assessment = Assess(runtime_new, UNPARSED_ASSESSMENT, 0)

        self.result.assessments.append(AssessmentRecord(outer, proposal, assessment, runtime_new, forced))
        self.memory.handoff(Module.generation, outer, f'Assessment: {assessment}')
        return assessment

    def extract_final(self) -> Propose:
        entries = self.memory.extractor_entries(self.config.extractor_context)
        params = {**_entity_params(self.case), 'scratchpad': render_entries(entries)}
        messages = [{'role': 'user', 'content': prompts.render_prompt(prompts.EXTRACTOR, params)}]
        fallback = self.result.proposals[-1]

        try:
            text = self._complete(messages, self.config.temperature_extract,
                                  Turn(Module.extractor, self.result.outer_iterations_used, None))
            action = parse_action(text, Module.extractor)
        except (ParseError, ActionValidationError, BackendError) as e:
            logger.warning(f'{self.case.id}: extractor failed ({e}), using the last proposal')
            return fallback

        return action if isinstance(action, Propose) else fallback

    def run(self) -> EpisodeResult:
        result = self.result
        for outer in range(1, self.config.max_outer_iterations + 1):
            result.outer_iterations_used = outer
            proposal = self.run_generation(outer)

            if not self.config.self_evaluation:
                result.proposal = proposal
                result.terminated_by = TerminatedBy.generation_only
                return result

            assessment = self.run_evaluation(outer, proposal)
            if assessment.score >= self.config.evaluation_threshold and result.assessments[-1].runtime_is_new:
                result.proposal = proposal
                result.terminated_by = TerminatedBy.threshold
                return result

        result.proposal = self.extract_final()
        result.terminated_by = TerminatedBy.extractor
        return result


def run_episode(case: QueryCase, config: AgentConfig, registry: ToolRegistry, kb: KnowledgeBase,
                backend: ChatBackend, sleep: Callable[[float], None] = time.sleep) -> EpisodeResult:
    """Runs one episode. Failures are returned as a failed result instead of raised."""
    episode = Episode(case, config, registry, kb, backend, sleep)
    try:
        result = episode.run()
    except HypogenError as e:
        logger.exception(f'Episode {case.id} failed')
        result = episode.result
        result.failed = True
        result.error = f'{type(e).__name__}: {e}'

    result.trace = episode.memory.all_entries()
    logger.info(f'Episode {case.id} finished: terminated_by={result.terminated_by and result.terminated_by.value} '
                f'outer={result.outer_iterations_used} failed={result.failed}')
    return result
