import logging
import time
from typing import Callable, Iterable, Mapping

from src.agent import prompts
from src.agent.backend import ChatBackend, Message, Turn, complete_with_retry
from src.agent.parser import last_block, parse_json_block, parse_score
from src.enum import Module, RelatedMode
from src.errors import ActionValidationError, HypogenError, ParseError
from src.harness.metrics import JudgeScores
from src.harness.testset import TestCase, related_past_pmids
from src.kb.knowledge_base import KnowledgeBase
from src.kb.models import Article
from src.query.text_index import TextIndex

logger = logging.getLogger('debug')

NOVELTY_KEY = 'Novelty Score'
ALIGNMENT_KEY = 'Alignment Score'
RELATED_CAP = 20
REASK = ('Your previous answer could not be parsed ({error}). Output only the JSON object '
         'with "Novelty Score" and "Alignment Score" inside a ```json block.')


def render_literature(articles: Iterable[Article]) -> str:
    return '\n'.join(f'PMID {a.pmid}: {a.title}\n{a.abstract}' for a in articles) or 'None'


def related_literature(articles: Mapping[int, Article], pmids: Iterable[int], description: str,
                       cap: int = RELATED_CAP) -> list[Article]:
    """The `cap` articles most relevant to the description, ties by pmid."""
    docs = {p: articles[p].text for p in sorted(set(pmids)) if p in articles}
    if not docs:
        return []

    ranked = TextIndex(docs).rank(description, keep_zero=True)
    return [articles[p] for p, _ in ranked[:cap]]


def parse_judge(text: str) -> JudgeScores:
    block = last_block(text)
    if block is None:
        raise ParseError('no fenced ```json block found')

    obj = parse_json_block(block[1])
    for key in (NOVELTY_KEY, ALIGNMENT_KEY):
        if key not in obj:
            raise ParseError(f'missing key "{key}"')

    return JudgeScores(parse_score(obj[NOVELTY_KEY], NOVELTY_KEY), parse_score(obj[ALIGNMENT_KEY], ALIGNMENT_KEY))


def judge_messages(case: TestCase, description: str, kb: KnowledgeBase, test_articles: Mapping[int, Article],
                   related_mode: RelatedMode = RelatedMode.either, cap: int = RELATED_CAP) -> list[Message]:
    pmids = case.related_past_pmids
    if related_mode is RelatedMode.both:
        pmids = related_past_pmids(kb, case.subject.id, case.object.id, RelatedMode.both)

    truth = [test_articles[p] for p in sorted(case.truth_pmids) if p in test_articles]
    params = {
        'entity1_name': case.subject.display_name,
        'entity2_name': case.object.display_name,
        'proposed_hypothesis_description': description,
        'related_past_literature': render_literature(related_literature(kb.articles, pmids, description, cap)),
        'ground_truth_literature': render_literature(truth),
    }
    return [{'role': 'user', 'content': prompts.render_prompt(prompts.JUDGE, params)}]


def judge_descriptions(backend: ChatBackend, case: TestCase, description: str, kb: KnowledgeBase,
                       test_articles: Mapping[int, Article], temperature: float = 0.2,
                       related_mode: RelatedMode = RelatedMode.either, retries: int = 2, delay: float = 1.0,
                       sleep: Callable[[float], None] = time.sleep) -> JudgeScores:
    """
    Scores a hypothesis description against past and ground-truth literature.
    An unparseable answer is re-asked once; after that the scores are missing.
    """
    messages = judge_messages(case, description, kb, test_articles, related_mode)

    for attempt in (1, 2):
        try:
            text = complete_with_retry(backend, messages, temperature, Turn(Module.judge, None, attempt),
                                       retries=retries, delay=delay, sleep=sleep)
        except HypogenError:
            logger.exception(f'Judge call failed for {case.id}')
            return JudgeScores()

        try:
            return parse_judge(text)
        except (ParseError, ActionValidationError) as e:
            logger.warning(f'Judge answer for {case.id} not parsed on attempt {attempt}: {e}')
            messages = messages + [{'role': 'assistant', 'content': text},
                                   {'role': 'user', 'content': REASK.format(error=e)}]

    return JudgeScores()
