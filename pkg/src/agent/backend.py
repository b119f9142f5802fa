import logging
import os
import time
from abc import ABC, abstractmethod
from dataclasses import dataclass
from typing import Callable, Iterable, Optional, Sequence

import openai

from src.enum import Module
from src.errors import BackendError, ReplayMismatchError
from src.utils import read_jsonl

logger = logging.getLogger('debug')

Message = dict[str, str]


@dataclass(frozen=True)
class Turn:
    module: Module
    outer: Optional[int] = None
    inner: Optional[int] = None

    def __str__(self):
        return f'{self.module.value} {self.outer}.{self.inner}'


class ChatBackend(ABC):
    """Chat completion contract. Implementations must be callable from several episodes at once."""

    @abstractmethod
    def complete(self, messages: Sequence[Message], temperature: float, turn: Turn = None) -> str:
        raise NotImplementedError


@dataclass(frozen=True)
class ReplayRule:
    response: str
    module: Optional[Module] = None
    outer: Optional[int] = None
    inner: Optional[int] = None
    contains: Optional[str] = None

    @classmethod
    def from_dict(cls, d: dict):
        match = d.get('match') or {}
        module = match.get('module')
        return cls(
            response=d['response'],
            module=Module(module) if module else None,
            outer=match.get('outer'),
            inner=match.get('inner'),
            contains=match.get('contains'),
        )

    def matches(self, turn: Optional[Turn], text: str) -> bool:
        if self.module is not None and (turn is None or turn.module is not self.module):
            return False
        if self.outer is not None and (turn is None or turn.outer != self.outer):
            return False
        if self.inner is not None and (turn is None or turn.inner != self.inner):
            return False
        if self.contains is not None and self.contains not in text:
            return False
        return True


class ScriptedBackend(ChatBackend):
    """
    Replays responses from rules. The first matching rule wins and no state is
    kept between calls, so replies depend only on the turn and the prompt.
    """

    def __init__(self, rules: Iterable[ReplayRule]):
        self.rules = tuple(rules)

    @classmethod
    def from_dicts(cls, rows: Iterable[dict]) -> 'ScriptedBackend':
        return cls(ReplayRule.from_dict(r) for r in rows)

    @classmethod
    def load(cls, path: str) -> 'ScriptedBackend':
        return cls.from_dicts(read_jsonl(path))

    def complete(self, messages: Sequence[Message], temperature: float, turn: Turn = None) -> str:
        text = '\n'.join(m.get('content', '') for m in messages)
        for rule in self.rules:
            if rule.matches(turn, text):
                return rule.response

        raise ReplayMismatchError(f'No replay rule matches turn {turn}')


class OpenAIBackend(ChatBackend):
    def __init__(self, model: str, endpoint: str = None, api_key_env: str = 'OPENAI_API_KEY',
                 timeout: float = 60.0):
        self.model = model
        self.client = openai.OpenAI(base_url=endpoint, api_key=os.getenv(api_key_env), timeout=timeout)

    def complete(self, messages: Sequence[Message], temperature: float, turn: Turn = None) -> str:
        try:
            resp = self.client.chat.completions.create(
                model=self.model,
                messages=list(messages),
                temperature=temperature,
            )
        except openai.OpenAIError as e:
            raise BackendError(f'Chat completion failed for turn {turn}: {e}') from e

        return resp.choices[0].message.content or ''


def complete_with_retry(backend: ChatBackend, messages: Sequence[Message], temperature: float,
                        turn: Turn = None, retries: int = 2, delay: float = 1.0,
                        sleep: Callable[[float], None] = time.sleep) -> str:
    attempt = 0
    while True:
        try:
            return backend.complete(messages, temperature, turn)
        except BackendError:
            if attempt >= retries:
                raise

            wait = delay * 2 ** attempt
            logger.warning(f'Backend call for turn {turn} failed, retrying in {wait:.1f}s')
            sleep(wait)
            attempt += 1


def make_backend(config) -> ChatBackend:
    """Backend for a BackendConfig: the replay script when set, else the live endpoint."""
    if config.replay is not None:
        logger.info(f'Using scripted backend {config.replay}')
        return ScriptedBackend.load(str(config.replay))

    logger.info(f'Using live backend {config.model} at {config.endpoint}')
    return OpenAIBackend(config.model, config.endpoint, config.api_key_env, config.timeout)
