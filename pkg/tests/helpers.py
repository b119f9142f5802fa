import json
from typing import Optional

from src.agent.backend import ChatBackend, ScriptedBackend


def fenced(label: str, body: str, thought: str = '') -> str:
    prefix = f'{thought}\n' if thought else ''
    return f'{prefix}```{label}\n{body}\n```'


def propose(relation: str, description: str, thought: str = 'I have enough evidence.') -> str:
    return fenced('json', json.dumps({'Relation': relation, 'Hypothesis Description': description}), thought)


def assess(score: int, is_new: bool = True, feedback: str = 'ok', thought: str = 'Checking the proposal.') -> str:
    body = json.dumps({'Is New': str(is_new), 'Feedback': feedback, 'Evaluation Score': str(score)})
    return fenced('json', body, thought)


def call(expr: str, thought: str = 'Let me look this up.') -> str:
    return fenced('python', expr, thought)


def rule(response: str, module: str = None, outer: Optional[int] = None, inner: Optional[int] = None,
         contains: str = None) -> dict:
    return {'match': {'module': module, 'outer': outer, 'inner': inner, 'contains': contains},
            'response': response}


def scripted(*rules: dict) -> ScriptedBackend:
    return ScriptedBackend.from_dicts(rules)


class RecordingBackend(ChatBackend):
    """Wraps a backend and keeps every request it served."""

    def __init__(self, backend):
        self.backend = backend
        self.calls = []

    def complete(self, messages, temperature, turn=None):
        self.calls.append((list(messages), temperature, turn))
        return self.backend.complete(messages, temperature, turn)
