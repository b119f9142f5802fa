from dataclasses import dataclass, field
from typing import Any, Optional, Union

from src.enum import Module, RelationType, TerminatedBy
from src.kb.models import Entity, Triplet
from src.utils import dumps


@dataclass(frozen=True)
class ApiCall:
    function_name: str
    arguments: dict[str, Any] = field(default_factory=dict)

    @property
    def canonical_key(self) -> str:
        return dumps({'function': self.function_name, 'arguments': self.arguments}, sort_keys=True)

    def to_dict(self) -> dict:
        return {'function_name': self.function_name,
                'arguments': {k: self.arguments[k] for k in sorted(self.arguments)}}

    def __str__(self):
        args = ', '.join(f'{k}={dumps(v, sort_keys=True)}' for k, v in sorted(self.arguments.items()))
        return f'{self.function_name}({args})'


@dataclass(frozen=True)
class Propose:
    relation: RelationType
    description: str

    def to_dict(self) -> dict:
        return {'Relation': self.relation.value, 'Hypothesis Description': self.description}

    def __str__(self):
        return dumps(self.to_dict())


@dataclass(frozen=True)
class Assess:
    is_new: bool
    feedback: str
    score: int

    def to_dict(self) -> dict:
        return {'Is New': str(self.is_new), 'Feedback': self.feedback, 'Evaluation Score': str(self.score)}

    def __str__(self):
        return dumps(self.to_dict())


Action = Union[ApiCall, Propose, Assess]


@dataclass(frozen=True)
class QueryCase:
    subject: Entity
    object: Entity
    case_id: str = ''

    @property
    def id(self) -> str:
        return self.case_id or f'{self.subject.id}|{self.object.id}'

    def triplet(self, relation: RelationType) -> Triplet:
        return Triplet(self.subject, relation, self.object)

    def to_dict(self) -> dict:
        return {'case_id': self.id, 'subject': self.subject.to_dict(), 'object': self.object.to_dict()}

    @classmethod
    def from_dict(cls, d: dict):
        return cls(Entity.from_dict(d['subject']), Entity.from_dict(d['object']), d.get('case_id') or '')


@dataclass(frozen=True)
class ApiCallRecord:
    module: Module
    outer: int
    inner: int
    call: ApiCall
    observation: str
    executed: bool = True

    def to_dict(self) -> dict:
        return {
            'module': self.module.value,
            'outer': self.outer,
            'inner': self.inner,
            **self.call.to_dict(),
            'observation': self.observation,
            'executed': self.executed,
        }


@dataclass(frozen=True)
class AssessmentRecord:
    outer: int
    proposal: Propose
    assessment: Assess
    runtime_is_new: bool
    forced: bool = False

    def to_dict(self) -> dict:
        return {
            'outer': self.outer,
            'proposal': self.proposal.to_dict(),
            'assessment': self.assessment.to_dict(),
            'runtime_is_new': self.runtime_is_new,
            'forced': self.forced,
        }


@dataclass
class EpisodeResult:
    case: QueryCase
    proposal: Optional[Propose]
    terminated_by: Optional[TerminatedBy]
    outer_iterations_used: int = 0
    inner_iterations: dict[str, list[int]] = field(default_factory=dict)
    api_call_log: list[ApiCallRecord] = field(default_factory=list)
    assessments: list[AssessmentRecord] = field(default_factory=list)
    proposals: list[Propose] = field(default_factory=list)
    backend_calls: int = 0
    failed: bool = False
    error: str = ''
    trace: list = field(default_factory=list, repr=False)

    @property
    def triplet(self) -> Optional[Triplet]:
        if self.proposal is None:
            return None
        return self.case.triplet(self.proposal.relation)

    def to_dict(self) -> dict:
        return {
            'case': self.case.to_dict(),
            'proposal': self.proposal.to_dict() if self.proposal else None,
            'terminated_by': self.terminated_by.value if self.terminated_by else None,
            'outer_iterations_used': self.outer_iterations_used,
            'inner_iterations': {k: list(v) for k, v in sorted(self.inner_iterations.items())},
            'api_call_log': [c.to_dict() for c in self.api_call_log],
            'assessments': [a.to_dict() for a in self.assessments],
            'proposals': [p.to_dict() for p in self.proposals],
            'backend_calls': self.backend_calls,
            'failed': self.failed,
            'error': self.error,
        }

    def trace_lines(self) -> list[dict]:
        """Memory entries followed by the result itself, one JSON object per trace line."""
        return [{'entry': e.to_dict()} for e in self.trace] + [{'result': self.to_dict()}]
