import ast
import json
import re
from typing import Any, Optional

from pydantic import ValidationError

from src.agent.models import Action, ApiCall, Assess, Propose
from src.enum import EntityType, Module, RelationType
from src.errors import ActionValidationError, ParseError
from src.query.filters import EntityRef

fence_regex = re.compile(r'```(?:[ \t]*([A-Za-z]+)(?=\s))?[ \t]*\n?(.*?)```', re.DOTALL)

PROPOSE_KEYS = ('Relation', 'Hypothesis Description')
ASSESS_KEYS = ('Is New', 'Feedback', 'Evaluation Score')


def last_block(text: str) -> Optional[tuple[str, str, tuple[int, int]]]:
    """(label, body, span) of the last fenced block, or None."""
    match = None
    for match in fence_regex.finditer(text or ''):
        pass

    if match is None:
        return None

    label = (match.group(1) or '').lower()
    body = match.group(2).strip()
    if label not in ('python', 'json'):
        label = 'json' if body.startswith('{') else 'python'

    return label, body, match.span()


def split_response(text: str) -> tuple[str, Optional[str]]:
    """Splits a completion into the thought (text outside the last block) and the block itself."""
    block = last_block(text)
    if block is None:
        return (text or '').strip(), None

    start, end = block[2]
    thought = f'{text[:start]} {text[end:]}'.strip()
    return thought, text[start:end]


def _attribute(node: ast.Attribute) -> Any:
    if not isinstance(node.value, ast.Name):
        raise ParseError('unsupported attribute expression')

    owner, name = node.value.id, node.attr
    try:
        if owner in ('Entity_Type', 'EntityType'):
            return EntityType(name)
        if owner in ('Relation', 'RelationType'):
            return RelationType(name)
    except ValueError:
        raise ParseError(f'unknown value {owner}.{name}') from None

    raise ParseError(f'unsupported name {owner}.{name}')


def _literal(node: ast.AST) -> Any:
    if isinstance(node, ast.Constant):
        return node.value
    if isinstance(node, (ast.List, ast.Tuple)):
        return [_literal(e) for e in node.elts]
    if isinstance(node, ast.Dict):
        return {_literal(k): _literal(v) for k, v in zip(node.keys, node.values)}
    if isinstance(node, ast.UnaryOp) and isinstance(node.op, ast.USub):
        value = _literal(node.operand)
        if isinstance(value, (int, float)):
            return -value
    if isinstance(node, ast.Attribute):
        return _attribute(node)
    if isinstance(node, ast.Call) and isinstance(node.func, ast.Name) and node.func.id == 'Entity':
        if node.args:
            raise ParseError('Entity takes keyword arguments only')
        try:
            return EntityRef(**{kw.arg: _literal(kw.value) for kw in node.keywords})
        except (ValidationError, TypeError) as e:
            raise ParseError(f'invalid Entity: {e}') from None

    raise ParseError(f'unsupported expression: {ast.dump(node)[:80]}')


def parse_call(body: str) -> ApiCall:
    try:
        tree = ast.parse(body.strip(), mode='eval')
    except SyntaxError as e:
        raise ParseError(f'invalid function call syntax: {e.msg}') from None

    call = tree.body
    if not isinstance(call, ast.Call) or not isinstance(call.func, ast.Name):
        raise ParseError('expected a single function call such as get_relations(...)')
    if call.args:
        raise ParseError('use keyword arguments only')

    arguments = {}
    for kw in call.keywords:
        if kw.arg is None:
            raise ParseError('argument unpacking is not supported')
        arguments[kw.arg] = _literal(kw.value)

    return ApiCall(call.func.id, arguments)


def _as_bool(value: Any) -> bool:
    if isinstance(value, bool):
        return value
    if isinstance(value, str) and value.strip().lower() in ('true', 'false', 'yes', 'no'):
        return value.strip().lower() in ('true', 'yes')
    raise ActionValidationError(f'"Is New" must be True or False, got {value!r}')


def parse_score(value: Any, key: str) -> int:
    try:
        score = float(str(value).strip())
    except ValueError:
        raise ActionValidationError(f'"{key}" must be a number, got {value!r}') from None

    if not 0 <= score <= 100:
        raise ActionValidationError(f'"{key}" must be between 0 and 100, got {value!r}')
    return int(round(score))


def parse_proposal(obj: dict) -> Propose:
    if any(k not in obj for k in PROPOSE_KEYS):
        raise ParseError(f'expected JSON keys {", ".join(PROPOSE_KEYS)}')

    try:
        relation = RelationType(str(obj['Relation']))
    except ValueError:
        raise ActionValidationError(f'unknown relation {obj["Relation"]!r}') from None

    if relation is RelationType.associate:
        raise ActionValidationError('the relation "associate" cannot be proposed')

    return Propose(relation, str(obj['Hypothesis Description']).strip())


def parse_assessment(obj: dict) -> Assess:
    if any(k not in obj for k in ASSESS_KEYS):
        raise ParseError(f'expected JSON keys {", ".join(ASSESS_KEYS)}')

    return Assess(_as_bool(obj['Is New']), str(obj['Feedback']).strip(),
                  parse_score(obj['Evaluation Score'], 'Evaluation Score'))


def parse_json_block(body: str) -> dict:
    try:
        obj = json.loads(body)
    except json.JSONDecodeError as e:
        raise ParseError(f'invalid JSON: {e.msg}') from None

    if not isinstance(obj, dict):
        raise ParseError('expected a JSON object')
    return obj


def parse_action(llm_text: str, expected_module: Module) -> Action:
    block = last_block(llm_text)
    if block is None:
        raise ParseError('no fenced ```python or ```json block found')

    label, body, _ = block
    if label == 'python':
        return parse_call(body)

    obj = parse_json_block(body)
    if expected_module is Module.evaluation:
        return parse_assessment(obj)
    return parse_proposal(obj)
