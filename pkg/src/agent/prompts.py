import os
import string
from functools import lru_cache
from typing import Mapping

from src.errors import TemplateError

TEMPLATE_DIR = os.path.join(os.path.dirname(os.path.realpath(__file__)), 'templates')

GENERATION_SYSTEM = 'generation_system'
GENERATION_QUERY = 'generation_query'
EVALUATION_SYSTEM = 'evaluation_system'
EVALUATION_QUERY = 'evaluation_query'
FORCED_PROPOSAL = 'forced_proposal'
FORCED_ASSESSMENT = 'forced_assessment'
EXTRACTOR = 'extractor'
JUDGE = 'judge'
BASELINE_SYSTEM = 'baseline_system'
BASELINE_QUERY = 'baseline_query'
KG_CONTEXT = 'kg_context'


@lru_cache(maxsize=None)
def load_template(template_id: str) -> str:
    path = os.path.join(TEMPLATE_DIR, f'{template_id}.txt')
    try:
        with open(path, 'r', encoding='utf-8', newline='') as f:
            return f.read()
    except OSError:
        raise TemplateError(template_id, []) from None


def placeholders(template: str) -> set[str]:
    return {name for _, name, _, _ in string.Formatter().parse(template) if name}


def render_prompt(template_id: str, params: Mapping[str, object]) -> str:
    """
    Substitutes {placeholder} tokens. Doubled braces in the template are literal braces.
    Extra params are ignored, missing ones raise TemplateError.
    """
    template = load_template(template_id)
    missing = placeholders(template) - set(params)
    if missing:
        raise TemplateError(template_id, missing)

    return template.format_map({k: str(v) for k, v in params.items()})
