import json
import os
import re
from datetime import datetime, date
from enum import Enum
from typing import Iterable, Iterator, Optional

from pydantic import BaseModel

from src.errors import IngestError

_partial_date = re.compile(r'^(\d{4})(?:-(\d{1,2}))?(?:-(\d{1,2}))?$')
_token_split = re.compile(r'[\W_]+')


def json_serializer(o):
    if isinstance(o, (datetime, date)):
        return o.isoformat()
    if isinstance(o, Enum):
        return o.value
    if isinstance(o, (set, frozenset)):
        return sorted(o)
    if hasattr(o, 'to_dict'):
        return o.to_dict()
    if isinstance(o, BaseModel):
        return o.dict(exclude_none=True)

    raise TypeError(f'Object of type {type(o).__name__} is not JSON serializable')


def dumps(obj, sort_keys: bool = False) -> str:
    return json.dumps(obj, ensure_ascii=False, default=json_serializer, sort_keys=sort_keys)


def parse_date(value: Optional[str]) -> Optional[date]:
    """
    Parses YYYY-MM-DD dates. Missing month or day normalizes to the first of the period.
    Returns None for empty or unparseable values.
    """
    if not value or not isinstance(value, str):
        return None

    m = _partial_date.match(value.strip())
    if not m:
        return None

    year, month, day = m.groups()
    try:
        return date(int(year), int(month or 1), int(day or 1))
    except ValueError:
        return None


def tokenize(text: str) -> list[str]:
    if not text:
        return []

    return [t for t in _token_split.split(text.lower()) if len(t) >= 2]


def read_lines(path: str) -> Iterator[str]:
    try:
        f = open(path, 'r', encoding='utf-8')
    except OSError as e:
        raise IngestError(f'Could not read {path}: {e}') from e

    with f:
        for line in f:
            yield line


def read_jsonl(path: str) -> Iterator[dict]:
    for line in read_lines(path):
        line = line.strip()
        if line:
            yield json.loads(line)


def write_jsonl(path: str, rows: Iterable[dict]):
    os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
    with open(path, 'w', encoding='utf-8', newline='\n') as f:
        for row in rows:
            f.write(dumps(row))
            f.write('\n')


def write_json(path: str, obj, indent: Optional[int] = 2):
    os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
    with open(path, 'w', encoding='utf-8', newline='\n') as f:
        json.dump(obj, f, ensure_ascii=False, default=json_serializer, indent=indent, sort_keys=True)
        f.write('\n')
