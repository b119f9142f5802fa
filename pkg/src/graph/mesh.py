import logging
from collections import defaultdict
from types import MappingProxyType
from typing import Iterable, Mapping, Optional

from src.errors import NotFoundError

logger = logging.getLogger('debug')

SEPARATOR = '.'


def parent_number(tree_number: str) -> Optional[str]:
    """C19.246.099 -> C19.246. Root numbers have no parent."""
    if SEPARATOR not in tree_number:
        return None

    return tree_number.rsplit(SEPARATOR, 1)[0]


class MeshTree:
    """
    MeSH hierarchy keyed by entity id. Each tree number belongs to at most one entity;
    the parent of a tree number is the number without its last dot segment.
    """

    def __init__(self, numbers: Mapping[str, Iterable[str]] = None):
        numbers = numbers or {}
        by_entity: dict[str, frozenset[str]] = {}
        owner: dict[str, str] = {}
        self.conflicts = 0

        for entity_id in sorted(numbers):
            kept = set()
            for tn in sorted(set(numbers[entity_id])):
                tn = tn.strip()
                if not tn:
                    continue

                if tn in owner and owner[tn] != entity_id:
                    logger.warning(f'MeSH tree number {tn} already owned by {owner[tn]}, ignoring it for {entity_id}')
                    self.conflicts += 1
                    continue

                owner[tn] = entity_id
                kept.add(tn)

            if kept:
                by_entity[entity_id] = frozenset(kept)

        children: dict[str, list[str]] = defaultdict(list)
        for tn in sorted(owner):
            parent = parent_number(tn)
            if parent is not None:
                children[parent].append(tn)

        self._numbers = MappingProxyType(by_entity)
        self._owner = MappingProxyType(owner)
        self._children = MappingProxyType({k: tuple(v) for k, v in children.items()})

    @property
    def numbers(self) -> Mapping[str, frozenset[str]]:
        return self._numbers

    def __contains__(self, entity_id: str):
        return entity_id in self._numbers

    def __len__(self):
        return len(self._numbers)

    def tree_numbers(self, entity_id: str) -> frozenset[str]:
        try:
            return self._numbers[entity_id]
        except KeyError:
            raise NotFoundError(f'Entity {entity_id} has no MeSH tree numbers') from None

    def owner(self, tree_number: str) -> Optional[str]:
        return self._owner.get(tree_number)

    def parents(self, entity_id: str) -> list[str]:
        found = set()
        for tn in self.tree_numbers(entity_id):
            parent = parent_number(tn)
            if parent is None:
                continue

            owner = self._owner.get(parent)
            if owner is not None and owner != entity_id:
                found.add(owner)

        return sorted(found)

    def children(self, entity_id: str) -> list[str]:
        found = set()
        for tn in self.tree_numbers(entity_id):
            for child in self._children.get(tn, ()):
                owner = self._owner[child]
                if owner != entity_id:
                    found.add(owner)

        return sorted(found)

    def siblings(self, entity_id: str) -> list[str]:
        found = set()
        for tn in self.tree_numbers(entity_id):
            parent = parent_number(tn)
            if parent is None:
                continue

            for sibling in self._children.get(parent, ()):
                owner = self._owner[sibling]
                if owner != entity_id:
                    found.add(owner)

        return sorted(found)

    def descendants(self, entity_id: str) -> list[str]:
        found = set()
        stack = list(self.tree_numbers(entity_id))
        while stack:
            tn = stack.pop()
            for child in self._children.get(tn, ()):
                owner = self._owner[child]
                if owner != entity_id:
                    found.add(owner)
                stack.append(child)

        return sorted(found)

    def to_lines(self) -> list[dict]:
        return [{'entity_id': e, 'tree_numbers': sorted(tns)} for e, tns in self._numbers.items()]


def mesh_parents(tree: MeshTree, e: str) -> list[str]:
    return tree.parents(e)


def mesh_children(tree: MeshTree, e: str) -> list[str]:
    return tree.children(e)


def mesh_siblings(tree: MeshTree, e: str) -> list[str]:
    return tree.siblings(e)


def mesh_descendants(tree: MeshTree, e: str) -> list[str]:
    return tree.descendants(e)
