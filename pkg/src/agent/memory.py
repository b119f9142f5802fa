from dataclasses import dataclass
from typing import Iterable, Optional

from src.enum import Architecture, ExtractorContext, Module, StepKind


@dataclass(frozen=True)
class MemoryEntry:
    step_kind: StepKind
    module: Module
    outer: int
    inner: int
    text: str
    # Payload passed from the other module rather than produced by this one
    handoff: bool = False
    call_key: Optional[str] = None

    def render(self) -> str:
        return f'{self.module.value.capitalize()} {self.step_kind.value.capitalize()} {self.outer}.{self.inner}: {self.text}'

    def to_dict(self) -> dict:
        return {
            'step_kind': self.step_kind.value,
            'module': self.module.value,
            'outer': self.outer,
            'inner': self.inner,
            'text': self.text,
            'handoff': self.handoff,
            'call_key': self.call_key,
        }


class MemoryLog:
    """Append-only ReAct transcript."""

    def __init__(self):
        self._entries: list[MemoryEntry] = []
        self._last: dict[Module, tuple[int, int]] = {}

    def append(self, step_kind: StepKind, module: Module, outer: int, inner: int, text: str,
               handoff: bool = False, call_key: str = None) -> MemoryEntry:
        if not handoff:
            last = self._last.get(module, (0, 0))
            if (outer, inner) < last:
                raise ValueError(f'{module.value} memory indices must not go back: '
                                 f'{outer}.{inner} after {last[0]}.{last[1]}')
            self._last[module] = (outer, inner)

        entry = MemoryEntry(step_kind, module, outer, inner, text, handoff, call_key)
        self._entries.append(entry)
        return entry

    @property
    def entries(self) -> tuple[MemoryEntry, ...]:
        return tuple(self._entries)

    def __len__(self):
        return len(self._entries)

    def __iter__(self):
        return iter(self._entries)

    def render(self) -> str:
        return render_entries(self._entries)

    def count_calls(self, module: Module, call_key: str) -> int:
        return sum(1 for e in self._entries
                   if e.module is module and e.step_kind is StepKind.action and e.call_key == call_key)


def render_entries(entries: Iterable[MemoryEntry]) -> str:
    return '\n'.join(e.render() for e in entries)


class EpisodeMemory:
    """
    Memory arrangement of one episode. Single architecture shares one log
    between the modules; double gives each module its own log and only passes
    the latest proposal forward and the assessment back.
    """

    def __init__(self, architecture: Architecture):
        self.architecture = architecture
        if architecture is Architecture.single:
            shared = MemoryLog()
            self.logs = {Module.generation: shared, Module.evaluation: shared}
        else:
            self.logs = {Module.generation: MemoryLog(), Module.evaluation: MemoryLog()}

    def view(self, module: Module) -> MemoryLog:
        return self.logs[module]

    def handoff(self, to_module: Module, outer: int, text: str):
        if self.architecture is Architecture.double:
            self.logs[to_module].append(StepKind.observation, to_module, outer, 0, text, handoff=True)

    def extractor_entries(self, context: ExtractorContext) -> list[MemoryEntry]:
        generation = self.logs[Module.generation]
        if self.architecture is Architecture.single or context is ExtractorContext.generation:
            return list(generation.entries)

        return list(generation.entries) + list(self.logs[Module.evaluation].entries)

    def all_entries(self) -> list[MemoryEntry]:
        if self.architecture is Architecture.single:
            return list(self.logs[Module.generation].entries)
        return list(self.logs[Module.generation].entries) + list(self.logs[Module.evaluation].entries)
