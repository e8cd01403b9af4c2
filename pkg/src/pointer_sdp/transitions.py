"""The multi-head transition system: Shift and Attach-p over a focus-word pointer.

A configuration holds a focus index ``i`` (1-based, ``n + 1`` once every word
has been shifted) and the arcs built so far. Attach-p adds ``p -> i`` when that
arc is new and keeps the graph acyclic; Shift moves the focus one word right.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import IO, Iterable, Sequence

from .cycles import CycleGuard
from .graph import Arc, GraphError, SemanticGraph, Sentence

SHIFT = "SHIFT"
ATTACH = "ATTACH"


class IllegalTransition(ValueError):
    def __init__(self, message: str, index: int | None = None):
        if index is not None:
            message = f"step {index}: {message}"
        super().__init__(message)
        self.index = index


@dataclass(frozen=True)
class Transition:
    kind: str
    head: int | None = None
    label: str | None = None

    @classmethod
    def shift(cls) -> "Transition":
        return cls(SHIFT)

    @classmethod
    def attach(cls, head: int, label: str = "_") -> "Transition":
        return cls(ATTACH, head, label)

    @property
    def is_shift(self) -> bool:
        return self.kind == SHIFT

    def pointer(self, focus: int) -> int:
        """Position the pointer network must select to produce this transition."""
        return focus if self.is_shift else self.head

    def __str__(self) -> str:
        return SHIFT if self.is_shift else f"{ATTACH} {self.head} {self.label}"

    @classmethod
    def parse(cls, line: str) -> "Transition":
        parts = line.split(maxsplit=2)
        if parts == [SHIFT]:
            return cls.shift()
        if len(parts) == 3 and parts[0] == ATTACH:
            return cls.attach(int(parts[1]), parts[2])
        raise ValueError(f"cannot parse transition {line!r}")


@dataclass
class Configuration:
    sentence: Sentence
    focus: int
    arcs: dict[tuple[int, int], str] = field(default_factory=dict)
    guard: CycleGuard | None = None
    # head of the most recent arc attached to the current focus word
    last_head: int | None = None

    @property
    def n(self) -> int:
        return self.sentence.n

    @property
    def is_terminal(self) -> bool:
        return self.focus > self.sentence.n

    def copy(self) -> "Configuration":
        return Configuration(
            self.sentence, self.focus, dict(self.arcs), self.guard.copy(), self.last_head
        )

    def graph(self) -> SemanticGraph:
        return SemanticGraph(
            self.sentence, frozenset(Arc(h, d, lab) for (h, d), lab in self.arcs.items())
        )

    def heads_of_focus(self) -> int:
        return sum(1 for (_, d) in self.arcs if d == self.focus)


def initial_config(sentence: Sentence) -> Configuration:
    return Configuration(sentence, 1, {}, CycleGuard(sentence.n + 1), None)


def attach_is_legal(c: Configuration, head: int) -> bool:
    if c.is_terminal or not 0 <= head <= c.n or head == c.focus:
        return False
    if (head, c.focus) in c.arcs:
        return False
    return not c.guard.would_create_cycle(head, c.focus)


def is_legal(c: Configuration, t: Transition) -> bool:
    if c.is_terminal:
        return False
    if t.is_shift:
        return True
    return attach_is_legal(c, t.head)


def _apply_inplace(c: Configuration, t: Transition) -> None:
    if c.is_terminal:
        raise IllegalTransition("configuration is terminal")
    if t.is_shift:
        c.focus += 1
        c.last_head = None
        return
    if not attach_is_legal(c, t.head):
        raise IllegalTransition(f"Attach-{t.head} is illegal for focus {c.focus}")
    c.arcs[(t.head, c.focus)] = t.label
    c.guard.insert_arc(t.head, c.focus)
    c.last_head = t.head


def apply(c: Configuration, t: Transition) -> Configuration:
    """Return the configuration reached by applying ``t``; ``c`` is left untouched."""
    nxt = c.copy()
    _apply_inplace(nxt, t)
    return nxt


def oracle(g: SemanticGraph) -> list[Transition]:
    """Transition sequence that rebuilds ``g``: heads of each word left to right, then Shift."""
    heads: dict[int, list[tuple[int, str]]] = {}
    for arc in g.arcs:
        heads.setdefault(arc.dependent, []).append((arc.head, arc.label))
    seq = []
    for i in range(1, g.n + 1):
        for head, label in sorted(heads.get(i, ())):
            seq.append(Transition.attach(head, label))
        seq.append(Transition.shift())
    return seq


def replay(sentence: Sentence, seq: Iterable[Transition]) -> SemanticGraph:
    c = initial_config(sentence)
    steps = 0
    for k, t in enumerate(seq):
        try:
            _apply_inplace(c, t)
        except IllegalTransition as exc:
            raise IllegalTransition(str(exc), k) from None
        steps = k + 1
    if not c.is_terminal:
        raise IllegalTransition(f"sequence ended before the last word was shifted", steps)
    try:
        return c.graph()
    except GraphError as exc:  # pragma: no cover - guarded by the legality checks
        raise IllegalTransition(str(exc), steps) from exc


def write_sequences(seqs: Iterable[Sequence[Transition]], stream: IO[str]) -> None:
    """One transition per line, blank line after each sentence."""
    for seq in seqs:
        for t in seq:
            stream.write(f"{t}\n")
        stream.write("\n")


def read_sequences(stream: IO[str]) -> list[list[Transition]]:
    seqs: list[list[Transition]] = []
    cur: list[Transition] = []
    for line in stream:
        line = line.strip()
        if not line:
            if cur:
                seqs.append(cur)
                cur = []
            continue
        cur.append(Transition.parse(line))
    if cur:
        seqs.append(cur)
    return seqs
