"""Sentences, labelled semantic dependency graphs and their file formats.

Two on-disk formats are supported:

* the tab-separated SDP 2015 format (one token per line, blank line between
  sentences, ``#`` comments, one argument column per predicate), and
* a JSON-lines format with one sentence per line, used for synthetic corpora::

      {"id": "s1", "tokens": [["The", "the", "DT"], ...], "arcs": [[0, 4, "ROOT"], ...]}

Position 0 is the artificial ROOT node. It is never stored as a token.
"""

from __future__ import annotations

import json
from collections import defaultdict, deque
from dataclasses import dataclass, field
from pathlib import Path
from typing import IO, Iterable, Iterator, Mapping

ROOT = 0
ROOT_LABEL = "ROOT"


class GraphError(ValueError):
    """An arc set that does not form a valid semantic dependency graph."""


class SDPFormatError(ValueError):
    """Malformed SDP input. ``lineno`` is 1-based."""

    def __init__(self, message: str, lineno: int):
        super().__init__(f"line {lineno}: {message}")
        self.lineno = lineno


class ColumnCountError(SDPFormatError):
    pass


class TokenIdError(SDPFormatError):
    pass


class PredicateCountError(SDPFormatError):
    pass


class CyclicGraphError(SDPFormatError):
    pass


@dataclass(frozen=True)
class Token:
    position: int
    form: str
    lemma: str = "_"
    pos: str = "_"
    # SDP frame/sense column and predicate flag, echoed on write only.
    frame: str = field(default="_", compare=False)
    pred: bool = field(default=False, compare=False)

    def __post_init__(self):
        if self.position < 1:
            raise ValueError(f"token position must be >= 1, got {self.position}")
        if not self.form:
            raise ValueError("token form must be non-empty")

    @property
    def characters(self) -> tuple[str, ...]:
        return tuple(self.form)


@dataclass(frozen=True)
class Sentence:
    tokens: tuple[Token, ...]
    sent_id: str | None = None

    def __post_init__(self):
        object.__setattr__(self, "tokens", tuple(self.tokens))
        for k, tok in enumerate(self.tokens):
            if tok.position != k + 1:
                raise ValueError(f"token {k} has position {tok.position}, expected {k + 1}")

    @classmethod
    def from_forms(cls, forms: Iterable[str], sent_id: str | None = None) -> "Sentence":
        return cls(tuple(Token(i + 1, f, f.lower(), "_") for i, f in enumerate(forms)), sent_id)

    @property
    def n(self) -> int:
        return len(self.tokens)

    def __len__(self) -> int:
        return len(self.tokens)

    @property
    def forms(self) -> list[str]:
        return [t.form for t in self.tokens]


@dataclass(frozen=True, order=True)
class Arc:
    head: int
    dependent: int
    label: str

    def __post_init__(self):
        if self.dependent < 1:
            raise ValueError(f"arc dependent must be >= 1, got {self.dependent}")
        if self.head < 0:
            raise ValueError(f"arc head must be >= 0, got {self.head}")
        if self.head == self.dependent:
            raise ValueError(f"self-loop on position {self.head}")


def find_cycle(num_nodes: int, edges: Iterable[tuple[int, int]]) -> bool:
    """Return True if the directed graph on ``0..num_nodes-1`` has a cycle (Kahn's algorithm)."""
    succ: dict[int, list[int]] = defaultdict(list)
    indeg = [0] * num_nodes
    for a, b in edges:
        succ[a].append(b)
        indeg[b] += 1
    queue = deque(v for v in range(num_nodes) if indeg[v] == 0)
    seen = 0
    while queue:
        v = queue.popleft()
        seen += 1
        for w in succ[v]:
            indeg[w] -= 1
            if indeg[w] == 0:
                queue.append(w)
    return seen != num_nodes


@dataclass(frozen=True)
class SemanticGraph:
    """A labelled DAG over positions ``0..n`` of a sentence.

    Arcs are validated on construction: positions must be in range, every
    (head, dependent) pair may occur once, and the graph must be acyclic.
    """

    sentence: Sentence
    arcs: frozenset[Arc] = field(default_factory=frozenset)

    def __post_init__(self):
        arcs = frozenset(self.arcs)
        object.__setattr__(self, "arcs", arcs)
        n = self.sentence.n
        pairs = set()
        for arc in arcs:
            if arc.head > n or arc.dependent > n:
                raise GraphError(f"arc {arc} out of range for sentence of length {n}")
            if (arc.head, arc.dependent) in pairs:
                raise GraphError(f"duplicate arc {arc.head}->{arc.dependent}")
            pairs.add((arc.head, arc.dependent))
        if find_cycle(n + 1, pairs):
            raise GraphError("arcs contain a cycle")

    @classmethod
    def from_triples(
        cls, sentence: Sentence, triples: Iterable[tuple[int, int, str]]
    ) -> "SemanticGraph":
        return cls(sentence, frozenset(Arc(h, d, lab) for h, d, lab in triples))

    @property
    def n(self) -> int:
        return self.sentence.n

    def arc_map(self) -> dict[tuple[int, int], str]:
        return {(a.head, a.dependent): a.label for a in self.arcs}

    def heads_of(self, dependent: int) -> list[int]:
        """Heads of ``dependent`` in ascending position order (ROOT first)."""
        return sorted(a.head for a in self.arcs if a.dependent == dependent)

    def label(self, head: int, dependent: int) -> str | None:
        for a in self.arcs:
            if a.head == head and a.dependent == dependent:
                return a.label
        return None

    def singletons(self) -> list[int]:
        touched = {a.head for a in self.arcs} | {a.dependent for a in self.arcs}
        return [i for i in range(1, self.n + 1) if i not in touched]

    def triples(self) -> list[tuple[int, int, str]]:
        return sorted((a.head, a.dependent, a.label) for a in self.arcs)


def graph_arc_count(g: SemanticGraph) -> int:
    return len(g.arcs)


# --- SDP 2015 format -------------------------------------------------------


def _blocks(stream: IO[str]) -> Iterator[list[tuple[int, str]]]:
    block: list[tuple[int, str]] = []
    for lineno, raw in enumerate(stream, start=1):
        line = raw.rstrip("\n").rstrip("\r")
        if not line.strip():
            if block:
                yield block
                block = []
            continue
        block.append((lineno, line))
    if block:
        yield block


def _parse_block(block: list[tuple[int, str]]) -> SemanticGraph | None:
    sent_id = None
    rows: list[tuple[int, list[str]]] = []
    for lineno, line in block:
        if line.startswith("#"):
            # "#SDP 2015" is a file header, any other comment an id line.
            if sent_id is None and not line.startswith("#SDP"):
                sent_id = line[1:]
            continue
        rows.append((lineno, line.split("\t")))
    if not rows:
        return None

    tokens = []
    pred_positions = []
    for k, (lineno, cols) in enumerate(rows):
        if len(cols) < 7:
            raise ColumnCountError(f"expected at least 7 columns, got {len(cols)}", lineno)
        try:
            tid = int(cols[0])
        except ValueError:
            raise TokenIdError(f"token id {cols[0]!r} is not an integer", lineno) from None
        if tid != k + 1:
            raise TokenIdError(f"token id {tid}, expected {k + 1}", lineno)
        if not cols[1]:
            raise ColumnCountError("empty form", lineno)
        for flag in (cols[4], cols[5]):
            if flag not in ("+", "-"):
                raise ColumnCountError(f"flag column must be '+' or '-', got {flag!r}", lineno)
        if cols[5] == "+":
            pred_positions.append(tid)
        tokens.append(Token(tid, cols[1], cols[2], cols[3], cols[6], cols[5] == "+"))

    n_args = len(pred_positions)
    arcs: list[Arc] = []
    for lineno, cols in rows:
        args = cols[7:]
        if len(args) != n_args:
            raise PredicateCountError(
                f"{len(args)} argument columns but {n_args} predicates flagged", lineno
            )
        dep = int(cols[0])
        if cols[4] == "+":
            arcs.append(Arc(ROOT, dep, ROOT_LABEL))
        for k, lab in enumerate(args):
            if lab == "_":
                continue
            head = pred_positions[k]
            if head == dep:
                raise CyclicGraphError(f"self-loop on token {dep}", lineno)
            arcs.append(Arc(head, dep, lab))

    sentence = Sentence(tuple(tokens), sent_id)
    if find_cycle(sentence.n + 1, ((a.head, a.dependent) for a in arcs)):
        raise CyclicGraphError("graph contains a cycle", rows[0][0])
    return SemanticGraph(sentence, frozenset(arcs))


def read_sdp_corpus(stream: IO[str]) -> list[SemanticGraph]:
    graphs = (_parse_block(block) for block in _blocks(stream))
    return [g for g in graphs if g is not None]


def write_sdp_corpus(graphs: Iterable[SemanticGraph], stream: IO[str]) -> None:
    for g in graphs:
        if g.sentence.sent_id is not None:
            stream.write(f"#{g.sentence.sent_id}\n")
        heads_with_args = {a.head for a in g.arcs if a.head != ROOT}
        preds = [t.position for t in g.sentence.tokens if t.pred or t.position in heads_with_args]
        col = {p: k for k, p in enumerate(preds)}
        labels = g.arc_map()
        for tok in g.sentence.tokens:
            i = tok.position
            args = ["_"] * len(preds)
            for p in preds:
                lab = labels.get((p, i))
                if lab is not None:
                    args[col[p]] = lab
            top = "+" if (ROOT, i) in labels else "-"
            pred = "+" if i in col else "-"
            cols = [str(i), tok.form, tok.lemma, tok.pos, top, pred, tok.frame, *args]
            stream.write("\t".join(cols) + "\n")
        stream.write("\n")


# --- JSON-lines format -----------------------------------------------------


def graph_to_record(g: SemanticGraph) -> dict:
    rec: dict = {}
    if g.sentence.sent_id is not None:
        rec["id"] = g.sentence.sent_id
    rec["tokens"] = [[t.form, t.lemma, t.pos] for t in g.sentence.tokens]
    rec["arcs"] = [list(t) for t in g.triples()]
    return rec


def graph_from_record(rec: Mapping) -> SemanticGraph:
    tokens = tuple(Token(i + 1, *tok) for i, tok in enumerate(rec["tokens"]))
    sentence = Sentence(tokens, rec.get("id"))
    return SemanticGraph.from_triples(sentence, (tuple(a) for a in rec.get("arcs", [])))


def read_jsonl_corpus(stream: IO[str]) -> list[SemanticGraph]:
    graphs = []
    for lineno, line in enumerate(stream, start=1):
        if not line.strip():
            continue
        try:
            graphs.append(graph_from_record(json.loads(line)))
        except (ValueError, KeyError, TypeError) as exc:
            raise SDPFormatError(str(exc), lineno) from exc
    return graphs


def write_jsonl_corpus(graphs: Iterable[SemanticGraph], stream: IO[str]) -> None:
    for g in graphs:
        stream.write(json.dumps(graph_to_record(g), ensure_ascii=False) + "\n")


def _is_jsonl(path: Path) -> bool:
    return path.suffix in (".jsonl", ".json")


def load_corpus(path: str | Path) -> list[SemanticGraph]:
    path = Path(path)
    with open(path, encoding="utf-8") as f:
        return read_jsonl_corpus(f) if _is_jsonl(path) else read_sdp_corpus(f)


def save_corpus(graphs: Iterable[SemanticGraph], path: str | Path) -> None:
    path = Path(path)
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        if _is_jsonl(path):
            write_jsonl_corpus(graphs, f)
        else:
            write_sdp_corpus(graphs, f)
