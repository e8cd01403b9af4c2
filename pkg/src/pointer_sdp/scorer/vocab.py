from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from typing import Iterable

from ..graph import ROOT_LABEL, SemanticGraph

UNK = "<unk>"
# placeholder label for corpora whose only arcs are ROOT arcs
NO_LABEL = "_"


class Index:
    """String-to-id map with id 0 reserved for unknown items."""

    def __init__(self, items: Iterable[str] = (), unk: bool = True):
        self.unk = unk
        self.items: list[str] = [UNK] if unk else []
        self.ids: dict[str, int] = {UNK: 0} if unk else {}
        for item in items:
            self.add(item)

    def add(self, item: str) -> int:
        if item not in self.ids:
            self.ids[item] = len(self.items)
            self.items.append(item)
        return self.ids[item]

    def __len__(self) -> int:
        return len(self.items)

    def __getitem__(self, item: str) -> int:
        if self.unk:
            return self.ids.get(item, 0)
        return self.ids[item]

    def lookup(self, idx: int) -> str:
        return self.items[idx]


@dataclass
class Vocab:
    words: Index
    lemmas: Index
    pos: Index
    chars: Index
    labels: Index
    singletons: frozenset[int] = field(default_factory=frozenset)

    @classmethod
    def build(cls, graphs: Iterable[SemanticGraph]) -> "Vocab":
        graphs = list(graphs)
        counts: Counter[str] = Counter()
        words, lemmas, pos, chars = Index(), Index(), Index(), Index()
        labels = Index(unk=False)
        for g in graphs:
            for tok in g.sentence.tokens:
                counts[tok.form] += 1
                words.add(tok.form)
                lemmas.add(tok.lemma)
                pos.add(tok.pos)
                for ch in tok.characters:
                    chars.add(ch)
            for arc in sorted(g.arcs):
                if arc.label != ROOT_LABEL:
                    labels.add(arc.label)
        if not len(labels):
            labels.add(NO_LABEL)
        singletons = frozenset(words[w] for w, c in counts.items() if c == 1)
        return cls(words, lemmas, pos, chars, labels, singletons)

    def to_dict(self) -> dict:
        return {
            "words": self.words.items,
            "lemmas": self.lemmas.items,
            "pos": self.pos.items,
            "chars": self.chars.items,
            "labels": self.labels.items,
            "singletons": sorted(self.singletons),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "Vocab":
        def restore(items, unk=True):
            idx = Index(unk=unk)
            for item in items:
                if item not in idx.ids:
                    idx.add(item)
            return idx

        return cls(
            restore(d["words"]),
            restore(d["lemmas"]),
            restore(d["pos"]),
            restore(d["chars"]),
            restore(d["labels"], unk=False),
            frozenset(d["singletons"]),
        )
