"""Labelled and unlabelled precision/recall/F1 over arcs, ROOT arcs included."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

from .graph import SemanticGraph


class AlignmentError(ValueError):
    pass


def _ratio(num: int, den: int) -> float:
    return num / den if den else 0.0


def _f1(p: float, r: float) -> float:
    return 2 * p * r / (p + r) if p + r else 0.0


@dataclass(frozen=True)
class EvalCounts:
    labelled_tp: int = 0
    unlabelled_tp: int = 0
    predicted: int = 0
    gold: int = 0

    def __add__(self, other: "EvalCounts") -> "EvalCounts":
        return EvalCounts(
            self.labelled_tp + other.labelled_tp,
            self.unlabelled_tp + other.unlabelled_tp,
            self.predicted + other.predicted,
            self.gold + other.gold,
        )

    @property
    def lp(self) -> float:
        return _ratio(self.labelled_tp, self.predicted)

    @property
    def lr(self) -> float:
        return _ratio(self.labelled_tp, self.gold)

    @property
    def lf1(self) -> float:
        return _f1(self.lp, self.lr)

    @property
    def up(self) -> float:
        return _ratio(self.unlabelled_tp, self.predicted)

    @property
    def ur(self) -> float:
        return _ratio(self.unlabelled_tp, self.gold)

    @property
    def uf1(self) -> float:
        return _f1(self.up, self.ur)

    def scores(self) -> dict[str, float]:
        return {k: getattr(self, k) for k in ("up", "ur", "uf1", "lp", "lr", "lf1")}

    def table(self) -> str:
        """Two-line table (header, values) with percentages to one decimal."""
        keys = ("UP", "UR", "UF1", "LP", "LR", "LF1")
        vals = [f"{100 * getattr(self, k.lower()):.1f}" for k in keys]
        return "\t".join(keys) + "\n" + "\t".join(vals)


def count_graph(pred: SemanticGraph, gold: SemanticGraph) -> EvalCounts:
    p = pred.arc_map()
    g = gold.arc_map()
    shared = p.keys() & g.keys()
    return EvalCounts(
        labelled_tp=sum(1 for k in shared if p[k] == g[k]),
        unlabelled_tp=len(shared),
        predicted=len(p),
        gold=len(g),
    )


def evaluate(pred: Sequence[SemanticGraph], gold: Sequence[SemanticGraph]) -> EvalCounts:
    if len(pred) != len(gold):
        raise AlignmentError(f"{len(pred)} predicted graphs but {len(gold)} gold graphs")
    total = EvalCounts()
    for k, (p, g) in enumerate(zip(pred, gold)):
        if p.sentence.forms != g.sentence.forms:
            raise AlignmentError(f"sentence {k} differs between prediction and gold")
        total = total + count_graph(p, g)
    return total


def macro_average(scores: Sequence[float]) -> float:
    if not scores:
        raise ValueError("macro_average of an empty list")
    return sum(scores) / len(scores)
