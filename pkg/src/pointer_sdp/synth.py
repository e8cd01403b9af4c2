"""Random labelled DAG corpora with controlled arc density and singleton share."""

from __future__ import annotations

import math
import random
import zlib
from dataclasses import dataclass

from .graph import ROOT, ROOT_LABEL, SemanticGraph, Sentence, Token

# (arcs per word, singleton share) measured on the training sets
PRESETS = {
    "dm": (0.79, 0.23),
    "pas": (0.99, 0.06),
    "psd": (0.70, 0.35),
}

LABELS = ("ARG1", "ARG2", "ARG3", "BV", "compound", "poss", "mwe", "loc")
POS_TAGS = ("NN", "NNS", "VB", "VBD", "DT", "IN", "JJ", "RB", "PRP", "CC")


class InfeasibleSpec(ValueError):
    pass


@dataclass(frozen=True)
class SynthSpec:
    min_len: int = 5
    max_len: int = 30
    arc_ratio: float = 0.79
    singleton_share: float = 0.23
    vocab_size: int = 200
    num_labels: int = 6

    def validate(self) -> None:
        if not 1 <= self.min_len <= self.max_len:
            raise InfeasibleSpec("need 1 <= min_len <= max_len")
        if not 0.0 <= self.singleton_share <= 1.0:
            raise InfeasibleSpec("singleton share must lie in [0, 1]")
        if self.arc_ratio < 0:
            raise InfeasibleSpec("arc ratio must be >= 0")
        if not 1 <= self.num_labels <= len(LABELS):
            raise InfeasibleSpec(f"num_labels must be in 1..{len(LABELS)}")
        covered = 1.0 - self.singleton_share
        # every non-singleton word needs an incident arc; one arc covers at most two words
        if covered > 0 and self.arc_ratio < covered / 2:
            raise InfeasibleSpec(
                f"arc ratio {self.arc_ratio} too low to touch {covered:.0%} of words"
            )
        if covered == 0 and self.arc_ratio > 0:
            raise InfeasibleSpec("arcs requested but every word is a singleton")
        # a DAG on k words plus ROOT has at most k(k+1)/2 arcs
        k = covered * self.max_len
        if self.arc_ratio * self.max_len > k * (k + 1) / 2:
            raise InfeasibleSpec("arc ratio too high for the sentence lengths")


def _stochastic_round(x: float, rng: random.Random) -> int:
    base = math.floor(x)
    return base + (1 if rng.random() < x - base else 0)


def _vocabulary(size: int, rng: random.Random) -> list[str]:
    letters = "abcdefghiklmnoprstuvw"
    words = set()
    while len(words) < size:
        words.add("".join(rng.choice(letters) for _ in range(rng.randint(2, 7))))
    return sorted(words)


def sample_graph(
    n: int, spec: SynthSpec, rng: random.Random, vocab: list[str], sent_id: str | None = None
) -> SemanticGraph:
    """One random labelled DAG over ``n`` words.

    Arc count and singleton count are drawn by stochastic rounding so their
    per-word expectations match the requested rates; a sentence whose draws are jointly
    infeasible gets the nearest feasible arc count.
    """
    tokens = []
    for i in range(1, n + 1):
        form = rng.choice(vocab)
        tokens.append(Token(i, form, form, POS_TAGS[zlib.crc32(form.encode()) % len(POS_TAGS)]))
    sentence = Sentence(tuple(tokens), sent_id)

    n_single = min(n, _stochastic_round(spec.singleton_share * n, rng))
    m = _stochastic_round(spec.arc_ratio * n, rng)
    k = n - n_single
    if k == 0:
        m = 0
    else:
        m = max(m, (k + 1) // 2)
        m = min(m, k * (k + 1) // 2)

    active = rng.sample(range(1, n + 1), k)
    # topological order: ROOT first, then active words in random order
    order = [ROOT] + active
    labels = LABELS[: spec.num_labels]
    arcs: dict[tuple[int, int], str] = {}

    def add(a: int, b: int) -> None:
        ia, ib = order.index(a), order.index(b)
        if ia > ib:
            a, b = b, a
        lab = ROOT_LABEL if a == ROOT else rng.choice(labels)
        arcs[(a, b)] = lab

    if k:
        # cover every active word: pairs share one arc, the rest get a head of their own
        pairs = k - min(m, k)
        words = active[:]
        rng.shuffle(words)
        for j in range(pairs):
            add(words[2 * j], words[2 * j + 1])
        for w in words[2 * pairs :]:
            pos = order.index(w)
            add(order[rng.randrange(pos)], w)
        candidates = [
            (order[x], order[y])
            for x in range(len(order))
            for y in range(x + 1, len(order))
            if (order[x], order[y]) not in arcs
        ]
        for a, b in rng.sample(candidates, m - len(arcs)):
            add(a, b)
    return SemanticGraph.from_triples(sentence, ((h, d, lab) for (h, d), lab in arcs.items()))


def generate_corpus(num_sentences: int, spec: SynthSpec, seed: int = 0) -> list[SemanticGraph]:
    spec.validate()
    rng = random.Random(seed)
    vocab = _vocabulary(spec.vocab_size, rng)
    return [
        sample_graph(rng.randint(spec.min_len, spec.max_len), spec, rng, vocab, f"synth-{k}")
        for k in range(num_sentences)
    ]
