"""Greedy and beam-search decoding, plus transition-count statistics."""

from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .graph import SemanticGraph, Sentence
from .scorer.layers import log_softmax
from .transitions import (
    Configuration,
    Transition,
    _apply_inplace,
    attach_is_legal,
    initial_config,
    oracle,
)

DEFAULT_BEAM = 5


def legal_targets(c: Configuration) -> list[int]:
    """Pointer positions that yield a legal transition, in ascending order."""
    return [p for p in range(c.n + 1) if p == c.focus or attach_is_legal(c, p)]


def decode_greedy(model, sentence: Sentence, external=None) -> tuple[SemanticGraph, list[Transition]]:
    """Follow the highest-probability legal pointer at every step.

    Ties go to the lowest position. An illegal Attach falls through to the
    next-best position; pointing at the focus word (Shift) is always legal.
    """
    enc = model.encode(sentence, external)
    c = initial_config(sentence)
    memory = model.decoder_start()
    seq: list[Transition] = []
    while not c.is_terminal:
        step = model.score_step(enc, c.focus, c.last_head, memory)
        memory = step.memory
        for p in np.argsort(-step.scores, kind="stable"):
            p = int(p)
            if p == c.focus:
                t = Transition.shift()
                break
            if attach_is_legal(c, p):
                t = Transition.attach(p, model.predict_label(step.state, enc, p))
                break
        _apply_inplace(c, t)
        seq.append(t)
    return c.graph(), seq


def parse_greedy(model, sentence: Sentence, external=None) -> SemanticGraph:
    return decode_greedy(model, sentence, external)[0]


@dataclass
class BeamItem:
    config: Configuration
    logprob: float
    memory: tuple
    history: list[Transition] = field(default_factory=list)

    @property
    def done(self) -> bool:
        return self.config.is_terminal


def decode_beam(
    model, sentence: Sentence, beam_width: int = DEFAULT_BEAM, external=None
) -> tuple[SemanticGraph, list[Transition], float]:
    """Beam search over pointer sequences.

    Each item's score is the sum of log-probabilities of its chosen pointers,
    with every step's distribution renormalised over the legal positions.
    Finished items stay in the beam unchanged; search stops when every item
    in the beam is finished.
    """
    if beam_width < 1:
        raise ValueError("beam_width must be >= 1")
    enc = model.encode(sentence, external)
    beam = [BeamItem(initial_config(sentence), 0.0, model.decoder_start())]
    while not all(item.done for item in beam):
        candidates: list[tuple[float, int, BeamItem, int | None, object]] = []
        order = 0
        for item in beam:
            if item.done:
                candidates.append((item.logprob, order, item, None, None))
                order += 1
                continue
            c = item.config
            step = model.score_step(enc, c.focus, c.last_head, item.memory)
            targets = legal_targets(c)
            logq = log_softmax(step.scores[targets])
            for p, lq in zip(targets, logq):
                candidates.append((item.logprob + float(lq), order, item, p, step))
                order += 1
        candidates.sort(key=lambda x: (-x[0], x[1]))
        beam = []
        for score, _, item, p, step in candidates[:beam_width]:
            if p is None:
                beam.append(item)
                continue
            c = item.config.copy()
            if p == c.focus:
                t = Transition.shift()
            else:
                t = Transition.attach(p, model.predict_label(step.state, enc, p))
            _apply_inplace(c, t)
            beam.append(BeamItem(c, score, step.memory, item.history + [t]))
    best = beam[0]
    return best.config.graph(), best.history, best.logprob


def parse_beam(model, sentence: Sentence, beam_width: int = DEFAULT_BEAM, external=None) -> SemanticGraph:
    return decode_beam(model, sentence, beam_width, external)[0]


def parse(model, sentence: Sentence, beam_width: int = DEFAULT_BEAM, external=None) -> SemanticGraph:
    if beam_width == 1:
        return parse_greedy(model, sentence, external)
    return parse_beam(model, sentence, beam_width, external)


_worker_model = None


def _init_worker(path):
    global _worker_model
    from .scorer.model import PointerModel

    _worker_model = PointerModel.load(path)


def _parse_one(args):
    sentence, beam_width, external = args
    return parse(_worker_model, sentence, beam_width, external)


def parse_corpus(
    model,
    sentences: Sequence[Sentence],
    beam_width: int = DEFAULT_BEAM,
    external: Sequence | None = None,
    jobs: int = 1,
    model_path=None,
) -> list[SemanticGraph]:
    """Parse every sentence; ``jobs > 1`` needs ``model_path`` to load the model per worker."""
    if external is None:
        external = [None] * len(sentences)
    if jobs <= 1 or model_path is None:
        return [parse(model, s, beam_width, e) for s, e in zip(sentences, external)]
    with ProcessPoolExecutor(jobs, initializer=_init_worker, initargs=(str(model_path),)) as pool:
        work = [(s, beam_width, e) for s, e in zip(sentences, external)]
        return list(pool.map(_parse_one, work, chunksize=8))


# --- transition statistics ---------------------------------------------------


@dataclass
class TransitionStats:
    rows: list[tuple[str, int, int]]  # (sentence id, n, transitions)
    slope: float
    intercept: float
    r2: float
    arc_ratio: float  # mean arcs per word over sentences
    singleton_share: float  # mean fraction of singleton words over sentences


def linear_fit(x: Sequence[float], y: Sequence[float]) -> tuple[float, float, float]:
    """Least-squares line ``y = slope * x + intercept`` and its R^2."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if len(np.unique(x)) < 2:
        slope, intercept = float(np.mean(y / x)), 0.0
    else:
        slope, intercept = np.polyfit(x, y, 1)
    resid = y - (slope * x + intercept)
    ss_res = float(resid @ resid)
    ss_tot = float(((y - y.mean()) ** 2).sum())
    r2 = 1.0 - ss_res / ss_tot if ss_tot > 0 else (1.0 if ss_res < 1e-12 else 0.0)
    return float(slope), float(intercept), r2


def transition_stats(graphs: Sequence[SemanticGraph], model=None, beam_width: int = 1) -> TransitionStats:
    """Sequence length against sentence length.

    Without a model the oracle sequence of each gold graph is counted
    (exactly ``n + m``); with a model, the predicted sequence is.
    """
    rows = []
    ratios, singles = [], []
    for k, g in enumerate(graphs):
        sid = g.sentence.sent_id or str(k)
        if model is None:
            count = len(oracle(g))
            measured = g
        else:
            if beam_width == 1:
                measured, seq = decode_greedy(model, g.sentence)
            else:
                measured, seq, _ = decode_beam(model, g.sentence, beam_width)
            count = len(seq)
        rows.append((sid, g.n, count))
        ratios.append(len(measured.arcs) / measured.n)
        singles.append(len(measured.singletons()) / measured.n)
    if not rows:
        return TransitionStats([], 0.0, 0.0, 0.0, 0.0, 0.0)
    slope, intercept, r2 = linear_fit([r[1] for r in rows], [r[2] for r in rows])
    return TransitionStats(rows, slope, intercept, r2, float(np.mean(ratios)), float(np.mean(singles)))
