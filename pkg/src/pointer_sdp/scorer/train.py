"""Mini-batch training with Adam, gradient clipping and dev-based model selection."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field, replace
from typing import Callable, Sequence

import numpy as np

from ..graph import SemanticGraph
from .config import ModelConfig
from .model import Example, Params, PointerModel
from .vocab import Vocab

log = logging.getLogger(__name__)


class TrainingError(RuntimeError):
    pass


class NonFiniteLoss(TrainingError):
    pass


class Adam:
    def __init__(self, params: Params, lr: float, beta1: float, beta2: float, eps: float):
        self.lr = lr
        self.beta1 = beta1
        self.beta2 = beta2
        self.eps = eps
        self.t = 0
        self.m = {k: np.zeros_like(v) for k, v in params.items()}
        self.v = {k: np.zeros_like(v) for k, v in params.items()}

    def step(self, params: Params, grads: Params) -> None:
        self.t += 1
        b1, b2 = self.beta1, self.beta2
        c1 = 1.0 - b1**self.t
        c2 = 1.0 - b2**self.t
        for k, g in grads.items():
            m = self.m[k]
            v = self.v[k]
            m *= b1
            m += (1.0 - b1) * g
            v *= b2
            v += (1.0 - b2) * g * g
            params[k] -= self.lr * (m / c1) / (np.sqrt(v / c2) + self.eps)


def clip_global_norm(grads: Params, threshold: float) -> float:
    """Rescale ``grads`` in place so their joint L2 norm is at most ``threshold``."""
    norm = math.sqrt(sum(float((g * g).sum()) for g in grads.values()))
    if norm > threshold:
        scale = threshold / norm
        for g in grads.values():
            g *= scale
    return norm


@dataclass
class EpochRecord:
    epoch: int
    loss: float
    dev_lf1: float | None
    learning_rate: float


@dataclass
class TrainResult:
    model: PointerModel
    history: list[EpochRecord] = field(default_factory=list)
    best_epoch: int = 0


def _with_unk(ex: Example, singletons: frozenset[int], prob: float, rng) -> Example:
    if prob <= 0.0 or not singletons:
        return ex
    words = ex.words.copy()
    for k, w in enumerate(words):
        if int(w) in singletons and rng.random() < prob:
            words[k] = 0
    return replace(ex, words=words)


def train(
    corpus: Sequence[SemanticGraph],
    config: ModelConfig,
    dev: Sequence[SemanticGraph] | None = None,
    external: Sequence | None = None,
    dev_external: Sequence | None = None,
    epochs: int | None = None,
    callback: Callable[[EpochRecord], None] | None = None,
) -> TrainResult:
    """Train a fresh model on ``corpus``.

    With a dev set the returned model is the one with the best dev LF1
    (greedy decoding), and the learning rate is multiplied by ``decay_rate``
    after ``decay_patience`` epochs without improvement. Without one the
    final parameters are returned. Runs are deterministic given the config seed.
    """
    from ..decoding import parse_corpus
    from ..evaluation import evaluate

    if not corpus:
        raise TrainingError("empty training corpus")
    epochs = config.epochs if epochs is None else epochs
    vocab = Vocab.build(corpus)
    model = PointerModel(config, vocab)
    if external is None:
        external = [None] * len(corpus)
    examples = [model.example(g, e) for g, e in zip(corpus, external)]
    rng = np.random.default_rng(config.seed + 1)
    opt = Adam(model.params, config.initial_learning_rate, config.beta1, config.beta2, config.epsilon)

    result = TrainResult(model)
    best_lf1 = -1.0
    best_params = None
    stale = 0
    for epoch in range(1, epochs + 1):
        order = rng.permutation(len(examples))
        total = 0.0
        for start in range(0, len(order), config.batch_size):
            batch = order[start : start + config.batch_size]
            grads = {k: np.zeros_like(v) for k, v in model.params.items()}
            for idx in batch:
                ex = _with_unk(examples[idx], vocab.singletons, config.unk_replacement_probability, rng)
                loss, g = model.loss(ex, rng=rng)
                if not math.isfinite(loss):
                    raise NonFiniteLoss(f"non-finite loss at epoch {epoch} on sentence {idx}")
                total += loss
                for k, v in g.items():
                    grads[k] += v
            for v in grads.values():
                v /= len(batch)
            clip_global_norm(grads, config.gradient_clipping)
            opt.step(model.params, grads)

        dev_lf1 = None
        if dev:
            preds = parse_corpus(model, [g.sentence for g in dev], 1, dev_external)
            dev_lf1 = evaluate(preds, dev).lf1
            if dev_lf1 > best_lf1:
                best_lf1 = dev_lf1
                best_params = model.copy_params()
                result.best_epoch = epoch
                stale = 0
            else:
                stale += 1
                if config.decay_patience and stale >= config.decay_patience:
                    opt.lr *= config.decay_rate
                    stale = 0
        else:
            result.best_epoch = epoch
        record = EpochRecord(epoch, total / len(examples), dev_lf1, opt.lr)
        result.history.append(record)
        log.info("epoch %d loss %.4f dev_lf1 %s", epoch, record.loss, dev_lf1)
        if callback is not None:
            callback(record)

    if best_params is not None:
        model.params = best_params
    return result
