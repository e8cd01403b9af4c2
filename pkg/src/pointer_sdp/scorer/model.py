"""Pointer network scorer and labeler with hand-written backpropagation.

Architecture, per sentence of ``n`` words:

* word input ``x_i`` = char-CNN vector ⊕ word ⊕ lemma ⊕ POS embeddings
  (⊕ an external vector when enabled), fed to a stacked BiLSTM; a learned
  ROOT vector is prepended, giving encoder states ``E[0..n]``;
* a decoder LSTM reads ``r_t = E[focus] + E[last head of focus]`` (the second
  term is zero while the focus word has no head) and carries its state
  across every step of the sentence;
* the pointer distribution over ``0..n`` is the softmax of biaffine scores
  between ELU projections of the decoder state and of each ``E[j]``;
* a per-label biaffine classifier labels each attached arc from the decoder
  state of the attaching step and the head's encoder state.

ROOT arcs always carry the reserved ``ROOT`` label and are not scored by the
labeler.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from ..graph import ROOT, ROOT_LABEL, SemanticGraph, Sentence
from ..transitions import oracle
from .config import ModelConfig
from .layers import (
    biaffine_backward,
    biaffine_forward,
    char_conv_backward,
    char_conv_forward,
    cross_entropy,
    elu,
    label_biaffine_backward,
    label_biaffine_forward,
    lstm_backward,
    lstm_forward,
    lstm_step,
    mlp_backward,
    mlp_forward,
    softmax,
)
from .vocab import Vocab

Params = dict[str, np.ndarray]


class ShapeError(ValueError):
    pass


@dataclass
class Example:
    """A sentence mapped to ids plus its teacher-forced decoder schedule."""

    words: np.ndarray
    lemmas: np.ndarray
    pos: np.ndarray
    chars: list[np.ndarray]
    external: np.ndarray | None
    focus: np.ndarray
    last_head: np.ndarray  # -1 while the focus word has no head yet
    target: np.ndarray
    label_steps: np.ndarray
    label_heads: np.ndarray
    label_ids: np.ndarray

    @property
    def n(self) -> int:
        return len(self.words)


@dataclass
class EncoderStates:
    """Encoder output for one sentence, with the per-position projections cached."""

    states: np.ndarray  # (n + 1, 2 * encoder size); row 0 is ROOT
    arc_proj: np.ndarray
    label_proj: np.ndarray

    def __len__(self) -> int:
        return self.states.shape[0]


@dataclass
class DecoderStep:
    state: np.ndarray  # decoder output s_t
    input: np.ndarray  # r_t
    scores: np.ndarray  # v_t over positions 0..n
    memory: tuple  # recurrent (h, c) per layer after this step

    @property
    def probs(self) -> np.ndarray:
        """Pointer distribution a_t; only needed outside greedy decoding."""
        return softmax(self.scores)


def _glorot(rng: np.random.Generator, shape: tuple[int, ...]) -> np.ndarray:
    fan_in, fan_out = shape[-2], shape[-1]
    limit = np.sqrt(6.0 / (fan_in + fan_out))
    return rng.uniform(-limit, limit, size=shape)


def _lstm_params(rng, prefix: str, d_in: int, hidden: int) -> Params:
    b = np.zeros(4 * hidden)
    b[hidden : 2 * hidden] = 1.0  # forget gate bias
    return {
        f"{prefix}_Wx": _glorot(rng, (d_in, 4 * hidden)),
        f"{prefix}_Wh": _glorot(rng, (hidden, 4 * hidden)),
        f"{prefix}_b": b,
    }


def init_params(config: ModelConfig, vocab: Vocab, seed: int | None = None) -> Params:
    rng = np.random.default_rng(config.seed if seed is None else seed)
    c = config
    p: Params = {}

    def emb(rows: int, dim: int) -> np.ndarray:
        return rng.uniform(-1.0, 1.0, size=(rows, dim)) * np.sqrt(3.0 / dim)

    p["word_emb"] = emb(len(vocab.words), c.word_embedding_dimension)
    p["pos_emb"] = emb(len(vocab.pos), c.pos_embedding_dimension)
    if c.lemma_embedding_dimension:
        p["lemma_emb"] = emb(len(vocab.lemmas), c.lemma_embedding_dimension)
    if c.use_chars:
        p["char_emb"] = emb(len(vocab.chars), c.char_embedding_dimension)
        p["char_W"] = _glorot(rng, (c.cnn_window_size * c.char_embedding_dimension, c.cnn_number_of_filters))
        p["char_b"] = np.zeros(c.cnn_number_of_filters)
    d_in = c.input_dim
    for layer in range(c.bilstm_encoder_layers):
        for direction in "fb":
            p.update(_lstm_params(rng, f"enc{layer}{direction}", d_in, c.bilstm_encoder_size))
        d_in = c.encoder_dim
    p["root"] = rng.normal(0.0, 0.1, size=c.encoder_dim)
    d_in = c.encoder_dim
    for layer in range(c.lstm_decoder_layers):
        p.update(_lstm_params(rng, f"dec{layer}", d_in, c.lstm_decoder_size))
        d_in = c.lstm_decoder_size

    da, dl, L = c.arc_mlp_size, c.label_mlp_size, len(vocab.labels)
    p["arc_dec_W"] = _glorot(rng, (c.lstm_decoder_size, da))
    p["arc_dec_b"] = np.zeros(da)
    p["arc_enc_W"] = _glorot(rng, (c.encoder_dim, da))
    p["arc_enc_b"] = np.zeros(da)
    p["arc_W"] = _glorot(rng, (da, da))
    p["arc_u"] = rng.normal(0.0, 0.1, size=da)
    p["arc_v"] = rng.normal(0.0, 0.1, size=da)
    p["arc_b"] = np.zeros(1)
    p["lab_dec_W"] = _glorot(rng, (c.lstm_decoder_size, dl))
    p["lab_dec_b"] = np.zeros(dl)
    p["lab_enc_W"] = _glorot(rng, (c.encoder_dim, dl))
    p["lab_enc_b"] = np.zeros(dl)
    p["lab_W"] = _glorot(rng, (L, dl, dl))
    p["lab_U"] = rng.normal(0.0, 0.1, size=(L, dl))
    p["lab_V"] = rng.normal(0.0, 0.1, size=(L, dl))
    p["lab_b"] = np.zeros(L)
    return p


def _dropout_mask(rng, shape, rate: float):
    if rng is None or rate <= 0.0:
        return None
    return (rng.random(shape) >= rate) / (1.0 - rate)


class PointerModel:
    def __init__(self, config: ModelConfig, vocab: Vocab, params: Params | None = None):
        self.config = config
        self.vocab = vocab
        self.params = init_params(config, vocab) if params is None else params

    # --- data ---------------------------------------------------------------

    def _check_external(self, n: int, external) -> np.ndarray | None:
        d = self.config.external_embedding_dimension
        if not d:
            return None
        if external is None:
            raise ShapeError(f"model expects {d}-dim external vectors for every token")
        external = np.asarray(external, dtype=float)
        if external.shape != (n, d):
            raise ShapeError(f"external vectors have shape {external.shape}, expected {(n, d)}")
        return external

    def example(self, graph_or_sentence, external=None) -> Example:
        if isinstance(graph_or_sentence, SemanticGraph):
            graph, sentence = graph_or_sentence, graph_or_sentence.sentence
        else:
            graph, sentence = None, graph_or_sentence
        v = self.vocab
        toks = sentence.tokens
        focus, last_head, target = [], [], []
        steps, heads, labels = [], [], []
        if graph is not None:
            i, prev = 1, -1
            for t in oracle(graph):
                focus.append(i)
                last_head.append(prev)
                target.append(t.pointer(i))
                if t.is_shift:
                    i, prev = i + 1, -1
                else:
                    if t.head != ROOT:
                        steps.append(len(focus) - 1)
                        heads.append(t.head)
                        labels.append(v.labels[t.label] if t.label in v.labels.ids else 0)
                    prev = t.head
        ints = lambda xs: np.asarray(xs, dtype=np.int64)
        return Example(
            words=ints([v.words[t.form] for t in toks]),
            lemmas=ints([v.lemmas[t.lemma] for t in toks]),
            pos=ints([v.pos[t.pos] for t in toks]),
            chars=[ints([v.chars[ch] for ch in t.characters]) for t in toks],
            external=self._check_external(len(toks), external),
            focus=ints(focus),
            last_head=ints(last_head),
            target=ints(target),
            label_steps=ints(steps),
            label_heads=ints(heads),
            label_ids=ints(labels),
        )

    # --- encoder --------------------------------------------------------------

    def _encode_forward(self, ex: Example, rng=None):
        c, p = self.config, self.params
        parts = []
        char_caches = []
        if c.use_chars:
            for ids in ex.chars:
                out, cache = char_conv_forward(p["char_emb"][ids], p["char_W"], p["char_b"], c.cnn_window_size)
                parts.append(out)
                char_caches.append(cache)
            parts = [np.stack(parts)]
        parts.append(p["word_emb"][ex.words])
        if c.lemma_embedding_dimension:
            parts.append(p["lemma_emb"][ex.lemmas])
        parts.append(p["pos_emb"][ex.pos])
        if ex.external is not None:
            parts.append(ex.external)
        X = np.concatenate(parts, axis=1)
        mask = _dropout_mask(rng, X.shape, c.embeddings_dropout)
        if mask is not None:
            X = X * mask
        layer_caches = []
        H = X
        for layer in range(c.bilstm_encoder_layers):
            fw, fcache = lstm_forward(H, p[f"enc{layer}f_Wx"], p[f"enc{layer}f_Wh"], p[f"enc{layer}f_b"])
            bw, bcache = lstm_forward(H[::-1], p[f"enc{layer}b_Wx"], p[f"enc{layer}b_Wh"], p[f"enc{layer}b_b"])
            H = np.concatenate([fw, bw[::-1]], axis=1)
            lmask = _dropout_mask(rng, H.shape, c.lstm_layers_dropout)
            if lmask is not None:
                H = H * lmask
            layer_caches.append((fcache, bcache, lmask))
        E = np.vstack([p["root"][None, :], H])
        return E, (char_caches, mask, layer_caches)

    def _encode_backward(self, dE: np.ndarray, ex: Example, cache, grads: Params) -> None:
        c, p = self.config, self.params
        char_caches, mask, layer_caches = cache
        grads["root"] += dE[0]
        dH = dE[1:]
        for layer in reversed(range(c.bilstm_encoder_layers)):
            fcache, bcache, lmask = layer_caches[layer]
            if lmask is not None:
                dH = dH * lmask
            h = c.bilstm_encoder_size
            pre = f"enc{layer}"
            dXf, dWx, dWh, db = lstm_backward(dH[:, :h], fcache, p[pre + "f_Wx"], p[pre + "f_Wh"])
            grads[pre + "f_Wx"] += dWx
            grads[pre + "f_Wh"] += dWh
            grads[pre + "f_b"] += db
            dXb, dWx, dWh, db = lstm_backward(dH[::-1, h:], bcache, p[pre + "b_Wx"], p[pre + "b_Wh"])
            grads[pre + "b_Wx"] += dWx
            grads[pre + "b_Wh"] += dWh
            grads[pre + "b_b"] += db
            dH = dXf + dXb[::-1]
        dX = dH if mask is None else dH * mask
        col = 0
        if c.use_chars:
            F = c.cnn_number_of_filters
            for k, ids in enumerate(ex.chars):
                dchars, dW, db = char_conv_backward(dX[k, :F], char_caches[k], p["char_W"], c.cnn_window_size)
                grads["char_W"] += dW
                grads["char_b"] += db
                np.add.at(grads["char_emb"], ids, dchars)
            col = F
        d = c.word_embedding_dimension
        np.add.at(grads["word_emb"], ex.words, dX[:, col : col + d])
        col += d
        if c.lemma_embedding_dimension:
            d = c.lemma_embedding_dimension
            np.add.at(grads["lemma_emb"], ex.lemmas, dX[:, col : col + d])
            col += d
        d = c.pos_embedding_dimension
        np.add.at(grads["pos_emb"], ex.pos, dX[:, col : col + d])

    # --- training objective ---------------------------------------------------

    def loss(self, ex: Example, rng=None, need_grad: bool = True) -> tuple[float, Params | None]:
        """Joint pointer + label negative log-likelihood of the oracle sequence.

        ``rng`` switches on training-mode dropout; ``None`` runs deterministically.
        """
        c, p = self.config, self.params
        E, enc_cache = self._encode_forward(ex, rng)
        has_head = ex.last_head >= 0
        R = E[ex.focus] + np.where(has_head[:, None], E[np.maximum(ex.last_head, 0)], 0.0)
        S = R
        dec_caches = []
        for layer in range(c.lstm_decoder_layers):
            S, dcache = lstm_forward(S, p[f"dec{layer}_Wx"], p[f"dec{layer}_Wh"], p[f"dec{layer}_b"])
            smask = _dropout_mask(rng, S.shape, c.lstm_layers_dropout)
            if smask is not None:
                S = S * smask
            dec_caches.append((dcache, smask))

        F1, f1_cache = mlp_forward(S, p["arc_dec_W"], p["arc_dec_b"])
        F2, f2_cache = mlp_forward(E, p["arc_enc_W"], p["arc_enc_b"])
        V = biaffine_forward(F1, F2, p["arc_W"], p["arc_u"], p["arc_v"], p["arc_b"][0])
        total, dV = cross_entropy(V, ex.target)

        K = len(ex.label_steps)
        if K:
            G1, g1_cache = mlp_forward(S[ex.label_steps], p["lab_dec_W"], p["lab_dec_b"])
            G2all, g2_cache = mlp_forward(E, p["lab_enc_W"], p["lab_enc_b"])
            G2 = G2all[ex.label_heads]
            LS = label_biaffine_forward(G1, G2, p["lab_W"], p["lab_U"], p["lab_V"], p["lab_b"])
            label_loss, dLS = cross_entropy(LS, ex.label_ids)
            total += label_loss
        if not need_grad:
            return float(total), None

        grads = {k: np.zeros_like(v) for k, v in p.items()}
        dF1, dF2, dW, du, dv, db = biaffine_backward(dV, F1, F2, p["arc_W"], p["arc_u"], p["arc_v"])
        grads["arc_W"] += dW
        grads["arc_u"] += du
        grads["arc_v"] += dv
        grads["arc_b"] += db
        dS, dW, db = mlp_backward(dF1, f1_cache, p["arc_dec_W"])
        grads["arc_dec_W"] += dW
        grads["arc_dec_b"] += db
        dE, dW, db = mlp_backward(dF2, f2_cache, p["arc_enc_W"])
        grads["arc_enc_W"] += dW
        grads["arc_enc_b"] += db

        if K:
            dG1, dG2, dW, dU, dVl, db = label_biaffine_backward(dLS, G1, G2, p["lab_W"], p["lab_U"], p["lab_V"])
            grads["lab_W"] += dW
            grads["lab_U"] += dU
            grads["lab_V"] += dVl
            grads["lab_b"] += db
            dS_lab, dW, db = mlp_backward(dG1, g1_cache, p["lab_dec_W"])
            grads["lab_dec_W"] += dW
            grads["lab_dec_b"] += db
            np.add.at(dS, ex.label_steps, dS_lab)
            dG2all = np.zeros_like(G2all)
            np.add.at(dG2all, ex.label_heads, dG2)
            dE_lab, dW, db = mlp_backward(dG2all, g2_cache, p["lab_enc_W"])
            grads["lab_enc_W"] += dW
            grads["lab_enc_b"] += db
            dE += dE_lab

        for layer in reversed(range(c.lstm_decoder_layers)):
            dcache, smask = dec_caches[layer]
            if smask is not None:
                dS = dS * smask
            pre = f"dec{layer}"
            dS, dWx, dWh, db = lstm_backward(dS, dcache, p[pre + "_Wx"], p[pre + "_Wh"])
            grads[pre + "_Wx"] += dWx
            grads[pre + "_Wh"] += dWh
            grads[pre + "_b"] += db
        dR = dS
        np.add.at(dE, ex.focus, dR)
        np.add.at(dE, ex.last_head[has_head], dR[has_head])
        self._encode_backward(dE, ex, enc_cache, grads)
        return float(total), grads

    def loss_and_grads(self, graph: SemanticGraph, external=None) -> tuple[float, Params]:
        return self.loss(self.example(graph, external))

    # --- inference --------------------------------------------------------------

    def encode(self, sentence: Sentence, external=None) -> EncoderStates:
        ex = self.example(sentence, external)
        E, _ = self._encode_forward(ex)
        p = self.params
        return EncoderStates(
            E,
            elu(E @ p["arc_enc_W"] + p["arc_enc_b"]),
            elu(E @ p["lab_enc_W"] + p["lab_enc_b"]),
        )

    def decoder_start(self) -> tuple:
        h = self.config.lstm_decoder_size
        return tuple((np.zeros(h), np.zeros(h)) for _ in range(self.config.lstm_decoder_layers))

    def score_step(
        self, enc: EncoderStates, focus: int, last_head: int | None, memory: tuple
    ) -> DecoderStep:
        p = self.params
        r = enc.states[focus]
        if last_head is not None:
            r = r + enc.states[last_head]
        x = r
        new_memory = []
        for layer, (h, c) in enumerate(memory):
            pre = f"dec{layer}"
            h, c = lstm_step(x, h, c, p[pre + "_Wx"], p[pre + "_Wh"], p[pre + "_b"])
            new_memory.append((h, c))
            x = h
        f1 = elu(x @ p["arc_dec_W"] + p["arc_dec_b"])
        v = enc.arc_proj @ (p["arc_W"].T @ f1 + p["arc_v"]) + (f1 @ p["arc_u"] + p["arc_b"][0])
        return DecoderStep(x, r, v, tuple(new_memory))

    def score_labels(self, state: np.ndarray, enc: EncoderStates, head: int) -> np.ndarray:
        p = self.params
        g1 = elu(state @ p["lab_dec_W"] + p["lab_dec_b"])
        g2 = enc.label_proj[head]
        return np.einsum("d,lde,e->l", g1, p["lab_W"], g2) + p["lab_U"] @ g1 + p["lab_V"] @ g2 + p["lab_b"]

    def predict_label(self, state: np.ndarray, enc: EncoderStates, head: int) -> str:
        if head == ROOT:
            return ROOT_LABEL
        return self.vocab.labels.lookup(int(np.argmax(self.score_labels(state, enc, head))))

    # --- persistence ----------------------------------------------------------

    def copy_params(self) -> Params:
        return {k: v.copy() for k, v in self.params.items()}

    def save(self, path: str | Path) -> None:
        """Write an ``.npz`` archive: one array per parameter plus a JSON header."""
        meta = {"format": "pointer-sdp-checkpoint/1", "config": self.config.to_dict(), "vocab": self.vocab.to_dict()}
        with open(path, "wb") as f:
            np.savez(f, __meta__=np.array(json.dumps(meta)), **self.params)

    @classmethod
    def load(cls, path: str | Path) -> "PointerModel":
        with np.load(path, allow_pickle=False) as data:
            meta = json.loads(str(data["__meta__"]))
            params = {k: data[k].copy() for k in data.files if k != "__meta__"}
        config = ModelConfig.from_dict(meta["config"])
        return cls(config, Vocab.from_dict(meta["vocab"]), params)


def sentences_examples(model: PointerModel, graphs: Sequence[SemanticGraph], external=None) -> list[Example]:
    if external is None:
        external = [None] * len(graphs)
    return [model.example(g, e) for g, e in zip(graphs, external)]
