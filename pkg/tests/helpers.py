"""Reference implementations used as test oracles. Deliberately naive."""

from __future__ import annotations

import math
import random

import numpy as np

from hypothesis import strategies as st

from pointer_sdp.graph import SemanticGraph, Sentence, Token

LABELS = ["ARG1", "ARG2", "BV", "poss", "compound"]


def has_cycle(num_nodes, arcs):
    """Colour-marking DFS."""
    succ = {v: [] for v in range(num_nodes)}
    for a, b in arcs:
        succ[a].append(b)
    WHITE, GREY, BLACK = 0, 1, 2
    colour = [WHITE] * num_nodes

    def visit(v):
        colour[v] = GREY
        for w in succ[v]:
            if colour[w] == GREY:
                return True
            if colour[w] == WHITE and visit(w):
                return True
        colour[v] = BLACK
        return False

    return any(colour[v] == WHITE and visit(v) for v in range(num_nodes))


def reachable(num_nodes, arcs, src, dst):
    succ = {v: set() for v in range(num_nodes)}
    for a, b in arcs:
        succ[a].add(b)
    frontier, seen = [src], {src}
    while frontier:
        v = frontier.pop()
        if v == dst:
            return True
        for w in succ[v] - seen:
            seen.add(w)
            frontier.append(w)
    return False


def make_sentence(n, prefix="w"):
    return Sentence(tuple(Token(i, f"{prefix}{i}", f"l{i}", "NN" if i % 2 else "VB") for i in range(1, n + 1)))


def random_dag(rng: random.Random, n: int, ratio: float) -> SemanticGraph:
    """Random labelled DAG: arcs respect a hidden random permutation of 0..n."""
    perm = list(range(n + 1))
    rng.shuffle(perm)
    rank = {v: k for k, v in enumerate(perm)}
    pairs = [(a, b) for a in range(n + 1) for b in range(1, n + 1) if a != b and rank[a] < rank[b]]
    m = min(len(pairs), round(ratio * n))
    chosen = rng.sample(pairs, m)
    triples = [(a, b, "ROOT" if a == 0 else rng.choice(LABELS)) for a, b in chosen]
    return SemanticGraph.from_triples(make_sentence(n), triples)


@st.composite
def dags(draw, max_n=8):
    """Arbitrary labelled DAGs, crossing arcs and multiple heads included."""
    n = draw(st.integers(1, max_n))
    perm = draw(st.permutations(range(n + 1)))
    rank = {v: k for k, v in enumerate(perm)}
    pairs = [(a, b) for a in range(n + 1) for b in range(1, n + 1) if a != b and rank[a] < rank[b]]
    chosen = draw(st.lists(st.sampled_from(pairs), unique=True)) if pairs else []
    triples = []
    for a, b in chosen:
        label = "ROOT" if a == 0 else draw(st.sampled_from(LABELS))
        triples.append((a, b, label))
    forms = draw(st.lists(st.text("abcxyz'-", min_size=1, max_size=6), min_size=n, max_size=n))
    tokens = tuple(Token(i + 1, f, f.upper(), draw(st.sampled_from(["NN", "VB", "DT"]))) for i, f in enumerate(forms))
    return SemanticGraph.from_triples(Sentence(tokens), triples)


def naive_sdp_arcs(text: str):
    """Independent column scan of an SDP file: list of per-sentence sorted arc triples."""
    out = []
    for block in text.strip("\n").split("\n\n"):
        rows = [line.split("\t") for line in block.split("\n") if line and not line.startswith("#")]
        if not rows:
            continue
        preds = [int(r[0]) for r in rows if r[5] == "+"]
        arcs = []
        for r in rows:
            if r[4] == "+":
                arcs.append((0, int(r[0]), "ROOT"))
            for k, lab in enumerate(r[7:]):
                if lab != "_":
                    arcs.append((preds[k], int(r[0]), lab))
        out.append(sorted(arcs))
    return out


# --- scorer oracles --------------------------------------------------------


def tiny_config(**changes):
    from pointer_sdp.scorer.config import ModelConfig

    base = dict(
        cnn_number_of_filters=3,
        char_embedding_dimension=2,
        word_embedding_dimension=3,
        lemma_embedding_dimension=2,
        pos_embedding_dimension=2,
        bilstm_encoder_size=3,
        lstm_decoder_size=4,
        arc_mlp_size=4,
        label_mlp_size=3,
    )
    base.update(changes)
    return ModelConfig(**base)


def toy_graph():
    """Three words, a crossing-free DAG with a multi-headed word."""
    s = Sentence((Token(1, "ab", "a", "X"), Token(2, "cde", "c", "Y"), Token(3, "f", "f", "X")))
    return SemanticGraph.from_triples(s, [(0, 2, "ROOT"), (2, 1, "A"), (2, 3, "B"), (1, 3, "A")])


def naive_elu(x):
    return [v if v > 0 else math.exp(v) - 1.0 for v in x]


def naive_sigmoid(x):
    return 1.0 / (1.0 + math.exp(-x))


def naive_lstm_step(x, h, c, Wx, Wh, b):
    """Scalar loops; gate blocks in the order input, forget, output, candidate."""
    H = len(h)
    z = [b[k] + sum(x[i] * Wx[i][k] for i in range(len(x))) + sum(h[i] * Wh[i][k] for i in range(H)) for k in range(4 * H)]
    new_h, new_c = [], []
    for k in range(H):
        i, f, o = naive_sigmoid(z[k]), naive_sigmoid(z[H + k]), naive_sigmoid(z[2 * H + k])
        g = math.tanh(z[3 * H + k])
        ck = f * c[k] + i * g
        new_c.append(ck)
        new_h.append(o * math.tanh(ck))
    return new_h, new_c


def naive_affine(x, W, b):
    return [b[k] + sum(x[i] * W[i][k] for i in range(len(x))) for k in range(len(b))]


def naive_biaffine(f1, f2, W, u, v, b):
    return (
        sum(f1[i] * W[i][j] * f2[j] for i in range(len(f1)) for j in range(len(f2)))
        + sum(u[i] * f1[i] for i in range(len(f1)))
        + sum(v[j] * f2[j] for j in range(len(f2)))
        + b
    )


def finite_difference_check(model, ex, eps=1e-4, floor=1e-7):
    """Largest relative error between analytic and central-difference gradients."""
    _, grads = model.loss(ex)
    worst, where = 0.0, None
    for name, value in model.params.items():
        for idx in np.ndindex(value.shape):
            old = value[idx]
            value[idx] = old + eps
            plus, _ = model.loss(ex, need_grad=False)
            value[idx] = old - eps
            minus, _ = model.loss(ex, need_grad=False)
            value[idx] = old
            fd = (plus - minus) / (2 * eps)
            an = grads[name][idx]
            err = abs(fd - an) / max(abs(fd), abs(an), floor)
            if err > worst:
                worst, where = err, (name, idx, fd, an)
    return worst, where
