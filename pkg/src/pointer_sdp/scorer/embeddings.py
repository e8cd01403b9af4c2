"""External per-token vectors (e.g. averaged subword states of a contextual encoder).

File layout: one line per token holding whitespace-separated floats, and a
blank line after each sentence, in corpus order.
"""

from __future__ import annotations

from pathlib import Path
from typing import Sequence

import numpy as np

from ..graph import SemanticGraph


class EmbeddingFileError(ValueError):
    pass


def read_external_embeddings(path: str | Path) -> list[np.ndarray]:
    sentences: list[np.ndarray] = []
    rows: list[list[float]] = []
    dim = None
    with open(path, encoding="utf-8") as f:
        for lineno, line in enumerate(f, start=1):
            if not line.strip():
                if rows:
                    sentences.append(np.asarray(rows, dtype=float))
                    rows = []
                continue
            try:
                vec = [float(x) for x in line.split()]
            except ValueError:
                raise EmbeddingFileError(f"line {lineno}: non-numeric value") from None
            if dim is None:
                dim = len(vec)
            elif len(vec) != dim:
                raise EmbeddingFileError(f"line {lineno}: {len(vec)} values, expected {dim}")
            rows.append(vec)
    if rows:
        sentences.append(np.asarray(rows, dtype=float))
    return sentences


def load_external_embeddings(
    path: str | Path, graphs: Sequence[SemanticGraph], dim: int
) -> list[np.ndarray]:
    """Read vectors for ``graphs`` and check they align token-for-token at ``dim``."""
    vectors = read_external_embeddings(path)
    if len(vectors) != len(graphs):
        raise EmbeddingFileError(f"{len(vectors)} sentences of vectors for {len(graphs)} sentences")
    for k, (vec, g) in enumerate(zip(vectors, graphs)):
        if vec.shape[0] != g.n:
            raise EmbeddingFileError(f"sentence {k}: {vec.shape[0]} vectors for {g.n} tokens")
        if vec.shape[1] != dim:
            raise EmbeddingFileError(f"sentence {k}: vectors have dim {vec.shape[1]}, expected {dim}")
    return vectors


def write_external_embeddings(vectors: Sequence[np.ndarray], path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as f:
        for sent in vectors:
            for row in sent:
                f.write(" ".join(repr(float(x)) for x in row) + "\n")
            f.write("\n")
