"""Batched exp(-KL) similarities between term bags, in log space."""

from __future__ import annotations

from collections import Counter
from typing import Sequence

import numpy as np

from clustrank import kernels
from clustrank.corpus import Corpus


def logsim_matrix(xs: Sequence[Counter], ys: Sequence[Counter], mu: float,
                  corpus: Corpus) -> np.ndarray:
    """``out[i, j] = log p_{y_j}(x_i)``: x_i's MLE scored against y_j's Dirichlet[mu] model.

    Raises if some x term gets zero probability under some y model.
    """
    vocab: dict[str, int] = {}
    indptr = [0]
    indices: list[int] = []
    weights: list[float] = []
    for x in xs:
        n = sum(x.values())
        if n == 0:
            raise ValueError("similarity of an empty term sequence is undefined")
        for term in sorted(x):
            indices.append(vocab.setdefault(term, len(vocab)))
            weights.append(x[term] / n)
        indptr.append(len(indices))
    y_counts = np.zeros((len(ys), len(vocab)))
    y_lengths = np.empty(len(ys))
    for j, y in enumerate(ys):
        y_lengths[j] = sum(y.values())
        for term, c in y.items():
            t = vocab.get(term)
            if t is not None:
                y_counts[j, t] = c
    background = np.array([corpus.collection_prob(t) for t in vocab])
    out = kernels.cross_logsim(indptr, indices, weights, y_counts, y_lengths,
                               background, mu)
    if np.isneginf(out).any():
        i, j = map(int, np.argwhere(np.isneginf(out))[0])
        for term in sorted(xs[i]):
            if ys[j].get(term, 0) == 0 and (mu == 0 or corpus.collection_prob(term) == 0):
                raise ValueError(
                    f"term {term!r} has zero probability under target model {j}")
        raise ValueError(f"zero-probability term between items {i} and {j}")
    return out


def self_logsim(bags: Sequence[Counter], mu: float, corpus: Corpus) -> np.ndarray:
    """``out[i, j] = log p_{bags[j]}(bags[i])`` for all ordered pairs (diagonal included)."""
    return logsim_matrix(bags, bags, mu, corpus)


def to_mapping(row_ids: Sequence[str], col_ids: Sequence[str], matrix: np.ndarray,
               skip_diagonal: bool = False):
    """Dict keyed by (row_id, col_id) of log similarities."""
    out = {}
    for i, a in enumerate(row_ids):
        for j, b in enumerate(col_ids):
            if skip_diagonal and i == j:
                continue
            out[a, b] = float(matrix[i, j])
    return out

