"""Initial query-likelihood retrieval and ranked-run containers."""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from clustrank import kernels
from clustrank.corpus import Corpus, Query

DEFAULT_MU_INIT = 2000.0
DEFAULT_DEPTH = 50


@dataclass(frozen=True)
class RunEntry:
    item_id: str
    score: float
    rank: int


@dataclass(frozen=True)
class RankedRun:
    query_id: str
    entries: tuple[RunEntry, ...]

    @classmethod
    def from_scores(cls, query_id: str, scored: Iterable[tuple[str, float]],
                    sort_keys: Sequence[float] | None = None) -> RankedRun:
        """Rank by score descending, ties by item id ascending.

        ``sort_keys`` (aligned with ``scored``) may supply the ordering
        values when the reported scores differ from them by a constant.
        """
        scored = list(scored)
        keys = [s for _, s in scored] if sort_keys is None else list(sort_keys)
        if any(math.isnan(k) for k in keys):
            raise ValueError("NaN score in run")
        order = sorted(range(len(scored)), key=lambda i: (-keys[i], scored[i][0]))
        return cls(query_id, tuple(
            RunEntry(scored[i][0], float(scored[i][1]), r) for r, i in enumerate(order, 1)))

    @classmethod
    def from_ids(cls, query_id: str, ids: Sequence[str],
                 scores: Sequence[float] | None = None) -> RankedRun:
        """Wrap an already-ordered id list; default scores descend from 0."""
        if scores is None:
            scores = [-float(r) for r in range(len(ids))]
        return cls(query_id, tuple(
            RunEntry(i, float(s), r) for r, (i, s) in enumerate(zip(ids, scores), 1)))

    def __len__(self):
        return len(self.entries)

    def __iter__(self):
        return iter(self.entries)

    @property
    def ids(self) -> list[str]:
        return [e.item_id for e in self.entries]

    def scores(self) -> dict[str, float]:
        return {e.item_id: e.score for e in self.entries}


@dataclass(frozen=True)
class RetrievalConfig:
    mu_init: float = DEFAULT_MU_INIT
    N: int = DEFAULT_DEPTH

    def __post_init__(self):
        if self.N < 1:
            raise ValueError("N must be >= 1")
        if self.mu_init < 0:
            raise ValueError("mu_init must be nonnegative")


def truncate(run: RankedRun, N: int) -> RankedRun:
    return RankedRun(run.query_id, run.entries[:max(N, 0)])


def cross_entropy_scores(weights: dict[str, float], corpus: Corpus, mu: float):
    """Per-document sum_w weight(w) * log p_d^{Dir[mu]}(w), for every document.

    Returns (ordering_scores, constant): the full value is
    ``ordering_scores + constant``; ordering uses the document-dependent part
    only so that rankings do not depend on how the constant rounds.
    """
    if len(corpus) == 0:
        raise ValueError("cannot rank an empty corpus")
    vocab = corpus.vocabulary
    terms = sorted(weights)
    for t in terms:
        if corpus.term_counts.get(t, 0) <= 0:
            raise ValueError(f"term {t!r} does not occur in the collection")
    w = np.array([weights[t] for t in terms], dtype=np.float64)
    if mu > 0:
        ids = np.array([vocab[t] for t in terms], dtype=np.int64)
        indptr, docs, tfs = corpus.postings
        base = kernels.accumulate_scores(indptr, docs, tfs, ids, w, corpus.background,
                                         corpus.doc_lengths, mu)
        const = float(sum(wi * math.log(mu * corpus.collection_prob(t))
                          for t, wi in zip(terms, w)))
        return base, const
    # mu == 0: unsmoothed, documents missing a term score -inf
    base = np.empty(len(corpus))
    for d, doc in enumerate(corpus.documents):
        tf = doc.tf
        n = len(doc)
        total = 0.0
        for t, wi in zip(terms, w):
            c = tf.get(t, 0)
            if c == 0 or wi == 0:
                if c == 0 and wi > 0:
                    total = -math.inf
                    break
                continue
            total += wi * math.log(c / n)
        base[d] = total
    return base, 0.0


def query_weights(terms: Sequence[str]) -> dict[str, float]:
    counts = Counter(terms)
    n = len(terms)
    return {t: c / n for t, c in counts.items()}


def initial_rank(query: Query, corpus: Corpus, cfg: RetrievalConfig = RetrievalConfig()
                 ) -> RankedRun:
    """Top-N documents by exp(-KL(query MLE || document Dirichlet model)), log scores."""
    weights = query_weights(query.terms)
    base, const = cross_entropy_scores(weights, corpus, cfg.mu_init)
    neg_entropy = sum(w * math.log(w) for w in weights.values())
    ids = [d.doc_id for d in corpus.documents]
    order = sorted(range(len(ids)), key=lambda i: (-base[i], ids[i]))[:cfg.N]
    return RankedRun.from_ids(
        query.query_id, [ids[i] for i in order],
        [float(base[i]) + const - neg_entropy for i in order])
