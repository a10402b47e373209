"""Relevance models (RM1 / RM3) and cross-entropy document ranking."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

from clustrank.corpus import Corpus, Query
from clustrank.language_models import jm_model
from clustrank.retrieval import RankedRun, cross_entropy_scores, query_weights

ALPHA_GRID = (0.0, 0.1, 0.3, 0.5, 0.7, 0.9)
BETA_GRID = (25, 50, 75, 100, 500, 1000, 5000, None)  # None == ALL
GAMMA_GRID = tuple(round(0.1 * i, 1) for i in range(10))
DEFAULT_MU = 2000.0

ALL = None


@dataclass(frozen=True)
class RelevanceModel:
    term_probs: dict[str, float]
    alpha: float
    beta: int | None = ALL
    gamma: float | None = None

    def __len__(self):
        return len(self.term_probs)

    def top(self, n: int | None = None) -> list[tuple[str, float]]:
        items = sorted(self.term_probs.items(), key=lambda kv: (-kv[1], kv[0]))
        return items if n is None else items[:n]

    def dump_lines(self) -> list[str]:
        return [f"{t}\t{p:.12g}" for t, p in self.top()]


def _logsumexp(values: Sequence[float]) -> float:
    m = max(values)
    if m == -math.inf:
        return -math.inf
    return m + math.log(math.fsum(math.exp(v - m) for v in values))


def rm1(init_list: RankedRun, corpus: Corpus, query: Query, alpha: float) -> RelevanceModel:
    """Query-likelihood-weighted mixture of the initial documents' JM models."""
    if len(init_list) == 0:
        raise ValueError("RM1 needs a nonempty initial list")
    docs = [corpus[d] for d in init_list.ids]
    models = [jm_model(d.terms, alpha, corpus) for d in docs]
    log_lik = [math.fsum(m.log_prob(q) for q in query.terms) for m in models]
    norm = _logsumexp(log_lik)
    if norm == -math.inf:
        raise ValueError(
            f"every initial-list document assigns zero likelihood to query "
            f"{query.query_id!r} at alpha={alpha}; use a larger alpha")
    weights = [math.exp(ll - norm) for ll in log_lik]

    probs: dict[str, float] = {}
    for doc, w in zip(docs, weights):
        if w == 0.0 or len(doc) == 0:
            continue
        scale = w * (1.0 - alpha) / len(doc)
        for term, tf in doc.tf.items():
            probs[term] = probs.get(term, 0.0) + scale * tf
    if alpha > 0:
        for term in corpus.term_counts:
            probs[term] = probs.get(term, 0.0) + alpha * corpus.collection_prob(term)
    return RelevanceModel({t: p for t, p in probs.items() if p > 0}, alpha)


def clip_and_renormalize(rm: RelevanceModel, beta: int | None) -> RelevanceModel:
    """Keep the beta most probable terms (ties by term) and renormalize; None keeps all."""
    if beta is not None and beta < 1:
        raise ValueError("beta must be >= 1 or ALL")
    if beta is None or beta >= len(rm.term_probs):
        return RelevanceModel(rm.term_probs, rm.alpha, beta, rm.gamma)
    kept = rm.top(beta)
    total = math.fsum(p for _, p in kept)
    return RelevanceModel({t: p / total for t, p in kept}, rm.alpha, beta, rm.gamma)


def rm3(clipped: RelevanceModel, query: Query, gamma: float) -> RelevanceModel:
    """gamma * query MLE + (1 - gamma) * clipped RM1."""
    if not 0.0 <= gamma <= 1.0:
        raise ValueError(f"gamma must lie in [0, 1], got {gamma}")
    q = query_weights(query.terms)
    terms = set(q) | set(clipped.term_probs)
    probs = {}
    for t in terms:
        p = gamma * q.get(t, 0.0) + (1.0 - gamma) * clipped.term_probs.get(t, 0.0)
        if p > 0:
            probs[t] = p
    return RelevanceModel(probs, clipped.alpha, clipped.beta, gamma)


def query_model(query: Query) -> RelevanceModel:
    """The query MLE as a (degenerate) relevance model."""
    return RelevanceModel(query_weights(query.terms), alpha=0.0, gamma=1.0)


def rm_rank(rm: RelevanceModel, scope: str, corpus: Corpus, mu: float = DEFAULT_MU,
            init_list: RankedRun | None = None, query_id: str = "") -> RankedRun:
    """Rank documents by -CE(rm || p_d^{Dir[mu]}).

    ``scope`` is ``"corpus"`` (every document) or ``"init_list"`` (re-rank
    ``init_list`` only).
    """
    if scope not in ("corpus", "init_list"):
        raise ValueError(f"scope must be 'corpus' or 'init_list', got {scope!r}")
    qid = query_id or (init_list.query_id if init_list is not None else "")
    base, const = cross_entropy_scores(rm.term_probs, corpus, mu)
    ids = [d.doc_id for d in corpus.documents]
    if scope == "init_list":
        if init_list is None:
            raise ValueError("scope 'init_list' needs the initial list")
        positions = [corpus.position(d) for d in init_list.ids]
    else:
        positions = range(len(ids))
    order = sorted(positions, key=lambda i: (-base[i], ids[i]))
    return RankedRun.from_ids(qid, [ids[i] for i in order],
                              [float(base[i]) + const for i in order])

