"""Nearest-neighbor similarity graphs, PageRank centrality and bipartite HITS."""

from __future__ import annotations

import math
from collections.abc import Mapping
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from clustrank import kernels
from clustrank.language_models import SimilarityScore

DELTA_GRID = (2, 4, 9, 19, 29, 39, 49)
NU_GRID = (0.05,) + tuple(round(0.1 * i, 1) for i in range(1, 10)) + (0.95,)
HITS_DELTA_GRID = DELTA_GRID

DEFAULT_TOL = 1e-10
DEFAULT_MAX_ITERS = 10_000


class ConvergenceError(RuntimeError):
    def __init__(self, what: str, residual: float, iters: int):
        super().__init__(f"{what} did not converge after {iters} iterations "
                         f"(last residual {residual:.3e})")
        self.residual = residual
        self.iters = iters


def _log_matrix(items: Sequence[str], pairwise_sim) -> np.ndarray:
    """Coerce a mapping (i, j) -> SimilarityScore, or an array of logs, to an array."""
    if isinstance(pairwise_sim, np.ndarray):
        if pairwise_sim.shape != (len(items), len(items)):
            raise ValueError("similarity matrix shape does not match items")
        return pairwise_sim
    out = np.full((len(items), len(items)), -np.inf)
    for i, a in enumerate(items):
        for j, b in enumerate(items):
            if i == j:
                continue
            try:
                s = pairwise_sim[a, b]
            except KeyError:
                raise KeyError(f"missing similarity for pair ({a!r}, {b!r})") from None
            out[i, j] = s.log_value if isinstance(s, SimilarityScore) else float(s)
    return out


@dataclass(frozen=True)
class SimilarityGraph:
    """Directed graph; ``log_weights[i, j]`` is log wt(i -> j), ``-inf`` for no edge."""

    items: tuple[str, ...]
    log_weights: np.ndarray = field(repr=False)
    delta: int
    item_kind: str = "document"

    @property
    def raw_weights(self) -> dict[tuple[str, str], float]:
        out = {}
        for i, j in zip(*np.nonzero(np.isfinite(self.log_weights))):
            out[self.items[i], self.items[j]] = math.exp(self.log_weights[i, j])
        return out

    def out_neighbors(self, item: str) -> list[str]:
        i = self.items.index(item)
        return [self.items[j] for j in np.flatnonzero(np.isfinite(self.log_weights[i]))]

    def edge_lines(self) -> list[str]:
        """``src<TAB>dst<TAB>raw_weight`` lines for debugging dumps."""
        lines = []
        n = len(self.items)
        for i in range(n):
            for j in range(n):
                lw = self.log_weights[i, j]
                if np.isfinite(lw):
                    lines.append(f"{self.items[i]}\t{self.items[j]}\t{math.exp(lw):.12g}")
        return lines


def build_graph(items: Sequence[str], pairwise_sim, delta: int,
                item_kind: str = "document") -> SimilarityGraph:
    """Keep, for each source s1, edges to the delta targets s2 with highest p_{s2}(s1).

    ``pairwise_sim[s1, s2]`` must be p_{s2}(s1): the source's text scored
    under the target's model. Ties are broken by smaller item id.
    """
    items = tuple(items)
    n = len(items)
    if n < 2:
        raise ValueError("a similarity graph needs at least two items")
    if delta < 1:
        raise ValueError("delta must be >= 1")
    sims = _log_matrix(items, pairwise_sim)
    out_degree = min(delta, n - 1)
    log_w = np.full((n, n), -np.inf)
    for i in range(n):
        targets = sorted((j for j in range(n) if j != i),
                         key=lambda j: (-sims[i, j], items[j]))[:out_degree]
        for j in targets:
            log_w[i, j] = sims[i, j]
    return SimilarityGraph(items, log_w, delta, item_kind)


@dataclass(frozen=True)
class TransitionMatrix:
    items: tuple[str, ...]
    matrix: np.ndarray = field(repr=False)
    nu: float


def smooth_transitions(g: SimilarityGraph, nu: float) -> TransitionMatrix:
    """(1 - nu) / |S| + nu * wt(s1 -> s2) / sum_s' wt(s1 -> s')."""
    if not 0.0 <= nu <= 1.0:
        raise ValueError(f"nu must lie in [0, 1], got {nu}")
    n = len(g.items)
    uniform = (1.0 - nu) / n
    if nu == 0.0:
        return TransitionMatrix(g.items, np.full((n, n), uniform), nu)
    lw = g.log_weights
    row_max = lw.max(axis=1)
    if not np.all(np.isfinite(row_max)):
        bad = g.items[int(np.flatnonzero(~np.isfinite(row_max))[0])]
        raise ValueError(f"item {bad!r} has zero out-weight; cannot normalize")
    # row normalization in log space: immune to underflow of tiny similarities
    w = np.exp(lw - row_max[:, None])
    w /= w.sum(axis=1, keepdims=True)
    return TransitionMatrix(g.items, uniform + nu * w, nu)


@dataclass(frozen=True)
class CentralityScores:
    """Stationary probabilities; items outside the reference set have centrality 0."""

    scores: dict[str, float]

    def __getitem__(self, item: str) -> float:
        return self.scores.get(item, 0.0)

    def __len__(self):
        return len(self.scores)

    def __contains__(self, item):
        return item in self.scores

    @classmethod
    def uniform(cls, items: Iterable[str]) -> CentralityScores:
        items = list(items)
        return cls({i: 1.0 / len(items) for i in items})


def pagerank(t: TransitionMatrix, tol: float = DEFAULT_TOL,
             max_iters: int = DEFAULT_MAX_ITERS) -> CentralityScores:
    if t.nu == 0.0:
        # identical rows: the stationary distribution is any row
        return CentralityScores(dict(zip(t.items, t.matrix[0].tolist())))
    pi, residual, iters = kernels.stationary(t.matrix, tol, max_iters)
    if not residual < tol:
        raise ConvergenceError("PageRank", residual, iters)
    return CentralityScores(dict(zip(t.items, pi.tolist())))


def centrality(items: Sequence[str], pairwise_sim, delta: int, nu: float,
               item_kind: str = "document", tol: float = DEFAULT_TOL,
               max_iters: int = DEFAULT_MAX_ITERS) -> CentralityScores:
    """build_graph -> smooth_transitions -> pagerank."""
    g = build_graph(items, pairwise_sim, delta, item_kind)
    return pagerank(smooth_transitions(g, nu), tol, max_iters)


def hits_weights(docs: Sequence[str], clusters: Sequence[str], p_c_d, delta: int
                 ) -> np.ndarray:
    """Bipartite doc -> cluster weight matrix: each doc links to its delta best clusters.

    ``p_c_d`` maps (doc_id, cluster_id) -> SimilarityScore p_c(d), or is an
    array of log values indexed [doc, cluster]. Weights are rescaled by a
    global constant, which HITS is invariant to.
    """
    if delta < 1:
        raise ValueError("delta must be >= 1")
    if isinstance(p_c_d, np.ndarray):
        logs = p_c_d
    else:
        logs = np.empty((len(docs), len(clusters)))
        for i, d in enumerate(docs):
            for j, c in enumerate(clusters):
                try:
                    s = p_c_d[d, c]
                except KeyError:
                    raise KeyError(f"missing p_c(d) for pair ({d!r}, {c!r})") from None
                logs[i, j] = s.log_value if isinstance(s, SimilarityScore) else float(s)
    out_degree = min(delta, len(clusters))
    mask = np.zeros(logs.shape, dtype=bool)
    for i in range(len(docs)):
        best = sorted(range(len(clusters)), key=lambda j: (-logs[i, j], clusters[j]))
        mask[i, best[:out_degree]] = True
    top = logs[mask].max()
    w = np.where(mask, np.exp(np.where(mask, logs, top) - top), 0.0)
    return w


def hits(weights: np.ndarray, tol: float = DEFAULT_TOL, max_iters: int = DEFAULT_MAX_ITERS):
    """(authority, hub) vectors, each L2-normalized, by power iteration from uniform."""
    auth, hub, residual, iters = kernels.hits(weights, tol, max_iters)
    if not residual < tol:
        raise ConvergenceError("HITS", residual, iters)
    return auth, hub


def hits_authority(docs: Sequence[str], clusters: Sequence[str], p_c_d, delta: int,
                   tol: float = DEFAULT_TOL, max_iters: int = DEFAULT_MAX_ITERS
                   ) -> dict[str, float]:
    clusters = list(clusters)
    w = hits_weights(docs, clusters, p_c_d, delta)
    auth, _ = hits(w, tol, max_iters)
    return dict(zip(clusters, auth.tolist()))


def stationary_residual(t: TransitionMatrix, scores: CentralityScores) -> float:
    pi = np.array([scores[i] for i in t.items])
    return float(np.abs(pi @ t.matrix - pi).sum())
