"""Cluster scoring: ClustRanker, its ablations, and query-match baselines."""

from __future__ import annotations

import dataclasses
import enum
import math
from dataclasses import dataclass
from functools import cached_property
from typing import Mapping

from clustrank.centrality import CentralityScores
from clustrank.clustering import Cluster, ClusterSet
from clustrank.corpus import Query
from clustrank.language_models import SimilarityScore, safe_exp
from clustrank.retrieval import RankedRun

LAMBDA_GRID = tuple(round(0.1 * i, 1) for i in range(11))


class Method(enum.Enum):
    CLUST_CENT = "clust-cent"
    CLUST_QUERY_GEN = "clust-query-gen"
    CLUST_CENT_CLUST_QUERY_GEN = "clust-cent+clust-query-gen"
    DOC_CENT = "doc-cent"
    DOC_QUERY_GEN = "doc-query-gen"
    DOC_CENT_DOC_QUERY_GEN = "doc-cent+doc-query-gen"
    CLUST_CENT_DOC_CENT = "clust-cent+doc-cent"
    CLUST_QUERY_GEN_DOC_QUERY_GEN = "clust-query-gen+doc-query-gen"
    CLUSTRANKER = "clustranker"
    CLUSTRANKER_ALL_PROXIES = "clustranker-all-proxies"
    MAX = "max"
    MIN = "min"
    GEOMEAN = "geomean"
    HITS = "hits"

    @property
    def label(self) -> str:
        return _LABELS[self]

    @property
    def uses_lambda(self) -> bool:
        return self in _LAMBDA_METHODS

    @property
    def uses_centrality(self) -> bool:
        return self in _CENTRALITY_METHODS


_LABELS = {
    Method.CLUST_CENT: "ClustCent",
    Method.CLUST_QUERY_GEN: "ClustQueryGen",
    Method.CLUST_CENT_CLUST_QUERY_GEN: "ClustCent∧ClustQueryGen",
    Method.DOC_CENT: "DocCent",
    Method.DOC_QUERY_GEN: "DocQueryGen",
    Method.DOC_CENT_DOC_QUERY_GEN: "DocCent∧DocQueryGen",
    Method.CLUST_CENT_DOC_CENT: "ClustCent∧DocCent",
    Method.CLUST_QUERY_GEN_DOC_QUERY_GEN: "ClustQueryGen∧DocQueryGen",
    Method.CLUSTRANKER: "ClustRanker",
    Method.CLUSTRANKER_ALL_PROXIES: "ClustRanker(all proxies)",
    Method.MAX: "Max",
    Method.MIN: "Min",
    Method.GEOMEAN: "GeoMean",
    Method.HITS: "HITS",
}

_LAMBDA_METHODS = frozenset({
    Method.CLUST_CENT_DOC_CENT,
    Method.CLUST_QUERY_GEN_DOC_QUERY_GEN,
    Method.CLUSTRANKER,
    Method.CLUSTRANKER_ALL_PROXIES,
})

_CENTRALITY_METHODS = frozenset({
    Method.CLUST_CENT,
    Method.CLUST_CENT_CLUST_QUERY_GEN,
    Method.DOC_CENT,
    Method.DOC_CENT_DOC_QUERY_GEN,
    Method.CLUST_CENT_DOC_CENT,
    Method.CLUSTRANKER,
    Method.CLUSTRANKER_ALL_PROXIES,
})


@dataclass(frozen=True)
class MethodSpec:
    method: Method
    lam: float = 0.5
    # Table-6 variant only: drop lambda from the whole-cluster addend, as displayed
    literal_all_proxies: bool = False

    def __post_init__(self):
        if isinstance(self.method, str):
            object.__setattr__(self, "method", Method(self.method))
        if not 0.0 <= self.lam <= 1.0:
            raise ValueError(f"lambda must lie in [0, 1], got {self.lam}")


@dataclass(frozen=True)
class RankerInputs:
    """Per-query quantities the cluster scoring functions draw on.

    ``p_d_c`` is keyed by (doc_id, cluster_id); ``hits_auth`` is only needed
    for the HITS method.
    """

    query: Query
    clusters: ClusterSet
    init_list: RankedRun
    p_c_q: Mapping[str, SimilarityScore]
    p_d_q: Mapping[str, SimilarityScore]
    p_d_c: Mapping[tuple[str, str], SimilarityScore]
    cent_c: CentralityScores
    cent_d: CentralityScores
    hits_auth: Mapping[str, float] | None = None

    @cached_property
    def _q_c(self):
        return {k: v.value for k, v in self.p_c_q.items()}

    @cached_property
    def _q_d(self):
        return {k: v.value for k, v in self.p_d_q.items()}

    @cached_property
    def _assoc(self):
        return {k: v.value for k, v in self.p_d_c.items()}

    def query_gen_cluster(self, cid: str) -> float:
        try:
            return self._q_c[cid]
        except KeyError:
            raise KeyError(f"missing p_c(q) for cluster {cid!r}") from None

    def query_gen_doc(self, did: str) -> float:
        try:
            return self._q_d[did]
        except KeyError:
            raise KeyError(f"missing p_d(q) for document {did!r}") from None

    def log_query_gen_doc(self, did: str) -> float:
        try:
            return self.p_d_q[did].log_value
        except KeyError:
            raise KeyError(f"missing p_d(q) for document {did!r}") from None

    def association(self, did: str, cid: str) -> float:
        try:
            return self._assoc[did, cid]
        except KeyError:
            raise KeyError(f"missing p_d(c) for pair ({did!r}, {cid!r})") from None

    def replace(self, **changes) -> RankerInputs:
        """Copy with some fields changed, sharing the linear-value caches."""
        new = dataclasses.replace(self, **changes)
        for name in ("_q_c", "_q_d", "_assoc"):
            if name in self.__dict__ and not {"p_c_q", "p_d_q", "p_d_c"} & changes.keys():
                new.__dict__[name] = self.__dict__[name]
        return new


def _doc_sum(proxies, c: Cluster, inp: RankerInputs, *, query: bool, cent: bool) -> float:
    total = 0.0
    for d in proxies:
        term = inp.association(d, c.cluster_id)
        if query:
            term = inp.query_gen_doc(d) * term
        if cent:
            term = term * inp.cent_d[d]
        total += term
    return total


def score_cluster(spec: MethodSpec, c: Cluster, inp: RankerInputs) -> float:
    m = spec.method
    lam = spec.lam
    cid = c.cluster_id
    if m is Method.CLUST_CENT:
        return inp.cent_c[cid]
    if m is Method.CLUST_QUERY_GEN:
        return inp.query_gen_cluster(cid)
    if m is Method.CLUST_CENT_CLUST_QUERY_GEN:
        return inp.cent_c[cid] * inp.query_gen_cluster(cid)
    if m is Method.DOC_CENT:
        return _doc_sum(c.members, c, inp, query=False, cent=True)
    if m is Method.DOC_QUERY_GEN:
        return _doc_sum(c.members, c, inp, query=True, cent=False)
    if m is Method.DOC_CENT_DOC_QUERY_GEN:
        return _doc_sum(c.members, c, inp, query=True, cent=True)
    if m is Method.CLUST_CENT_DOC_CENT:
        return lam * inp.cent_c[cid] + (1 - lam) * _doc_sum(
            c.members, c, inp, query=False, cent=True)
    if m is Method.CLUST_QUERY_GEN_DOC_QUERY_GEN:
        return lam * inp.query_gen_cluster(cid) + (1 - lam) * _doc_sum(
            c.members, c, inp, query=True, cent=False)
    if m is Method.CLUSTRANKER:
        whole = inp.cent_c[cid] * inp.query_gen_cluster(cid)
        return lam * whole + (1 - lam) * _doc_sum(c.members, c, inp, query=True, cent=True)
    if m is Method.CLUSTRANKER_ALL_PROXIES:
        whole = inp.cent_c[cid] * inp.query_gen_cluster(cid)
        proxies = _doc_sum(inp.init_list.ids, c, inp, query=True, cent=True)
        weight = 1.0 if spec.literal_all_proxies else lam
        return weight * whole + (1 - lam) * proxies
    if m in (Method.MAX, Method.MIN, Method.GEOMEAN):
        values = [inp.query_gen_doc(d) for d in c.members]
        if m is Method.MAX:
            return max(values)
        if m is Method.MIN:
            return min(values)
        logs = [inp.log_query_gen_doc(d) for d in c.members]
        geo = safe_exp(math.fsum(logs) / len(logs))
        return min(max(geo, min(values)), max(values))
    if m is Method.HITS:
        if inp.hits_auth is None:
            raise ValueError("HITS scoring needs authority values in the ranker inputs")
        try:
            return inp.hits_auth[cid]
        except KeyError:
            raise KeyError(f"missing HITS authority for cluster {cid!r}") from None
    raise ValueError(f"unknown method {m!r}")


def rank_clusters(spec: MethodSpec, inp: RankerInputs) -> RankedRun:
    scored = [(c.cluster_id, score_cluster(spec, c, inp)) for c in inp.clusters]
    return RankedRun.from_scores(inp.query.query_id, scored)


def expand_top_cluster(cluster_ranking: RankedRun, clusters: ClusterSet,
                       init_list: RankedRun) -> RankedRun:
    """Top cluster's members first, then the rest of the initial list in order."""
    if len(cluster_ranking) == 0:
        raise ValueError("empty cluster ranking")
    top = clusters[cluster_ranking.entries[0].item_id]
    seen = set()
    order = []
    for d in list(top.members) + init_list.ids:
        if d not in seen:
            seen.add(d)
            order.append(d)
    return RankedRun.from_ids(init_list.query_id, order)
