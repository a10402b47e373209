"""Per-query state shared by every ranking method and parameter setting.

Similarity matrices depend only on the initial list, k and mu, so they are
computed once; centralities and HITS authorities are cached per (delta, nu).
"""

from __future__ import annotations

from collections import Counter
from functools import cached_property

import numpy as np

from clustrank.centrality import (
    CentralityScores,
    build_graph,
    hits_authority,
    pagerank,
    smooth_transitions,
)
from clustrank.clustering import ClusterSet, build_clusters
from clustrank.corpus import Corpus, Query
from clustrank.language_models import SimilarityScore
from clustrank.rankers import Method, MethodSpec, RankerInputs, rank_clusters
from clustrank.retrieval import RankedRun
from clustrank.similarity import logsim_matrix


class QueryContext:
    def __init__(self, query: Query, corpus: Corpus, init_list: RankedRun, k: int,
                 mu: float = 2000.0, clusters: ClusterSet | None = None):
        self.query = query
        self.corpus = corpus
        self.init_list = init_list
        self.k = k
        self.mu = mu
        self.doc_ids = init_list.ids
        self._doc_bags = [corpus[d].tf for d in self.doc_ids]
        self._clusters = clusters
        self._cent: dict[tuple[int, float], tuple[CentralityScores, CentralityScores]] = {}
        self._hits: dict[int, dict[str, float]] = {}

    @cached_property
    def doc_doc(self) -> np.ndarray:
        """[i, j] = log p_{d_j}(d_i)."""
        return logsim_matrix(self._doc_bags, self._doc_bags, self.mu, self.corpus)

    @cached_property
    def clusters(self) -> ClusterSet:
        if self._clusters is not None:
            return self._clusters
        return build_clusters(self.init_list, self.corpus, self.k, self.mu,
                              doc_logsim=self.doc_doc)

    @cached_property
    def _cluster_bags(self):
        return [c.counts for c in self.clusters]

    @cached_property
    def cluster_cluster(self) -> np.ndarray:
        """[i, j] = log p_{c_j}(c_i)."""
        bags = self._cluster_bags
        return logsim_matrix(bags, bags, self.mu, self.corpus)

    @cached_property
    def cluster_doc(self) -> np.ndarray:
        """[c, d] = log p_d(c): cluster text under the document's model."""
        return logsim_matrix(self._cluster_bags, self._doc_bags, self.mu, self.corpus)

    @cached_property
    def doc_cluster(self) -> np.ndarray:
        """[d, c] = log p_c(d): document text under the cluster's model."""
        return logsim_matrix(self._doc_bags, self._cluster_bags, self.mu, self.corpus)

    @cached_property
    def p_c_q(self) -> dict[str, SimilarityScore]:
        q = logsim_matrix([self._query_bag], self._cluster_bags, self.mu, self.corpus)[0]
        return {c.cluster_id: SimilarityScore(float(v)) for c, v in zip(self.clusters, q)}

    @cached_property
    def _query_bag(self):
        return Counter(self.query.terms)

    @cached_property
    def p_d_q(self) -> dict[str, SimilarityScore]:
        """Initial-list scores, i.e. p_d(q) under the initial-ranking mu."""
        return {e.item_id: SimilarityScore(e.score) for e in self.init_list}

    @cached_property
    def p_d_c(self) -> dict[tuple[str, str], SimilarityScore]:
        a = self.cluster_doc
        out = {}
        for ci, c in enumerate(self.clusters):
            for di, d in enumerate(self.doc_ids):
                out[d, c.cluster_id] = SimilarityScore(float(a[ci, di]))
        return out

    def doc_graph(self, delta: int):
        return build_graph(self.doc_ids, self.doc_doc, delta, "document")

    def cluster_graph(self, delta: int):
        return build_graph(self.clusters.ids, self.cluster_cluster, delta, "cluster")

    def centralities(self, delta: int, nu: float) -> tuple[CentralityScores, CentralityScores]:
        """(document centrality, cluster centrality) sharing one (delta, nu)."""
        key = (delta, nu)
        if key not in self._cent:
            if len(self.doc_ids) < 2:
                cent_d = CentralityScores.uniform(self.doc_ids)
                cent_c = CentralityScores.uniform(self.clusters.ids)
            else:
                cent_d = pagerank(smooth_transitions(self.doc_graph(delta), nu))
                cent_c = pagerank(smooth_transitions(self.cluster_graph(delta), nu))
            self._cent[key] = (cent_d, cent_c)
        return self._cent[key]

    def hits(self, delta: int) -> dict[str, float]:
        if delta not in self._hits:
            self._hits[delta] = hits_authority(self.doc_ids, self.clusters.ids,
                                               self.doc_cluster, delta)
        return self._hits[delta]

    @cached_property
    def _base_inputs(self) -> RankerInputs:
        uniform_d = CentralityScores.uniform(self.doc_ids)
        uniform_c = CentralityScores.uniform(self.clusters.ids)
        return RankerInputs(self.query, self.clusters, self.init_list, self.p_c_q,
                            self.p_d_q, self.p_d_c, uniform_c, uniform_d)

    def inputs(self, delta: int | None = None, nu: float | None = None,
               hits_delta: int | None = None) -> RankerInputs:
        """Ranker inputs; centralities are uniform unless (delta, nu) is given."""
        base = self._base_inputs
        if delta is not None and nu is not None:
            cent_d, cent_c = self.centralities(delta, nu)
            base = base.replace(cent_c=cent_c, cent_d=cent_d)
        if hits_delta is not None:
            base = base.replace(hits_auth=self.hits(hits_delta))
        return base

    def rank(self, spec: MethodSpec, delta: int = 4, nu: float = 0.85,
             hits_delta: int = 4) -> RankedRun:
        m = spec.method
        if m is Method.HITS:
            return rank_clusters(spec, self.inputs(hits_delta=hits_delta))
        if m.uses_centrality:
            return rank_clusters(spec, self.inputs(delta, nu))
        return rank_clusters(spec, self.inputs())
