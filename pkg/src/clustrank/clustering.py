"""Overlapping nearest-neighbor clusters over the initial list."""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from functools import cached_property
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from clustrank.corpus import Corpus, Document
from clustrank.language_models import (
    SimilarityScore,
    SmoothedLanguageModel,
    dirichlet_model,
    kl_similarity,
)
from clustrank.retrieval import RankedRun
from clustrank.similarity import self_logsim

DEFAULT_MU = 2000.0


@dataclass(frozen=True)
class Cluster:
    cluster_id: str
    members: tuple[str, ...]
    concat_terms: tuple[str, ...]

    @cached_property
    def counts(self) -> Counter:
        return Counter(self.concat_terms)

    def __len__(self):
        return len(self.members)

    def __contains__(self, doc_id):
        return doc_id in self.members


@dataclass(frozen=True)
class ClusterSet:
    clusters: tuple[Cluster, ...]
    k: int

    def __len__(self):
        return len(self.clusters)

    def __iter__(self):
        return iter(self.clusters)

    @cached_property
    def by_id(self) -> dict[str, Cluster]:
        return {c.cluster_id: c for c in self.clusters}

    def __getitem__(self, cluster_id: str) -> Cluster:
        return self.by_id[cluster_id]

    @property
    def ids(self) -> list[str]:
        return [c.cluster_id for c in self.clusters]


def make_cluster(seed: str, members: Sequence[str], corpus: Corpus) -> Cluster:
    terms: list[str] = []
    for m in members:
        terms.extend(corpus[m].terms)
    return Cluster(seed, tuple(members), tuple(terms))


def nearest_neighbors(ids: Sequence[str], logsim: np.ndarray, row: int, count: int) -> list[int]:
    """Indices of the ``count`` items most similar to item ``row`` (excluding it).

    ``logsim[row, j]`` is the similarity from ``row`` to candidate ``j``;
    ties go to the smaller item id.
    """
    candidates = [j for j in range(len(ids)) if j != row]
    candidates.sort(key=lambda j: (-logsim[row, j], ids[j]))
    return candidates[:count]


def build_clusters(init_list: RankedRun, corpus: Corpus, k: int, mu: float = DEFAULT_MU,
                   doc_logsim: np.ndarray | None = None) -> ClusterSet:
    """One cluster per document d: d plus the k-1 documents d_i maximizing p_{d_i}(d).

    ``doc_logsim[i, j]`` (optional, precomputed) must equal log p_{d_j}(d_i)
    over the documents of ``init_list`` in list order.
    """
    ids = init_list.ids
    if k < 1:
        raise ValueError("cluster size k must be >= 1")
    if k > len(ids):
        raise ValueError(f"cluster size k={k} exceeds initial list length {len(ids)}")
    if doc_logsim is None:
        doc_logsim = self_logsim([corpus[i].tf for i in ids], mu, corpus)
    clusters = []
    for row, seed in enumerate(ids):
        neighbors = nearest_neighbors(ids, doc_logsim, row, k - 1)
        clusters.append(make_cluster(seed, [seed] + [ids[j] for j in neighbors], corpus))
    return ClusterSet(tuple(clusters), k)


def cluster_model(c: Cluster, mu: float, corpus: Corpus) -> SmoothedLanguageModel:
    if not c.concat_terms:
        raise ValueError(f"cluster {c.cluster_id!r} has an empty concatenation")
    return dirichlet_model(c.concat_terms, mu, corpus)


def doc_cluster_association(d: Document, c: Cluster, mu: float, corpus: Corpus
                            ) -> SimilarityScore:
    """p_d(c): the cluster's concatenated text scored under d's Dirichlet model."""
    return kl_similarity(c.counts, dirichlet_model(d.terms, mu, corpus))


def write_cluster_dump(path, per_query: Iterable[tuple[str, ClusterSet]]) -> None:
    """Lines of ``query_id<TAB>cluster_id<TAB>comma-joined members``."""
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        for qid, clusters in per_query:
            for c in clusters:
                f.write(f"{qid}\t{c.cluster_id}\t{','.join(c.members)}\n")


def read_cluster_dump(path, corpus: Corpus | None = None) -> dict[str, ClusterSet]:
    """Parse a cluster dump; concatenations are filled in when ``corpus`` is given."""
    grouped: dict[str, list[Cluster]] = {}
    for lineno, line in enumerate(Path(path).read_text(encoding="utf-8").split("\n"), 1):
        if not line.strip():
            continue
        parts = line.split("\t")
        if len(parts) != 3:
            raise ValueError(f"{path}:{lineno}: expected 3 TAB-separated fields")
        qid, cid, members = parts
        member_ids = tuple(members.split(","))
        if corpus is not None:
            cluster = make_cluster(cid, member_ids, corpus)
        else:
            cluster = Cluster(cid, member_ids, ())
        grouped.setdefault(qid, []).append(cluster)
    out = {}
    for qid, clusters in grouped.items():
        sizes = {len(c) for c in clusters}
        if len(sizes) != 1:
            raise ValueError(f"{path}: query {qid} has clusters of differing sizes {sorted(sizes)}")
        out[qid] = ClusterSet(tuple(clusters), sizes.pop())
    return out
