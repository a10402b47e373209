"""Ranking query-specific document clusters with language models."""

from clustrank.centrality import hits_authority, pagerank
from clustrank.clustering import Cluster, ClusterSet, build_clusters
from clustrank.context import QueryContext
from clustrank.corpus import Corpus, Document, Query, ingest_corpus, ingest_queries
from clustrank.evaluation import Qrels, precision_at_k, top_cluster_precision, wilcoxon_two_sided
from clustrank.kernels import BACKEND
from clustrank.pipeline import PipelineConfig, run_pipeline
from clustrank.rankers import Method, MethodSpec, rank_clusters
from clustrank.retrieval import RankedRun, RetrievalConfig, initial_rank

__version__ = "0.1.0"

__all__ = [
    "BACKEND", "Cluster", "ClusterSet", "Corpus", "Document", "Method", "MethodSpec",
    "PipelineConfig", "Qrels", "Query", "QueryContext", "RankedRun", "RetrievalConfig",
    "build_clusters", "hits_authority", "ingest_corpus",
    "ingest_queries", "initial_rank", "pagerank", "precision_at_k", "rank_clusters",
    "run_pipeline", "top_cluster_precision", "wilcoxon_two_sided",
]
