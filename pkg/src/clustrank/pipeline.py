"""End-to-end query processing: retrieve, cluster, rank, evaluate, tune."""

from __future__ import annotations

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, fields, replace
from functools import lru_cache
from pathlib import Path
from typing import Callable, Sequence

from clustrank.centrality import DELTA_GRID, HITS_DELTA_GRID, NU_GRID
from clustrank.context import QueryContext
from clustrank.corpus import Corpus, Query, ingest_corpus, ingest_queries, load_stoplist, read_index
from clustrank.evaluation import (
    ParamGrid,
    Qrels,
    mean_average_precision,
    precision_at_k,
    top_cluster_precision,
)
from clustrank.rankers import LAMBDA_GRID, Method, MethodSpec, expand_top_cluster
from clustrank.relevance import (
    ALPHA_GRID,
    BETA_GRID,
    GAMMA_GRID,
    clip_and_renormalize,
    rm1,
    rm3,
    rm_rank,
)
from clustrank.rerankers import (
    INTERPOLATION_LAMBDA_GRID,
    interpolation_rerank,
    pr_querysim_rerank,
)
from clustrank.retrieval import RankedRun, RetrievalConfig, initial_rank, truncate
from clustrank.trec import write_runs

log = logging.getLogger(__name__)

# Document-level methods that are not cluster rankers
DOC_METHODS = ("init", "interpolation", "pr-querysim", "rm", "rm-rerank")
CLUSTER_METHODS = tuple(m.value for m in Method)
ALL_METHODS = CLUSTER_METHODS + DOC_METHODS

MU_INIT_GRID = (500.0, 1000.0, 1500.0, 2000.0, 2500.0, 3000.0, 4000.0, 5000.0)
RUN_DEPTH = 1000


class PipelineError(RuntimeError):
    def __init__(self, query_id: str, stage: str, cause: Exception):
        super().__init__(f"query {query_id}: {stage}: {cause}")
        self.query_id = query_id
        self.stage = stage


@dataclass(frozen=True)
class PipelineConfig:
    corpus: str | None = None
    corpus_format: str = "one-doc-per-line"
    index: str | None = None
    queries: str | None = None
    qrels: str | None = None
    stoplist: str | None = None
    output: str | None = None
    report: str | None = None
    tag: str = "clustrank"
    method: str = "clustranker"
    literal_all_proxies: bool = False
    N: int = 50
    k: int = 5
    mu: float = 2000.0
    mu_init: float = 2000.0
    lam: float = 0.5
    lambda_interp: float = 0.5
    delta: int = 4
    nu: float = 0.85
    hits_delta: int = 4
    alpha: float = 0.5
    beta: int | None = 100
    gamma: float = 0.5
    jobs: int = 1

    def __post_init__(self):
        if self.method not in ALL_METHODS:
            raise ValueError(f"unknown method {self.method!r}")
        if self.k < 1 or self.N < 1:
            raise ValueError("k and N must be >= 1")
        if self.k > self.N:
            raise ValueError(f"cluster size k={self.k} exceeds initial depth N={self.N}")
        if self.jobs < 1:
            raise ValueError("jobs must be >= 1")

    @property
    def spec(self) -> MethodSpec:
        return MethodSpec(Method(self.method), self.lam, self.literal_all_proxies)

    @property
    def retrieval(self) -> RetrievalConfig:
        return RetrievalConfig(self.mu_init, self.N)


def config_field_types() -> dict[str, type]:
    return {f.name: f.type for f in fields(PipelineConfig)}


def prepare(query: Query, corpus: Corpus, cfg: PipelineConfig) -> QueryContext:
    """Initial retrieval plus the lazily evaluated per-query state."""
    try:
        query = corpus.restrict_query(query)
        init = initial_rank(query, corpus, cfg.retrieval)
    except Exception as e:
        raise PipelineError(query.query_id, "retrieve", e) from e
    if len(init) < cfg.k:
        raise PipelineError(query.query_id, "cluster",
                            ValueError(f"initial list has {len(init)} < k={cfg.k} documents"))
    return QueryContext(query, corpus, init, cfg.k, cfg.mu)


def cluster_ranking(ctx: QueryContext, spec: MethodSpec, cfg: PipelineConfig) -> RankedRun:
    return ctx.rank(spec, delta=cfg.delta, nu=cfg.nu, hits_delta=cfg.hits_delta)


def _rm_run(ctx: QueryContext, cfg: PipelineConfig, scope: str) -> RankedRun:
    rm = rm3(clip_and_renormalize(rm1(ctx.init_list, ctx.corpus, ctx.query, cfg.alpha), cfg.beta),
             ctx.query, cfg.gamma)
    run = rm_rank(rm, scope, ctx.corpus, cfg.mu_init, ctx.init_list, ctx.query.query_id)
    return truncate(run, RUN_DEPTH)


def document_run(ctx: QueryContext, cfg: PipelineConfig) -> RankedRun:
    """The document ranking that ``cfg.method`` produces for this query."""
    m = cfg.method
    if m == "init":
        return ctx.init_list
    if m == "interpolation":
        return interpolation_rerank(ctx.inputs(), cfg.lambda_interp)
    if m == "pr-querysim":
        cent_d, _ = ctx.centralities(cfg.delta, cfg.nu)
        return pr_querysim_rerank(ctx.init_list, cent_d, ctx.p_d_q)
    if m == "rm":
        return _rm_run(ctx, cfg, "corpus")
    if m == "rm-rerank":
        return _rm_run(ctx, cfg, "init_list")
    ranking = cluster_ranking(ctx, cfg.spec, cfg)
    return expand_top_cluster(ranking, ctx.clusters, ctx.init_list)


@dataclass(frozen=True)
class Addends:
    """Magnitudes of the whole-cluster and document-proxy terms of the top cluster."""

    cluster_term: float
    document_term: float


def top_cluster_addends(ctx: QueryContext, ranking: RankedRun, cfg: PipelineConfig) -> Addends:
    inp = ctx.inputs(cfg.delta, cfg.nu)
    c = ctx.clusters[ranking.entries[0].item_id]
    whole = inp.cent_c[c.cluster_id] * inp.query_gen_cluster(c.cluster_id)
    proxies = math.fsum(inp.query_gen_doc(d) * inp.association(d, c.cluster_id) * inp.cent_d[d]
                        for d in c.members)
    return Addends(cfg.lam * whole, (1 - cfg.lam) * proxies)


@dataclass
class QueryResult:
    query_id: str
    run: RankedRun
    clusters_ranking: RankedRun | None = None
    context: QueryContext | None = field(default=None, repr=False)
    addends: Addends | None = None


def process_query(query: Query, corpus: Corpus, cfg: PipelineConfig) -> QueryResult:
    ctx = prepare(query, corpus, cfg)
    stage = "rank"
    try:
        if cfg.method in CLUSTER_METHODS:
            stage = "rank-clusters"
            ranking = cluster_ranking(ctx, cfg.spec, cfg)
            stage = "expand"
            run = expand_top_cluster(ranking, ctx.clusters, ctx.init_list)
            addends = top_cluster_addends(ctx, ranking, cfg)
            return QueryResult(ctx.query.query_id, run, ranking, ctx, addends)
        stage = cfg.method
        return QueryResult(ctx.query.query_id, document_run(ctx, cfg), context=ctx)
    except PipelineError:
        raise
    except Exception as e:
        raise PipelineError(query.query_id, stage, e) from e


def map_queries(fn: Callable, items: Sequence, jobs: int) -> list:
    """Apply ``fn`` to every item, keeping input order regardless of ``jobs``."""
    if jobs > 1 and len(items) > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            return list(pool.map(fn, items))
    return [fn(x) for x in items]


def run_queries(queries: Sequence[Query], corpus: Corpus, cfg: PipelineConfig
                ) -> list[QueryResult]:
    return map_queries(lambda q: process_query(q, corpus, cfg), list(queries), cfg.jobs)


def report_lines(results: Sequence[QueryResult], cfg: PipelineConfig,
                 qrels: Qrels | None = None) -> list[str]:
    header = ["query_id"]
    if qrels is not None:
        header.append(f"p@{cfg.k}")
    if cfg.method in CLUSTER_METHODS:
        header += ["top_cluster", "cluster_term", "document_term"]
    lines = ["\t".join(header)]
    precisions = []
    for r in results:
        row = [r.query_id]
        if qrels is not None:
            p = precision_at_k(r.run, qrels, cfg.k)
            precisions.append(p)
            row.append(f"{p:.4f}")
        if r.clusters_ranking is not None:
            row += [r.clusters_ranking.entries[0].item_id,
                    f"{r.addends.cluster_term:.6e}", f"{r.addends.document_term:.6e}"]
        lines.append("\t".join(row))
    if precisions:
        lines.append(f"mean\t{math.fsum(precisions) / len(precisions):.4f}")
    return lines


def load_corpus(cfg: PipelineConfig) -> Corpus:
    if cfg.index:
        return read_index(cfg.index)
    if not cfg.corpus:
        raise ValueError("either an index or a corpus path is required")
    stop = load_stoplist(cfg.stoplist) if cfg.stoplist else None
    return ingest_corpus(cfg.corpus, cfg.corpus_format, stop)


def load_queries(cfg: PipelineConfig) -> list[Query]:
    if not cfg.queries:
        raise ValueError("a queries path is required")
    stop = load_stoplist(cfg.stoplist) if cfg.stoplist else None
    return ingest_queries(cfg.queries, stop)


def run_pipeline(cfg: PipelineConfig) -> tuple[list[QueryResult], list[str]]:
    """Process every query, write the run file (and report), return both."""
    corpus = load_corpus(cfg)
    queries = load_queries(cfg)
    qrels = Qrels.read(cfg.qrels) if cfg.qrels else None
    results = run_queries(queries, corpus, cfg)
    if cfg.output:
        write_runs([r.run for r in results], cfg.tag, cfg.output)
    lines = report_lines(results, cfg, qrels)
    if cfg.report:
        Path(cfg.report).write_text("\n".join(lines) + "\n", encoding="utf-8")
    return results, lines


# Parameter sweeps

def method_grid(method: str, cfg: PipelineConfig) -> ParamGrid:
    """The tuning grid each method is optimized over."""
    if method == "init":
        return ParamGrid({"mu": MU_INIT_GRID})
    if method == "interpolation":
        return ParamGrid({"lam": INTERPOLATION_LAMBDA_GRID})
    if method == "pr-querysim":
        # delta fixed at k - 1; nu over the graph grid
        return ParamGrid({"delta": (cfg.k - 1,), "nu": NU_GRID})
    if method in ("rm", "rm-rerank"):
        return ParamGrid({"alpha": ALPHA_GRID, "beta": BETA_GRID, "gamma": GAMMA_GRID})
    m = Method(method)
    if m is Method.HITS:
        return ParamGrid({"delta": HITS_DELTA_GRID})
    params: dict[str, tuple] = {}
    if m.uses_lambda:
        params["lam"] = LAMBDA_GRID
    if m.uses_centrality:
        params["delta"] = DELTA_GRID
        params["nu"] = NU_GRID
    return ParamGrid(params)


def _objective(name: str, k: int, qrels: Qrels) -> Callable[[RankedRun], float]:
    if name in ("p@k", "precision"):
        return lambda run: precision_at_k(run, qrels, k)
    if name == "map":
        return lambda run: mean_average_precision(run, qrels)
    raise ValueError(f"unknown objective {name!r}; expected 'p@k' or 'map'")


def make_evaluator(method: str, contexts: Sequence[QueryContext], cfg: PipelineConfig,
                   qrels: Qrels, objective: str = "p@k") -> Callable[[dict], dict[str, float]]:
    """``evaluate(cell) -> {query_id: objective}`` for :func:`evaluation.sweep`."""
    score = _objective(objective, cfg.k, qrels)

    if method == "init":
        @lru_cache(maxsize=None)
        def init_for(qid: str, mu: float) -> RankedRun:
            ctx = by_id[qid]
            return initial_rank(ctx.query, ctx.corpus, RetrievalConfig(mu, cfg.N))

        by_id = {c.query.query_id: c for c in contexts}
        return lambda cell: {q: score(init_for(q, cell["mu"])) for q in by_id}

    if method in ("rm", "rm-rerank"):
        scope = "corpus" if method == "rm" else "init_list"

        @lru_cache(maxsize=None)
        def rm1_for(qid: str, alpha: float):
            ctx = by_id[qid]
            return rm1(ctx.init_list, ctx.corpus, ctx.query, alpha)

        by_id = {c.query.query_id: c for c in contexts}

        def evaluate_rm(cell):
            out = {}
            for q, ctx in by_id.items():
                rm = rm3(clip_and_renormalize(rm1_for(q, cell["alpha"]), cell["beta"]),
                         ctx.query, cell["gamma"])
                run = rm_rank(rm, scope, ctx.corpus, cfg.mu_init, ctx.init_list, q)
                out[q] = score(truncate(run, RUN_DEPTH))
            return out
        return evaluate_rm

    def evaluate(cell):
        local = replace(cfg, method=method, **{("lambda_interp" if method == "interpolation"
                                                 and n == "lam" else n): v
                                                for n, v in cell.items()})
        return {c.query.query_id: score(document_run(c, local)) for c in contexts}

    if method in CLUSTER_METHODS and objective in ("p@k", "precision"):
        def evaluate_clusters(cell):
            local = replace(cfg, method=method, **cell)
            if Method(method) is Method.HITS and "delta" in cell:
                local = replace(local, hits_delta=cell["delta"])
            return {c.query.query_id: top_cluster_precision(
                        cluster_ranking(c, local.spec, local), c.clusters, qrels)
                    for c in contexts}
        return evaluate_clusters
    if method in CLUSTER_METHODS and Method(method) is Method.HITS:
        return lambda cell: evaluate({"hits_delta": cell["delta"]})
    return evaluate
