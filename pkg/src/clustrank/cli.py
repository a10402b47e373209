"""Command-line interface: ``clustrank <subcommand> [options]``."""

from __future__ import annotations

import argparse
import logging
import sys
import typing
from dataclasses import replace
from pathlib import Path

from clustrank.clustering import read_cluster_dump, write_cluster_dump
from clustrank.context import QueryContext
from clustrank.corpus import FORMATS, write_index
from clustrank.evaluation import (
    Qrels,
    average_precision,
    cell_label,
    grid_search,
    leave_one_out,
    paired_test,
    precision_at_k,
    sweep,
    top_cluster_precision,
)
from clustrank.pipeline import (
    ALL_METHODS,
    CLUSTER_METHODS,
    PipelineConfig,
    PipelineError,
    cluster_ranking,
    document_run,
    load_corpus,
    load_queries,
    make_evaluator,
    map_queries,
    method_grid,
    prepare,
    run_pipeline,
)
from clustrank.rankers import expand_top_cluster
from clustrank.relevance import clip_and_renormalize, rm1, rm3
from clustrank.trec import read_runs, run_lines, write_runs

log = logging.getLogger("clustrank")


def _parse_beta(text: str) -> int | None:
    return None if text.strip().upper() == "ALL" else int(text)


def _parse_bool(text: str) -> bool:
    v = text.strip().lower()
    if v in ("1", "true", "yes", "on"):
        return True
    if v in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


def _converter(name: str):
    if name == "beta":
        return _parse_beta
    hint = typing.get_type_hints(PipelineConfig)[name]
    if hint is bool:
        return _parse_bool
    if hint in (int, float):
        return hint
    return str


def read_config_file(path) -> dict:
    """``key = value`` lines; ``#`` starts a comment. Keys are PipelineConfig fields."""
    known = typing.get_type_hints(PipelineConfig)
    out = {}
    for lineno, raw in enumerate(Path(path).read_text(encoding="utf-8").split("\n"), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"{path}:{lineno}: expected key=value")
        key, value = (s.strip() for s in line.split("=", 1))
        key = key.replace("-", "_")
        if key == "lambda":
            key = "lam"
        if key not in known:
            raise ValueError(f"{path}:{lineno}: unknown setting {key!r}")
        out[key] = _converter(key)(value)
    return out


def _add_common(p: argparse.ArgumentParser, *names: str) -> None:
    S = argparse.SUPPRESS
    opts = {
        "corpus": dict(help="raw corpus file"),
        "corpus_format": dict(flag="--format", choices=FORMATS, help="raw corpus format"),
        "index": dict(help="tokenized index written by 'index'"),
        "queries": dict(help="query file: query_id<TAB>text"),
        "qrels": dict(help="TREC qrels"),
        "stoplist": dict(help="stopword list (default: no stopping)"),
        "output": dict(flag="-o", help="output path"),
        "tag": dict(help="run tag"),
        "N": dict(type=int, help="initial list depth"),
        "k": dict(type=int, help="cluster size"),
        "mu": dict(type=float, help="Dirichlet mu for similarities"),
        "mu_init": dict(type=float, help="Dirichlet mu for the initial ranking"),
        "lam": dict(flag="--lambda", type=float, help="cluster-ranker lambda"),
        "lambda_interp": dict(type=float, help="Interpolation lambda"),
        "delta": dict(type=int, help="graph out-degree"),
        "nu": dict(type=float, help="graph smoothing weight"),
        "hits_delta": dict(type=int, help="HITS out-degree"),
        "alpha": dict(type=float, help="JM weight on the collection model"),
        "beta": dict(type=_parse_beta, help="RM1 clip size or ALL"),
        "gamma": dict(type=float, help="RM3 query-anchoring weight"),
        "jobs": dict(type=int, help="concurrent queries"),
        "literal_all_proxies": dict(action="store_true",
                                    help="all-proxies variant without lambda on the cluster term"),
    }
    for name in names:
        spec = dict(opts[name])
        flag = spec.pop("flag", "--" + name.replace("_", "-"))
        flags = [flag] if flag.startswith("--") else [flag, "--" + name]
        p.add_argument(*flags, dest=name, default=S, **spec)


def _config(args: argparse.Namespace, **overrides) -> PipelineConfig:
    values = read_config_file(args.config) if getattr(args, "config", None) else {}
    known = typing.get_type_hints(PipelineConfig)
    values.update({k: v for k, v in vars(args).items() if k in known})
    values.update(overrides)
    return PipelineConfig(**values)


def _contexts(cfg: PipelineConfig, args) -> list[QueryContext]:
    corpus = load_corpus(cfg)
    queries = load_queries(cfg)
    init_runs = read_runs(args.init_run) if getattr(args, "init_run", None) else None
    dumps = (read_cluster_dump(args.clusters, corpus)
             if getattr(args, "clusters", None) else None)

    def build(q):
        ctx = prepare(q, corpus, cfg)
        if init_runs is None and dumps is None:
            return ctx
        init = init_runs.get(q.query_id) if init_runs is not None else None
        clusters = dumps.get(q.query_id) if dumps is not None else None
        return QueryContext(ctx.query, corpus, init or ctx.init_list,
                            clusters.k if clusters else cfg.k, cfg.mu, clusters)

    return map_queries(build, queries, cfg.jobs)


def _write_lines(path, lines) -> None:
    text = "".join(line + "\n" for line in lines)
    if path:
        with open(path, "w", encoding="utf-8", newline="\n") as f:
            f.write(text)
    else:
        sys.stdout.write(text)


def cmd_index(args) -> int:
    cfg = _config(args)
    if not cfg.output:
        raise ValueError("index needs --output")
    corpus = load_corpus(replace(cfg, index=None))
    write_index(corpus, cfg.output)
    log.info("indexed %d documents, %d terms", len(corpus), corpus.total_terms)
    return 0


def cmd_retrieve(args) -> int:
    # retrieval alone never clusters, so k is irrelevant here
    cfg = _config(args, method="init", k=1)
    ctxs = _contexts(cfg, args)
    _emit(cfg, [c.init_list for c in ctxs])
    return 0


def _emit(cfg: PipelineConfig, runs) -> None:
    if cfg.output:
        write_runs(runs, cfg.tag, cfg.output)
    else:
        _write_lines(None, [line for r in runs for line in run_lines(r, cfg.tag)])


def cmd_cluster(args) -> int:
    cfg = _config(args)
    ctxs = _contexts(cfg, args)
    if not cfg.output:
        raise ValueError("cluster needs --output")
    write_cluster_dump(cfg.output, [(c.query.query_id, c.clusters) for c in ctxs])
    return 0


def cmd_rank_clusters(args) -> int:
    cfg = _config(args)
    if cfg.method not in CLUSTER_METHODS:
        raise ValueError(f"{cfg.method!r} is not a cluster-ranking method")
    ctxs = _contexts(cfg, args)

    def one(ctx):
        try:
            return cluster_ranking(ctx, cfg.spec, cfg)
        except Exception as e:
            raise PipelineError(ctx.query.query_id, "rank-clusters", e) from e

    rankings = map_queries(one, ctxs, cfg.jobs)
    _emit(cfg, rankings)
    if args.doc_output:
        write_runs([expand_top_cluster(r, c.clusters, c.init_list)
                    for r, c in zip(rankings, ctxs)], cfg.tag, args.doc_output)
    if args.cluster_dump:
        write_cluster_dump(args.cluster_dump, [(c.query.query_id, c.clusters) for c in ctxs])
    if args.graph_dump:
        lines = []
        for c in ctxs:
            qid = c.query.query_id
            for kind, g in (("document", c.doc_graph(cfg.delta)),
                            ("cluster", c.cluster_graph(cfg.delta))):
                lines.extend(f"{qid}\t{kind}\t{e}" for e in g.edge_lines())
        _write_lines(args.graph_dump, lines)
    return 0


def cmd_rerank(args) -> int:
    cfg = _config(args)
    if cfg.method not in ("interpolation", "pr-querysim"):
        raise ValueError("rerank --method must be 'interpolation' or 'pr-querysim'")
    ctxs = _contexts(cfg, args)
    _emit(cfg, map_queries(lambda c: document_run(c, cfg), ctxs, cfg.jobs))
    return 0


def cmd_rm(args) -> int:
    method = "rm" if args.scope == "corpus" else "rm-rerank"
    cfg = _config(args, method=method, k=1)
    ctxs = _contexts(cfg, args)
    _emit(cfg, map_queries(lambda c: document_run(c, cfg), ctxs, cfg.jobs))
    if args.model_dump:
        lines = []
        for c in ctxs:
            rm = rm3(clip_and_renormalize(rm1(c.init_list, c.corpus, c.query, cfg.alpha),
                                          cfg.beta), c.query, cfg.gamma)
            lines.extend(f"{c.query.query_id}\t{line}" for line in rm.dump_lines())
        _write_lines(args.model_dump, lines)
    return 0


def _per_query_metric(runs, qrels, metric: str, k: int, clusters=None) -> dict[str, float]:
    out = {}
    for qid, run in runs.items():
        if clusters is not None:
            out[qid] = top_cluster_precision(run, clusters[qid], qrels)
        elif metric == "map":
            ap = average_precision(run, qrels)
            if ap is None:
                log.warning("query %s has no relevant documents; skipped", qid)
                continue
            out[qid] = ap
        else:
            out[qid] = precision_at_k(run, qrels, k)
    return out


def cmd_eval(args) -> int:
    qrels = Qrels.read(args.qrels)
    clusters = read_cluster_dump(args.clusters) if args.clusters else None
    label = "top-cluster-p" if clusters is not None else (
        "map" if args.metric == "map" else f"p@{args.k}")
    a = _per_query_metric(read_runs(args.run), qrels, args.metric, args.k, clusters)
    lines = [f"{q}\t{label}\t{v:.4f}" for q, v in a.items()]
    mean = sum(a.values()) / len(a) if a else 0.0
    lines.append(f"all\t{label}\t{mean:.4f}")
    if args.compare:
        b = _per_query_metric(read_runs(args.compare), qrels, args.metric, args.k, clusters)
        res = paired_test(a, b)
        mb = sum(b.values()) / len(b) if b else 0.0
        lines.append(f"compare\t{label}\t{mb:.4f}")
        lines.append(f"wilcoxon\tn={res.n}\tW+={res.statistic:g}\tp={res.p_value:.6g}\t"
                     f"{'exact' if res.exact else 'normal'}\t"
                     f"{'significant' if res.p_value < 0.05 else 'not-significant'}")
    _write_lines(args.output, lines)
    return 0


def _sweep_table(cfg: PipelineConfig, args):
    if not cfg.qrels:
        raise ValueError(f"{args.command} needs --qrels")
    qrels = Qrels.read(cfg.qrels)
    ctxs = _contexts(cfg, args)
    grid = method_grid(cfg.method, cfg)
    log.info("method %s: %d grid cells", cfg.method, len(grid))
    evaluate = make_evaluator(cfg.method, ctxs, cfg, qrels, args.objective)
    return sweep(evaluate, grid, [c.query.query_id for c in ctxs], cfg.jobs)


def cmd_sweep(args) -> int:
    cfg = _config(args)
    table = _sweep_table(cfg, args)
    best = grid_search(table)
    lines = [table.report_table(), ""] + table.report_lines()
    lines.append(f"# best\t{','.join(f'{k}={v}' for k, v in best.params.items())}\t"
                 f"{best.objective:.6f}")
    _write_lines(cfg.output, lines)
    return 0


def cmd_loocv(args) -> int:
    cfg = _config(args)
    table = _sweep_table(cfg, args)
    res = leave_one_out(table)
    oracle = grid_search(table)
    lines = [f"{q}\t{res.per_query[q]:.4f}\t{cell_label(res.chosen[q])}" for q in table.query_ids]
    lines.append(f"loocv_mean\t{res.mean:.6f}")
    lines.append(f"oracle_mean\t{oracle.objective:.6f}\t{cell_label(oracle.params)}")
    _write_lines(cfg.output, lines)
    return 0


def cmd_pipeline(args) -> int:
    cfg = _config(args)
    _, lines = run_pipeline(cfg)
    if not cfg.report:
        _write_lines(None, lines)
    return 0


RETRIEVAL = ("corpus", "corpus_format", "index", "queries", "stoplist", "N", "mu_init", "jobs")
CLUSTERING = RETRIEVAL + ("k", "mu")
GRAPH = ("delta", "nu", "hits_delta")
RM = ("alpha", "beta", "gamma")


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="clustrank", description="Cluster-based document ranking")
    p.add_argument("-v", "--verbose", action="count", default=0)
    sub = p.add_subparsers(dest="command", required=True)

    def add(name, help, *fields):
        sp = sub.add_parser(name, help=help)
        sp.add_argument("--config", help="key=value settings file (flags take precedence)")
        _add_common(sp, *fields)
        return sp

    add("index", "tokenize a raw corpus into an index",
        "corpus", "corpus_format", "stoplist", "output")
    add("retrieve", "initial query-likelihood ranking", *RETRIEVAL, "output", "tag")
    sp = add("cluster", "nearest-neighbor clusters of each initial list", *CLUSTERING, "output")
    sp.add_argument("--init-run", help="reuse an initial run instead of retrieving")

    sp = add("rank-clusters", "rank clusters (cluster ids as run items)",
             *CLUSTERING, *GRAPH, "lam", "literal_all_proxies", "output", "tag")
    sp.add_argument("--method", default=argparse.SUPPRESS, choices=CLUSTER_METHODS)
    sp.add_argument("--init-run")
    sp.add_argument("--clusters", help="cluster dump to use instead of clustering")
    sp.add_argument("--doc-output", help="also write the top-cluster-first document run")
    sp.add_argument("--cluster-dump", help="write the clusters used")
    sp.add_argument("--graph-dump", help="write document and cluster graph edges")

    sp = add("rerank", "re-rank the initial list directly",
             *CLUSTERING, "delta", "nu", "lambda_interp", "output", "tag")
    sp.add_argument("--method", default=argparse.SUPPRESS,
                    choices=("interpolation", "pr-querysim"))
    sp.add_argument("--init-run")

    sp = add("rm", "relevance-model (RM3) ranking", *RETRIEVAL, *RM, "output", "tag")
    sp.add_argument("--scope", choices=("corpus", "init_list"), default="corpus")
    sp.add_argument("--init-run")
    sp.add_argument("--model-dump", help="write term<TAB>probability per query")

    sp = sub.add_parser("eval", help="evaluate a run against qrels")
    sp.add_argument("--run", required=True)
    sp.add_argument("--qrels", required=True)
    sp.add_argument("--k", type=int, default=5)
    sp.add_argument("--metric", choices=("p@k", "map"), default="p@k")
    sp.add_argument("--clusters", help="cluster dump: treat --run as a cluster ranking")
    sp.add_argument("--compare", help="second run for a paired Wilcoxon test")
    sp.add_argument("-o", "--output")

    for name, help in (("sweep", "evaluate every grid cell of a method"),
                       ("loocv", "leave-one-out cross-validation")):
        sp = add(name, help, *CLUSTERING, *GRAPH, *RM, "lam", "lambda_interp",
                 "literal_all_proxies", "qrels", "output")
        sp.add_argument("--method", default=argparse.SUPPRESS, choices=ALL_METHODS)
        sp.add_argument("--objective", choices=("p@k", "map"), default="p@k")

    sp = add("pipeline", "retrieve, cluster, rank and write a document run",
             *CLUSTERING, *GRAPH, *RM, "lam", "lambda_interp", "literal_all_proxies",
             "qrels", "output", "tag")
    sp.add_argument("--method", default=argparse.SUPPRESS, choices=ALL_METHODS)
    sp.add_argument("--report", default=argparse.SUPPRESS, help="per-query report path")
    return p


COMMANDS = {
    "index": cmd_index, "retrieve": cmd_retrieve, "cluster": cmd_cluster,
    "rank-clusters": cmd_rank_clusters, "rerank": cmd_rerank, "rm": cmd_rm,
    "eval": cmd_eval, "sweep": cmd_sweep, "loocv": cmd_loocv, "pipeline": cmd_pipeline,
}


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.WARNING - 10 * min(args.verbose, 2),
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return COMMANDS[args.command](args)
    except (PipelineError, ValueError, KeyError, OSError) as e:
        print(f"clustrank {args.command}: error: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
