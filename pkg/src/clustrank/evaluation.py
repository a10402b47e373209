"""Relevance-judged metrics, significance testing and parameter tuning."""

from __future__ import annotations

import itertools
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Iterable, Mapping, Sequence

from clustrank.clustering import ClusterSet
from clustrank.rankers import expand_top_cluster
from clustrank.retrieval import RankedRun

log = logging.getLogger(__name__)


class Qrels:
    """Relevance grades keyed by (query_id, doc_id); absent pairs have grade 0."""

    def __init__(self, grades: Mapping[tuple[str, str], int] | None = None):
        self._grades: dict[str, dict[str, int]] = {}
        for (qid, did), g in (grades or {}).items():
            self.add(qid, did, g)

    def add(self, query_id: str, doc_id: str, grade: int) -> None:
        if grade < 0:
            raise ValueError(f"negative relevance grade for ({query_id}, {doc_id})")
        self._grades.setdefault(query_id, {})[doc_id] = int(grade)

    def grade(self, query_id: str, doc_id: str) -> int:
        return self._grades.get(query_id, {}).get(doc_id, 0)

    def is_relevant(self, query_id: str, doc_id: str) -> bool:
        return self.grade(query_id, doc_id) > 0

    def relevant(self, query_id: str) -> set[str]:
        return {d for d, g in self._grades.get(query_id, {}).items() if g > 0}

    @property
    def query_ids(self) -> list[str]:
        return sorted(self._grades)

    @classmethod
    def read(cls, path) -> Qrels:
        """TREC qrels: ``query_id 0 doc_id grade`` per line."""
        q = cls()
        for lineno, line in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
            if not line.strip():
                continue
            parts = line.split()
            if len(parts) != 4:
                raise ValueError(f"{path}:{lineno}: expected 4 fields, got {len(parts)}")
            q.add(parts[0], parts[2], int(parts[3]))
        return q

    def write(self, path) -> None:
        with open(path, "w", encoding="utf-8", newline="\n") as f:
            for qid in sorted(self._grades):
                for did in sorted(self._grades[qid]):
                    f.write(f"{qid} 0 {did} {self._grades[qid][did]}\n")


def precision_at_k(run: RankedRun, qrels: Qrels, k: int) -> float:
    """Relevant documents among the top k, divided by k (short runs included)."""
    if k < 1:
        raise ValueError("k must be >= 1")
    hits = sum(qrels.is_relevant(run.query_id, e.item_id) for e in run.entries[:k])
    return hits / k


def cluster_precision(members: Sequence[str], query_id: str, qrels: Qrels) -> float:
    return sum(qrels.is_relevant(query_id, d) for d in members) / len(members)


def top_cluster_precision(cluster_ranking: RankedRun, clusters: ClusterSet,
                          qrels: Qrels) -> float:
    if len(cluster_ranking) == 0:
        raise ValueError("empty cluster ranking")
    top = clusters[cluster_ranking.entries[0].item_id]
    return cluster_precision(top.members, cluster_ranking.query_id, qrels)


def optimal_cluster(clusters: ClusterSet, qrels: Qrels, query_id: str) -> tuple[str, float]:
    """Cluster with the highest relevant fraction; ties go to the smaller cluster id."""
    if len(clusters) == 0:
        raise ValueError("no clusters")
    best = min(clusters, key=lambda c: (-cluster_precision(c.members, query_id, qrels),
                                        c.cluster_id))
    return best.cluster_id, cluster_precision(best.members, query_id, qrels)


def average_precision(run: RankedRun, qrels: Qrels, cutoff: int = 1000) -> float | None:
    """AP at ``cutoff``; None when the query has no relevant documents."""
    relevant = qrels.relevant(run.query_id)
    if not relevant:
        return None
    hits = 0
    total = 0.0
    for rank, e in enumerate(run.entries[:cutoff], 1):
        if e.item_id in relevant:
            hits += 1
            total += hits / rank
    return total / len(relevant)


def mean_average_precision(runs: RankedRun | Iterable[RankedRun], qrels: Qrels,
                           cutoff: int = 1000) -> float:
    if isinstance(runs, RankedRun):
        runs = [runs]
    values = []
    for run in runs:
        ap = average_precision(run, qrels, cutoff)
        if ap is None:
            log.warning("query %s has no relevant documents; excluded from MAP", run.query_id)
            continue
        values.append(ap)
    return math.fsum(values) / len(values) if values else 0.0


@dataclass(frozen=True)
class WilcoxonResult:
    p_value: float
    statistic: float  # W+ (sum of ranks of positive differences)
    n: int  # pairs remaining after dropping zero differences
    exact: bool
    all_zero: bool = False


def _signed_ranks(diffs: Sequence[float]) -> list[tuple[int, bool]]:
    """Doubled average ranks of |d| (integers) paired with the sign of d."""
    order = sorted(range(len(diffs)), key=lambda i: abs(diffs[i]))
    doubled = [0] * len(diffs)
    i = 0
    while i < len(order):
        j = i
        while j + 1 < len(order) and abs(diffs[order[j + 1]]) == abs(diffs[order[i]]):
            j += 1
        # ranks i+1..j+1 share their average; doubled it is (i+1)+(j+1)
        for t in range(i, j + 1):
            doubled[order[t]] = i + j + 2
        i = j + 1
    return [(doubled[i], diffs[i] > 0) for i in range(len(diffs))]


def wilcoxon_two_sided(paired_scores: Sequence[tuple[float, float]],
                       exact_max_n: int = 20) -> WilcoxonResult:
    """Wilcoxon signed-rank test, two-sided.

    Zero differences are dropped and tied |differences| get average ranks.
    The exact null distribution is used up to ``exact_max_n`` pairs, the
    normal approximation (tie-corrected variance, continuity correction)
    beyond.
    """
    if len(paired_scores) < 1:
        raise ValueError("need at least one pair")
    diffs = [a - b for a, b in paired_scores if a - b != 0]
    n = len(diffs)
    if n == 0:
        return WilcoxonResult(1.0, 0.0, 0, True, all_zero=True)
    ranks = _signed_ranks(diffs)
    w2 = sum(r for r, pos in ranks if pos)  # doubled W+
    if n <= exact_max_n:
        # counts[s] = number of sign assignments whose doubled W+ equals s
        total = sum(r for r, _ in ranks)
        counts = [0] * (total + 1)
        counts[0] = 1
        for r, _ in ranks:
            for s in range(total, r - 1, -1):
                counts[s] += counts[s - r]
        lower = sum(counts[: w2 + 1])
        upper = sum(counts[w2:])
        p = min(1.0, 2 * min(lower, upper) / 2 ** n)
        return WilcoxonResult(p, w2 / 2, n, True)
    mean = n * (n + 1) / 4
    tie_sizes: dict[int, int] = {}
    for r, _ in ranks:
        tie_sizes[r] = tie_sizes.get(r, 0) + 1
    var = n * (n + 1) * (2 * n + 1) / 24 - sum(t ** 3 - t for t in tie_sizes.values()) / 48
    dev = abs(w2 / 2 - mean) - 0.5
    if dev <= 0 or var <= 0:
        return WilcoxonResult(1.0, w2 / 2, n, False)
    z = dev / math.sqrt(var)
    return WilcoxonResult(min(1.0, math.erfc(z / math.sqrt(2))), w2 / 2, n, False)


# Parameter names in tie-break priority order; unknown names sort after, alphabetically.
PARAM_ORDER = ("lam", "delta", "nu", "alpha", "beta", "gamma", "mu", "k")


def _param_rank(name: str):
    return (PARAM_ORDER.index(name), "") if name in PARAM_ORDER else (len(PARAM_ORDER), name)


def _value_key(v):
    # None stands for "ALL" and sorts after every number
    return (1, 0.0) if v is None else (0, v)


def format_value(v) -> str:
    if v is None:
        return "ALL"
    if isinstance(v, float):
        return f"{v:g}"
    return str(v)


@dataclass(frozen=True)
class ParamGrid:
    params: dict[str, tuple]

    def __post_init__(self):
        for name, values in self.params.items():
            if len(values) == 0:
                raise ValueError(f"empty value list for parameter {name!r}")

    @property
    def names(self) -> list[str]:
        return sorted(self.params, key=_param_rank)

    def __len__(self):
        return math.prod(len(v) for v in self.params.values())

    def cells(self) -> list[dict]:
        names = self.names
        return [dict(zip(names, combo))
                for combo in itertools.product(*(self.params[n] for n in names))]

    def key(self, cell: Mapping) -> tuple:
        return tuple(_value_key(cell[n]) for n in self.names)


def cell_label(cell: Mapping) -> str:
    return ",".join(f"{n}={format_value(cell[n])}" for n in sorted(cell, key=_param_rank))


@dataclass
class SweepTable:
    """Objective value for every (grid cell, query)."""

    grid: ParamGrid
    query_ids: list[str]
    cells: list[dict]
    values: list[dict[str, float]] = field(repr=False)

    def mean(self, index: int, query_ids: Iterable[str] | None = None) -> float:
        qs = list(self.query_ids if query_ids is None else query_ids)
        return math.fsum(self.values[index][q] for q in qs) / len(qs)

    def best(self, query_ids: Iterable[str] | None = None) -> tuple[int, float]:
        """Index and mean of the best cell; ties go to the lexicographically first cell."""
        qs = list(self.query_ids if query_ids is None else query_ids)
        scored = [(self.mean(i, qs), i) for i in range(len(self.cells))]
        top = max(s for s, _ in scored)
        winners = [i for s, i in scored if s == top]
        return min(winners, key=lambda i: self.grid.key(self.cells[i])), top

    def report_lines(self) -> list[str]:
        """Machine-readable ``param=value,...<TAB>objective`` lines."""
        return [f"{cell_label(c)}\t{self.mean(i):.6f}" for i, c in enumerate(self.cells)]

    def report_table(self) -> str:
        names = self.grid.names
        header = names + ["objective"]
        rows = [[format_value(c[n]) for n in names] + [f"{self.mean(i):.4f}"]
                for i, c in enumerate(self.cells)]
        widths = [max(len(h), *(len(r[j]) for r in rows)) for j, h in enumerate(header)]
        fmt = "  ".join(f"{{:>{w}}}" for w in widths)
        return "\n".join([fmt.format(*header)] + [fmt.format(*r) for r in rows])


def sweep(evaluate: Callable[[dict], Mapping[str, float]], grid: ParamGrid,
          query_ids: Sequence[str], jobs: int = 1) -> SweepTable:
    """Evaluate every grid cell; ``evaluate(cell)`` returns per-query objective values."""
    log.info("sweeping %d grid cells over %d queries", len(grid), len(query_ids))
    cells = grid.cells()

    def run(cell):
        values = evaluate(cell)
        return {q: float(values[q]) for q in query_ids}

    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            values = list(pool.map(run, cells))
    else:
        values = [run(c) for c in cells]
    return SweepTable(grid, list(query_ids), cells, values)


@dataclass(frozen=True)
class GridSearchResult:
    params: dict
    objective: float


def grid_search(table: SweepTable, query_ids: Iterable[str] | None = None) -> GridSearchResult:
    index, value = table.best(query_ids)
    return GridSearchResult(dict(table.cells[index]), value)


@dataclass(frozen=True)
class LeaveOneOutResult:
    per_query: dict[str, float]
    chosen: dict[str, dict]
    mean: float


def leave_one_out(table: SweepTable) -> LeaveOneOutResult:
    """Tune on all other queries, evaluate on the held-out one."""
    qs = table.query_ids
    if len(qs) < 2:
        raise ValueError("leave-one-out needs at least two queries")
    per_query = {}
    chosen = {}
    for q in qs:
        index, _ = table.best([o for o in qs if o != q])
        per_query[q] = table.values[index][q]
        chosen[q] = dict(table.cells[index])
    mean = math.fsum(per_query[q] for q in qs) / len(qs)
    return LeaveOneOutResult(per_query, chosen, mean)


def paired_test(a: Mapping[str, float], b: Mapping[str, float]) -> WilcoxonResult:
    qs = sorted(set(a) & set(b))
    return wilcoxon_two_sided([(a[q], b[q]) for q in qs])


def cluster_run_precision(cluster_ranking: RankedRun, clusters: ClusterSet,
                          init_list: RankedRun, qrels: Qrels) -> float:
    """p@k of the document list obtained by expanding the top cluster."""
    doc_run = expand_top_cluster(cluster_ranking, clusters, init_list)
    return precision_at_k(doc_run, qrels, clusters.k)
