"""TREC run files: ``query_id Q0 item_id rank score tag`` per line."""

from __future__ import annotations

from pathlib import Path
from typing import Iterable

from clustrank.retrieval import RankedRun, RunEntry


def format_score(score: float) -> str:
    return f"{score:.10g}"


def run_lines(run: RankedRun, tag: str) -> list[str]:
    if not tag or any(ch.isspace() for ch in tag):
        raise ValueError(f"run tag must be a nonempty token, got {tag!r}")
    return [f"{run.query_id} Q0 {e.item_id} {e.rank} {format_score(e.score)} {tag}"
            for e in run.entries]


def emit_run(run: RankedRun, tag: str, path) -> None:
    """Write a single query's run."""
    if len(run) == 0:
        raise ValueError(f"empty run for query {run.query_id!r}")
    write_runs([run], tag, path)


def write_runs(runs: Iterable[RankedRun], tag: str, path) -> None:
    lines = []
    for run in runs:
        lines.extend(run_lines(run, tag))
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        f.write("".join(line + "\n" for line in lines))


def read_runs(path) -> dict[str, RankedRun]:
    """Parse a run file; entries are re-sorted by rank within each query."""
    grouped: dict[str, list[RunEntry]] = {}
    order: list[str] = []
    for lineno, line in enumerate(Path(path).read_text(encoding="utf-8").split("\n"), 1):
        if not line.strip():
            continue
        parts = line.split()
        if len(parts) != 6:
            raise ValueError(f"{path}:{lineno}: expected 6 fields, got {len(parts)}")
        qid, _, item, rank, score, _tag = parts
        if qid not in grouped:
            grouped[qid] = []
            order.append(qid)
        grouped[qid].append(RunEntry(item, float(score), int(rank)))
    return {q: RankedRun(q, tuple(sorted(grouped[q], key=lambda e: e.rank))) for q in order}
