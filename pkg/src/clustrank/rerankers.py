"""Direct re-ranking of the initial list: Interpolation and PR+QuerySim."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Mapping

from clustrank.centrality import CentralityScores
from clustrank.language_models import SimilarityScore
from clustrank.rankers import RankerInputs
from clustrank.retrieval import RankedRun

INTERPOLATION_LAMBDA_GRID = tuple(round(0.1 * i, 1) for i in range(10))


@dataclass(frozen=True)
class RerankConfig:
    lambda_interp: float = 0.5
    delta: int = 4
    nu: float = 0.85


def _logsumexp(values: list[float]) -> float:
    m = max(values)
    if m == -math.inf:
        return -math.inf
    return m + math.log(math.fsum(math.exp(v - m) for v in values))


def _log(x: float) -> float:
    return math.log(x) if x > 0 else -math.inf


def interpolation_rerank(inp: RankerInputs, lam: float) -> RankedRun:
    """Score d by lam * p_d(q) + (1 - lam) * sum_c p_c(q) p_d(c).

    Evaluated in log space, so lam = 1 reproduces the initial order exactly.
    """
    if not 0.0 <= lam <= 1.0:
        raise ValueError(f"lambda must lie in [0, 1], got {lam}")
    log_lam, log_rest = _log(lam), _log(1.0 - lam)
    scored = []
    for d in inp.init_list.ids:
        terms = [log_lam + inp.log_query_gen_doc(d)]
        for c in inp.clusters:
            try:
                assoc = inp.p_d_c[d, c.cluster_id].log_value
            except KeyError:
                raise KeyError(f"missing p_d(c) for pair ({d!r}, {c.cluster_id!r})") from None
            try:
                cq = inp.p_c_q[c.cluster_id].log_value
            except KeyError:
                raise KeyError(f"missing p_c(q) for cluster {c.cluster_id!r}") from None
            terms.append(log_rest + cq + assoc)
        scored.append((d, _logsumexp(terms)))
    return RankedRun.from_scores(inp.init_list.query_id, scored)


def pr_querysim_rerank(init_list: RankedRun, cent_d: CentralityScores,
                       p_d_q: Mapping[str, SimilarityScore]) -> RankedRun:
    """Sort the initial list by Cent(d) * p_d(q) (log scores)."""
    scored = []
    for d in init_list.ids:
        if d not in cent_d:
            raise KeyError(f"missing centrality for document {d!r}")
        try:
            q = p_d_q[d].log_value
        except KeyError:
            raise KeyError(f"missing p_d(q) for document {d!r}") from None
        scored.append((d, _log(cent_d[d]) + q))
    return RankedRun.from_scores(init_list.query_id, scored)
