"""Unigram language models and the exp(-KL) similarity estimate.

All similarity values live in log space; ``SimilarityScore.value`` is the
linear value, clamped below at exp(-700) to avoid silent underflow.
"""

from __future__ import annotations

import enum
import math
import threading
from collections import Counter
from dataclasses import dataclass
from typing import Iterable, Sequence

from clustrank.corpus import Corpus

UNDERFLOW_LOG = -700.0


class _UnderflowCounter:
    def __init__(self):
        self._lock = threading.Lock()
        self.count = 0

    def bump(self):
        with self._lock:
            self.count += 1

    def reset(self):
        with self._lock:
            self.count = 0


underflow_warnings = _UnderflowCounter()


def safe_exp(log_value: float) -> float:
    """exp() with the underflow clamp; ``-inf`` maps to 0."""
    if log_value == -math.inf:
        return 0.0
    if log_value < UNDERFLOW_LOG:
        underflow_warnings.bump()
        log_value = UNDERFLOW_LOG
    return math.exp(log_value)


class Scheme(enum.Enum):
    MLE = "mle"
    DIRICHLET = "dirichlet"
    JELINEK_MERCER = "jm"


@dataclass(frozen=True, order=True)
class SimilarityScore:
    """A language-model similarity; ordering compares ``log_value``."""

    log_value: float

    @property
    def value(self) -> float:
        return safe_exp(self.log_value)

    @classmethod
    def from_value(cls, value: float) -> SimilarityScore:
        return cls(math.log(value) if value > 0 else -math.inf)


class SmoothedLanguageModel:
    """Term distribution induced from a term sequence.

    Observed counts are stored sparsely; unseen terms fall back to the
    collection model for the smoothed schemes.
    """

    def __init__(self, source_terms: Sequence[str], scheme: Scheme, param: float = 0.0,
                 corpus: Corpus | None = None, counts: Counter | None = None):
        self.source_terms = source_terms
        self.counts = counts if counts is not None else Counter(source_terms)
        self.length = sum(self.counts.values())
        self.scheme = scheme
        self.param = float(param)
        self.corpus = corpus

    def __repr__(self):
        return f"SmoothedLanguageModel({self.scheme.value}, param={self.param}, |x|={self.length})"

    @property
    def mu(self) -> float:
        if self.scheme is not Scheme.DIRICHLET:
            raise AttributeError("mu is only defined for Dirichlet models")
        return self.param

    @property
    def alpha(self) -> float:
        if self.scheme is not Scheme.JELINEK_MERCER:
            raise AttributeError("alpha is only defined for Jelinek-Mercer models")
        return self.param

    def prob(self, term: str) -> float:
        tf = self.counts.get(term, 0)
        if self.scheme is Scheme.MLE:
            return tf / self.length
        pc = self.corpus.collection_prob(term)
        if self.scheme is Scheme.DIRICHLET:
            return (tf + self.param * pc) / (self.length + self.param)
        mle = tf / self.length if self.length else 0.0
        return (1.0 - self.param) * mle + self.param * pc

    def log_prob(self, term: str) -> float:
        p = self.prob(term)
        return math.log(p) if p > 0 else -math.inf

    def support(self) -> set[str]:
        """Terms with nonzero probability (full collection vocabulary when smoothed)."""
        if self.scheme is Scheme.MLE or self.param == 0.0:
            return set(self.counts)
        return set(self.counts) | set(self.corpus.term_counts)

    def distribution(self, vocabulary: Iterable[str] | None = None) -> dict[str, float]:
        terms = self.support() if vocabulary is None else vocabulary
        return {t: self.prob(t) for t in terms}


def mle_model(terms: Sequence[str]) -> SmoothedLanguageModel:
    if len(terms) == 0:
        raise ValueError("MLE model of an empty term sequence is undefined")
    return SmoothedLanguageModel(terms, Scheme.MLE)


def dirichlet_model(terms: Sequence[str], mu: float, corpus: Corpus,
                    counts: Counter | None = None) -> SmoothedLanguageModel:
    if mu < 0:
        raise ValueError(f"mu must be nonnegative, got {mu}")
    if mu == 0 and len(terms) == 0 and not counts:
        raise ValueError("Dirichlet model with mu=0 of an empty term sequence is undefined")
    return SmoothedLanguageModel(terms, Scheme.DIRICHLET, mu, corpus, counts)


def jm_model(terms: Sequence[str], alpha: float, corpus: Corpus) -> SmoothedLanguageModel:
    """Jelinek-Mercer: (1 - alpha) * MLE + alpha * collection."""
    if not 0.0 <= alpha <= 1.0:
        raise ValueError(f"alpha must lie in [0, 1], got {alpha}")
    if len(terms) == 0 and alpha < 1.0:
        raise ValueError("Jelinek-Mercer model of an empty sequence needs alpha == 1")
    return SmoothedLanguageModel(terms, Scheme.JELINEK_MERCER, alpha, corpus)


def kl_similarity(x_terms: Sequence[str] | Counter,
                  y_model: SmoothedLanguageModel) -> SimilarityScore:
    """exp(-KL(MLE_x || y_model)), summed over x's observed terms."""
    counts = x_terms if isinstance(x_terms, Counter) else Counter(x_terms)
    n = sum(counts.values())
    if n == 0:
        raise ValueError("similarity of an empty term sequence is undefined")
    total = 0.0
    for term in sorted(counts):
        px = counts[term] / n
        py = y_model.prob(term)
        if py <= 0.0:
            raise ValueError(f"term {term!r} has zero probability under the target model")
        total += px * math.log(px / py)
    return SimilarityScore(-total)
