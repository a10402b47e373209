"""Synthetic corpora shared by the test modules."""

from __future__ import annotations

import numpy as np

from clustrank.corpus import Corpus, Query, corpus_from_terms
from clustrank.evaluation import Qrels

NOISE_VOCAB = tuple(f"w{i:04d}" for i in range(3000))


def random_corpus(rng: np.random.Generator, n_docs: int = 10, vocab_size: int = 12,
                  length: tuple[int, int] = (5, 15), query_len: int = 2,
                  prefix: str = "d") -> tuple[Corpus, Query]:
    """Small random corpus whose every document contains at least one query term."""
    vocab = [f"t{i}" for i in range(vocab_size)]
    q_terms = tuple(vocab[:query_len])
    docs = {}
    for i in range(n_docs):
        n = int(rng.integers(length[0], length[1] + 1))
        terms = list(rng.choice(vocab, size=n))
        terms.append(q_terms[int(rng.integers(len(q_terms)))])
        docs[f"{prefix}{i:02d}"] = terms
    return corpus_from_terms(docs), Query("q1", q_terms)


def random_qrels(rng: np.random.Generator, corpus: Corpus, query_id: str = "q1",
                 rate: float = 0.3) -> Qrels:
    qrels = Qrels()
    for d in corpus.documents:
        qrels.add(query_id, d.doc_id, int(rng.random() < rate))
    return qrels


def planted_fixture(seed: int = 7, n_docs: int = 200):
    """200 documents: 5 near-duplicate relevant ones, decoys that match the query
    term-for-term but share nothing else, and background noise.

    Returns (corpus, query, qrels, relevant ids).
    """
    rng = np.random.default_rng(seed)
    topic = [f"topic{i}" for i in range(30)]
    docs: dict[str, list[str]] = {}
    relevant = []
    core = list(rng.choice(topic, size=180)) + ["alpha", "beta"] * 10
    for i in range(5):
        terms = list(core)
        # small perturbation: swap a few topic words, add a little noise
        for j in rng.choice(180, size=10, replace=False):
            terms[j] = str(rng.choice(topic))
        terms += list(rng.choice(NOISE_VOCAB, size=20))
        did = f"doc{i * 37 % n_docs:03d}"
        docs[did] = terms
        relevant.append(did)
    decoys = 0
    for i in range(n_docs):
        did = f"doc{i:03d}"
        if did in docs:
            continue
        terms = list(rng.choice(NOISE_VOCAB, size=int(rng.integers(150, 300))))
        if decoys < 2:
            # query-dense but topically unrelated
            terms = terms[:200] + ["alpha", "beta"] * 14
            decoys += 1
        elif rng.random() < 0.3:
            terms.append(str(rng.choice(["alpha", "beta"])))
        docs[did] = terms
    corpus = corpus_from_terms(dict(sorted(docs.items())))
    qrels = Qrels()
    for d in sorted(docs):
        qrels.add("q1", d, int(d in relevant))
    return corpus, Query("q1", ("alpha", "beta")), qrels, sorted(relevant)


def topical_fixture(seed: int = 11, n_topics: int = 10, docs_per_topic: int = 6,
                    n_noise: int = 40):
    """Several topics, one query per topic; a topic's documents are its relevant set.

    Returns (corpus, queries, qrels).
    """
    rng = np.random.default_rng(seed)
    docs: dict[str, list[str]] = {}
    queries = []
    qrels = Qrels()
    for t in range(n_topics):
        vocab = [f"k{t}x{i}" for i in range(15)]
        q_terms = (vocab[0], vocab[1])
        queries.append(Query(f"q{t:02d}", q_terms))
        for j in range(docs_per_topic):
            n_topic = int(rng.integers(5, 40))
            terms = list(rng.choice(vocab, size=n_topic)) + \
                list(rng.choice(NOISE_VOCAB, size=int(rng.integers(20, 80))))
            did = f"t{t:02d}d{j}"
            docs[did] = terms
            qrels.add(f"q{t:02d}", did, int(rng.random() < 0.8))
        # off-topic documents that mention the query words in passing
        for j in range(2):
            terms = list(rng.choice(NOISE_VOCAB, size=60)) + [q_terms[j % 2]] * 2
            docs[f"t{t:02d}x{j}"] = terms
    for j in range(n_noise):
        docs[f"n{j:03d}"] = list(rng.choice(NOISE_VOCAB, size=int(rng.integers(30, 90))))
    return corpus_from_terms(docs), queries, qrels
