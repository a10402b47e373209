"""Document collections, queries, tokenization and collection statistics."""

from __future__ import annotations

import logging
import re
from collections import Counter
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path
from typing import Collection, Iterable, Sequence

import numpy as np

from clustrank.porter import stem

log = logging.getLogger(__name__)

_TOKEN_RE = re.compile(r"[^\W_]+")

FORMATS = ("trectext", "one-doc-per-line")


class CorpusFormatError(ValueError):
    """Malformed corpus or query file."""


def tokenize(raw_text: str, stopwords: Collection[str] | None = None) -> list[str]:
    """Lowercase, split on non-alphanumerics, Porter-stem.

    Stopwords (if given) are matched against the lowercased surface form
    before stemming.
    """
    tokens = _TOKEN_RE.findall(raw_text.lower())
    if stopwords:
        tokens = [t for t in tokens if t not in stopwords]
    return [stem(t) for t in tokens]


@dataclass(frozen=True)
class Document:
    doc_id: str
    terms: tuple[str, ...]

    def __post_init__(self):
        if not self.doc_id:
            raise ValueError("doc_id must be nonempty")

    @cached_property
    def tf(self) -> Counter:
        return Counter(self.terms)

    def __len__(self):
        return len(self.terms)


@dataclass(frozen=True)
class Query:
    query_id: str
    terms: tuple[str, ...]

    def __post_init__(self):
        if not self.query_id:
            raise ValueError("query_id must be nonempty")
        if not self.terms:
            raise ValueError(f"query {self.query_id!r} is empty after normalization")


@dataclass(eq=False)
class Corpus:
    """Immutable document collection with collection-level term statistics.

    Term ids are assigned in sorted term order, document indices follow the
    order documents were supplied in.
    """

    documents: tuple[Document, ...]
    term_counts: Counter = field(init=False)
    total_terms: int = field(init=False)

    def __post_init__(self):
        self.documents = tuple(self.documents)
        self._index = {}
        counts = Counter()
        for i, doc in enumerate(self.documents):
            if doc.doc_id in self._index:
                raise CorpusFormatError(f"duplicate doc_id {doc.doc_id!r}")
            self._index[doc.doc_id] = i
            counts.update(doc.terms)
        self.term_counts = counts
        self.total_terms = sum(counts.values())

    def __len__(self):
        return len(self.documents)

    def __contains__(self, doc_id):
        return doc_id in self._index

    def __getitem__(self, doc_id: str) -> Document:
        return self.documents[self._index[doc_id]]

    def position(self, doc_id: str) -> int:
        return self._index[doc_id]

    def collection_prob(self, term: str) -> float:
        """p(w|C), maximum likelihood over the whole collection."""
        if self.total_terms == 0:
            return 0.0
        return self.term_counts.get(term, 0) / self.total_terms

    @cached_property
    def vocabulary(self) -> dict[str, int]:
        return {t: i for i, t in enumerate(sorted(self.term_counts))}

    @cached_property
    def background(self) -> np.ndarray:
        """p(w|C) as a dense array over term ids."""
        vocab = self.vocabulary
        bg = np.zeros(len(vocab))
        for term, i in vocab.items():
            bg[i] = self.term_counts[term]
        if self.total_terms:
            bg /= self.total_terms
        return bg

    @cached_property
    def doc_lengths(self) -> np.ndarray:
        return np.array([len(d) for d in self.documents], dtype=np.float64)

    @cached_property
    def postings(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Inverted index in CSR form: (indptr by term id, doc positions, tf)."""
        vocab = self.vocabulary
        per_term: list[list[tuple[int, int]]] = [[] for _ in vocab]
        for d, doc in enumerate(self.documents):
            for term, tf in doc.tf.items():
                per_term[vocab[term]].append((d, tf))
        indptr = np.zeros(len(vocab) + 1, dtype=np.int64)
        np.cumsum([len(p) for p in per_term], out=indptr[1:])
        docs = np.fromiter((d for p in per_term for d, _ in p), dtype=np.int64,
                           count=int(indptr[-1]))
        tfs = np.fromiter((tf for p in per_term for _, tf in p), dtype=np.float64,
                          count=int(indptr[-1]))
        return indptr, docs, tfs

    def restrict_query(self, query: Query) -> Query:
        """Drop query terms absent from the collection, warning for each."""
        kept = tuple(t for t in query.terms if self.term_counts.get(t, 0) > 0)
        dropped = sorted(set(query.terms) - set(kept))
        if dropped:
            log.warning("query %s: dropping out-of-vocabulary terms %s",
                        query.query_id, ", ".join(dropped))
        if not kept:
            raise ValueError(
                f"query {query.query_id!r} has no terms occurring in the collection")
        return query if len(kept) == len(query.terms) else Query(query.query_id, kept)


def _trectext_documents(data: bytes):
    """Yield (doc_id, text) pairs, raising on malformed markup."""
    text = data.decode("utf-8")
    pos = 0
    n = len(text)
    tag_re = re.compile(r"<(/?)(DOC|DOCNO|TEXT)>")
    while True:
        start = text.find("<DOC>", pos)
        gap = text[pos:start if start >= 0 else n]
        if gap.strip():
            offset = len(text[:pos + len(gap) - len(gap.lstrip())].encode("utf-8"))
            raise CorpusFormatError(
                f"unexpected content outside <DOC> at byte {offset}")
        if start < 0:
            return
        end = text.find("</DOC>", start)
        if end < 0:
            raise CorpusFormatError(
                f"unterminated <DOC> starting at byte {len(text[:start].encode('utf-8'))}")
        body = text[start + len("<DOC>"):end]
        byte_start = len(text[:start].encode("utf-8"))
        if "<DOC>" in body:
            raise CorpusFormatError(f"nested <DOC> inside document at byte {byte_start}")
        docno = None
        parts = []
        open_tag = None
        open_at = 0
        for m in tag_re.finditer(body):
            closing, name = m.group(1) == "/", m.group(2)
            if name == "DOC":
                raise CorpusFormatError(f"stray </DOC> in document at byte {byte_start}")
            if not closing:
                if open_tag is not None:
                    raise CorpusFormatError(
                        f"<{name}> opened inside <{open_tag}> in document at byte {byte_start}")
                open_tag, open_at = name, m.end()
            else:
                if open_tag != name:
                    raise CorpusFormatError(
                        f"unmatched </{name}> in document at byte {byte_start}")
                content = body[open_at:m.start()]
                if name == "DOCNO":
                    if docno is not None:
                        raise CorpusFormatError(
                            f"multiple <DOCNO> in document at byte {byte_start}")
                    docno = content.strip()
                else:
                    parts.append(content)
                open_tag = None
        if open_tag is not None:
            raise CorpusFormatError(
                f"unterminated <{open_tag}> in document at byte {byte_start}")
        if not docno:
            raise CorpusFormatError(f"missing <DOCNO> in document at byte {byte_start}")
        yield docno, " ".join(parts)
        pos = end + len("</DOC>")


def _line_documents(data: bytes):
    offset = 0
    for line in data.split(b"\n"):
        line_offset = offset
        offset += len(line) + 1
        stripped = line.rstrip(b"\r")
        if not stripped.strip():
            continue
        if b"\t" not in stripped:
            raise CorpusFormatError(
                f"line at byte {line_offset} has no TAB between doc_id and text")
        doc_id, body = stripped.split(b"\t", 1)
        doc_id = doc_id.decode("utf-8").strip()
        if not doc_id:
            raise CorpusFormatError(f"empty doc_id at byte {line_offset}")
        yield doc_id, body.decode("utf-8")


def ingest_corpus(path, format: str = "one-doc-per-line",
                  stopwords: Collection[str] | None = None) -> Corpus:
    """Read a raw collection file into a :class:`Corpus`."""
    data = Path(path).read_bytes()
    if format == "trectext":
        pairs = _trectext_documents(data)
    elif format == "one-doc-per-line":
        pairs = _line_documents(data)
    else:
        raise ValueError(f"unknown corpus format {format!r}; expected one of {FORMATS}")
    docs = [Document(doc_id, tuple(tokenize(body, stopwords))) for doc_id, body in pairs]
    return Corpus(docs)


def ingest_queries(path, stopwords: Collection[str] | None = None) -> list[Query]:
    queries = []
    seen = set()
    for lineno, line in enumerate(Path(path).read_text(encoding="utf-8").split("\n"), 1):
        if not line.strip():
            continue
        if "\t" not in line:
            raise CorpusFormatError(f"query line {lineno} has no TAB")
        qid, text = line.split("\t", 1)
        qid = qid.strip()
        if qid in seen:
            raise CorpusFormatError(f"duplicate query_id {qid!r}")
        seen.add(qid)
        terms = tuple(tokenize(text, stopwords))
        if not terms:
            raise ValueError(f"query {qid!r} is empty after normalization")
        queries.append(Query(qid, terms))
    return queries


def load_stoplist(path) -> frozenset[str]:
    return frozenset(w.strip().lower() for w in Path(path).read_text().split() if w.strip())


# Tokenized index: a header line, then "doc_id<TAB>space-joined terms" per document.
INDEX_HEADER = "#clustrank-index v1"


def write_index(corpus: Corpus, path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        f.write(INDEX_HEADER + "\n")
        for doc in corpus.documents:
            f.write(f"{doc.doc_id}\t{' '.join(doc.terms)}\n")


def read_index(path) -> Corpus:
    lines = Path(path).read_text(encoding="utf-8").split("\n")
    if not lines or lines[0] != INDEX_HEADER:
        raise CorpusFormatError(f"{path}: not a clustrank index (missing header)")
    docs = []
    for line in lines[1:]:
        if not line:
            continue
        doc_id, _, body = line.partition("\t")
        docs.append(Document(doc_id, tuple(body.split())))
    return Corpus(docs)


def corpus_from_texts(texts: Iterable[tuple[str, str]] | dict,
                      stopwords: Collection[str] | None = None) -> Corpus:
    """Build a corpus from (doc_id, raw text) pairs; convenient for tests and fixtures."""
    items = texts.items() if isinstance(texts, dict) else texts
    return Corpus([Document(i, tuple(tokenize(t, stopwords))) for i, t in items])


def corpus_from_terms(docs: dict[str, Sequence[str]]) -> Corpus:
    return Corpus([Document(i, tuple(ts)) for i, ts in docs.items()])
