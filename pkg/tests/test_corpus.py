from pathlib import Path

import pytest

from clustrank.corpus import (
    Corpus,
    CorpusFormatError,
    Document,
    Query,
    corpus_from_terms,
    ingest_corpus,
    ingest_queries,
    read_index,
    tokenize,
    write_index,
)
from clustrank.porter import stem

VECTORS = Path(__file__).parent / "data" / "porter_vectors.tsv"


def _write(tmp_path, name, text):
    p = tmp_path / name
    p.write_bytes(text.encode("utf-8"))
    return p


class TestPorter:
    def test_reference_vectors(self):
        pairs = [line.split("\t") for line in VECTORS.read_text().splitlines() if line]
        assert len(pairs) == 100
        mismatches = [(w, s, stem(w)) for w, s in pairs if stem(w) != s]
        assert mismatches == []

    @pytest.mark.parametrize("word", ["a", "is", "as", "b"])
    def test_short_words_unchanged(self, word):
        assert stem(word) == word


class TestTokenize:
    def test_empty(self):
        assert tokenize("") == []

    def test_stemmed_variants_collapse(self):
        assert tokenize("Clustering clustered CLUSTERS") == ["cluster"] * 3

    def test_delimiters(self):
        assert tokenize("a-b c") == ["a", "b", "c"]

    def test_underscore_and_digits(self):
        assert tokenize("x_y 401") == ["x", "y", "401"]

    def test_stopwords_removed_before_stemming(self):
        assert tokenize("the running dogs", stopwords={"the"}) == ["run", "dog"]


class TestCorpus:
    def test_counts(self):
        c = corpus_from_terms({"d1": ["a", "a", "b"], "d2": ["c"]})
        assert c.total_terms == 4
        assert dict(c.term_counts) == {"a": 2, "b": 1, "c": 1}
        assert c.collection_prob("a") == 0.5
        assert c.collection_prob("zzz") == 0.0

    def test_duplicate_ids(self):
        with pytest.raises(CorpusFormatError, match="duplicate"):
            Corpus([Document("x", ("a",)), Document("x", ("b",))])

    def test_empty_doc_id(self):
        with pytest.raises(ValueError):
            Document("", ("a",))

    def test_empty_query(self):
        with pytest.raises(ValueError):
            Query("q", ())

    def test_postings_match_tf(self):
        c = corpus_from_terms({"d1": ["a", "a", "b"], "d2": ["b", "c"], "d3": []})
        indptr, docs, tfs = c.postings
        vocab = c.vocabulary
        for term, tid in vocab.items():
            got = {c.documents[d].doc_id: tf for d, tf in
                   zip(docs[indptr[tid]:indptr[tid + 1]], tfs[indptr[tid]:indptr[tid + 1]])}
            want = {d.doc_id: d.tf[term] for d in c.documents if term in d.tf}
            assert got == want

    def test_restrict_query_drops_oov(self, caplog):
        c = corpus_from_terms({"d1": ["a", "b"]})
        q = c.restrict_query(Query("q", ("a", "zz")))
        assert q.terms == ("a",)
        assert "zz" in caplog.text
        with pytest.raises(ValueError, match="no terms"):
            c.restrict_query(Query("q", ("zz",)))


class TestIngest:
    def test_one_per_line(self, tmp_path):
        p = _write(tmp_path, "c.txt", "d1\ta a b\nd2\tc\n")
        c = ingest_corpus(p, "one-doc-per-line")
        assert len(c) == 2
        assert dict(c.term_counts) == {"a": 2, "b": 1, "c": 1}
        assert c.total_terms == 4

    def test_empty_file(self, tmp_path):
        assert len(ingest_corpus(_write(tmp_path, "e.txt", ""))) == 0
        assert len(ingest_corpus(_write(tmp_path, "e.trec", ""), "trectext")) == 0

    def test_trectext(self, tmp_path):
        p = _write(tmp_path, "c.trec", "<DOC><DOCNO>x</DOCNO><TEXT>a</TEXT></DOC>")
        c = ingest_corpus(p, "trectext")
        assert [d.doc_id for d in c.documents] == ["x"]
        assert c["x"].terms == ("a",)

    def test_trectext_multiple_text_blocks(self, tmp_path):
        p = _write(tmp_path, "c.trec",
                   "<DOC>\n<DOCNO> d1 </DOCNO>\n<TEXT>cats</TEXT><TEXT>dogs</TEXT>\n</DOC>\n"
                   "<DOC><DOCNO>d2</DOCNO></DOC>\n")
        c = ingest_corpus(p, "trectext")
        assert c["d1"].terms == ("cat", "dog")
        assert c["d2"].terms == ()

    @pytest.mark.parametrize("text, message", [
        ("<DOC><DOCNO>x</DOCNO><TEXT>a</TEXT>", "unterminated <DOC>"),
        ("<DOC><DOCNO>x</DOCNO><TEXT>a</DOC>", "unterminated <TEXT>"),
        ("<DOC><TEXT>a</TEXT></DOC>", "missing <DOCNO>"),
        ("<DOC><DOCNO>x</DOCNO><DOCNO>y</DOCNO></DOC>", "multiple <DOCNO>"),
        ("junk <DOC><DOCNO>x</DOCNO></DOC>", "outside <DOC> at byte 0"),
        ("<DOC><DOCNO>x</DOCNO></DOC>\n<DOC><DOC><DOCNO>y</DOCNO></DOC>", "nested"),
    ])
    def test_trectext_errors(self, tmp_path, text, message):
        with pytest.raises(CorpusFormatError, match=message):
            ingest_corpus(_write(tmp_path, "bad.trec", text), "trectext")

    def test_error_offset(self, tmp_path):
        text = "<DOC><DOCNO>x</DOCNO></DOC>\n<DOC><TEXT>a</TEXT></DOC>"
        with pytest.raises(CorpusFormatError, match="byte 28"):
            ingest_corpus(_write(tmp_path, "bad.trec", text), "trectext")

    def test_line_without_tab(self, tmp_path):
        with pytest.raises(CorpusFormatError, match="byte 7"):
            ingest_corpus(_write(tmp_path, "c.txt", "d1\ta b\nbroken line\n"))

    def test_unknown_format(self, tmp_path):
        with pytest.raises(ValueError, match="unknown corpus format"):
            ingest_corpus(_write(tmp_path, "c.txt", ""), "xml")

    def test_queries(self, tmp_path):
        p = _write(tmp_path, "q.txt", "401\tforeign minorities\n7\ta\n")
        qs = ingest_queries(p)
        assert qs == [Query("401", ("foreign", "minor")), Query("7", ("a",))]

    def test_query_empty_after_normalization(self, tmp_path):
        with pytest.raises(ValueError, match="empty"):
            ingest_queries(_write(tmp_path, "q.txt", "8\t---\n"))

    def test_duplicate_query(self, tmp_path):
        with pytest.raises(CorpusFormatError, match="duplicate"):
            ingest_queries(_write(tmp_path, "q.txt", "1\ta\n1\tb\n"))


class TestIndexRoundTrip:
    def test_round_trip(self, tmp_path):
        c = corpus_from_terms({"d1": ["a", "b"], "d2": [], "d3": ["c", "c"]})
        write_index(c, tmp_path / "idx")
        back = read_index(tmp_path / "idx")
        assert [(d.doc_id, d.terms) for d in back.documents] == \
            [(d.doc_id, d.terms) for d in c.documents]

    def test_missing_header(self, tmp_path):
        with pytest.raises(CorpusFormatError, match="header"):
            read_index(_write(tmp_path, "idx", "d1\ta\n"))
