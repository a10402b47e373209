import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from clustrank.clustering import (
    Cluster,
    build_clusters,
    cluster_model,
    doc_cluster_association,
    make_cluster,
    read_cluster_dump,
    write_cluster_dump,
)
from clustrank.corpus import corpus_from_terms
from clustrank.language_models import dirichlet_model
from clustrank.retrieval import RankedRun

from oracles import dirichlet_prob, log_kl_similarity
from synth import random_corpus

PAIRS = {
    "d1": ["apple", "banana", "apple", "cherry"],
    "d2": ["apple", "banana", "apple", "cherry", "apple"],
    "d3": ["xray", "yak", "zebra", "yak"],
    "d4": ["xray", "yak", "zebra", "yak", "zebra"],
}


def _init(ids):
    return RankedRun.from_ids("q", list(ids))


class TestBuildClusters:
    def test_singletons(self):
        c = corpus_from_terms(PAIRS)
        cs = build_clusters(_init(PAIRS), c, 1, mu=10)
        assert [cl.members for cl in cs] == [(d,) for d in PAIRS]

    def test_full_size(self):
        c = corpus_from_terms(PAIRS)
        cs = build_clusters(_init(PAIRS), c, 4, mu=10)
        assert all(set(cl.members) == set(PAIRS) for cl in cs)

    def test_near_duplicate_pairs(self):
        c = corpus_from_terms(PAIRS)
        cs = build_clusters(_init(PAIRS), c, 2, mu=10)
        counts, total = dict(c.term_counts), c.total_terms
        for cl in cs:
            seed = cl.cluster_id
            # brute force: neighbor maximizing p_{d_i}(seed)
            best = max((d for d in PAIRS if d != seed),
                       key=lambda d: (log_kl_similarity(PAIRS[seed], PAIRS[d], 10, counts,
                                                        total), -int(d[1:])))
            assert cl.members == (seed, best)
        assert {cs["d1"].members[1], cs["d3"].members[1]} == {"d2", "d4"}

    def test_ties_by_doc_id(self):
        c = corpus_from_terms({"s": ["a"], "y": ["b"], "x": ["b"]})
        cs = build_clusters(_init(["s", "y", "x"]), c, 2, mu=5)
        assert cs["s"].members == ("s", "x")

    def test_k_too_large(self):
        c = corpus_from_terms(PAIRS)
        with pytest.raises(ValueError, match="exceeds"):
            build_clusters(_init(PAIRS), c, 5)

    @settings(max_examples=30, deadline=None)
    @given(seed=st.integers(0, 10_000), k=st.integers(1, 6))
    def test_invariants(self, seed, k):
        corpus, _ = random_corpus(np.random.default_rng(seed), n_docs=8)
        init = _init([d.doc_id for d in corpus.documents])
        cs = build_clusters(init, corpus, k)
        assert len(cs) == len(init)
        for cl in cs:
            assert len(cl) == k
            assert cl.members[0] == cl.cluster_id
            assert len(set(cl.members)) == k
            assert len(cl.concat_terms) == sum(len(corpus[d]) for d in cl.members)


class TestClusterModel:
    def test_concatenation(self):
        c = corpus_from_terms({"u": ["a", "b"], "v": ["a", "b"], "w": ["c"]})
        cl = make_cluster("u", ["u", "v"], c)
        m = cluster_model(cl, 3, c)
        ref = dirichlet_model(["a", "b", "a", "b"], 3, c)
        assert [m.prob(t) for t in "abc"] == [ref.prob(t) for t in "abc"]

    def test_order_insensitive(self):
        c = corpus_from_terms({"u": ["a", "b"], "v": ["c", "c", "a"]})
        m1 = cluster_model(make_cluster("u", ["u", "v"], c), 3, c)
        m2 = cluster_model(make_cluster("v", ["v", "u"], c), 3, c)
        assert [m1.prob(t) for t in "abc"] == [m2.prob(t) for t in "abc"]

    def test_hand_values(self):
        docs = {"u": ["a", "b"], "v": ["a", "c", "c"]}
        c = corpus_from_terms(docs)
        m = cluster_model(make_cluster("u", ["u", "v"], c), 3, c)
        concat = docs["u"] + docs["v"]
        want = [dirichlet_prob(t, concat, 3, dict(c.term_counts), c.total_terms) for t in "abc"]
        # (2 + 3*2/5)/8, (1 + 3/5)/8, (2 + 3*2/5)/8
        np.testing.assert_allclose(want, [0.4, 0.2, 0.4], atol=1e-15)
        np.testing.assert_allclose([m.prob(t) for t in "abc"], want, atol=1e-15)


class TestAssociation:
    def test_identical_text_is_maximal(self):
        docs = {"d": ["a", "b"], "e": ["a", "a"], "f": ["b", "b"]}
        c = corpus_from_terms(docs)
        same = doc_cluster_association(c["d"], make_cluster("d", ["d"], c), 5, c)
        for other in ("e", "f"):
            assoc = doc_cluster_association(c["d"], make_cluster(other, [other], c), 5, c)
            assert same > assoc

    def test_disjoint_vocabulary(self):
        c = corpus_from_terms({"d": ["a", "b"], "e": ["x", "y"]})
        own = doc_cluster_association(c["d"], make_cluster("d", ["d"], c), 5, c)
        other = doc_cluster_association(c["d"], make_cluster("e", ["e"], c), 5, c)
        assert own.log_value > other.log_value

    def test_matches_oracle(self):
        docs = {"d1": ["a", "b", "b"], "d2": ["b", "c"], "d3": ["a", "c", "c", "c"]}
        c = corpus_from_terms(docs)
        counts, total = dict(c.term_counts), c.total_terms
        init = _init(docs)
        cs = build_clusters(init, c, 2, mu=4)
        for d in docs:
            for cl in cs:
                concat = [t for m in cl.members for t in docs[m]]
                want = log_kl_similarity(concat, docs[d], 4, counts, total)
                got = doc_cluster_association(c[d], cl, 4, c).log_value
                assert got == pytest.approx(want, abs=1e-12)


class TestDump:
    def test_round_trip(self, tmp_path):
        c = corpus_from_terms(PAIRS)
        cs = build_clusters(_init(PAIRS), c, 2, mu=10)
        write_cluster_dump(tmp_path / "cl.tsv", [("q1", cs), ("q2", cs)])
        back = read_cluster_dump(tmp_path / "cl.tsv", c)
        assert set(back) == {"q1", "q2"}
        assert back["q1"] == cs
        assert back["q2"].k == 2

    def test_bad_line(self, tmp_path):
        (tmp_path / "cl.tsv").write_text("q1\tc1\n")
        with pytest.raises(ValueError, match="3 TAB"):
            read_cluster_dump(tmp_path / "cl.tsv")

    def test_cluster_len(self):
        assert len(Cluster("c", ("a", "b"), ())) == 2
