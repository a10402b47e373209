from dataclasses import replace

import pytest

from clustrank.cli import main, read_config_file
from clustrank.clustering import read_cluster_dump
from clustrank.evaluation import Qrels, optimal_cluster, precision_at_k, top_cluster_precision
from clustrank.pipeline import (
    ALL_METHODS,
    CLUSTER_METHODS,
    PipelineConfig,
    PipelineError,
    method_grid,
    process_query,
    run_pipeline,
)
from clustrank.rankers import Method, MethodSpec
from clustrank.retrieval import RankedRun
from clustrank.trec import emit_run, read_runs, run_lines

from synth import planted_fixture

TOY_CORPUS = ("d1\tapple banana apple cherry\nd2\tbanana cherry date\n"
              "d3\tapple apple date egg\nd4\tcherry egg fig\nd5\tapple fig grape\n"
              "d6\tbanana grape apple\n")
TOY_QUERIES = "q1\tapple banana\nq2\tcherry fig\n"
TOY_QRELS = "q1 0 d1 1\nq1 0 d6 1\nq2 0 d4 1\n"


@pytest.fixture
def toy(tmp_path):
    (tmp_path / "corpus.txt").write_text(TOY_CORPUS)
    (tmp_path / "queries.txt").write_text(TOY_QUERIES)
    (tmp_path / "qrels.txt").write_text(TOY_QRELS)
    return tmp_path


def _planted_files(tmp_path):
    corpus, query, qrels, _ = planted_fixture()
    with open(tmp_path / "planted.txt", "w") as f:
        for d in corpus.documents:
            f.write(f"{d.doc_id}\t{' '.join(d.terms)}\n")
    (tmp_path / "planted_q.txt").write_text("q1\talpha beta\n")
    qrels.write(tmp_path / "planted_qrels.txt")
    return tmp_path


class TestTrecRuns:
    def test_single_line(self, tmp_path):
        emit_run(RankedRun.from_scores("q1", [("d7", -1.5)]), "tag", tmp_path / "r")
        assert (tmp_path / "r").read_bytes() == b"q1 Q0 d7 1 -1.5 tag\n"

    def test_tie_order(self):
        lines = run_lines(RankedRun.from_scores("q1", [("b", 0.0), ("a", 0.0)]), "t")
        assert [ln.split()[2:4] for ln in lines] == [["a", "1"], ["b", "2"]]

    def test_round_trip(self, tmp_path):
        run = RankedRun.from_scores("q1", [("x", -3.25), ("y", -1.0), ("z", -2.0)])
        emit_run(run, "t", tmp_path / "r")
        back = read_runs(tmp_path / "r")["q1"]
        assert back.ids == run.ids
        assert [e.score for e in back] == [e.score for e in run]

    def test_empty_run(self, tmp_path):
        with pytest.raises(ValueError):
            emit_run(RankedRun("q", ()), "t", tmp_path / "r")

    def test_bad_tag(self):
        with pytest.raises(ValueError):
            run_lines(RankedRun.from_ids("q", ["a"]), "two words")


class TestPipeline:
    def test_config_validation(self):
        with pytest.raises(ValueError, match="exceeds"):
            PipelineConfig(k=60, N=50)
        with pytest.raises(ValueError):
            PipelineConfig(method="nope")

    def test_toy_run_has_init_list_lines(self, toy):
        cfg = PipelineConfig(corpus=str(toy / "corpus.txt"), queries=str(toy / "queries.txt"),
                             output=str(toy / "run"), N=6, k=2, method="clustranker")
        results, _ = run_pipeline(cfg)
        runs = read_runs(toy / "run")
        for r in results:
            assert len(runs[r.query_id]) == len(r.context.init_list)
        hits = PipelineConfig(**{**cfg.__dict__, "method": "hits", "output": str(toy / "h")})
        run_pipeline(hits)
        other = read_runs(toy / "h")
        assert {q: sorted(r.ids) for q, r in other.items()} == \
            {q: sorted(r.ids) for q, r in runs.items()}

    def test_planted_reports_full_precision(self, tmp_path):
        _planted_files(tmp_path)
        cfg = PipelineConfig(corpus=str(tmp_path / "planted.txt"),
                             queries=str(tmp_path / "planted_q.txt"),
                             qrels=str(tmp_path / "planted_qrels.txt"))
        results, lines = run_pipeline(cfg)
        assert lines[1].split("\t")[1] == "1.0000"
        ctx = results[0].context
        assert optimal_cluster(ctx.clusters, Qrels.read(cfg.qrels), "q1")[1] == 1.0

    def test_report_has_addends(self):
        corpus, query, qrels, _ = planted_fixture()
        r = process_query(query, corpus, PipelineConfig())
        assert r.addends.cluster_term > 0 and r.addends.document_term > 0

    @pytest.mark.parametrize("method", ALL_METHODS)
    def test_every_method_runs(self, method):
        corpus, query, qrels, _ = planted_fixture()
        r = process_query(query, corpus, PipelineConfig(method=method))
        assert 0.0 <= precision_at_k(r.run, qrels, 5) <= 1.0
        assert len(set(r.run.ids)) == len(r.run.ids)

    def test_errors_name_query_and_stage(self):
        corpus, _, _, _ = planted_fixture()
        from clustrank.corpus import Query
        with pytest.raises(PipelineError, match="query zz: retrieve"):
            process_query(Query("zz", ("unknownterm",)), corpus, PipelineConfig())

    def test_method_grids(self):
        cfg = PipelineConfig()
        assert len(method_grid("clustranker", cfg)) == 11 * 7 * 11
        assert len(method_grid("clust-query-gen", cfg)) == 1
        assert method_grid("pr-querysim", cfg).params["delta"] == (4,)
        assert len(method_grid("rm", cfg)) == 6 * 8 * 10
        assert len(method_grid("hits", cfg)) == 7


class TestCLI:
    def _common(self, toy):
        return ["--corpus", str(toy / "corpus.txt"), "--queries", str(toy / "queries.txt"),
                "--N", "6", "--k", "2"]

    def test_index_and_retrieve(self, toy):
        assert main(["index", "--corpus", str(toy / "corpus.txt"), "-o", str(toy / "idx")]) == 0
        assert main(["retrieve", "--index", str(toy / "idx"), "--queries",
                     str(toy / "queries.txt"), "--N", "3", "-o", str(toy / "init")]) == 0
        runs = read_runs(toy / "init")
        assert list(runs) == ["q1", "q2"] and all(len(r) == 3 for r in runs.values())

    def test_rank_clusters_then_eval_composes(self, toy):
        args = self._common(toy)
        assert main(["rank-clusters", *args, "--method", "clustranker", "-o", str(toy / "cr"),
                     "--cluster-dump", str(toy / "cl"), "--graph-dump", str(toy / "g"),
                     "--doc-output", str(toy / "docs")]) == 0
        assert main(["eval", "--run", str(toy / "cr"), "--qrels", str(toy / "qrels.txt"),
                     "--clusters", str(toy / "cl"), "-o", str(toy / "ev")]) == 0
        lines = dict(ln.split("\t", 1) for ln in (toy / "ev").read_text().splitlines())
        qrels = Qrels.read(toy / "qrels.txt")
        clusters = read_cluster_dump(toy / "cl")
        runs = read_runs(toy / "cr")
        for q in ("q1", "q2"):
            want = top_cluster_precision(runs[q], clusters[q], qrels)
            assert lines[q] == f"top-cluster-p\t{want:.4f}"
        edges = (toy / "g").read_text().splitlines()
        assert all(len(e.split("\t")) == 5 for e in edges)

    def test_rank_clusters_from_dump_matches(self, toy):
        args = self._common(toy)
        main(["cluster", *args, "-o", str(toy / "cl")])
        main(["rank-clusters", *args, "-o", str(toy / "a")])
        main(["rank-clusters", *args, "--clusters", str(toy / "cl"), "-o", str(toy / "b")])
        assert (toy / "a").read_bytes() == (toy / "b").read_bytes()

    def test_rerank_and_rm(self, toy):
        args = self._common(toy)
        for method in ("interpolation", "pr-querysim"):
            assert main(["rerank", *args, "--method", method, "-o", str(toy / method)]) == 0
        assert main(["rm", *args[:-2], "--scope", "init_list", "--beta", "ALL",
                     "-o", str(toy / "rm"), "--model-dump", str(toy / "rmd")]) == 0
        assert set(read_runs(toy / "rm")) == {"q1", "q2"}
        assert (toy / "rmd").read_text().startswith("q1\t")

    def test_eval_compare(self, toy):
        args = self._common(toy)
        main(["retrieve", *args[:-2], "-o", str(toy / "init")])
        main(["pipeline", *args, "-o", str(toy / "cr"), "--report", str(toy / "rep")])
        assert main(["eval", "--run", str(toy / "cr"), "--qrels", str(toy / "qrels.txt"),
                     "--compare", str(toy / "init"), "-o", str(toy / "ev")]) == 0
        assert "wilcoxon\tn=" in (toy / "ev").read_text()

    def test_sweep_and_loocv(self, toy):
        args = self._common(toy) + ["--qrels", str(toy / "qrels.txt")]
        assert main(["sweep", *args, "--method", "clust-query-gen+doc-query-gen",
                     "-o", str(toy / "sw")]) == 0
        text = (toy / "sw").read_text()
        assert "lam=0.5\t" in text and "# best" in text
        assert main(["loocv", *args, "--method", "interpolation", "-o", str(toy / "lo")]) == 0
        out = dict(ln.split("\t", 1) for ln in (toy / "lo").read_text().splitlines())
        assert float(out["loocv_mean"]) <= float(out["oracle_mean"].split("\t")[0])

    def test_config_file_and_flag_precedence(self, toy):
        (toy / "cfg").write_text("# settings\nN = 4\nlambda = 0.2\nbeta = ALL\n"
                                 "literal_all_proxies = true\n")
        got = read_config_file(toy / "cfg")
        assert got == {"N": 4, "lam": 0.2, "beta": None, "literal_all_proxies": True}
        main(["retrieve", "--config", str(toy / "cfg"), *self._common(toy)[:4],
              "-o", str(toy / "a")])
        assert all(len(r) == 4 for r in read_runs(toy / "a").values())
        main(["retrieve", "--config", str(toy / "cfg"), *self._common(toy)[:4], "--N", "2",
              "-o", str(toy / "b")])
        assert all(len(r) == 2 for r in read_runs(toy / "b").values())

    def test_unknown_config_key(self, toy):
        (toy / "cfg").write_text("bogus = 1\n")
        with pytest.raises(ValueError, match="bogus"):
            read_config_file(toy / "cfg")

    def test_error_exit_status(self, toy, capsys):
        (toy / "bad_q.txt").write_text("q9\tzzzz\n")
        code = main(["pipeline", "--corpus", str(toy / "corpus.txt"),
                     "--queries", str(toy / "bad_q.txt"), "--N", "6", "--k", "2"])
        assert code == 1
        assert "query q9" in capsys.readouterr().err

    def test_jobs_do_not_change_output(self, tmp_path):
        _planted_files(tmp_path)
        (tmp_path / "multi_q.txt").write_text("q1\talpha beta\nq2\talpha\nq3\tbeta\n")
        base = ["pipeline", "--corpus", str(tmp_path / "planted.txt"),
                "--queries", str(tmp_path / "multi_q.txt")]
        main(base + ["-o", str(tmp_path / "a")])
        main(base + ["--jobs", "3", "-o", str(tmp_path / "b")])
        assert (tmp_path / "a").read_bytes() == (tmp_path / "b").read_bytes()
