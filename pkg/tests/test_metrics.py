import numpy as np
import pytest
from scipy import stats as scipy_stats

from impact_rerank.metrics import (
    MetricReport,
    load_qrels,
    mean_average_precision,
    mrr_at_k,
    ndcg_at_k,
    ndcg_of_ranking,
    paired_ttest,
)

from oracles import ap_scan, mrr_scan, ndcg_scan


def random_eval_pair(rng, max_queries=6, max_docs=25):
    n_queries = int(rng.integers(1, max_queries + 1))
    run = {}
    qrels = {}
    for q in range(n_queries):
        qid = f"q{q}"
        docs = [f"d{i}" for i in range(int(rng.integers(1, max_docs + 1)))]
        order = list(rng.permutation(len(docs)))
        run[qid] = [(docs[i], float(len(docs) - r)) for r, i in enumerate(order)]
        judged = {}
        for doc in docs:
            if rng.random() < 0.4:
                judged[doc] = int(rng.integers(0, 4))
        if rng.random() < 0.3:
            judged[f"unretrieved{q}"] = int(rng.integers(1, 4))
        if judged:
            qrels[qid] = judged
    return run, qrels


class TestMrr:
    def test_first_relevant_at_rank_three(self):
        run = {"q": [("a", 3.0), ("b", 2.0), ("c", 1.0)]}
        qrels = {"q": {"c": 1}}
        assert mrr_at_k(run, qrels).mean == pytest.approx(1 / 3)

    def test_no_relevant_in_top_k(self):
        run = {"q": [(f"d{i}", float(20 - i)) for i in range(20)]}
        qrels = {"q": {"d15": 1}}
        assert mrr_at_k(run, qrels, k=10).mean == 0.0

    def test_matches_scan_oracle(self):
        rng = np.random.default_rng(41)
        for _ in range(100):
            run, qrels = random_eval_pair(rng)
            report = mrr_at_k(run, qrels, k=10)
            for qid, value in report.per_query.items():
                ranking = [pid for pid, _ in run.get(qid, [])]
                assert value == pytest.approx(mrr_scan(ranking, qrels[qid], 10), abs=1e-15)


class TestNdcg:
    def test_ideal_ordering_scores_one(self):
        qrels = {"q": {"a": 3, "b": 2, "c": 1}}
        run = {"q": [("a", 3.0), ("b", 2.0), ("c", 1.0)]}
        assert ndcg_at_k(run, qrels).mean == 1.0

    def test_all_zero_grades_define_zero(self):
        assert ndcg_of_ranking([0, 0], [0, 0], k=10) == 0.0

    def test_hand_computed_five_docs(self):
        judged = {"a": 3, "b": 0, "c": 2, "d": 1, "e": 0}
        run = {"q": [("b", 5.0), ("a", 4.0), ("d", 3.0), ("c", 2.0), ("e", 1.0)]}
        dcg = 0 + 7 / np.log2(3) + 1 / np.log2(4) + 3 / np.log2(5) + 0
        idcg = 7 / np.log2(2) + 3 / np.log2(3) + 1 / np.log2(4)
        expected = dcg / idcg
        assert ndcg_at_k(run, {"q": judged}, k=5).mean == pytest.approx(expected)

    def test_matches_scan_oracle(self):
        rng = np.random.default_rng(42)
        for _ in range(100):
            run, qrels = random_eval_pair(rng)
            report = ndcg_at_k(run, qrels, k=10)
            for qid, value in report.per_query.items():
                ranking = [pid for pid, _ in run.get(qid, [])]
                assert value == pytest.approx(ndcg_scan(ranking, qrels[qid], 10), abs=1e-12)


class TestMap:
    def test_single_relevant_at_rank_one(self):
        run = {"q": [("a", 2.0), ("b", 1.0)]}
        assert mean_average_precision(run, {"q": {"a": 1}}).mean == 1.0

    def test_unretrieved_relevant_costs_mass(self):
        run = {"q": [("a", 2.0)]}
        qrels = {"q": {"a": 1, "ghost": 1}}
        assert mean_average_precision(run, qrels).mean == pytest.approx(0.5)

    def test_threshold_binarization(self):
        run = {"q": [("a", 2.0), ("b", 1.0)]}
        qrels = {"q": {"a": 1, "b": 3}}
        strict = mean_average_precision(run, qrels, threshold=2)
        assert strict.mean == pytest.approx(0.5)  # only b counts, found at rank 2

    def test_matches_scan_oracle(self):
        rng = np.random.default_rng(43)
        for _ in range(100):
            run, qrels = random_eval_pair(rng)
            report = mean_average_precision(run, qrels)
            for qid, value in report.per_query.items():
                ranking = [pid for pid, _ in run.get(qid, [])]
                expected = ap_scan(ranking, qrels[qid])
                assert expected is not None
                assert value == pytest.approx(expected, abs=1e-12)


class TestReportShape:
    def test_queries_without_relevant_are_excluded(self):
        run = {"q1": [("a", 1.0)], "q2": [("b", 1.0)]}
        qrels = {"q1": {"a": 1}, "q2": {"b": 0}}
        report = mrr_at_k(run, qrels)
        assert set(report.per_query) == {"q1"}

    def test_mean_is_arithmetic_mean(self):
        report = MetricReport.from_values("x", {"a": 0.25, "b": 0.75})
        assert report.mean == pytest.approx(0.5)

    def test_query_permutation_leaves_mean_unchanged(self):
        rng = np.random.default_rng(44)
        run, qrels = random_eval_pair(rng, max_queries=6)
        base = ndcg_at_k(run, qrels)
        shuffled_qrels = dict(reversed(list(qrels.items())))
        shuffled = ndcg_at_k(run, shuffled_qrels)
        assert shuffled.mean == pytest.approx(base.mean)
        assert shuffled.per_query == base.per_query

    def test_values_bounded(self):
        rng = np.random.default_rng(45)
        for _ in range(50):
            run, qrels = random_eval_pair(rng)
            for metric in (mrr_at_k(run, qrels), ndcg_at_k(run, qrels), mean_average_precision(run, qrels)):
                assert all(0.0 <= v <= 1.0 for v in metric.per_query.values())
                assert 0.0 <= metric.mean <= 1.0

    def test_run_line_order_irrelevant_given_ranks(self, tmp_path):
        from impact_rerank.rerank import read_trec_run

        a, b = tmp_path / "a.run", tmp_path / "b.run"
        lines = ["q Q0 d1 1 3.0 t", "q Q0 d2 2 2.0 t", "q Q0 d3 3 1.0 t"]
        a.write_text("\n".join(lines) + "\n")
        b.write_text("\n".join(reversed(lines)) + "\n")
        qrels = {"q": {"d2": 1}}
        assert mrr_at_k(read_trec_run(a), qrels).mean == mrr_at_k(read_trec_run(b), qrels).mean


class TestPairedTTest:
    def _report(self, values):
        return MetricReport.from_values("x", {f"q{i}": v for i, v in enumerate(values)})

    def test_identical_reports_give_p_one(self):
        a = self._report([0.2, 0.4, 0.6])
        assert paired_ttest(a, a) == 1.0

    def test_constant_nonzero_difference_gives_p_zero(self):
        # Dyadic values keep the pairwise differences exactly constant.
        a = self._report([0.25, 0.5, 0.75])
        b = self._report([0.125, 0.375, 0.625])
        assert paired_ttest(a, b) == 0.0

    def test_matches_scipy_reference(self):
        rng = np.random.default_rng(46)
        for _ in range(50):
            n = int(rng.integers(3, 30))
            xs = rng.uniform(0, 1, size=n)
            ys = xs + rng.normal(0, 0.1, size=n)
            a = self._report(xs)
            b = self._report(ys)
            expected = scipy_stats.ttest_rel(xs, ys).pvalue
            assert paired_ttest(a, b) == pytest.approx(expected, rel=1e-10)

    def test_bonferroni_caps_at_one(self):
        rng = np.random.default_rng(47)
        xs = rng.uniform(0, 1, size=10)
        ys = xs + rng.normal(0, 0.5, size=10)
        a, b = self._report(xs), self._report(ys)
        assert paired_ttest(a, b, comparisons=1000) == 1.0
        assert paired_ttest(a, b, comparisons=2) == pytest.approx(
            min(1.0, 2 * paired_ttest(a, b)), rel=1e-12
        )


class TestQrelsIO:
    def test_parse_and_clamp(self, tmp_path):
        path = tmp_path / "qrels.txt"
        path.write_text("q1 0 d1 2\nq1 0 d2 -1\nq2 0 d9 1\n")
        qrels = load_qrels(path)
        assert qrels == {"q1": {"d1": 2, "d2": 0}, "q2": {"d9": 1}}

    def test_bad_line_rejected(self, tmp_path):
        path = tmp_path / "qrels.txt"
        path.write_text("q1 0 d1\n")
        with pytest.raises(ValueError):
            load_qrels(path)
