"""Ranking effectiveness metrics over TREC-format runs and qrels.

Conventions follow trec_eval: queries without any relevant judgment are
excluded from means; MAP divides by the number of relevant passages in the
qrels (unretrieved relevants contribute zero precision mass); nDCG of a
query whose ideal gain is zero is defined as 0. MAP binarizes at a
configurable grade threshold (1 for binary-style qrels, 2 is the deep
graded convention).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path

from scipy import stats as scipy_stats

Qrels = dict[str, dict[str, int]]
Run = dict[str, list[tuple[str, float]]]


@dataclass
class MetricReport:
    name: str
    per_query: dict[str, float]
    mean: float

    @classmethod
    def from_values(cls, name: str, per_query: dict[str, float]) -> "MetricReport":
        mean = sum(per_query.values()) / len(per_query) if per_query else 0.0
        return cls(name=name, per_query=per_query, mean=mean)


def load_qrels(path: str | Path) -> Qrels:
    """Read `qid 0 pid grade` lines; negative grades clamp to 0."""
    qrels: Qrels = {}
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            parts = line.split()
            if not parts:
                continue
            if len(parts) < 4:
                raise ValueError(f"bad qrels line: {line!r}")
            qid, pid, grade = parts[0], parts[2], int(parts[3])
            qrels.setdefault(qid, {})[pid] = max(grade, 0)
    return qrels


def _relevant_queries(qrels: Qrels, threshold: int) -> list[str]:
    return [qid for qid, judged in qrels.items() if any(g >= threshold for g in judged.values())]


def mrr_at_k(run: Run, qrels: Qrels, k: int = 10, threshold: int = 1) -> MetricReport:
    """Reciprocal rank of the first passage with grade >= threshold in the top k."""
    per_query: dict[str, float] = {}
    for qid in _relevant_queries(qrels, threshold):
        judged = qrels[qid]
        value = 0.0
        for rank, (pid, _) in enumerate(run.get(qid, [])[:k], start=1):
            if judged.get(pid, 0) >= threshold:
                value = 1.0 / rank
                break
        per_query[qid] = value
    return MetricReport.from_values(f"mrr@{k}", per_query)


def ndcg_of_ranking(gains: list[int], ideal_gains: list[int], k: int) -> float:
    """nDCG@k from the run's gains (rank order) and all judged gains."""
    dcg = sum((2**g - 1) / math.log2(rank + 1) for rank, g in enumerate(gains[:k], start=1))
    ideal = sorted(ideal_gains, reverse=True)
    idcg = sum((2**g - 1) / math.log2(rank + 1) for rank, g in enumerate(ideal[:k], start=1))
    if idcg == 0:
        return 0.0
    return dcg / idcg


def ndcg_at_k(run: Run, qrels: Qrels, k: int = 10) -> MetricReport:
    per_query: dict[str, float] = {}
    for qid in _relevant_queries(qrels, threshold=1):
        judged = qrels[qid]
        gains = [judged.get(pid, 0) for pid, _ in run.get(qid, [])]
        per_query[qid] = ndcg_of_ranking(gains, list(judged.values()), k)
    return MetricReport.from_values(f"ndcg@{k}", per_query)


def mean_average_precision(run: Run, qrels: Qrels, threshold: int = 1) -> MetricReport:
    per_query: dict[str, float] = {}
    for qid in _relevant_queries(qrels, threshold):
        judged = qrels[qid]
        total_relevant = sum(1 for g in judged.values() if g >= threshold)
        hits = 0
        precision_mass = 0.0
        for rank, (pid, _) in enumerate(run.get(qid, []), start=1):
            if judged.get(pid, 0) >= threshold:
                hits += 1
                precision_mass += hits / rank
        per_query[qid] = precision_mass / total_relevant
    return MetricReport.from_values("map", per_query)


def paired_ttest(report_a: MetricReport, report_b: MetricReport, comparisons: int = 1) -> float:
    """Two-tailed paired t-test p-value over common queries.

    Zero-variance guards: identical samples report p = 1; a constant
    non-zero difference reports p = 0. Bonferroni correction multiplies by
    the declared number of comparisons, capped at 1.
    """
    common = sorted(set(report_a.per_query) & set(report_b.per_query))
    diffs = [report_a.per_query[q] - report_b.per_query[q] for q in common]
    n = len(diffs)
    if n < 2:
        return 1.0
    mean = sum(diffs) / n
    var = sum((d - mean) ** 2 for d in diffs) / (n - 1)
    if var == 0.0:
        p = 1.0 if mean == 0.0 else 0.0
    else:
        t = mean / math.sqrt(var / n)
        p = 2.0 * float(scipy_stats.t.sf(abs(t), df=n - 1))
    return min(1.0, p * comparisons)
