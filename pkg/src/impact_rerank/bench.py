"""Single-threaded query latency harness with per-stage breakdown.

Queries are issued one by one; each stage (query encoding, first-stage
retrieval, re-ranking) is bracketed by monotonic-clock reads, so the
per-query total is exactly the sum of its stages. The cut-off sweep
re-runs the sample at each re-ranking depth k and reports latency plus an
optional effectiveness metric per k.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from .bm25 import InvertedIndex, bm25_search
from .impacts import ImpactIndex
from .metrics import Qrels, mrr_at_k
from .query import encode_query
from .rerank import RerankRequest, rerank
from .vocab import Vocabulary

DEFAULT_SWEEP_KS = (0, 10, 20, 50, 100, 200, 500, 1000)
JITTER_TOLERANCE_PCT = 5.0  # declared measurement tolerance for stage sums


@dataclass
class StageStats:
    mean_ms: float
    p95_ms: float


@dataclass
class LatencyBreakdown:
    query_process: StageStats
    retrieval: StageStats
    rerank: StageStats
    total_mean_ms: float  # sum of stage means
    end_to_end_mean_ms: float
    queries: int
    cutoff: int
    jitter_tolerance_pct: float = JITTER_TOLERANCE_PCT

    def as_dict(self) -> dict:
        return {
            "query_process_ms": {"mean": self.query_process.mean_ms, "p95": self.query_process.p95_ms},
            "retrieval_ms": {"mean": self.retrieval.mean_ms, "p95": self.retrieval.p95_ms},
            "rerank_ms": {"mean": self.rerank.mean_ms, "p95": self.rerank.p95_ms},
            "total_mean_ms": self.total_mean_ms,
            "end_to_end_mean_ms": self.end_to_end_mean_ms,
            "queries": self.queries,
            "cutoff": self.cutoff,
            "jitter_tolerance_pct": self.jitter_tolerance_pct,
        }


@dataclass
class SweepRow:
    k: int
    query_process_ms: float
    retrieval_ms: float
    rerank_ms: float
    total_ms: float
    metric_name: str = ""
    metric: float | None = None


@dataclass
class BenchResult:
    breakdown: LatencyBreakdown
    sweep: list[SweepRow] = field(default_factory=list)


def _stage_stats(samples_ms: list[float]) -> StageStats:
    arr = np.asarray(samples_ms)
    return StageStats(mean_ms=float(arr.mean()), p95_ms=float(np.percentile(arr, 95)))


def sample_queries(
    queries: list[tuple[str, str]], sample_size: int, seed: int
) -> list[tuple[str, str]]:
    if len(queries) <= sample_size:
        return list(queries)
    rng = np.random.default_rng(seed)
    picks = rng.choice(len(queries), size=sample_size, replace=False)
    return [queries[i] for i in picks]


def _issue(
    queries: list[tuple[str, str]],
    vocab: Vocabulary,
    stopword_ids: set[int],
    index: InvertedIndex,
    impacts: ImpactIndex,
    cutoff: int,
) -> tuple[list[float], list[float], list[float], dict[str, list[tuple[str, float]]]]:
    encode_ms: list[float] = []
    search_ms: list[float] = []
    rerank_ms: list[float] = []
    runs: dict[str, list[tuple[str, float]]] = {}
    for qid, text in queries:
        t0 = time.perf_counter()
        vector = encode_query(text, vocab, stopword_ids)
        t1 = time.perf_counter()
        pool_k = cutoff if cutoff > 0 else 1000
        candidates = bm25_search(index, vector, pool_k) if vector else []
        t2 = time.perf_counter()
        if cutoff > 0 and candidates:
            final = rerank(RerankRequest(query=vector, candidates=candidates, cutoff=cutoff), impacts)
        else:
            final = candidates
        t3 = time.perf_counter()
        encode_ms.append((t1 - t0) * 1e3)
        search_ms.append((t2 - t1) * 1e3)
        rerank_ms.append((t3 - t2) * 1e3)
        runs[qid] = final
    return encode_ms, search_ms, rerank_ms, runs


def run_bench(
    queries: list[tuple[str, str]],
    vocab: Vocabulary,
    stopword_ids: set[int],
    index: InvertedIndex,
    impacts: ImpactIndex,
    cutoff: int = 1000,
    sample_size: int = 200,
    seed: int = 0,
    sweep_ks: tuple[int, ...] = DEFAULT_SWEEP_KS,
    qrels: Qrels | None = None,
) -> BenchResult:
    sample = sample_queries(queries, sample_size, seed)
    encode_ms, search_ms, rr_ms, _ = _issue(sample, vocab, stopword_ids, index, impacts, cutoff)
    stage_means = (
        float(np.mean(encode_ms)),
        float(np.mean(search_ms)),
        float(np.mean(rr_ms)),
    )
    totals = [e + s + r for e, s, r in zip(encode_ms, search_ms, rr_ms)]
    breakdown = LatencyBreakdown(
        query_process=_stage_stats(encode_ms),
        retrieval=_stage_stats(search_ms),
        rerank=_stage_stats(rr_ms),
        total_mean_ms=sum(stage_means),
        end_to_end_mean_ms=float(np.mean(totals)),
        queries=len(sample),
        cutoff=cutoff,
    )
    sweep: list[SweepRow] = []
    for k in sweep_ks:
        e_ms, s_ms, r_ms, runs = _issue(sample, vocab, stopword_ids, index, impacts, k)
        row = SweepRow(
            k=k,
            query_process_ms=float(np.mean(e_ms)),
            retrieval_ms=float(np.mean(s_ms)),
            rerank_ms=float(np.mean(r_ms)),
            total_ms=float(np.mean([a + b + c for a, b, c in zip(e_ms, s_ms, r_ms)])),
        )
        if qrels is not None:
            row.metric_name = "mrr@10"
            row.metric = mrr_at_k(runs, qrels, k=10).mean
        sweep.append(row)
    return BenchResult(breakdown=breakdown, sweep=sweep)


def sweep_csv_lines(sweep: list[SweepRow]) -> list[str]:
    lines = ["k,query_process_ms,retrieval_ms,rerank_ms,total_ms,metric_name,metric"]
    for row in sweep:
        metric = "" if row.metric is None else f"{row.metric:.6f}"
        lines.append(
            f"{row.k},{row.query_process_ms:.4f},{row.retrieval_ms:.4f},"
            f"{row.rerank_ms:.4f},{row.total_ms:.4f},{row.metric_name},{metric}"
        )
    return lines
