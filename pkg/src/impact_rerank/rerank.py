"""Second-stage scoring: contextualized exact term matching.

A candidate's score is the sum, over the query's unique tokens, of the
query-side count times the stored max weight of that token in the passage;
tokens absent from the passage contribute nothing. Weights live in the
impact index, so scoring is pure hashtable lookups — no model inference.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from pathlib import Path

from .bm25 import RankedList
from .errors import MissingPassageError
from .impacts import ImpactIndex, PassageImpactEntry
from .query import SparseTermVector

logger = logging.getLogger(__name__)


@dataclass
class RerankRequest:
    query: SparseTermVector
    candidates: RankedList  # first-stage order, best first
    cutoff: int  # number of candidates to rescore

    def __post_init__(self) -> None:
        if self.cutoff < 1:
            raise ValueError("cutoff must be >= 1")


def score(query: SparseTermVector, entry: PassageImpactEntry) -> float:
    """Exact-term-matching score of one passage against query term counts.

    Accumulates in float64 over 32-bit stored weights. Zero iff no query
    token carries positive weight in the entry (an indexed token whose
    stored weight is exactly 0 also contributes nothing).
    """
    weights = entry.weights
    total = 0.0
    for token_id, count in query.items():
        w = weights.get(token_id)
        if w is not None:
            total += count * w
    return total


def rerank(request: RerankRequest, index: ImpactIndex, strict: bool = False) -> RankedList:
    """Rescore the top-cutoff candidates and sort them by the new score.

    Candidates beyond the cutoff are dropped. Ties keep first-stage order
    (stable sort). Candidates missing from the index are skipped with a
    warning, or raise when ``strict``.
    """
    head = request.candidates[: request.cutoff]
    scored: list[tuple[str, float]] = []
    for pid, _ in head:
        entry = index.get(pid)
        if entry is None:
            if strict:
                raise MissingPassageError(pid)
            logger.warning("passage %s missing from impact index; skipped", pid)
            continue
        scored.append((pid, score(request.query, entry)))
    scored.sort(key=lambda item: -item[1])  # stable: ties keep input order
    return scored


def write_trec_run(path: str | Path, runs: dict[str, RankedList], tag: str) -> None:
    """Write `qid Q0 pid rank score tag` lines, one ranking per query."""
    with open(path, "w", encoding="utf-8") as fh:
        for qid, ranking in runs.items():
            for rank, (pid, value) in enumerate(ranking, start=1):
                fh.write(f"{qid} Q0 {pid} {rank} {value:.6f} {tag}\n")


def read_trec_run(path: str | Path) -> dict[str, list[tuple[str, float]]]:
    """Read a TREC run file into {qid: [(pid, score)] ordered by rank}."""
    rows: dict[str, list[tuple[int, str, float]]] = {}
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            parts = line.split()
            if not parts:
                continue
            if len(parts) < 6:
                raise ValueError(f"bad run line: {line!r}")
            qid, _, pid, rank, value = parts[0], parts[1], parts[2], int(parts[3]), float(parts[4])
            rows.setdefault(qid, []).append((rank, pid, value))
    return {
        qid: [(pid, value) for _, pid, value in sorted(entries)]
        for qid, entries in rows.items()
    }
