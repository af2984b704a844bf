"""First-stage retrieval: inverted index with Okapi BM25 scoring.

Scoring follows the Lucene variant: per query term,

    idf(t) = ln(1 + (N - df + 0.5) / (df + 0.5))
    score_t(d) = idf(t) * tf * (k1 + 1) / (tf + k1 * (1 - b + b * dl/avgdl))

and a query term occurring c times contributes c copies of its term score.
The +1 inside the log keeps every score non-negative. Evaluation is
exhaustive over all matching passages (no pruning); the top k survive with
ties broken by ascending passage id.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import binio
from .errors import CorruptIndexError, DuplicatePassageError, VocabMismatchError
from .query import SparseTermVector
from .tokenizer import TokenSequence

DEFAULT_K1 = 0.9
DEFAULT_B = 0.4

_MAGIC = b"BIDX"
_TAIL = b"XDIB"
_VERSION = 1

RankedList = list[tuple[str, float]]


@dataclass
class InvertedIndex:
    postings: dict[int, tuple[np.ndarray, np.ndarray]]  # token id -> (doc ids, tfs)
    doc_lengths: np.ndarray  # float64, indexed by internal doc id
    pids: list[str]  # internal doc id -> external passage id
    avgdl: float
    k1: float
    b: float
    vocab_checksum: int

    @property
    def num_passages(self) -> int:
        return len(self.pids)

    def internal_id(self, pid: str) -> int | None:
        if not hasattr(self, "_pid_index"):
            self._pid_index = {pid: i for i, pid in enumerate(self.pids)}
        return self._pid_index.get(pid)


def build_inverted_index(
    collection,
    k1: float = DEFAULT_K1,
    b: float = DEFAULT_B,
    vocab_checksum: int = 0,
) -> InvertedIndex:
    """Build an index from (passage id, TokenSequence) pairs.

    Internal doc ids follow input order; posting lists come out sorted by
    doc id as a consequence.
    """
    if not k1 > 0:
        raise ValueError("k1 must be > 0")
    if not 0 <= b <= 1:
        raise ValueError("b must be in [0, 1]")
    raw: dict[int, tuple[list[int], list[int]]] = {}
    pids: list[str] = []
    seen: set[str] = set()
    lengths: list[int] = []
    for pid, tokens in collection:
        pid = str(pid)
        if pid in seen:
            raise DuplicatePassageError(f"passage id {pid!r} appears twice")
        seen.add(pid)
        doc_id = len(pids)
        pids.append(pid)
        lengths.append(len(tokens))
        counts: dict[int, int] = {}
        for token_id in tokens:
            counts[token_id] = counts.get(token_id, 0) + 1
        for token_id, tf in counts.items():
            entry = raw.setdefault(token_id, ([], []))
            entry[0].append(doc_id)
            entry[1].append(tf)
    if not pids:
        raise ValueError("empty collection")
    postings = {
        token_id: (np.asarray(docs, dtype=np.int64), np.asarray(tfs, dtype=np.int64))
        for token_id, (docs, tfs) in raw.items()
    }
    doc_lengths = np.asarray(lengths, dtype=np.float64)
    return InvertedIndex(
        postings=postings,
        doc_lengths=doc_lengths,
        pids=pids,
        avgdl=float(doc_lengths.mean()),
        k1=k1,
        b=b,
        vocab_checksum=vocab_checksum,
    )


def idf(df: int, n_docs: int) -> float:
    return float(np.log(1.0 + (n_docs - df + 0.5) / (df + 0.5)))


def bm25_search(index: InvertedIndex, query: SparseTermVector, k: int) -> RankedList:
    """Exhaustively score every passage matching the query; return the top k."""
    if k < 1:
        raise ValueError("k must be >= 1")
    if not query:
        return []
    n = index.num_passages
    k1, b = index.k1, index.b
    avgdl = index.avgdl
    if avgdl > 0:
        norm = k1 * (1.0 - b + b * index.doc_lengths / avgdl)
    else:
        norm = np.full(n, k1)
    scores = np.zeros(n, dtype=np.float64)
    touched: list[np.ndarray] = []
    for token_id, count in query.items():
        posting = index.postings.get(token_id)
        if posting is None:
            continue
        docs, tfs = posting
        tf = tfs.astype(np.float64)
        term = idf(len(docs), n) * tf * (k1 + 1.0) / (tf + norm[docs])
        scores[docs] += count * term
        touched.append(docs)
    if not touched:
        return []
    candidates = np.unique(np.concatenate(touched))
    cand_scores = scores[candidates]
    # Descending score, ties by ascending internal id (== input order).
    order = np.lexsort((candidates, -cand_scores))[:k]
    return [(index.pids[candidates[i]], float(cand_scores[i])) for i in order]


def save_index(index: InvertedIndex, path: str | Path) -> None:
    with open(path, "wb") as fh:
        fh.write(_MAGIC)
        binio.write_u32(fh, _VERSION)
        binio.write_u64(fh, index.vocab_checksum)
        binio.write_f64(fh, index.k1)
        binio.write_f64(fh, index.b)
        binio.write_u64(fh, index.num_passages)
        binio.write_f64(fh, index.avgdl)
        for pid, length in zip(index.pids, index.doc_lengths):
            binio.write_str(fh, pid)
            binio.write_varint(fh, int(length))
        binio.write_u64(fh, len(index.postings))
        for token_id in sorted(index.postings):
            docs, tfs = index.postings[token_id]
            binio.write_varint(fh, token_id)
            binio.write_varint(fh, len(docs))
            prev = 0
            for doc_id, tf in zip(docs.tolist(), tfs.tolist()):
                binio.write_varint(fh, doc_id - prev)
                binio.write_varint(fh, tf)
                prev = doc_id
        fh.write(_TAIL)


def load_index(path: str | Path, expected_checksum: int | None = None) -> InvertedIndex:
    with open(path, "rb") as fh:
        binio.expect_magic(fh, _MAGIC, "bm25 index")
        version = binio.read_u32(fh)
        if version != _VERSION:
            raise CorruptIndexError(f"unsupported bm25 index version {version}")
        checksum = binio.read_u64(fh)
        if expected_checksum is not None and checksum != expected_checksum:
            raise VocabMismatchError(
                f"index vocabulary checksum {checksum:016x} != active {expected_checksum:016x}"
            )
        k1 = binio.read_f64(fh)
        b = binio.read_f64(fh)
        n = binio.read_u64(fh)
        avgdl = binio.read_f64(fh)
        pids = []
        lengths = np.empty(n, dtype=np.float64)
        for i in range(n):
            pids.append(binio.read_str(fh))
            lengths[i] = binio.read_varint(fh)
        postings: dict[int, tuple[np.ndarray, np.ndarray]] = {}
        for _ in range(binio.read_u64(fh)):
            token_id = binio.read_varint(fh)
            df = binio.read_varint(fh)
            docs = np.empty(df, dtype=np.int64)
            tfs = np.empty(df, dtype=np.int64)
            prev = 0
            for j in range(df):
                prev += binio.read_varint(fh)
                docs[j] = prev
                tfs[j] = binio.read_varint(fh)
            postings[token_id] = (docs, tfs)
        binio.expect_magic(fh, _TAIL, "bm25 index tail")
    return InvertedIndex(
        postings=postings,
        doc_lengths=lengths,
        pids=pids,
        avgdl=avgdl,
        k1=k1,
        b=b,
        vocab_checksum=checksum,
    )
