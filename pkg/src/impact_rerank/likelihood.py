"""Vocabulary-wide token likelihood scores per passage.

Passage expansion only needs an ordering over the vocabulary, so providers
return raw scores, not normalized probabilities. Two providers exist:

* ``CooccurrenceProvider`` — deterministic desk-scale scorer: a token's
  score is log(1 + total document-level co-occurrence count with the
  passage's tokens) over a fitted corpus, with add-one smoothing inside
  the log and stopword columns excluded (they stay at the smoothing
  floor). An unfitted/empty corpus therefore yields a uniform vector.
* ``FileLikelihoodProvider`` — reads precomputed dense records from a
  binary file (magic "LKH1"), as emitted by the external model exporter.
"""

from __future__ import annotations

from pathlib import Path
from typing import Iterable, Protocol

import numpy as np

from . import binio
from .errors import CorruptIndexError, MissingPassageError
from .tokenizer import TokenSequence

_MAGIC = b"LKH1"

LikelihoodDistribution = np.ndarray  # dense (V,) float vector


class LikelihoodProvider(Protocol):
    vocab_size: int

    def distribution(self, pid: str, tokens: TokenSequence) -> LikelihoodDistribution: ...


def likelihood_distribution(
    passage: TokenSequence, provider: LikelihoodProvider, pid: str = ""
) -> LikelihoodDistribution:
    """Fetch and validate a dense length-V score vector for one passage."""
    scores = provider.distribution(pid, passage)
    if scores.shape != (provider.vocab_size,):
        raise ValueError(
            f"distribution length {scores.shape} != vocabulary size {provider.vocab_size}"
        )
    if not np.all(np.isfinite(scores)):
        raise ValueError("distribution contains non-finite values")
    return scores


class CooccurrenceProvider:
    def __init__(self, vocab_size: int, stopword_ids: set[int] | None = None) -> None:
        self.vocab_size = vocab_size
        self.stopword_ids = stopword_ids or set()
        self._by_context: dict[int, dict[int, int]] = {}

    def fit(self, corpus: Iterable[TokenSequence]) -> "CooccurrenceProvider":
        """Count document-level co-occurrences between distinct non-stopword tokens."""
        for tokens in corpus:
            unique = sorted(set(tokens) - self.stopword_ids)
            for context in unique:
                row = self._by_context.setdefault(context, {})
                for target in unique:
                    if target != context:
                        row[target] = row.get(target, 0) + 1
        return self

    def distribution(self, pid: str, tokens: TokenSequence) -> LikelihoodDistribution:
        counts = np.zeros(self.vocab_size)
        for context in set(tokens) - self.stopword_ids:
            row = self._by_context.get(context)
            if row:
                for target, count in row.items():
                    counts[target] += count
        return np.log1p(counts)


class FileLikelihoodProvider:
    """Random access into an "LKH1" likelihood file.

    Layout (little-endian): magic, V u32, record count u64, then per
    record: pid length u32, pid utf-8 bytes, V float32 scores.
    """

    def __init__(self, path: str | Path) -> None:
        self.path = Path(path)
        self._offsets: dict[str, int] = {}
        file_size = self.path.stat().st_size
        with open(self.path, "rb") as fh:
            binio.expect_magic(fh, _MAGIC, "likelihood file")
            self.vocab_size = binio.read_u32(fh)
            count = binio.read_u64(fh)
            for _ in range(count):
                pid_len = binio.read_u32(fh)
                pid = binio.read_exact(fh, pid_len).decode("utf-8")
                if pid in self._offsets:
                    raise CorruptIndexError(f"duplicate pid {pid!r} in likelihood file")
                offset = fh.tell()
                if offset + 4 * self.vocab_size > file_size:
                    raise CorruptIndexError(f"likelihood record for {pid!r} is truncated")
                self._offsets[pid] = offset
                fh.seek(4 * self.vocab_size, 1)

    @property
    def num_passages(self) -> int:
        return len(self._offsets)

    def distribution(self, pid: str, tokens: TokenSequence = ()) -> LikelihoodDistribution:
        offset = self._offsets.get(str(pid))
        if offset is None:
            raise MissingPassageError(pid)
        with open(self.path, "rb") as fh:
            fh.seek(offset)
            data = binio.read_exact(fh, 4 * self.vocab_size)
        return np.frombuffer(data, dtype="<f4").astype(np.float64)


def write_likelihood_file(
    path: str | Path, vocab_size: int, records: Iterable[tuple[str, np.ndarray]]
) -> int:
    """Write an "LKH1" file; returns the record count."""
    import io
    import os

    buffer_path = str(path) + ".tmp"
    count = 0
    with open(buffer_path, "wb") as fh:
        fh.write(_MAGIC)
        binio.write_u32(fh, vocab_size)
        binio.write_u64(fh, 0)  # patched below
        for pid, scores in records:
            if scores.shape != (vocab_size,):
                raise ValueError(f"record for {pid!r} has length {scores.shape}")
            data = pid.encode("utf-8")
            binio.write_u32(fh, len(data))
            fh.write(data)
            fh.write(np.ascontiguousarray(scores, dtype="<f4").tobytes())
            count += 1
        fh.seek(len(_MAGIC) + 4, io.SEEK_SET)
        binio.write_u64(fh, count)
    os.replace(buffer_path, path)
    return count
