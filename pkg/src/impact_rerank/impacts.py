"""Per-passage impact index: max contextualized weight per unique token.

The index is the only structure the re-ranking scorer reads at query time.
Weights are stored as 32-bit floats; per passage, duplicate token ids in
the input stream collapse to their maximum. Persisted files carry the
vocabulary checksum and reject loading under a different vocabulary.

Binary layout (little-endian), magic "IMP2":

    header   magic, version u32, vocab checksum u64, passage count u64,
             model-id string, timestamp u64
    records  per passage: pid string, posting count u32,
             (token-id varint, weight f32) sorted by token id
    tail     offset table (u64 per record), offset-table position u64,
             tail magic "2PMI"

The offset table gives O(1) record access without parsing the whole file;
string pids map to internal 64-bit ids by record ordinal.
"""

from __future__ import annotations

import os
import struct
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Iterator

import numpy as np

from . import binio
from .errors import (
    CorruptIndexError,
    DuplicatePassageError,
    MissingPassageError,
    NegativeWeightError,
    VocabMismatchError,
)

_MAGIC = b"IMP2"
_TAIL = b"2PMI"
_VERSION = 1

WeightStream = Iterable[tuple[str, Iterable[tuple[int, float]]]]


def _f32(value: float) -> float:
    # Stored precision is 32-bit; round once at ingest so that in-memory
    # scoring and the persisted file agree bit for bit.
    return float(np.float32(value))


@dataclass
class PassageImpactEntry:
    pid: str
    weights: dict[int, float]  # token id -> max weight, insertion-sorted by id

    @property
    def postings(self) -> list[tuple[int, float]]:
        return list(self.weights.items())


@dataclass
class ImpactIndex:
    entries: dict[str, PassageImpactEntry]
    vocab_checksum: int
    model_id: str = ""
    timestamp: int = 0

    @property
    def num_passages(self) -> int:
        return len(self.entries)

    def get(self, pid: str) -> PassageImpactEntry | None:
        return self.entries.get(str(pid))

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, ImpactIndex):
            return NotImplemented
        return (
            self.vocab_checksum == other.vocab_checksum
            and self.model_id == other.model_id
            and self.timestamp == other.timestamp
            and list(self.entries) == list(other.entries)
            and all(
                self.entries[pid].weights == other.entries[pid].weights
                for pid in self.entries
            )
        )


def collapse_weights(pairs: Iterable[tuple[int, float]]) -> dict[int, float]:
    """Max-collapse (token id, weight) pairs into a sorted-by-id dict."""
    best: dict[int, float] = {}
    for token_id, weight in pairs:
        weight = _f32(weight)
        if weight < 0:
            raise NegativeWeightError(f"negative weight {weight} for token {token_id}")
        prev = best.get(token_id)
        if prev is None or weight > prev:
            best[token_id] = weight
    return dict(sorted(best.items()))


def build_impact_index(
    weights: WeightStream,
    vocab_checksum: int = 0,
    model_id: str = "",
    timestamp: int | None = None,
) -> ImpactIndex:
    """Build from a (passage id, [(token id, weight), ...]) stream.

    The timestamp defaults to SOURCE_DATE_EPOCH (or 0) so that rebuilding
    from identical inputs yields a byte-identical file.
    """
    if timestamp is None:
        timestamp = int(os.environ.get("SOURCE_DATE_EPOCH", "0"))
    entries: dict[str, PassageImpactEntry] = {}
    for pid, pairs in weights:
        pid = str(pid)
        if pid in entries:
            raise DuplicatePassageError(f"passage id {pid!r} appears twice")
        entries[pid] = PassageImpactEntry(pid=pid, weights=collapse_weights(pairs))
    return ImpactIndex(
        entries=entries,
        vocab_checksum=vocab_checksum,
        model_id=model_id,
        timestamp=timestamp,
    )


def lookup(index: ImpactIndex, pid: str, token_id: int) -> float | None:
    """Stored weight of a token in a passage; None when not indexed."""
    entry = index.get(pid)
    if entry is None:
        raise MissingPassageError(pid)
    return entry.weights.get(token_id)


def serialize(index: ImpactIndex, path: str | Path) -> None:
    with open(path, "wb") as fh:
        fh.write(_MAGIC)
        binio.write_u32(fh, _VERSION)
        binio.write_u64(fh, index.vocab_checksum)
        binio.write_u64(fh, index.num_passages)
        binio.write_str(fh, index.model_id)
        binio.write_u64(fh, index.timestamp)
        offsets: list[int] = []
        for entry in index.entries.values():
            offsets.append(fh.tell())
            binio.write_str(fh, entry.pid)
            binio.write_u32(fh, len(entry.weights))
            for token_id, weight in entry.weights.items():
                binio.write_varint(fh, token_id)
                binio.write_f32(fh, weight)
        table_pos = fh.tell()
        if offsets:
            fh.write(struct.pack(f"<{len(offsets)}Q", *offsets))
        binio.write_u64(fh, table_pos)
        fh.write(_TAIL)


def deserialize(path: str | Path, expected_checksum: int | None = None) -> ImpactIndex:
    with open(path, "rb") as fh:
        binio.expect_magic(fh, _MAGIC, "impact index")
        version = binio.read_u32(fh)
        if version != _VERSION:
            raise CorruptIndexError(f"unsupported impact index version {version}")
        checksum = binio.read_u64(fh)
        if expected_checksum is not None and checksum != expected_checksum:
            raise VocabMismatchError(
                f"impact index checksum {checksum:016x} != active {expected_checksum:016x}"
            )
        count = binio.read_u64(fh)
        model_id = binio.read_str(fh)
        timestamp = binio.read_u64(fh)
        entries: dict[str, PassageImpactEntry] = {}
        for _ in range(count):
            pid = binio.read_str(fh)
            n_postings = binio.read_u32(fh)
            weights: dict[int, float] = {}
            for _ in range(n_postings):
                token_id = binio.read_varint(fh)
                weights[token_id] = binio.read_f32(fh)
            if pid in entries:
                raise CorruptIndexError(f"duplicate pid {pid!r} in file")
            entries[pid] = PassageImpactEntry(pid=pid, weights=weights)
        table_pos = fh.tell()
        fh.seek(0, os.SEEK_END)
        end = fh.tell()
        fh.seek(table_pos)
        expected_table = 8 * count + 8 + 4
        if end - table_pos != expected_table:
            raise CorruptIndexError("impact index tail has wrong length")
        fh.seek(end - 12)
        stored_pos = binio.read_u64(fh)
        if stored_pos != table_pos:
            raise CorruptIndexError("impact index offset table position mismatch")
        binio.expect_magic(fh, _TAIL, "impact index tail")
    return ImpactIndex(
        entries=entries,
        vocab_checksum=checksum,
        model_id=model_id,
        timestamp=timestamp,
    )


def read_weight_jsonl(path: str | Path) -> Iterator[tuple[str, list[tuple[int, float]]]]:
    """Iterate a weight JSONL file: {"pid": str, "tokens": [[id, w], ...]}."""
    import json

    with open(path, encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                record = json.loads(line)
                pid = str(record["pid"])
                tokens = [(int(t), float(w)) for t, w in record["tokens"]]
            except (KeyError, TypeError, ValueError) as exc:
                raise CorruptIndexError(f"bad weight record on line {line_no}: {exc}") from exc
            yield pid, tokens


def write_weight_jsonl(path: str | Path, stream: WeightStream) -> int:
    """Write the weight JSONL contract; returns the number of passages."""
    import json

    count = 0
    with open(path, "w", encoding="utf-8") as fh:
        for pid, pairs in stream:
            tokens = [[int(t), _f32(w)] for t, w in pairs]
            fh.write(json.dumps({"pid": str(pid), "tokens": tokens}, separators=(",", ":")))
            fh.write("\n")
            count += 1
    return count
