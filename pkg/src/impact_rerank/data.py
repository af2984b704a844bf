"""TSV readers/writers for collections, queries, and training triples."""

from __future__ import annotations

from pathlib import Path
from typing import Iterator

from .model import TrainExample


def read_collection_tsv(path: str | Path) -> Iterator[tuple[str, str]]:
    """Yield (passage id, text) rows from `pid <TAB> text` lines."""
    with open(path, encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            line = line.rstrip("\n").rstrip("\r")
            if not line:
                continue
            pid, sep, text = line.partition("\t")
            if not sep:
                raise ValueError(f"line {line_no}: expected `pid<TAB>text`")
            yield pid, text


def write_collection_tsv(path: str | Path, rows) -> int:
    count = 0
    with open(path, "w", encoding="utf-8") as fh:
        for pid, text in rows:
            fh.write(f"{pid}\t{text}\n")
            count += 1
    return count


def read_queries_tsv(path: str | Path) -> Iterator[tuple[str, str]]:
    """Yield (query id, text) rows; same layout as a collection file."""
    yield from read_collection_tsv(path)


def read_training_tsv(path: str | Path) -> list[TrainExample]:
    """Read `query <TAB> positive-pid <TAB> comma-separated negative-pids` rows."""
    examples: list[TrainExample] = []
    with open(path, encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            line = line.rstrip("\n").rstrip("\r")
            if not line:
                continue
            parts = line.split("\t")
            if len(parts) != 3:
                raise ValueError(f"line {line_no}: expected 3 tab-separated fields")
            query, positive, negatives = parts
            negative_pids = [pid for pid in negatives.split(",") if pid]
            if not negative_pids:
                raise ValueError(f"line {line_no}: no negatives listed")
            examples.append(
                TrainExample(query_text=query, positive_pid=positive, negative_pids=negative_pids)
            )
    return examples
