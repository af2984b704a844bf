"""Passage expansion driven by a vocabulary likelihood distribution.

For each passage: sort the vocabulary by descending likelihood (ties by
ascending token id), scan only the top m entries, and append a token iff
it is neither already in the passage nor a stopword. Filtered tokens are
not replaced by lower-ranked ones, so at most m tokens are appended and
usually far fewer.
"""

from __future__ import annotations

import logging
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Iterable, Iterator

import numpy as np

from .likelihood import LikelihoodDistribution, LikelihoodProvider
from .tokenizer import TokenSequence

logger = logging.getLogger(__name__)

THREADS_ENV_VAR = "IMPACT_RERANK_THREADS"


@dataclass
class ExpansionConfig:
    m: int  # how many top-likelihood entries to scan
    stopword_ids: set[int] = field(default_factory=set)
    vocab_size: int | None = None  # when set, distributions must have this length

    def __post_init__(self) -> None:
        if self.m < 0:
            raise ValueError("m must be >= 0")
        if self.vocab_size is not None and self.m > self.vocab_size:
            raise ValueError("m cannot exceed the vocabulary size")


@dataclass
class ExpandedPassage:
    original: TokenSequence
    appended: list[int]  # descending likelihood order, no duplicates

    @property
    def full(self) -> TokenSequence:
        return [*self.original, *self.appended]


@dataclass
class ExpansionStats:
    passages: int = 0
    total_appended: int = 0
    mean_appended: float = 0.0
    p50_appended: float = 0.0
    wall_seconds: float = 0.0
    passages_per_second: float = 0.0
    failures: int = 0

    def as_dict(self) -> dict:
        return {
            "passages": self.passages,
            "total_appended": self.total_appended,
            "mean_appended": self.mean_appended,
            "p50_appended": self.p50_appended,
            "wall_seconds": self.wall_seconds,
            "passages_per_second": self.passages_per_second,
            "failures": self.failures,
        }


def expand_passage(
    passage: TokenSequence, scores: LikelihoodDistribution, config: ExpansionConfig
) -> ExpandedPassage:
    """Append the top-m new, non-stopword tokens by descending likelihood."""
    if config.vocab_size is not None and scores.shape != (config.vocab_size,):
        raise ValueError(
            f"distribution length {scores.shape} != vocabulary size {config.vocab_size}"
        )
    if config.m == 0:
        return ExpandedPassage(original=passage, appended=[])
    vocab_size = scores.shape[0]
    # lexsort keys: last key is primary -> descending score, then ascending id.
    order = np.lexsort((np.arange(vocab_size), -scores))
    present = set(passage)
    stop = config.stopword_ids
    appended = [
        int(token_id)
        for token_id in order[: config.m]
        if int(token_id) not in present and int(token_id) not in stop
    ]
    return ExpandedPassage(original=passage, appended=appended)


def _max_threads() -> int:
    value = os.environ.get(THREADS_ENV_VAR)
    if value:
        try:
            return max(1, int(value))
        except ValueError:
            logger.warning("ignoring non-integer %s=%r", THREADS_ENV_VAR, value)
    return 1


def expand_collection(
    collection: Iterable[tuple[str, TokenSequence]],
    provider: LikelihoodProvider,
    config: ExpansionConfig,
    strict: bool = False,
    threads: int | None = None,
) -> tuple[list[tuple[str, ExpandedPassage]], ExpansionStats]:
    """Expand every passage; failures are recorded and skipped unless strict.

    Worker fan-out is capped by the IMPACT_RERANK_THREADS environment
    variable; results merge back in input order either way.
    """
    start = time.perf_counter()
    items = list(collection)
    threads = threads if threads is not None else _max_threads()

    def one(item: tuple[str, TokenSequence]) -> ExpandedPassage:
        pid, tokens = item
        scores = provider.distribution(pid, tokens)
        return expand_passage(tokens, scores, config)

    results: list[tuple[str, ExpandedPassage]] = []
    failures = 0
    if threads > 1 and len(items) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            outcomes = list(pool.map(lambda it: _guarded(one, it, strict), items))
    else:
        outcomes = [_guarded(one, item, strict) for item in items]
    for (pid, _), outcome in zip(items, outcomes):
        if outcome is None:
            failures += 1
        else:
            results.append((pid, outcome))

    counts = sorted(len(exp.appended) for _, exp in results)
    wall = time.perf_counter() - start
    stats = ExpansionStats(
        passages=len(results),
        total_appended=sum(counts),
        mean_appended=float(np.mean(counts)) if counts else 0.0,
        p50_appended=float(np.median(counts)) if counts else 0.0,
        wall_seconds=wall,
        passages_per_second=len(results) / wall if wall > 0 else 0.0,
        failures=failures,
    )
    return results, stats


def _guarded(fn, item, strict: bool):
    try:
        return fn(item)
    except Exception:
        if strict:
            raise
        logger.warning("expansion failed for passage %s; skipped", item[0], exc_info=True)
        return None


def iter_expanded_text(
    expanded: Iterable[tuple[str, ExpandedPassage]],
    original_texts: dict[str, str],
    vocab,
) -> Iterator[tuple[str, str]]:
    """Render expanded passages back to TSV text rows.

    The original text is emitted verbatim; appended tokens follow as
    surface words ("##" markers stripped), so m=0 reproduces the input.
    """
    from .tokenizer import surface_form

    for pid, exp in expanded:
        text = original_texts[pid]
        if exp.appended:
            suffix = " ".join(surface_form(t, vocab) for t in exp.appended)
            yield pid, f"{text} {suffix}" if text else suffix
        else:
            yield pid, text
