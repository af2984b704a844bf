"""Tokenizer-only query encoding into a sparse term-count vector.

No model inference happens here: encoding is tokenization plus a frequency
count, so it costs table lookups only.
"""

from __future__ import annotations

from collections import Counter

from .tokenizer import TokenSequence, tokenize
from .vocab import Vocabulary

SparseTermVector = dict[int, int]


def count_tokens(ids: TokenSequence, stopword_ids: set[int], unk_id: int | None) -> SparseTermVector:
    """Count token occurrences, dropping stopword and [UNK] ids."""
    counts = Counter(ids)
    return {
        token_id: count
        for token_id, count in counts.items()
        if token_id not in stopword_ids and token_id != unk_id
    }


def encode_query(text: str, vocab: Vocabulary, stopword_ids: set[int]) -> SparseTermVector:
    """Encode a query as {token id: frequency} with stopwords and [UNK] removed.

    An all-stopword (or empty) query yields an empty vector; downstream
    ranking stages treat that as "matches nothing".
    """
    return count_tokens(tokenize(text, vocab), stopword_ids, vocab.unk_id)
