"""Greedy longest-match-first WordPiece tokenization.

The pipeline is the uncased BERT convention: clean control characters,
lowercase, strip accents, split off punctuation, then split each word into
the longest vocabulary pieces, marking word-internal pieces with "##".
Words longer than ``MAX_WORD_CHARS`` and words with no piece cover map to
``[UNK]``.
"""

from __future__ import annotations

import unicodedata

from .vocab import UNK_TOKEN, Vocabulary

MAX_WORD_CHARS = 100

TokenSequence = list[int]


def _is_punctuation(char: str) -> bool:
    cp = ord(char)
    # All non-alphanumeric ASCII counts as punctuation, matching the
    # uncased-BERT convention.
    if 33 <= cp <= 47 or 58 <= cp <= 64 or 91 <= cp <= 96 or 123 <= cp <= 126:
        return True
    return unicodedata.category(char).startswith("P")


def _clean(text: str) -> str:
    out = []
    for char in text:
        cp = ord(char)
        if cp == 0 or cp == 0xFFFD:
            continue
        if char in ("\t", "\n", "\r"):
            out.append(" ")
            continue
        cat = unicodedata.category(char)
        if cat.startswith("C"):
            continue
        out.append(" " if cat == "Zs" else char)
    return "".join(out)


def _strip_accents(text: str) -> str:
    decomposed = unicodedata.normalize("NFD", text)
    return "".join(c for c in decomposed if unicodedata.category(c) != "Mn")


def _split_punctuation(word: str) -> list[str]:
    pieces: list[str] = []
    current: list[str] = []
    for char in word:
        if _is_punctuation(char):
            if current:
                pieces.append("".join(current))
                current = []
            pieces.append(char)
        else:
            current.append(char)
    if current:
        pieces.append("".join(current))
    return pieces


def basic_tokenize(text: str) -> list[str]:
    """Lowercase, strip accents, and split on whitespace and punctuation."""
    if not text:
        return []
    if not text.isascii():
        text = _clean(text)
        text = _strip_accents(text.lower())
    elif not text.isprintable():
        text = _clean(text)
        text = text.lower()
    else:
        text = text.lower()
    words: list[str] = []
    for word in text.split():
        if word.isalnum():
            words.append(word)
        else:
            words.extend(_split_punctuation(word))
    return words


def wordpiece_pieces(word: str, vocab: Vocabulary) -> list[str]:
    """Split one word into greedy longest-match pieces (surface strings)."""
    if word in vocab:
        return [word]
    if len(word) > MAX_WORD_CHARS:
        return [UNK_TOKEN]
    pieces: list[str] = []
    start = 0
    while start < len(word):
        end = len(word)
        piece = None
        while start < end:
            candidate = word[start:end]
            if start > 0:
                candidate = "##" + candidate
            if candidate in vocab:
                piece = candidate
                break
            end -= 1
        if piece is None:
            return [UNK_TOKEN]
        pieces.append(piece)
        start = end
    return pieces


def tokenize(text: str, vocab: Vocabulary) -> TokenSequence:
    """Tokenize text into vocabulary ids; unknown words become the [UNK] id.

    Deterministic and total: any string yields a (possibly empty) id list.
    No [CLS]/[SEP] markers are emitted.
    """
    lookup = vocab.lookup
    ids: TokenSequence = []
    for word in basic_tokenize(text):
        hit = lookup.get(word)
        if hit is not None:
            ids.append(hit)
            continue
        for piece in wordpiece_pieces(word, vocab):
            ids.append(lookup[piece])
    return ids


def detokenize_word(piece_ids: list[int], vocab: Vocabulary) -> str:
    """Join piece ids back into a surface word, dropping "##" markers."""
    parts = []
    for token_id in piece_ids:
        token = vocab.token_of(token_id)
        parts.append(token[2:] if token.startswith("##") else token)
    return "".join(parts)


def surface_form(token_id: int, vocab: Vocabulary) -> str:
    token = vocab.token_of(token_id)
    return token[2:] if token.startswith("##") else token
