"""WordPiece vocabulary and stopword-set loading.

A vocabulary file is UTF-8 text with one token per line; the token id is
the 0-based line number. A stopword file lists one surface form per line;
forms are mapped to ids through the vocabulary at load time and forms that
are not single vocabulary tokens are ignored.
"""

from __future__ import annotations

import importlib.resources
from dataclasses import dataclass, field
from pathlib import Path

from .errors import DuplicateTokenError, EmptyVocabularyError

UNK_TOKEN = "[UNK]"

_FNV_OFFSET = 0xCBF29CE484222325
_FNV_PRIME = 0x100000001B3
_MASK64 = 0xFFFFFFFFFFFFFFFF


def fnv1a64(data: bytes, seed: int = _FNV_OFFSET) -> int:
    """64-bit FNV-1a over a byte string."""
    h = seed
    for byte in data:
        h = ((h ^ byte) * _FNV_PRIME) & _MASK64
    return h


@dataclass(frozen=True)
class Vocabulary:
    """Immutable token-string <-> token-id table.

    ``checksum`` digests the entries in order, so any edit or reordering of
    the vocabulary file produces a different value. Persisted artifacts
    carry it to detect cross-vocabulary misuse.
    """

    entries: tuple[str, ...]
    lookup: dict[str, int] = field(repr=False)
    checksum: int

    @property
    def size(self) -> int:
        return len(self.entries)

    @property
    def checksum_hex(self) -> str:
        return f"{self.checksum:016x}"

    @property
    def unk_id(self) -> int | None:
        return self.lookup.get(UNK_TOKEN)

    def __contains__(self, token: str) -> bool:
        return token in self.lookup

    def id_of(self, token: str) -> int:
        return self.lookup[token]

    def token_of(self, token_id: int) -> str:
        return self.entries[token_id]


def build_vocabulary(tokens: list[str]) -> Vocabulary:
    """Assemble a Vocabulary from an ordered token list (line order = id)."""
    if not tokens:
        raise EmptyVocabularyError("vocabulary has no tokens")
    lookup: dict[str, int] = {}
    h = _FNV_OFFSET
    for index, token in enumerate(tokens):
        if token in lookup:
            raise DuplicateTokenError(f"duplicate token {token!r} at line {index + 1}")
        lookup[token] = index
        h = fnv1a64(token.encode("utf-8") + b"\n", seed=h)
    return Vocabulary(entries=tuple(tokens), lookup=lookup, checksum=h)


def load_vocabulary(path: str | Path) -> Vocabulary:
    tokens = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            token = line.rstrip("\r\n")
            if token:
                tokens.append(token)
    return build_vocabulary(tokens)


def load_stopwords(path: str | Path, vocab: Vocabulary) -> set[int]:
    """Map stopword surface forms onto token ids.

    Forms that do not tokenize to a single vocabulary entry are dropped:
    downstream filters operate on ids, so an out-of-vocabulary stopword can
    never match anything anyway.
    """
    ids: set[int] = set()
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            form = line.strip()
            if not form or form.startswith("#"):
                continue
            token_id = vocab.lookup.get(form.lower())
            if token_id is not None:
                ids.add(token_id)
    return ids


def default_stopword_path() -> Path:
    """Path of the English stopword list shipped with the package."""
    resource = importlib.resources.files("impact_rerank") / "data" / "stopwords_en.txt"
    return Path(str(resource))
