import pytest

from impact_rerank.vocab import build_vocabulary, load_stopwords

SPECIALS = ["[PAD]", "[UNK]", "[CLS]", "[SEP]", "[MASK]"]
PUNCT = list(".,!?'\"-:;()")
LETTERS = [chr(c) for c in range(ord("a"), ord("z") + 1)]
DIGITS = [str(d) for d in range(10)]
WORDS = [
    "the", "of", "to", "and", "in", "is", "it", "for", "on", "with", "was",
    "apple", "account", "play", "help", "test", "word", "piece", "match",
    "quick", "brown", "fox", "jump", "lazy", "dog", "un", "new", "york",
    "search", "engine", "rank", "passage", "query", "term", "weight",
]
PIECES = ["##ing", "##ed", "##er", "##able", "##le"] + [f"##{c}" for c in LETTERS] + [
    f"##{d}" for d in DIGITS
]


def make_test_vocab():
    entries = SPECIALS + PUNCT + LETTERS + DIGITS + WORDS + PIECES
    return build_vocabulary(entries)


@pytest.fixture(scope="session")
def vocab():
    return make_test_vocab()


@pytest.fixture(scope="session")
def stopword_ids(vocab, tmp_path_factory):
    path = tmp_path_factory.mktemp("stop") / "stopwords.txt"
    path.write_text("\n".join(["the", "of", "to", "and", "in", "is", "it", "for", "on", "with", "was"]) + "\n")
    return load_stopwords(path, vocab)
