import numpy as np
import pytest

from impact_rerank.errors import (
    CorruptIndexError,
    DuplicatePassageError,
    MissingPassageError,
    NegativeWeightError,
    VocabMismatchError,
)
from impact_rerank.impacts import (
    build_impact_index,
    deserialize,
    lookup,
    read_weight_jsonl,
    serialize,
    write_weight_jsonl,
)


def random_index(rng, max_passages=20, max_tokens=30, vocab_n=100):
    stream = []
    for i in range(int(rng.integers(1, max_passages + 1))):
        n = int(rng.integers(0, max_tokens))
        pairs = [
            (int(rng.integers(0, vocab_n)), float(rng.uniform(0, 4)))
            for _ in range(n)
        ]
        stream.append((f"p{i}", pairs))
    return build_impact_index(stream, vocab_checksum=int(rng.integers(1, 2**63)), model_id="test")


class TestBuild:
    def test_duplicates_collapse_to_max(self):
        index = build_impact_index([("p", [(7, 0.2), (7, 0.9), (7, 0.5)])])
        assert index.get("p").postings == [(7, pytest.approx(0.9))]

    def test_empty_weight_list(self):
        index = build_impact_index([("p", [])])
        assert index.get("p").postings == []

    def test_negative_weight_rejected(self):
        with pytest.raises(NegativeWeightError):
            build_impact_index([("p", [(1, -0.1)])])

    def test_duplicate_pid_rejected(self):
        with pytest.raises(DuplicatePassageError):
            build_impact_index([("p", []), ("p", [])])

    def test_postings_sorted_and_unique(self):
        rng = np.random.default_rng(0)
        for _ in range(20):
            index = random_index(rng)
            for entry in index.entries.values():
                ids = [t for t, _ in entry.postings]
                assert ids == sorted(set(ids))

    def test_entry_count_equals_unique_tokens(self):
        rng = np.random.default_rng(1)
        for _ in range(20):
            pairs = [
                (int(rng.integers(0, 50)), float(rng.uniform(0, 2)))
                for _ in range(int(rng.integers(0, 60)))
            ]
            index = build_impact_index([("p", pairs)])
            assert len(index.get("p").weights) == len({t for t, _ in pairs})

    def test_max_collapse_idempotent(self):
        rng = np.random.default_rng(2)
        index = random_index(rng)
        rebuilt = build_impact_index(
            ((pid, entry.postings) for pid, entry in index.entries.items()),
            vocab_checksum=index.vocab_checksum,
            model_id=index.model_id,
        )
        assert rebuilt == index

    def test_entry_size_independent_of_vocab_size(self):
        # The point of the structure: per-passage storage scales with the
        # passage's unique tokens, not with V.
        pairs = [(10, 1.0), (20, 2.0)]
        small = build_impact_index([("p", pairs)])
        huge_vocab_pairs = [(10_000_000, 1.0), (20_000_000, 2.0)]
        large = build_impact_index([("p", huge_vocab_pairs)])
        assert len(small.get("p").weights) == len(large.get("p").weights) == 2


class TestLookup:
    def test_read_your_write(self):
        index = build_impact_index([("p", [(7, 0.9)])])
        assert lookup(index, "p", 7) == pytest.approx(0.9)

    def test_unindexed_token_absent(self):
        index = build_impact_index([("p", [(7, 0.9)])])
        assert lookup(index, "p", 8) is None

    def test_unknown_passage_raises(self):
        index = build_impact_index([("p", [])])
        with pytest.raises(MissingPassageError):
            lookup(index, "nope", 1)

    def test_weights_non_negative(self):
        rng = np.random.default_rng(3)
        index = random_index(rng)
        for entry in index.entries.values():
            assert all(w >= 0 for _, w in entry.postings)


class TestSerialization:
    def test_round_trip_identity(self, tmp_path):
        rng = np.random.default_rng(4)
        for i in range(20):
            index = random_index(rng)
            path = tmp_path / f"idx{i}.bin"
            serialize(index, path)
            assert deserialize(path) == index

    def test_round_trip_bytes_stable(self, tmp_path):
        rng = np.random.default_rng(5)
        index = random_index(rng)
        p1, p2 = tmp_path / "a.bin", tmp_path / "b.bin"
        serialize(index, p1)
        serialize(deserialize(p1), p2)
        assert p1.read_bytes() == p2.read_bytes()

    def test_truncated_file_rejected(self, tmp_path):
        index = build_impact_index([("p", [(1, 0.5), (2, 0.25)])])
        path = tmp_path / "idx.bin"
        serialize(index, path)
        data = path.read_bytes()
        for cut in (len(data) - 3, len(data) // 2, 10):
            path.write_bytes(data[:cut])
            with pytest.raises(CorruptIndexError):
                deserialize(path)

    def test_vocab_mismatch_rejected(self, tmp_path):
        index = build_impact_index([("p", [])], vocab_checksum=42)
        path = tmp_path / "idx.bin"
        serialize(index, path)
        with pytest.raises(VocabMismatchError):
            deserialize(path, expected_checksum=43)
        assert deserialize(path, expected_checksum=42) == index

    def test_size_grows_linearly_in_postings(self, tmp_path):
        # Bytes per posting must stay flat across doubling corpus sizes.
        rng = np.random.default_rng(6)
        per_posting = []
        for n_passages in (50, 100, 200):
            stream = [
                (f"p{i}", [(int(t), 1.0) for t in rng.integers(0, 5000, size=20)])
                for i in range(n_passages)
            ]
            index = build_impact_index(stream)
            postings = sum(len(e.weights) for e in index.entries.values())
            path = tmp_path / f"size{n_passages}.bin"
            serialize(index, path)
            per_posting.append(path.stat().st_size / postings)
        assert per_posting[2] < per_posting[0] * 1.5


class TestWeightJsonl:
    def test_round_trip(self, tmp_path):
        path = tmp_path / "w.jsonl"
        stream = [("a", [(1, 0.5), (2, 1.25)]), ("b", [(3, 0.0)])]
        assert write_weight_jsonl(path, stream) == 2
        loaded = list(read_weight_jsonl(path))
        assert loaded == [("a", [(1, 0.5), (2, 1.25)]), ("b", [(3, 0.0)])]

    def test_float32_rounding_is_stable(self, tmp_path):
        # Values are rounded to 32-bit at write time, so ingest -> build
        # reproduces the same stored weights bit for bit.
        path = tmp_path / "w.jsonl"
        write_weight_jsonl(path, [("a", [(1, 0.1), (2, 1.0 / 3.0)])])
        index = build_impact_index(read_weight_jsonl(path))
        assert index.get("a").weights[1] == float(np.float32(0.1))
        assert index.get("a").weights[2] == float(np.float32(1.0 / 3.0))

    def test_malformed_line_rejected(self, tmp_path):
        path = tmp_path / "w.jsonl"
        path.write_text('{"pid": "a"}\n')
        with pytest.raises(CorruptIndexError):
            list(read_weight_jsonl(path))
