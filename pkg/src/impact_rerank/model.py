"""Desk-scale trainable term-weight model.

The encoder is a windowed mean over an embedding table: position i of a
passage is represented by the mean embedding of the tokens in
[i - window, i + window] clipped to the passage, so the same token can
receive different weights in different contexts. A 1 x n projection plus
bias and a ReLU turn each position vector into a non-negative term weight;
per passage, duplicate tokens collapse to their maximum weight before
scoring, mirroring what the impact index stores.

Training minimizes a noise-contrastive loss over one positive and a pool
of negatives per query,

    loss = -log( exp(S+) / (exp(S+) + sum_j exp(S-_j)) )

evaluated in log-space (log-sum-exp) and optimized with plain SGD
(optional classical momentum). Gradients are analytic; the max-collapse
routes each matched token's gradient to its argmax position, and the ReLU
gates positions with non-positive pre-activations.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import binio
from .errors import CorruptIndexError
from .query import SparseTermVector
from .tokenizer import TokenSequence

_MAGIC = b"TOYW"
_TAIL = b"WYOT"
_VERSION = 1


@dataclass
class WindowedMeanEncoder:
    """Embedding table plus symmetric context half-width."""

    embeddings: np.ndarray  # (V, n) float64
    window: int

    @property
    def vocab_size(self) -> int:
        return self.embeddings.shape[0]

    @property
    def dim(self) -> int:
        return self.embeddings.shape[1]


@dataclass
class ProjectionHead:
    weights: np.ndarray  # (n,) float64
    bias: float


@dataclass
class TrainingBatch:
    """One contrastive example: a query, its positive, and its negatives."""

    query: SparseTermVector
    positive: TokenSequence
    negatives: list[TokenSequence]

    def __post_init__(self) -> None:
        if not self.negatives:
            raise ValueError("at least one negative is required")


@dataclass
class TrainConfig:
    steps: int = 500
    learning_rate: float = 0.05
    batch_size: int = 8
    hard_negatives: int = 7
    seed: int = 0
    momentum: float = 0.0
    dim: int = 16
    window: int = 1


@dataclass
class TrainExample:
    query_text: str
    positive_pid: str
    negative_pids: list[str]


def init_model(vocab_size: int, config: TrainConfig) -> tuple[WindowedMeanEncoder, ProjectionHead]:
    """Seeded initialization: embeddings ~ U(-0.1, 0.1), zero projection,
    bias 0.5 so initial weights are positive and gradients pass the ReLU."""
    rng = np.random.default_rng(config.seed)
    embeddings = rng.uniform(-0.1, 0.1, size=(vocab_size, config.dim))
    head = ProjectionHead(weights=np.zeros(config.dim), bias=0.5)
    return WindowedMeanEncoder(embeddings=embeddings, window=config.window), head


def _window_sizes(length: int, window: int) -> np.ndarray:
    pos = np.arange(length)
    lo = np.maximum(pos - window, 0)
    hi = np.minimum(pos + window + 1, length)
    return (hi - lo).astype(np.float64)


def contextualize(passage: TokenSequence, model: WindowedMeanEncoder) -> np.ndarray:
    """Per-position context vectors: mean embedding over the clipped window.

    With window 0 this degenerates to the static embedding rows.
    """
    if not passage:
        raise ValueError("empty passage")
    rows = model.embeddings[np.asarray(passage, dtype=np.intp)]
    w = model.window
    if w == 0:
        return rows.copy()
    length = len(passage)
    prefix = np.zeros((length + 1, model.dim))
    np.cumsum(rows, axis=0, out=prefix[1:])
    pos = np.arange(length)
    lo = np.maximum(pos - w, 0)
    hi = np.minimum(pos + w + 1, length)
    return (prefix[hi] - prefix[lo]) / (hi - lo)[:, None]


def term_weights(
    passage: TokenSequence, model: WindowedMeanEncoder, head: ProjectionHead
) -> list[tuple[int, float]]:
    """One non-negative weight per passage position (before max-collapse)."""
    contexts = contextualize(passage, model)
    pre = contexts @ head.weights + head.bias
    values = np.maximum(pre, 0.0)
    return list(zip(passage, values.tolist()))


@dataclass
class _PassageState:
    """Forward-pass intermediates kept for the backward pass."""

    tokens: TokenSequence
    contexts: np.ndarray  # (L, n)
    pre: np.ndarray  # (L,)
    values: np.ndarray  # (L,) post-ReLU
    collapsed: dict[int, tuple[float, int]] = field(default_factory=dict)

    def impact(self, token_id: int) -> float:
        entry = self.collapsed.get(token_id)
        return entry[0] if entry is not None else 0.0


def _forward_passage(
    passage: TokenSequence, model: WindowedMeanEncoder, head: ProjectionHead
) -> _PassageState:
    contexts = contextualize(passage, model)
    pre = contexts @ head.weights + head.bias
    values = np.maximum(pre, 0.0)
    collapsed: dict[int, tuple[float, int]] = {}
    for position, (token_id, value) in enumerate(zip(passage, values.tolist())):
        best = collapsed.get(token_id)
        if best is None or value > best[0]:  # first argmax wins ties
            collapsed[token_id] = (value, position)
    return _PassageState(tokens=passage, contexts=contexts, pre=pre, values=values, collapsed=collapsed)


def _match_score(query: SparseTermVector, state: _PassageState) -> float:
    total = 0.0
    collapsed = state.collapsed
    for token_id, count in query.items():
        entry = collapsed.get(token_id)
        if entry is not None:
            total += count * entry[0]
    return total


@dataclass
class Gradients:
    embedding_rows: dict[int, np.ndarray]
    weights: np.ndarray  # (n,)
    bias: float

    def scaled(self, factor: float) -> "Gradients":
        return Gradients(
            embedding_rows={r: g * factor for r, g in self.embedding_rows.items()},
            weights=self.weights * factor,
            bias=self.bias * factor,
        )


class _GradAccumulator:
    def __init__(self, dim: int) -> None:
        self.rows: dict[int, np.ndarray] = {}
        self.weights = np.zeros(dim)
        self.bias = 0.0

    def add_passage(
        self,
        state: _PassageState,
        token_grads: dict[int, float],
        model: WindowedMeanEncoder,
        head: ProjectionHead,
    ) -> None:
        """Backpropagate d loss / d collapsed-weight into parameters."""
        length = len(state.tokens)
        g_pre = np.zeros(length)
        for token_id, grad in token_grads.items():
            entry = state.collapsed.get(token_id)
            if entry is None:
                continue
            position = entry[1]
            if state.pre[position] > 0.0:  # ReLU gate
                g_pre[position] += grad
        if not g_pre.any():
            return
        self.weights += state.contexts.T @ g_pre
        self.bias += float(g_pre.sum())
        w = model.window
        sizes = _window_sizes(length, w)
        contrib = g_pre / sizes
        if w == 0:
            spread = contrib
        else:
            # Row j of the embedding table receives sum of contrib[i] for
            # every position i whose window covers j.
            prefix = np.zeros(length + 1)
            np.cumsum(contrib, out=prefix[1:])
            pos = np.arange(length)
            lo = np.maximum(pos - w, 0)
            hi = np.minimum(pos + w + 1, length)
            spread = prefix[hi] - prefix[lo]
        outer = spread[:, None] * head.weights[None, :]
        for j, token_id in enumerate(state.tokens):
            row = self.rows.get(token_id)
            if row is None:
                self.rows[token_id] = outer[j].copy()
            else:
                row += outer[j]

    def as_gradients(self) -> Gradients:
        return Gradients(embedding_rows=self.rows, weights=self.weights, bias=self.bias)


def _loss_from_scores(positive: float, negatives: list[float]) -> tuple[float, np.ndarray]:
    """Stable NCE loss and softmax over [positive, *negatives]."""
    scores = np.asarray([positive, *negatives], dtype=np.float64)
    peak = scores.max()
    shifted = np.exp(scores - peak)
    lse = peak + np.log(shifted.sum())
    softmax = shifted / shifted.sum()
    return float(lse - positive), softmax


def nce_loss(batch: TrainingBatch, model: WindowedMeanEncoder, head: ProjectionHead) -> float:
    positive = _forward_passage(batch.positive, model, head)
    negatives = [_forward_passage(p, model, head) for p in batch.negatives]
    loss, _ = _loss_from_scores(
        _match_score(batch.query, positive),
        [_match_score(batch.query, s) for s in negatives],
    )
    return loss


def nce_loss_and_grads(
    batch: TrainingBatch, model: WindowedMeanEncoder, head: ProjectionHead
) -> tuple[float, Gradients]:
    """Loss plus analytic gradients w.r.t. the head and touched embedding rows."""
    states = [_forward_passage(batch.positive, model, head)]
    states.extend(_forward_passage(p, model, head) for p in batch.negatives)
    scores = [_match_score(batch.query, s) for s in states]
    loss, softmax = _loss_from_scores(scores[0], scores[1:])
    d_scores = softmax.copy()
    d_scores[0] -= 1.0
    acc = _GradAccumulator(model.dim)
    for d_score, state in zip(d_scores, states):
        if d_score == 0.0:
            continue
        token_grads = {
            token_id: d_score * count
            for token_id, count in batch.query.items()
            if token_id in state.collapsed
        }
        if token_grads:
            acc.add_passage(state, token_grads, model, head)
    return loss, acc.as_gradients()


def _build_pools(
    batch_examples: list[tuple[SparseTermVector, str, list[str]]],
) -> list[tuple[SparseTermVector, str, list[str]]]:
    """Attach in-batch negatives: every other example contributes its
    positive and its hard negatives; entries equal to the own positive are
    excluded to keep the pools contradiction-free."""
    pools = []
    for i, (query, positive_pid, hard_negs) in enumerate(batch_examples):
        pool = list(hard_negs)
        for j, (_, other_pos, other_negs) in enumerate(batch_examples):
            if j == i:
                continue
            for pid in (other_pos, *other_negs):
                if pid != positive_pid:
                    pool.append(pid)
        pools.append((query, positive_pid, pool))
    return pools


def train(
    examples: list[TrainExample],
    collection: dict[str, TokenSequence],
    encoded_queries: list[SparseTermVector],
    vocab_size: int,
    config: TrainConfig,
) -> tuple[WindowedMeanEncoder, ProjectionHead, list[float]]:
    """SGD over the NCE objective; returns the model and per-step mean loss.

    ``encoded_queries[i]`` is the term-count vector of ``examples[i]``.
    Negative pools mix each example's own hard negatives with the positives
    and hard negatives of the other examples in the batch.
    """
    if not examples:
        raise ValueError("empty training set")
    if len(encoded_queries) != len(examples):
        raise ValueError("one encoded query per example required")
    model, head = init_model(vocab_size, config)
    rng = np.random.default_rng(config.seed)
    velocity_emb = np.zeros_like(model.embeddings) if config.momentum else None
    velocity_w = np.zeros_like(head.weights)
    velocity_b = 0.0
    log: list[float] = []
    n = len(examples)
    for step in range(config.steps):
        take = min(config.batch_size, n)
        picks = rng.choice(n, size=take, replace=n < config.batch_size)
        batch = [
            (encoded_queries[i], examples[i].positive_pid, list(examples[i].negative_pids))
            for i in picks
        ]
        pools = _build_pools(batch)
        # Forward each distinct passage once per step.
        needed: list[str] = []
        seen: set[str] = set()
        for _, positive_pid, pool in pools:
            for pid in (positive_pid, *pool):
                if pid not in seen:
                    seen.add(pid)
                    needed.append(pid)
        states = {pid: _forward_passage(collection[pid], model, head) for pid in needed}
        acc = _GradAccumulator(config.dim)
        token_grads: dict[str, dict[int, float]] = {}
        total_loss = 0.0
        for query, positive_pid, pool in pools:
            s_pos = _match_score(query, states[positive_pid])
            s_negs = [_match_score(query, states[pid]) for pid in pool]
            loss, softmax = _loss_from_scores(s_pos, s_negs)
            total_loss += loss
            d_scores = softmax.copy()
            d_scores[0] -= 1.0
            for d_score, pid in zip(d_scores, (positive_pid, *pool)):
                if d_score == 0.0:
                    continue
                grads = token_grads.setdefault(pid, {})
                collapsed = states[pid].collapsed
                for token_id, count in query.items():
                    if token_id in collapsed:
                        grads[token_id] = grads.get(token_id, 0.0) + d_score * count
        for pid, grads in token_grads.items():
            acc.add_passage(states[pid], grads, model, head)
        mean_loss = total_loss / len(pools)
        if not np.isfinite(mean_loss):
            raise RuntimeError(
                f"non-finite loss {mean_loss} at step {step}; "
                f"learning rate {config.learning_rate} is likely too high"
            )
        log.append(mean_loss)
        scale = config.learning_rate / len(pools)
        if config.momentum and velocity_emb is not None:
            velocity_w *= config.momentum
            velocity_w += scale * acc.weights
            velocity_b = config.momentum * velocity_b + scale * acc.bias
            velocity_emb *= config.momentum
            for row, grad in acc.rows.items():
                velocity_emb[row] += scale * grad
            head.weights -= velocity_w
            head.bias -= velocity_b
            model.embeddings -= velocity_emb
        else:
            head.weights -= scale * acc.weights
            head.bias -= scale * acc.bias
            for row, grad in acc.rows.items():
                model.embeddings[row] -= scale * grad
    return model, head, log


def emit_weight_stream(collection, model: WindowedMeanEncoder, head: ProjectionHead):
    """Per-position weights for every passage, in collection order.

    Empty passages yield empty token lists rather than failing the stream.
    """
    for pid, tokens in collection:
        if tokens:
            yield str(pid), term_weights(tokens, model, head)
        else:
            yield str(pid), []


def save_model(model: WindowedMeanEncoder, head: ProjectionHead, path: str | Path) -> None:
    with open(path, "wb") as fh:
        fh.write(_MAGIC)
        binio.write_u32(fh, _VERSION)
        binio.write_u64(fh, model.vocab_size)
        binio.write_u32(fh, model.dim)
        binio.write_u32(fh, model.window)
        fh.write(np.ascontiguousarray(model.embeddings, dtype="<f8").tobytes())
        fh.write(np.ascontiguousarray(head.weights, dtype="<f8").tobytes())
        binio.write_f64(fh, head.bias)
        fh.write(_TAIL)


def load_model(path: str | Path) -> tuple[WindowedMeanEncoder, ProjectionHead]:
    with open(path, "rb") as fh:
        binio.expect_magic(fh, _MAGIC, "model file")
        version = binio.read_u32(fh)
        if version != _VERSION:
            raise CorruptIndexError(f"unsupported model version {version}")
        vocab_size = binio.read_u64(fh)
        dim = binio.read_u32(fh)
        window = binio.read_u32(fh)
        emb = np.frombuffer(binio.read_exact(fh, 8 * vocab_size * dim), dtype="<f8")
        embeddings = emb.reshape(vocab_size, dim).copy()
        weights = np.frombuffer(binio.read_exact(fh, 8 * dim), dtype="<f8").copy()
        bias = binio.read_f64(fh)
        binio.expect_magic(fh, _TAIL, "model file tail")
    return WindowedMeanEncoder(embeddings=embeddings, window=window), ProjectionHead(
        weights=weights, bias=bias
    )
