"""CPU-only passage re-ranking with contextualized exact term matching.

The query side is tokenizer-only (a sparse term-count vector); the passage
side is a precomputed impact index of per-token max weights produced by a
trainable term-weight model. A BM25 first stage supplies candidates, a
likelihood-driven expansion step mitigates vocabulary mismatch, and TREC
metrics plus a latency harness close the loop.
"""

from .bm25 import InvertedIndex, RankedList, bm25_search, build_inverted_index
from .expansion import ExpansionConfig, ExpandedPassage, expand_collection, expand_passage
from .impacts import ImpactIndex, PassageImpactEntry, build_impact_index, deserialize, serialize
from .likelihood import CooccurrenceProvider, FileLikelihoodProvider, likelihood_distribution
from .metrics import MetricReport, mean_average_precision, mrr_at_k, ndcg_at_k, paired_ttest
from .model import (
    ProjectionHead,
    TrainConfig,
    TrainingBatch,
    WindowedMeanEncoder,
    contextualize,
    nce_loss,
    term_weights,
    train,
)
from .query import SparseTermVector, encode_query
from .rerank import RerankRequest, rerank, score
from .tokenizer import TokenSequence, tokenize
from .vocab import Vocabulary, load_stopwords, load_vocabulary

__version__ = "0.1.0"

__all__ = [
    "CooccurrenceProvider",
    "ExpansionConfig",
    "ExpandedPassage",
    "FileLikelihoodProvider",
    "ImpactIndex",
    "InvertedIndex",
    "MetricReport",
    "PassageImpactEntry",
    "ProjectionHead",
    "RankedList",
    "RerankRequest",
    "SparseTermVector",
    "TokenSequence",
    "TrainConfig",
    "TrainingBatch",
    "Vocabulary",
    "WindowedMeanEncoder",
    "bm25_search",
    "build_impact_index",
    "build_inverted_index",
    "contextualize",
    "deserialize",
    "encode_query",
    "expand_collection",
    "expand_passage",
    "likelihood_distribution",
    "load_stopwords",
    "load_vocabulary",
    "mean_average_precision",
    "mrr_at_k",
    "ndcg_at_k",
    "nce_loss",
    "paired_ttest",
    "rerank",
    "score",
    "serialize",
    "term_weights",
    "tokenize",
    "train",
]
