"""Command-line pipeline: index, expand, train, weights, rerank, eval, bench.

Exit codes: 0 success, 1 internal error, 2 usage or input error.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import bench as bench_mod
from . import bm25, data, expansion, impacts, metrics, model as model_mod
from .errors import CorruptIndexError, VocabMismatchError
from .likelihood import CooccurrenceProvider, FileLikelihoodProvider
from .query import encode_query
from .rerank import RerankRequest, rerank, write_trec_run
from .tokenizer import tokenize
from .vocab import Vocabulary, default_stopword_path, load_stopwords, load_vocabulary

BM25_FILE = "bm25.bin"
IMPACTS_FILE = "impacts.bin"


class UsageError(Exception):
    pass


def _require_file(path: str, what: str) -> Path:
    p = Path(path)
    if not p.is_file():
        raise UsageError(f"{what} not found: {path}")
    return p


def _load_vocab(args) -> Vocabulary:
    return load_vocabulary(_require_file(args.vocab, "vocabulary file"))


def _load_stop(args, vocab: Vocabulary) -> set[int]:
    path = args.stopwords or default_stopword_path()
    return load_stopwords(_require_file(str(path), "stopword file"), vocab)


def _tokenized_collection(path: Path, vocab: Vocabulary):
    for pid, text in data.read_collection_tsv(path):
        yield pid, tokenize(text, vocab)


def _emit(obj: dict) -> None:
    print(json.dumps(obj, sort_keys=True))


def cmd_index(args) -> int:
    vocab = _load_vocab(args)
    collection = _require_file(args.collection, "collection file")
    index = bm25.build_inverted_index(
        _tokenized_collection(collection, vocab),
        k1=args.k1,
        b=args.b,
        vocab_checksum=vocab.checksum,
    )
    index_dir = Path(args.index_dir)
    index_dir.mkdir(parents=True, exist_ok=True)
    out = index_dir / BM25_FILE
    bm25.save_index(index, out)
    _emit(
        {
            "command": "index",
            "passages": index.num_passages,
            "terms": len(index.postings),
            "avgdl": index.avgdl,
            "k1": index.k1,
            "b": index.b,
            "output": str(out),
        }
    )
    return 0


def cmd_expand(args) -> int:
    vocab = _load_vocab(args)
    stopword_ids = _load_stop(args, vocab)
    collection_path = _require_file(args.collection, "collection file")
    texts = dict(data.read_collection_tsv(collection_path))
    tokenized = [(pid, tokenize(text, vocab)) for pid, text in texts.items()]
    if args.likelihoods:
        provider = FileLikelihoodProvider(_require_file(args.likelihoods, "likelihood file"))
        if provider.vocab_size != vocab.size:
            raise UsageError(
                f"likelihood file vocabulary size {provider.vocab_size} != {vocab.size}"
            )
    else:
        cooc_source = tokenized
        if args.cooc_corpus:
            corpus_path = _require_file(args.cooc_corpus, "co-occurrence corpus")
            cooc_source = [
                (pid, tokenize(text, vocab)) for pid, text in data.read_collection_tsv(corpus_path)
            ]
        provider = CooccurrenceProvider(vocab.size, stopword_ids).fit(
            tokens for _, tokens in cooc_source
        )
    config = expansion.ExpansionConfig(m=args.m, stopword_ids=stopword_ids, vocab_size=vocab.size)
    expanded, stats = expansion.expand_collection(
        tokenized, provider, config, strict=args.strict
    )
    rows = expansion.iter_expanded_text(expanded, texts, vocab)
    data.write_collection_tsv(args.out, rows)
    if args.stats_out:
        Path(args.stats_out).write_text(json.dumps(stats.as_dict(), indent=2) + "\n")
    _emit({"command": "expand", "m": args.m, "output": args.out, **stats.as_dict()})
    return 0


def cmd_train(args) -> int:
    vocab = _load_vocab(args)
    stopword_ids = _load_stop(args, vocab)
    collection_path = _require_file(args.collection, "collection file")
    train_path = _require_file(args.train_tsv, "training file")
    examples = data.read_training_tsv(train_path)
    if not examples:
        raise UsageError("training file lists no examples")
    collection = {pid: tokenize(text, vocab) for pid, text in data.read_collection_tsv(collection_path)}
    missing = [
        pid
        for ex in examples
        for pid in (ex.positive_pid, *ex.negative_pids)
        if pid not in collection
    ]
    if missing:
        raise UsageError(f"training references unknown passages, e.g. {missing[0]!r}")
    encoded = [encode_query(ex.query_text, vocab, stopword_ids) for ex in examples]
    config = model_mod.TrainConfig(
        steps=args.steps,
        learning_rate=args.lr,
        batch_size=args.batch_size,
        hard_negatives=args.hard_negatives,
        seed=args.seed,
        momentum=args.momentum,
        dim=args.dim,
        window=args.window,
    )
    trained, head, log = model_mod.train(examples, collection, encoded, vocab.size, config)
    model_mod.save_model(trained, head, args.model_out)
    _emit(
        {
            "command": "train",
            "steps": config.steps,
            "examples": len(examples),
            "first_loss": log[0] if log else None,
            "last_loss": log[-1] if log else None,
            "output": args.model_out,
        }
    )
    return 0


def cmd_weights(args) -> int:
    vocab = _load_vocab(args)
    collection = _require_file(args.collection, "collection file")
    trained, head = model_mod.load_model(_require_file(args.model, "model file"))
    if trained.vocab_size != vocab.size:
        raise VocabMismatchError(
            f"model vocabulary size {trained.vocab_size} != active {vocab.size}"
        )
    stream = model_mod.emit_weight_stream(_tokenized_collection(collection, vocab), trained, head)
    count = impacts.write_weight_jsonl(args.out, stream)
    _emit({"command": "weights", "passages": count, "output": args.out})
    return 0


def cmd_index_impacts(args) -> int:
    vocab = _load_vocab(args)
    weights_path = _require_file(args.weights, "weight file")
    index = impacts.build_impact_index(
        impacts.read_weight_jsonl(weights_path),
        vocab_checksum=vocab.checksum,
        model_id=args.model_id,
    )
    index_dir = Path(args.index_dir)
    index_dir.mkdir(parents=True, exist_ok=True)
    out = index_dir / IMPACTS_FILE
    impacts.serialize(index, out)
    postings = sum(len(e.weights) for e in index.entries.values())
    _emit(
        {
            "command": "index-impacts",
            "passages": index.num_passages,
            "postings": postings,
            "output": str(out),
        }
    )
    return 0


def cmd_rerank(args) -> int:
    vocab = _load_vocab(args)
    stopword_ids = _load_stop(args, vocab)
    queries = list(data.read_queries_tsv(_require_file(args.queries, "query file")))
    index_dir = Path(args.index_dir)
    index = bm25.load_index(
        _require_file(str(index_dir / BM25_FILE), "bm25 index"), vocab.checksum
    )
    impact_index = impacts.deserialize(
        _require_file(str(index_dir / IMPACTS_FILE), "impact index"), vocab.checksum
    )
    runs: dict[str, list[tuple[str, float]]] = {}
    pool_k = args.cutoff if args.cutoff > 0 else args.pool_depth
    for qid, text in queries:
        vector = encode_query(text, vocab, stopword_ids)
        candidates = bm25.bm25_search(index, vector, pool_k) if vector else []
        if args.cutoff > 0 and candidates:
            request = RerankRequest(query=vector, candidates=candidates, cutoff=args.cutoff)
            runs[qid] = rerank(request, impact_index, strict=args.strict)
        else:
            runs[qid] = candidates
    write_trec_run(args.out, runs, args.run_tag)
    _emit(
        {
            "command": "rerank",
            "queries": len(runs),
            "cutoff": args.cutoff,
            "output": args.out,
        }
    )
    return 0


def cmd_eval(args) -> int:
    from .rerank import read_trec_run

    run = read_trec_run(_require_file(args.run, "run file"))
    qrels = metrics.load_qrels(_require_file(args.qrels, "qrels file"))
    mrr = metrics.mrr_at_k(run, qrels, k=args.k)
    ndcg = metrics.ndcg_at_k(run, qrels, k=args.k)
    ap = metrics.mean_average_precision(run, qrels, threshold=args.map_threshold)
    report = {
        mrr.name: mrr.mean,
        ndcg.name: ndcg.mean,
        ap.name: ap.mean,
        "queries": len(mrr.per_query),
    }
    if args.per_query:
        report["per_query"] = {
            mrr.name: mrr.per_query,
            ndcg.name: ndcg.per_query,
            ap.name: ap.per_query,
        }
    if args.out:
        Path(args.out).write_text(json.dumps(report, indent=2, sort_keys=True) + "\n")
    _emit({"command": "eval", **{k: v for k, v in report.items() if k != "per_query"}})
    return 0


def cmd_bench(args) -> int:
    vocab = _load_vocab(args)
    stopword_ids = _load_stop(args, vocab)
    queries = list(data.read_queries_tsv(_require_file(args.queries, "query file")))
    index_dir = Path(args.index_dir)
    index = bm25.load_index(
        _require_file(str(index_dir / BM25_FILE), "bm25 index"), vocab.checksum
    )
    impact_index = impacts.deserialize(
        _require_file(str(index_dir / IMPACTS_FILE), "impact index"), vocab.checksum
    )
    qrels = metrics.load_qrels(_require_file(args.qrels, "qrels file")) if args.qrels else None
    sweep_ks = tuple(int(k) for k in args.sweep_ks.split(",")) if args.sweep_ks else bench_mod.DEFAULT_SWEEP_KS
    result = bench_mod.run_bench(
        queries,
        vocab,
        stopword_ids,
        index,
        impact_index,
        cutoff=args.cutoff,
        sample_size=args.sample,
        seed=args.seed,
        sweep_ks=sweep_ks,
        qrels=qrels,
    )
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    (out_dir / "bench.json").write_text(
        json.dumps(result.breakdown.as_dict(), indent=2, sort_keys=True) + "\n"
    )
    (out_dir / "sweep.csv").write_text("\n".join(bench_mod.sweep_csv_lines(result.sweep)) + "\n")
    if not args.no_figures:
        from . import figures

        figures.render_sweep_figure(result.sweep, out_dir / "sweep.png")
        figures.render_breakdown_figure(result.breakdown, out_dir / "breakdown.png")
    _emit(
        {
            "command": "bench",
            "queries": result.breakdown.queries,
            "query_process_mean_ms": result.breakdown.query_process.mean_ms,
            "retrieval_mean_ms": result.breakdown.retrieval.mean_ms,
            "rerank_mean_ms": result.breakdown.rerank.mean_ms,
            "total_mean_ms": result.breakdown.total_mean_ms,
            "out_dir": str(out_dir),
        }
    )
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="impact-rerank",
        description="CPU-only passage re-ranking over a per-passage term-impact index",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def vocab_args(p, stopwords=True):
        p.add_argument("--vocab", required=True, help="vocabulary file, one token per line")
        if stopwords:
            p.add_argument("--stopwords", help="stopword file (default: packaged English list)")

    p = sub.add_parser("index", help="build the BM25 index from a collection TSV")
    vocab_args(p, stopwords=False)
    p.add_argument("--collection", required=True)
    p.add_argument("--index-dir", required=True)
    p.add_argument("--k1", type=float, default=bm25.DEFAULT_K1)
    p.add_argument("--b", type=float, default=bm25.DEFAULT_B)
    p.set_defaults(func=cmd_index)

    p = sub.add_parser("expand", help="append top-likelihood tokens to every passage")
    vocab_args(p)
    p.add_argument("--collection", required=True)
    p.add_argument("--m", type=int, required=True, help="likelihood-ranked entries to scan")
    p.add_argument("--out", required=True, help="expanded collection TSV")
    p.add_argument("--stats-out", help="expansion stats JSON")
    p.add_argument("--likelihoods", help="precomputed likelihood file (LKH1)")
    p.add_argument("--cooc-corpus", help="fit the co-occurrence scorer on this TSV instead")
    p.add_argument("--strict", action="store_true")
    p.set_defaults(func=cmd_expand)

    p = sub.add_parser("train", help="train the term-weight model")
    vocab_args(p)
    p.add_argument("--collection", required=True)
    p.add_argument("--train-tsv", required=True, help="query<TAB>positive<TAB>neg,neg,... rows")
    p.add_argument("--model-out", required=True)
    p.add_argument("--steps", type=int, default=500)
    p.add_argument("--lr", type=float, default=0.05)
    p.add_argument("--batch-size", type=int, default=8)
    p.add_argument("--hard-negatives", type=int, default=7)
    p.add_argument("--dim", type=int, default=16)
    p.add_argument("--window", type=int, default=1)
    p.add_argument("--momentum", type=float, default=0.0)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("weights", help="emit per-position term weights as JSONL")
    vocab_args(p, stopwords=False)
    p.add_argument("--collection", required=True)
    p.add_argument("--model", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_weights)

    p = sub.add_parser("index-impacts", help="build the impact index from weight JSONL")
    vocab_args(p, stopwords=False)
    p.add_argument("--weights", required=True)
    p.add_argument("--index-dir", required=True)
    p.add_argument("--model-id", default="")
    p.set_defaults(func=cmd_index_impacts)

    p = sub.add_parser("rerank", help="retrieve with BM25 and rescore the top candidates")
    vocab_args(p)
    p.add_argument("--queries", required=True)
    p.add_argument("--index-dir", required=True)
    p.add_argument("--cutoff", type=int, default=1000, help="0 = no re-ranking (first stage only)")
    p.add_argument("--pool-depth", type=int, default=1000, help="first-stage depth when cutoff=0")
    p.add_argument("--out", required=True)
    p.add_argument("--run-tag", default="impact-rerank")
    p.add_argument("--strict", action="store_true")
    p.set_defaults(func=cmd_rerank)

    p = sub.add_parser("eval", help="score a run file against qrels")
    p.add_argument("--run", required=True)
    p.add_argument("--qrels", required=True)
    p.add_argument("--k", type=int, default=10)
    p.add_argument("--map-threshold", type=int, default=1)
    p.add_argument("--per-query", action="store_true")
    p.add_argument("--out")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("bench", help="latency breakdown and cut-off sweep")
    vocab_args(p)
    p.add_argument("--queries", required=True)
    p.add_argument("--index-dir", required=True)
    p.add_argument("--out-dir", required=True)
    p.add_argument("--sample", type=int, default=200)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--cutoff", type=int, default=1000)
    p.add_argument("--qrels")
    p.add_argument("--sweep-ks", help="comma-separated cut-offs (default 0,10,20,50,100,200,500,1000)")
    p.add_argument("--no-figures", action="store_true")
    p.set_defaults(func=cmd_bench)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (FileNotFoundError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (CorruptIndexError, VocabMismatchError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except Exception as exc:  # noqa: BLE001 - last-resort diagnostic
        print(f"internal error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
