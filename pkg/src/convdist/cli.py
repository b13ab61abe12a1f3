"""Command-line entry point.

One verb per procedure: ingest, embed-check, distance, align, flow, eval,
ablate, tune-alpha, sample-triplets, score-labels. Results go to stdout or
the output file; diagnostics (including --bench timings) go to stderr.
Exit codes: 0 success, 1 usage error, 2 data error.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import evaluate, triplets as triplets_mod
from .baselines import DocVectorStore
from .conved import (
    ALPHA_PRESETS,
    ConvEDConfig,
    conv_ed,
    format_conversation_alignment,
)
from .errors import ConfigError, ConvDistError
from .evaluate import MeasureSpec, PairwiseMatrix, build_pair_fn
from .ingest import ingest_msdialog, ingest_sgd
from .model import Corpus, load_corpus, parse_corpus, serialize_corpus
from .store import EmbeddingStore
from .structed import action_flow


class _Parser(argparse.ArgumentParser):
    """argparse variant that exits 1 (not 2) on usage errors."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _emit(text: str, output: str | None) -> None:
    if output is None:
        sys.stdout.write(text)
    else:
        with open(output, "w", encoding="utf-8") as fh:
            fh.write(text)


def _records(dicts) -> str:
    return "".join(json.dumps(d, ensure_ascii=False) + "\n" for d in dicts)


def _load_corpus_or_report(path: str) -> Corpus:
    with open(path, encoding="utf-8") as fh:
        result = parse_corpus(fh)
    if result.errors:
        for err in result.errors:
            print(f"{path}: {err}", file=sys.stderr)
        raise ConfigError(f"{len(result.errors)} malformed record(s) in {path}")
    return result.corpus


def _resolve_alpha(args) -> float | None:
    if getattr(args, "preset", None):
        if args.alpha is not None:
            raise ConfigError("give either --alpha or --preset, not both")
        return ALPHA_PRESETS[args.preset]
    return args.alpha


def _measure_spec(name: str, args) -> MeasureSpec:
    return MeasureSpec(
        name=name,
        alpha=_resolve_alpha(args),
        normalize=getattr(args, "normalize", "none"),
        ins_weight=getattr(args, "ins_weight", 1.0),
        del_weight=getattr(args, "del_weight", 1.0),
    )


def _load_stores(args) -> tuple[EmbeddingStore | None, DocVectorStore | None]:
    store = EmbeddingStore.load(args.embeddings) if getattr(args, "embeddings", None) else None
    docs = DocVectorStore.load(args.doc_vectors) if getattr(args, "doc_vectors", None) else None
    return store, docs


def _add_measure_args(p, multi: bool = False) -> None:
    if multi:
        p.add_argument(
            "--measure", action="append", required=True,
            choices=evaluate.MEASURE_NAMES, help="measure name (repeatable)",
        )
    else:
        p.add_argument("--measure", required=True, choices=evaluate.MEASURE_NAMES)
    p.add_argument("--alpha", type=float, help="substitution scaling factor")
    p.add_argument("--preset", choices=sorted(ALPHA_PRESETS), help="named tuned alpha")
    p.add_argument("--normalize", choices=("none", "max_length"), default="none")
    p.add_argument("--ins-weight", type=float, default=1.0, dest="ins_weight")
    p.add_argument("--del-weight", type=float, default=1.0, dest="del_weight")


def _add_io_args(p, embeddings: bool = True, docs: bool = True) -> None:
    p.add_argument("--corpus", required=True, help="canonical corpus file (JSON lines)")
    if embeddings:
        p.add_argument("--embeddings", help="utterance embedding-store file")
    if docs:
        p.add_argument("--doc-vectors", dest="doc_vectors", help="document-vector store file")
    p.add_argument("-o", "--output", help="write results here instead of stdout")


# -- parallel pair evaluation --------------------------------------------

_POOL: dict = {}


def _pool_init(corpus_path: str, emb_path: str | None, docs_path: str | None,
               spec: MeasureSpec) -> None:
    corpus = load_corpus(corpus_path)
    store = EmbeddingStore.load(emb_path) if emb_path else None
    docs = DocVectorStore.load(docs_path) if docs_path else None
    _POOL["convs"] = list(corpus)
    _POOL["pair_fn"] = build_pair_fn(spec, store=store, docs=docs)


def _pool_eval(chunk: list[tuple[int, int]]) -> list[tuple[int, int, float]]:
    convs = _POOL["convs"]
    pair_fn = _POOL["pair_fn"]
    return [(i, j, float(pair_fn(convs[i], convs[j]))) for i, j in chunk]


def _run_all_pairs(args, corpus: Corpus, spec: MeasureSpec) -> list[tuple[int, int, float]]:
    n = len(corpus)
    index_pairs = [(i, j) for i in range(n) for j in range(i + 1, n)]
    jobs = getattr(args, "jobs", 1)
    if jobs <= 1:
        store, docs = _load_stores(args)
        pair_fn = build_pair_fn(spec, store=store, docs=docs)
        convs = list(corpus)
        return [(i, j, float(pair_fn(convs[i], convs[j]))) for i, j in index_pairs]
    chunk_size = max(1, len(index_pairs) // (jobs * 8))
    chunks = [index_pairs[k : k + chunk_size] for k in range(0, len(index_pairs), chunk_size)]
    results: list[tuple[int, int, float]] = []
    with ProcessPoolExecutor(
        max_workers=jobs,
        initializer=_pool_init,
        initargs=(args.corpus, getattr(args, "embeddings", None),
                  getattr(args, "doc_vectors", None), spec),
    ) as pool:
        for part in pool.map(_pool_eval, chunks):
            results.extend(part)
    results.sort()
    return results


# -- subcommands ----------------------------------------------------------


def _cmd_ingest(args) -> int:
    if args.dataset == "sgd":
        corpus = ingest_sgd(args.path)
    else:
        corpus = ingest_msdialog(args.path)
    _emit(serialize_corpus(corpus), args.output)
    print(f"ingested {len(corpus)} conversations", file=sys.stderr)
    return 0


def _cmd_embed_check(args) -> int:
    corpus = _load_corpus_or_report(args.corpus)
    store = EmbeddingStore.load(args.embeddings)
    covered, total, missing = store.coverage(corpus)
    report = {
        "covered": covered,
        "total": total,
        "coverage": covered / total if total else 0.0,
        "dim": store.dim,
        "encoder": store.encoder,
        "missing": [
            {"conversation": cid, "utterance": idx, "text_prefix": prefix}
            for cid, idx, prefix in missing
        ],
    }
    _emit(json.dumps(report, ensure_ascii=False) + "\n", args.output)
    return 0 if covered == total else 2


def _read_pair_ids(path: str) -> list[tuple[str, str]]:
    out = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                rec = json.loads(line)
                out.append((rec["id1"], rec["id2"]))
            except (json.JSONDecodeError, KeyError, TypeError):
                raise ConfigError(f"{path}:{lineno}: expected {{\"id1\":..., \"id2\":...}}")
    return out


def _cmd_distance(args) -> int:
    t0 = time.perf_counter()
    corpus = _load_corpus_or_report(args.corpus)
    spec = _measure_spec(args.measure, args)
    if args.bench and args.jobs > 1:
        raise ConfigError("--bench needs --jobs 1 for meaningful per-pair timings")
    records: list[dict] = []
    pair_ms: list[float] = []
    if args.pairs == "all":
        setup_ms = (time.perf_counter() - t0) * 1000.0
        if args.bench:
            store, docs = _load_stores(args)
            pair_fn = build_pair_fn(spec, store=store, docs=docs)
            setup_ms = (time.perf_counter() - t0) * 1000.0
            convs = list(corpus)
            triples = []
            for i in range(len(convs)):
                for j in range(i + 1, len(convs)):
                    t1 = time.perf_counter()
                    d = float(pair_fn(convs[i], convs[j]))
                    pair_ms.append((time.perf_counter() - t1) * 1000.0)
                    triples.append((i, j, d))
        else:
            triples = _run_all_pairs(args, corpus, spec)
        ids = corpus.ids()
        records = [
            {"id1": ids[i], "id2": ids[j], "distance": d} for i, j, d in triples
        ]
    else:
        store, docs = _load_stores(args)
        pair_fn = build_pair_fn(spec, store=store, docs=docs)
        setup_ms = (time.perf_counter() - t0) * 1000.0
        for id1, id2 in _read_pair_ids(args.pairs):
            t1 = time.perf_counter()
            d = float(pair_fn(corpus.get(id1), corpus.get(id2)))
            if args.bench:
                pair_ms.append((time.perf_counter() - t1) * 1000.0)
            records.append({"id1": id1, "id2": id2, "distance": d})
    _emit(_records(records), args.output)
    if args.bench and pair_ms:
        arr = np.asarray(pair_ms)
        summary = {
            "setup_ms": setup_ms,
            "n_pairs": len(pair_ms),
            "pair_ms_mean": float(arr.mean()),
            "pair_ms_min": float(arr.min()),
            "pair_ms_max": float(arr.max()),
            "end_to_end_ms": (time.perf_counter() - t0) * 1000.0,
        }
        print(json.dumps(summary), file=sys.stderr)
    return 0


def _cmd_align(args) -> int:
    corpus = _load_corpus_or_report(args.corpus)
    store = EmbeddingStore.load(args.embeddings)
    alpha = _resolve_alpha(args)
    if alpha is None:
        raise ConfigError("align needs --alpha or --preset")
    cfg = ConvEDConfig(
        alpha=alpha,
        enforce_actor=not args.relax_actor,
        normalize=args.normalize,
        ins_weight=args.ins_weight,
        del_weight=args.del_weight,
    )
    c1 = corpus.get(args.id1)
    c2 = corpus.get(args.id2)
    result = conv_ed(c1, c2, store, cfg)
    _emit(format_conversation_alignment(c1, c2, result, width=args.width) + "\n", args.output)
    return 0


def _cmd_flow(args) -> int:
    corpus = _load_corpus_or_report(args.corpus)
    flow = action_flow(corpus.get(args.conv_id))
    _emit("".join(f"{tok}\n" for tok in flow.tokens), args.output)
    return 0


def _bootstrap_measures(args, corpus: Corpus) -> tuple[list, list[dict]]:
    store, docs = _load_stores(args)
    ref_spec = MeasureSpec(name=args.against, alpha=_resolve_alpha(args)
                           if args.against.startswith("conved") else None,
                           normalize=args.normalize)
    ref_matrix = evaluate.pairwise_matrix(
        corpus, build_pair_fn(ref_spec, store=store, docs=docs), measure=args.against
    )
    reports = []
    for name in args.measure:
        spec = _measure_spec(name, args)
        matrix = evaluate.pairwise_matrix(
            corpus, build_pair_fn(spec, store=store, docs=docs), measure=name
        )
        reports.append(
            evaluate.bootstrap_from_matrices(
                matrix, ref_matrix,
                n_samples=args.samples, sample_size=args.size, seed=args.seed,
                normalize=args.normalize,
            )
        )
    sig = []
    for other in reports[1:]:
        sig.append({
            "a": reports[0].measure,
            "b": other.measure,
            "p_value": evaluate.significance_test(
                reports[0].per_sample_r, other.per_sample_r
            ),
        })
    return reports, sig


def _eval_table(reports, sig, args) -> str:
    lines = [
        f"reference: {args.against}   samples: {args.samples} x {args.size}   "
        f"seed: {args.seed}   normalize: {args.normalize}"
    ]
    sig_by_name = {s["b"]: s["p_value"] for s in sig}
    lines.append(f"{'measure':<18} {'mean r':>8}")
    for rep in reports:
        mark = ""
        p = sig_by_name.get(rep.measure)
        if p is not None and p < args.sig_level:
            mark = " **"
        lines.append(f"{rep.measure:<18} {rep.mean_r:>8.3f}{mark}")
    if len(reports) > 1:
        lines.append(
            f"(** differs from {reports[0].measure} at p < {args.sig_level}, Welch t-test)"
        )
    return "\n".join(lines) + "\n"


def _cmd_eval(args) -> int:
    corpus = _load_corpus_or_report(args.corpus)
    reports, sig = _bootstrap_measures(args, corpus)
    if args.format == "table":
        _emit(_eval_table(reports, sig, args), args.output)
    else:
        out = [r.to_dict() for r in reports] + sig
        _emit(_records(out), args.output)
    return 0


def _cmd_ablate(args) -> int:
    corpus = _load_corpus_or_report(args.corpus)
    store = EmbeddingStore.load(args.embeddings)
    alpha = _resolve_alpha(args)
    if alpha is None:
        raise ConfigError("ablate needs --alpha or --preset")
    enforced, relaxed = evaluate.ablate_actor(
        corpus, store, alpha,
        n_samples=args.samples, sample_size=args.size, seed=args.seed,
        normalize=args.normalize,
    )
    p = evaluate.significance_test(enforced.per_sample_r, relaxed.per_sample_r)
    out = [enforced.to_dict(), relaxed.to_dict(), {
        "a": enforced.measure, "b": relaxed.measure,
        "delta_mean_r": enforced.mean_r - relaxed.mean_r, "p_value": p,
    }]
    _emit(_records(out), args.output)
    return 0


def _cmd_tune_alpha(args) -> int:
    corpus = _load_corpus_or_report(args.corpus)
    store = EmbeddingStore.load(args.embeddings)
    grid = None
    if args.grid_start is not None or args.grid_stop is not None or args.grid_step is not None:
        start = args.grid_start if args.grid_start is not None else 1.0
        stop = args.grid_stop if args.grid_stop is not None else 5.0
        step = args.grid_step if args.grid_step is not None else 0.1
        if step <= 0 or stop < start:
            raise ConfigError("invalid alpha grid")
        count = int(round((stop - start) / step)) + 1
        grid = [round(start + k * step, 10) for k in range(count)]
    result = evaluate.tune_alpha(
        corpus, store, alpha_grid=grid, enforce_actor=not args.relax_actor,
        ins_weight=args.ins_weight, del_weight=args.del_weight,
    )
    _emit(json.dumps(result.to_dict(), ensure_ascii=False) + "\n", args.output)
    return 0


def _cmd_sample_triplets(args) -> int:
    corpus = _load_corpus_or_report(args.corpus)
    if len(args.measure) != 2:
        raise ConfigError("sample-triplets needs exactly two --measure values")
    store, docs = _load_stores(args)
    matrices: list[PairwiseMatrix] = []
    for name in args.measure:
        spec = _measure_spec(name, args)
        matrices.append(
            evaluate.pairwise_matrix(
                corpus, build_pair_fn(spec, store=store, docs=docs), measure=name
            )
        )
    sample = triplets_mod.sample_disagreement_triplets(
        matrices[0], matrices[1], n=args.n, seed=args.seed,
        max_draws=args.max_draws,
    )
    records = triplets_mod.triplet_records(
        sample, corpus=corpus, for_annotation=args.for_annotation
    )
    _emit(_records(records), args.output)
    print(json.dumps(sample.to_dict()), file=sys.stderr)
    return 0


def _cmd_score_labels(args) -> int:
    corpus = _load_corpus_or_report(args.corpus)
    store, docs = _load_stores(args)
    spec = _measure_spec(args.measure, args)
    pair_fn = build_pair_fn(spec, store=store, docs=docs)
    with open(args.triplets, encoding="utf-8") as fh:
        trips = [json.loads(line) for line in fh if line.strip()]
    with open(args.labels, encoding="utf-8") as fh:
        labels = triplets_mod.parse_labels(fh)
    report = triplets_mod.agreement_ratio(
        trips, labels, pair_fn, corpus,
        measure=args.measure, min_agreement=args.min_agreement,
    )
    _emit(json.dumps(report.to_dict(), ensure_ascii=False) + "\n", args.output)
    return 0


def build_parser() -> _Parser:
    parser = _Parser(prog="convdist", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest", help="convert a native dataset to the canonical format")
    p.add_argument("dataset", choices=("sgd", "msdialog"))
    p.add_argument("path", help="dataset directory (sgd) or file (msdialog)")
    p.add_argument("-o", "--output")
    p.set_defaults(fn=_cmd_ingest)

    p = sub.add_parser("embed-check", help="verify store coverage of a corpus")
    _add_io_args(p, docs=False)
    p.set_defaults(fn=_cmd_embed_check)

    p = sub.add_parser("distance", help="pairwise distances as JSON records")
    _add_io_args(p)
    _add_measure_args(p)
    p.add_argument("--pairs", default="all", help="'all' or a JSONL file of {id1, id2}")
    p.add_argument("--jobs", type=int, default=1, help="parallel pair-evaluation workers")
    p.add_argument("--bench", action="store_true", help="report per-pair wall time on stderr")
    p.set_defaults(fn=_cmd_distance)

    p = sub.add_parser("align", help="side-by-side alignment of two conversations")
    _add_io_args(p, docs=False)
    p.add_argument("id1")
    p.add_argument("id2")
    p.add_argument("--alpha", type=float)
    p.add_argument("--preset", choices=sorted(ALPHA_PRESETS))
    p.add_argument("--relax-actor", action="store_true", dest="relax_actor")
    p.add_argument("--normalize", choices=("none", "max_length"), default="none")
    p.add_argument("--ins-weight", type=float, default=1.0, dest="ins_weight")
    p.add_argument("--del-weight", type=float, default=1.0, dest="del_weight")
    p.add_argument("--width", type=int, default=46)
    p.set_defaults(fn=_cmd_align)

    p = sub.add_parser("flow", help="print a conversation's action-flow tokens")
    p.add_argument("--corpus", required=True)
    p.add_argument("conv_id")
    p.add_argument("-o", "--output")
    p.set_defaults(fn=_cmd_flow)

    p = sub.add_parser("eval", help="bootstrap correlation against a reference measure")
    _add_io_args(p)
    _add_measure_args(p, multi=True)
    p.add_argument("--against", default="structed", choices=evaluate.MEASURE_NAMES)
    p.add_argument("--samples", type=int, default=100)
    p.add_argument("--size", type=int, default=200)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--format", choices=("records", "table"), default="records")
    p.add_argument("--sig-level", type=float, default=0.001, dest="sig_level")
    p.set_defaults(fn=_cmd_eval)

    p = sub.add_parser("ablate", help="bootstrap with and without the actor constraint")
    _add_io_args(p, docs=False)
    p.add_argument("--alpha", type=float)
    p.add_argument("--preset", choices=sorted(ALPHA_PRESETS))
    p.add_argument("--samples", type=int, default=100)
    p.add_argument("--size", type=int, default=200)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--normalize", choices=("none", "max_length"), default="none")
    p.set_defaults(fn=_cmd_ablate)

    p = sub.add_parser("tune-alpha", help="grid-search alpha against the structural metric")
    _add_io_args(p, docs=False)
    p.add_argument("--grid-start", type=float, dest="grid_start")
    p.add_argument("--grid-stop", type=float, dest="grid_stop")
    p.add_argument("--grid-step", type=float, dest="grid_step")
    p.add_argument("--relax-actor", action="store_true", dest="relax_actor")
    p.add_argument("--ins-weight", type=float, default=1.0, dest="ins_weight")
    p.add_argument("--del-weight", type=float, default=1.0, dest="del_weight")
    p.set_defaults(fn=_cmd_tune_alpha)

    p = sub.add_parser("sample-triplets", help="export triplets where two measures disagree")
    _add_io_args(p)
    _add_measure_args(p, multi=True)
    p.add_argument("-n", type=int, required=True, help="disagreement triplets to collect")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--max-draws", type=int, dest="max_draws")
    p.add_argument("--for-annotation", action="store_true", dest="for_annotation",
                   help="include full texts, withhold verdicts")
    p.set_defaults(fn=_cmd_sample_triplets)

    p = sub.add_parser("score-labels", help="agreement of a measure with human labels")
    _add_io_args(p)
    _add_measure_args(p)
    p.add_argument("--triplets", required=True, help="triplet export file")
    p.add_argument("--labels", required=True, help="labels file: {triplet_id, chosen, agreement}")
    p.add_argument("--min-agreement", type=float, default=0.8, dest="min_agreement")
    p.set_defaults(fn=_cmd_score_labels)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.fn(args)
    except ConvDistError as exc:
        print(f"convdist: error: {exc}", file=sys.stderr)
        return 2
    except FileNotFoundError as exc:
        print(f"convdist: error: {exc}", file=sys.stderr)
        return 2
    except KeyError as exc:
        print(f"convdist: error: {exc.args[0] if exc.args else exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
