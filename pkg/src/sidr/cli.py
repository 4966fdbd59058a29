"""Command-line entry points: simulate, bench, serve, project, make-data.

Every run prints its resolved configuration (seeds included) as one JSON
line before doing any work, so each written artifact can be reproduced
from the printed line alone.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from pathlib import Path

from .corpus import (
    Corpus,
    CorpusError,
    bundled_corpus,
    embed_tfidf,
    load_corpus,
    save_corpus,
    synth_clusters,
)
from .mds import MdsConfig
from .pipelines import PIPELINES, PipelineConfig, forward, init_state
from .simeval import (
    SimConfig,
    complexity_exponent,
    export_results,
    export_stage_timers,
    run_learning_curve,
    run_timing_benchmark,
)


def _print_config(command: str, **resolved) -> None:
    print(json.dumps({"command": command, **resolved}, sort_keys=True))


def _load_corpus_arg(path: str) -> Corpus:
    p = Path(path)
    if not p.exists():
        print(f"error: corpus file not found: {path}", file=sys.stderr)
        raise SystemExit(2)
    fmt = "csv" if p.suffix.lower() == ".csv" else "jsonl"
    corpus = load_corpus(p, fmt=fmt)
    if not corpus.is_vectorized:
        corpus = embed_tfidf(corpus, 128, clamp_rank=True)
    return corpus


def _pipe_config(args) -> PipelineConfig:
    return PipelineConfig(
        lr=args.lr,
        epochs_per_update=args.epochs,
        mds=MdsConfig(max_iters=args.mds_iters),
        head_init=args.head_init,
        seed=args.seed,
        hidden=args.hidden,
    )


def _add_pipe_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--lr", type=float, default=1e-3)
    parser.add_argument("--epochs", type=int, default=50, help="Adam epochs per update")
    parser.add_argument("--mds-iters", type=int, default=300)
    parser.add_argument("--head-init", choices=["mds_based", "random"], default="mds_based")
    parser.add_argument("--hidden", type=int, default=64)
    parser.add_argument("--seed", type=int, default=0)


def cmd_simulate(args) -> int:
    corpus = _load_corpus_arg(args.corpus)
    pipe_cfg = _pipe_config(args)
    sim_cfg = SimConfig(
        per_class=args.per_class,
        iterations=args.iterations,
        jitter=args.jitter,
        knn_k=args.knn_k,
        seed=args.seed,
    )
    _print_config(
        "simulate",
        corpus=args.corpus,
        pipeline=args.pipeline,
        iterations=args.iterations,
        seed=args.seed,
        per_class=args.per_class,
        jitter=args.jitter,
        knn_k=args.knn_k,
        lr=args.lr,
        epochs=args.epochs,
        mds_iters=args.mds_iters,
        head_init=args.head_init,
        hidden=args.hidden,
        out=args.out,
    )
    curve = run_learning_curve(args.pipeline, corpus, sim_cfg, pipe_cfg)
    export_results(curve, args.out, fmt="csv")
    print(f"wrote {args.out} ({len(curve.accuracies)} rows, final accuracy {curve.accuracies[-1]:.3f})")
    return 0


def cmd_bench(args) -> int:
    sizes = [int(s) for s in args.sizes.split(",")]
    if any(s < 1 for s in sizes):
        print("error: sizes must be positive integers", file=sys.stderr)
        raise SystemExit(2)
    pipelines = args.pipelines.split(",")
    for p in pipelines:
        if p not in PIPELINES:
            print(f"error: unknown pipeline {p!r}", file=sys.stderr)
            raise SystemExit(2)
    _print_config(
        "bench",
        sizes=sizes,
        repeats=args.repeats,
        pipelines=pipelines,
        seed=args.seed,
        k=args.k,
        dim=args.dim,
        spread=args.spread,
        lr=args.lr,
        epochs=args.epochs,
        mds_iters=args.mds_iters,
        out=args.out,
    )

    def family(n: int) -> Corpus:
        return synth_clusters(args.k, max(1, n // args.k), args.dim, args.spread, args.seed)

    pipe_cfg = PipelineConfig(
        lr=args.lr,
        epochs_per_update=args.epochs,
        mds=MdsConfig(max_iters=args.mds_iters),
        seed=args.seed,
        hidden=args.hidden,
    )
    table = run_timing_benchmark(
        pipelines,
        family,
        sizes=sizes,
        repeats=args.repeats,
        sim_cfg=SimConfig(seed=args.seed),
        pipe_cfg=pipe_cfg,
    )
    export_results(table, args.out, fmt="csv")
    stages_path = Path(args.out).with_suffix(".stages.json")
    export_stage_timers(table, stages_path)
    for p in pipelines:
        if len(sizes) >= 2:
            print(f"{p}: log-log time exponent {complexity_exponent(table, p):.3f}")
    print(f"wrote {args.out} and {stages_path}")
    return 0


def cmd_project(args) -> int:
    corpus = _load_corpus_arg(args.corpus)
    pipe_cfg = _pipe_config(args)
    _print_config(
        "project",
        corpus=args.corpus,
        pipeline=args.pipeline,
        seed=args.seed,
        lr=args.lr,
        mds_iters=args.mds_iters,
        head_init=args.head_init,
        hidden=args.hidden,
        out=args.out,
    )
    state = init_state(corpus, args.pipeline, pipe_cfg)
    proj = forward(state, corpus)
    with open(args.out, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["id", "x", "y", "label"])
        for doc, (x, y) in zip(corpus.docs, proj.positions):
            writer.writerow([doc.id, repr(float(x)), repr(float(y)), doc.label])
    print(f"wrote {args.out} ({len(corpus)} rows)")
    return 0


def cmd_serve(args) -> int:
    import uvicorn

    from .service import create_app

    _print_config("serve", host=args.host, port=args.port)
    uvicorn.run(create_app(register_bundled=True), host=args.host, port=args.port)
    return 0


def cmd_make_data(args) -> int:
    if args.kind == "synth":
        _print_config(
            "make-data",
            kind="synth",
            k=args.k,
            n_per=args.n_per,
            dim=args.dim,
            spread=args.spread,
            seed=args.seed,
            out=args.out,
        )
        corpus = synth_clusters(args.k, args.n_per, args.dim, args.spread, args.seed)
    else:
        _print_config(
            "make-data",
            kind="tfidf",
            input=args.input,
            target_dim=args.target_dim,
            out=args.out,
        )
        if args.input in ("articles4", "notes3"):
            raw = bundled_corpus(args.input)
        else:
            p = Path(args.input)
            if not p.exists():
                print(f"error: input file not found: {args.input}", file=sys.stderr)
                raise SystemExit(2)
            raw = load_corpus(p, fmt="jsonl")
        corpus = embed_tfidf(raw, args.target_dim)
    save_corpus(corpus, args.out)
    print(f"wrote {args.out} ({len(corpus)} docs, dim {corpus.dim})")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="sidr", description="semantic-interaction engine: simulate, bench, serve"
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="run a simulated-analyst learning curve")
    p.add_argument("--corpus", required=True)
    p.add_argument("--pipeline", choices=PIPELINES, required=True)
    p.add_argument("--iterations", type=int, default=200)
    p.add_argument("--per-class", type=int, default=3)
    p.add_argument("--jitter", type=float, default=0.02)
    p.add_argument("--knn-k", type=int, default=5)
    p.add_argument("--out", required=True)
    _add_pipe_flags(p)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("bench", help="time update+refresh cycles across data sizes")
    p.add_argument("--sizes", default="100,200,500,1000")
    p.add_argument("--repeats", type=int, default=20)
    p.add_argument("--pipelines", default="deepsi,neuralsi")
    p.add_argument("--k", type=int, default=4, help="classes in the synthetic corpora")
    p.add_argument("--dim", type=int, default=32)
    p.add_argument("--spread", type=float, default=0.1)
    p.add_argument("--out", required=True)
    _add_pipe_flags(p)
    p.set_defaults(func=cmd_bench, mds_iters=100)

    p = sub.add_parser("project", help="one-shot layout export")
    p.add_argument("--corpus", required=True)
    p.add_argument("--pipeline", choices=PIPELINES, required=True)
    p.add_argument("--out", required=True)
    _add_pipe_flags(p)
    p.set_defaults(func=cmd_project)

    p = sub.add_parser("serve", help="start the HTTP session service")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8000)
    p.set_defaults(func=cmd_serve)

    p = sub.add_parser("make-data", help="generate or vectorize a corpus")
    p.add_argument("--kind", choices=["synth", "tfidf"], required=True)
    p.add_argument("--k", type=int, default=3)
    p.add_argument("--n-per", type=int, default=50)
    p.add_argument("--dim", type=int, default=32)
    p.add_argument("--spread", type=float, default=0.1)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--input", help="JSONL with text rows, or a bundled corpus name")
    p.add_argument("--target-dim", type=int, default=128)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_make_data)

    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "make-data" and args.kind == "tfidf" and not args.input:
        print("error: --input is required for --kind tfidf", file=sys.stderr)
        return 2
    try:
        return args.func(args)
    except CorpusError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    raise SystemExit(main())
