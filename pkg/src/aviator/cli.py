"""Command-line entry point.

Subcommands mirror the engine's phases: `synth` emits a synthetic test
collection, `bundle` plans the corpus partition, `index` builds the
incremental snapshot chain for one preprocessing pair, `grid` runs the
pipeline grid and writes the measure matrix, `analyze` turns a matrix
into the three convergence CSVs, and `serve` starts the HTTP service.
"""

from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path

from . import analysis, corpus_io, index_core, synth
from .bundles import DEFAULT_BUNDLE_COUNT, plan_bundles, read_plan, write_plan
from .errors import AviatorError
from .index_core import empty_snapshot, index_bundle, merge
from .service import DATA_DIR_ENV
from .textproc import MODEL_IDS, STOPLIST_IDS, Pipeline


def _add_collection_args(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--corpus", required=True, help="TREC document file")
    parser.add_argument("--topics", required=True, help="TREC topic file")
    parser.add_argument("--qrels", required=True, help="4-column qrels file")


def cmd_synth(args: argparse.Namespace) -> int:
    spec = synth.SynthSpec(
        n_docs=args.docs,
        vocab_size=args.vocab,
        n_topics=args.topics,
        relevant_per_topic=args.relevant_per_topic,
        seed=args.seed,
    )
    documents, topics, qrels = synth.generate(spec)
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    with open(out / "corpus.sgml", "w", encoding="utf-8") as fh:
        corpus_io.write_trec_documents(documents, fh)
    with open(out / "topics.txt", "w", encoding="utf-8") as fh:
        corpus_io.write_topics(topics, fh)
    with open(out / "qrels.txt", "w", encoding="utf-8") as fh:
        corpus_io.write_qrels(qrels, fh)
    print(f"wrote {len(documents)} docs, {len(topics)} topics to {out}")
    return 0


def cmd_bundle(args: argparse.Namespace) -> int:
    docs = corpus_io.parse_trec_documents(Path(args.corpus).read_bytes())
    plan = plan_bundles([d.doc_id for d in docs], args.bundles, args.seed)
    with open(args.out, "w", encoding="utf-8") as fh:
        write_plan(plan, fh)
    print(f"planned {plan.n} bundles over {plan.corpus_size} docs -> {args.out}")
    return 0


def cmd_index(args: argparse.Namespace) -> int:
    docs = corpus_io.parse_trec_documents(Path(args.corpus).read_bytes())
    if args.plan:
        plan = read_plan(Path(args.plan).read_text(encoding="utf-8"))
    else:
        plan = plan_bundles([d.doc_id for d in docs], args.bundles, args.seed)
    pipeline = Pipeline(args.stoplist, args.stemmer, "bm25")
    by_id = {d.doc_id: d for d in docs}
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    snapshot = empty_snapshot()
    for version in range(1, plan.n + 1):
        members = sorted(plan.bundle_members(version))
        segment = index_bundle(
            [by_id[d] for d in members], pipeline, bundle_index=version
        )
        index_core.write_segment(segment, out / f"segment-{version:03d}.seg")
        snapshot = merge(snapshot, segment)
        print(index_core.snapshot_stats_json(snapshot))
    return 0


def _grid_pipelines(args: argparse.Namespace) -> list[Pipeline]:
    return [
        Pipeline(stoplist, stemmer, model)
        for stoplist in args.stoplist.split(",")
        for stemmer in args.stemmer.split(",")
        for model in args.model.split(",")
    ]


def cmd_grid(args: argparse.Namespace) -> int:
    docs = corpus_io.parse_trec_documents(Path(args.corpus).read_bytes())
    topics = corpus_io.parse_topics(Path(args.topics).read_bytes())
    qrels = corpus_io.parse_qrels(Path(args.qrels).read_bytes())
    if args.plan:
        plan = read_plan(Path(args.plan).read_text(encoding="utf-8"))
    else:
        plan = plan_bundles([d.doc_id for d in docs], args.bundles, args.seed)
    pipelines = _grid_pipelines(args)
    matrix = analysis.grid_run(
        pipelines, topics, qrels, plan, docs, measure=args.measure
    )
    with open(args.out, "w", encoding="utf-8") as fh:
        analysis.write_matrix_csv(matrix, fh)
    print(
        f"grid of {len(pipelines)} pipelines x {plan.n} versions "
        f"({matrix.chains_built} index chains) -> {args.out}"
    )
    return 0


def cmd_analyze(args: argparse.Namespace) -> int:
    matrix = analysis.read_matrix_csv(
        Path(args.matrix).read_text(encoding="utf-8"), measure=args.measure
    )
    report = analysis.convergence_report(matrix)
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    for name, writer in (
        ("reldiff_by_system.csv", analysis.write_reldiff_csv),
        ("tau_by_version.csv", analysis.write_tau_csv),
        ("boxplot_by_version.csv", analysis.write_boxplot_csv),
    ):
        with open(out / name, "w", encoding="utf-8") as fh:
            writer(report, fh)
    print(f"convergence report for {report.measure} -> {out}")
    return 0


def cmd_serve(args: argparse.Namespace) -> int:
    import uvicorn

    from .service import create_app

    data_dir = args.data_dir or os.environ.get(DATA_DIR_ENV)
    app = create_app(data_dir, default_replay_speedup=args.replay_speedup)
    uvicorn.run(app, host=args.host, port=args.port, log_level="info")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="aviator",
        description="progressive IR evaluation over an incrementally built index",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", help="generate a synthetic test collection")
    p.add_argument("--out-dir", required=True)
    p.add_argument("--docs", type=int, default=1000)
    p.add_argument("--vocab", type=int, default=2000)
    p.add_argument("--topics", type=int, default=50)
    p.add_argument("--relevant-per-topic", type=int, default=10)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(fn=cmd_synth)

    p = sub.add_parser("bundle", help="plan the bundle partition")
    p.add_argument("--corpus", required=True)
    p.add_argument("--bundles", type=int, default=DEFAULT_BUNDLE_COUNT)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(fn=cmd_bundle)

    p = sub.add_parser("index", help="build the incremental snapshot chain")
    p.add_argument("--corpus", required=True)
    p.add_argument("--plan", help="bundle plan file (else computed)")
    p.add_argument("--bundles", type=int, default=DEFAULT_BUNDLE_COUNT)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--stoplist", default="nostop", choices=STOPLIST_IDS)
    p.add_argument("--stemmer", default="nostem")
    p.add_argument("--out-dir", required=True)
    p.set_defaults(fn=cmd_index)

    p = sub.add_parser("grid", help="run a pipeline grid, write the measure matrix")
    _add_collection_args(p)
    p.add_argument("--plan", help="bundle plan file (else computed)")
    p.add_argument("--bundles", type=int, default=DEFAULT_BUNDLE_COUNT)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--stoplist", default="nostop,lucene",
                   help="comma-separated stoplist ids")
    p.add_argument("--stemmer", default="nostem,porter",
                   help="comma-separated stemmer ids")
    p.add_argument("--model", default=",".join(MODEL_IDS),
                   help="comma-separated model ids")
    p.add_argument("--measure", default="ndcg")
    p.add_argument("--out", required=True)
    p.set_defaults(fn=cmd_grid)

    p = sub.add_parser("analyze", help="convergence report from a measure matrix")
    p.add_argument("--matrix", required=True)
    p.add_argument("--measure", default="ndcg")
    p.add_argument("--out-dir", required=True)
    p.set_defaults(fn=cmd_analyze)

    p = sub.add_parser("serve", help="start the HTTP service")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8000)
    p.add_argument("--data-dir", help=f"session persistence dir (or ${DATA_DIR_ENV})")
    p.add_argument("--replay-speedup", type=float, default=None,
                   help="replay speedup applied to sessions that enable "
                        "replay without choosing a factor")
    p.set_defaults(fn=cmd_serve)

    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except AviatorError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
