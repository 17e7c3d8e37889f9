"""End-to-end convergence experiment on a synthetic collection.

Generates a corpus, runs a pipeline grid over the incremental snapshot
chain, and renders the three convergence views: per-system mean relative
difference by version, Kendall's tau-b of system rankings against the
final version, and boxplots of pooled per-topic relative differences.

    python3 scripts/convergence_experiment.py --out-dir /tmp/convergence \
        --docs 2000 --topics 50 --bundles 10

Writes the measure matrix, the three CSVs, and (with matplotlib
installed) one PNG per view.
"""

from __future__ import annotations

import argparse
import io
import time
from pathlib import Path

from aviator.analysis import (
    convergence_report,
    grid_run,
    write_boxplot_csv,
    write_matrix_csv,
    write_reldiff_csv,
    write_tau_csv,
)
from aviator.bundles import plan_bundles
from aviator.synth import SynthSpec, generate
from aviator.textproc import Pipeline


def parse_args() -> argparse.Namespace:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out-dir", type=Path, default=Path("convergence-out"))
    parser.add_argument("--docs", type=int, default=2000)
    parser.add_argument("--vocab", type=int, default=3000)
    parser.add_argument("--topics", type=int, default=50)
    parser.add_argument("--relevant-per-topic", type=int, default=10)
    parser.add_argument("--bundles", type=int, default=10)
    parser.add_argument("--seed", type=int, default=7)
    parser.add_argument("--measure", default="ndcg")
    parser.add_argument("--stoplist", default="nostop,lucene")
    parser.add_argument("--stemmer", default="nostem,porter")
    parser.add_argument("--model", default="bm25,tfidf,dirichlet_lm,boolean")
    parser.add_argument("--no-plots", action="store_true")
    return parser.parse_args()


def main() -> None:
    args = parse_args()
    args.out_dir.mkdir(parents=True, exist_ok=True)

    t0 = time.perf_counter()
    docs, topics, qrels = generate(
        SynthSpec(
            n_docs=args.docs,
            vocab_size=args.vocab,
            n_topics=args.topics,
            relevant_per_topic=args.relevant_per_topic,
            seed=args.seed,
        )
    )
    plan = plan_bundles([d.doc_id for d in docs], args.bundles, args.seed)
    pipelines = [
        Pipeline(stop, stem, model)
        for stop in args.stoplist.split(",")
        for stem in args.stemmer.split(",")
        for model in args.model.split(",")
    ]
    print(f"{len(docs)} docs, {len(topics)} topics, {len(pipelines)} pipelines, "
          f"{args.bundles} bundles")

    matrix = grid_run(pipelines, topics, qrels, plan, docs, measure=args.measure)
    report = convergence_report(matrix)
    print(f"grid + report: {time.perf_counter() - t0:.1f}s "
          f"({matrix.chains_built} index chains)")

    for name, writer, payload in (
        ("measure_matrix.csv", write_matrix_csv, matrix),
        ("reldiff_by_system.csv", write_reldiff_csv, report),
        ("tau_by_version.csv", write_tau_csv, report),
        ("boxplot_by_version.csv", write_boxplot_csv, report),
    ):
        buf = io.StringIO()
        writer(payload, buf)
        (args.out_dir / name).write_text(buf.getvalue())

    versions = matrix.versions
    taus = [report.tau_by_version[v] for v in versions]
    print("tau by version:", " ".join(f"{t:.3f}" for t in taus))

    if not args.no_plots:
        try:
            import matplotlib

            matplotlib.use("Agg")
            import matplotlib.pyplot as plt
        except ImportError:
            print("matplotlib unavailable; skipping plots")
            return

        percent = [100 * v / len(versions) for v in versions]

        fig, ax = plt.subplots(figsize=(7, 4))
        for pid in matrix.pipelines:
            ax.plot(percent, [report.reldiff_by_system[(pid, v)] for v in versions],
                    linewidth=0.8, alpha=0.6)
        ax.set_xlabel("index size (%)")
        ax.set_ylabel(f"mean {report.measure} relative difference")
        ax.axhline(0, color="black", linewidth=0.5)
        fig.tight_layout()
        fig.savefig(args.out_dir / "reldiff_by_system.png", dpi=130)

        fig, ax = plt.subplots(figsize=(7, 4))
        ax.plot(percent, taus, marker="o")
        ax.axhline(0.8, color="red", linestyle="--", linewidth=0.8,
                   label="high-correlation rule of thumb")
        ax.set_xlabel("index size (%)")
        ax.set_ylabel("Kendall tau-b vs final ranking")
        ax.legend()
        fig.tight_layout()
        fig.savefig(args.out_dir / "tau_by_version.png", dpi=130)

        fig, ax = plt.subplots(figsize=(7, 4))
        boxes = [
            {
                "whislo": report.boxplot_by_version[v][0],
                "q1": report.boxplot_by_version[v][1],
                "med": report.boxplot_by_version[v][2],
                "q3": report.boxplot_by_version[v][3],
                "whishi": report.boxplot_by_version[v][4],
                "label": str(v),
            }
            for v in versions
        ]
        ax.bxp(boxes, showfliers=False)
        ax.set_xlabel("bundle version")
        ax.set_ylabel(f"per-topic {report.measure} relative difference")
        fig.tight_layout()
        fig.savefig(args.out_dir / "boxplot_by_version.png", dpi=130)
        print(f"plots written to {args.out_dir}")


if __name__ == "__main__":
    main()
