"""Convergence of partial-index results toward full-index results.

Three views, all derived from one measure matrix filled by the grid
runner: per-system mean relative differences against the final version,
Kendall's tau-b between the system ranking at each version and at the
final version, and five-number boxplot summaries of per-topic relative
differences pooled across systems.

Relative difference is (partial - full)/full. The 0/0 case is defined as
0; a nonzero partial against a zero full value is undefined and excluded
from every aggregate (represented as NaN).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import IO, Iterable, Mapping, Sequence

import numpy as np

from .bundles import BundlePlan
from .corpus_io import Document, Qrels, Topic, topic_sort_key
from .errors import AviatorError
from .evaluation import MeasureSpec, evaluate_run, parse_measure
from .index_core import empty_snapshot, index_bundle, merge
from .retrieval import run_batch
from .textproc import Pipeline


class MismatchedIdSets(AviatorError):
    pass


class IncompleteMatrix(AviatorError):
    pass


def relative_difference(partial: float, full: float) -> float:
    """(partial - full)/full; 0 when both are 0, NaN (undefined, excluded
    from aggregates) when only full is 0."""
    if full == 0.0:
        return 0.0 if partial == 0.0 else math.nan
    return (partial - full) / full


def kendall_tau(a: Mapping[str, float], b: Mapping[str, float]) -> float:
    """Kendall's tau-b between two score assignments over the same ids.

    Counts concordant pairs C, discordant pairs D, and pairs tied in only
    one of the two assignments (Ta/Tb); pairs tied in both count in
    neither. tau-b = (C - D)/sqrt((C + D + Ta)(C + D + Tb)).
    """
    if set(a) != set(b):
        raise MismatchedIdSets(
            f"ids differ: {sorted(set(a) ^ set(b))[:5]} ..."
        )
    ids = sorted(a)
    if all(a[i] == b[i] for i in ids):
        return 1.0  # identical assignments correlate perfectly, by convention
    concordant = discordant = ties_a_only = ties_b_only = 0
    for i in range(len(ids)):
        for j in range(i + 1, len(ids)):
            da = a[ids[i]] - a[ids[j]]
            db = b[ids[i]] - b[ids[j]]
            if da == 0 and db == 0:
                continue
            if da == 0:
                ties_a_only += 1
            elif db == 0:
                ties_b_only += 1
            elif (da > 0) == (db > 0):
                concordant += 1
            else:
                discordant += 1
    denom = math.sqrt(
        (concordant + discordant + ties_a_only)
        * (concordant + discordant + ties_b_only)
    )
    if denom == 0:
        return math.nan  # at least one side is constant; tau undefined
    return (concordant - discordant) / denom


def ranking_from_scores(scores: Mapping[str, float]) -> list[str]:
    """Ids by score descending, id ascending on ties."""
    return sorted(scores, key=lambda s: (-scores[s], s))


@dataclass
class MeasureMatrix:
    """Measure values for every (pipeline, bundle version, topic) cell."""

    measure: MeasureSpec
    pipelines: list[str]
    versions: list[int]
    topics: list[str]
    values: dict[tuple[str, int, str], float] = field(default_factory=dict)
    mean_values: dict[tuple[str, int], float] = field(default_factory=dict)
    chains_built: int = 0

    def check_complete(self) -> None:
        missing = [
            (p, v)
            for p in self.pipelines
            for v in self.versions
            if (p, v) not in self.mean_values
        ]
        if missing:
            raise IncompleteMatrix(f"missing cells, e.g. {missing[:3]}")

    def system_means(self, version: int) -> dict[str, float]:
        return {p: self.mean_values[(p, version)] for p in self.pipelines}


def grid_run(
    pipelines: Sequence[Pipeline],
    topics: list[Topic],
    qrels: Qrels,
    plan: BundlePlan,
    docs: Iterable[Document],
    measure: MeasureSpec | str = "ndcg",
    depth: int = 1000,
) -> MeasureMatrix:
    """Run every pipeline against every incremental snapshot.

    Snapshot chains are built once per distinct (stoplist, stemmer) pair
    and shared by all retrieval models, so a full 4x4x4 grid over n
    bundles touches 16 chains, not 64.
    """
    if not pipelines:
        raise AviatorError("grid_run requires at least one pipeline")
    if isinstance(measure, str):
        measure = parse_measure(measure)
    by_id = {d.doc_id: d for d in docs}
    bundle_docs: dict[int, list[Document]] = {v: [] for v in range(1, plan.n + 1)}
    for doc_id, bundle in plan.assignment.items():
        bundle_docs[bundle].append(by_id[doc_id])

    by_preproc: dict[tuple[str, str], list[Pipeline]] = {}
    for pipeline in pipelines:
        by_preproc.setdefault(pipeline.preproc_key, []).append(pipeline)

    matrix = MeasureMatrix(
        measure=measure,
        pipelines=[p.pipeline_id for p in pipelines],
        versions=list(range(1, plan.n + 1)),
        topics=[],
    )
    topic_universe: set[str] = set()
    for _key, group in sorted(by_preproc.items()):
        snapshot = empty_snapshot()
        matrix.chains_built += 1
        for version in range(1, plan.n + 1):
            segment = index_bundle(
                bundle_docs[version], group[0], bundle_index=version
            )
            snapshot = merge(snapshot, segment)
            for pipeline in group:
                run = run_batch(topics, pipeline, snapshot, depth=depth)
                result = evaluate_run(run, qrels, measure)
                pid = pipeline.pipeline_id
                for topic_id, value in result.per_topic.items():
                    matrix.values[(pid, version, topic_id)] = value
                    topic_universe.add(topic_id)
                matrix.mean_values[(pid, version)] = result.mean
    matrix.topics = sorted(topic_universe, key=topic_sort_key)
    return matrix


@dataclass
class ConvergenceReport:
    """Per-version convergence series against the final version."""

    measure: str
    final_version: int
    # (pipeline, version) -> mean over topics of relative difference vs final
    reldiff_by_system: dict[tuple[str, int], float]
    # version -> tau-b between system rankings at version and at final
    tau_by_version: dict[int, float]
    # version -> (min, q1, median, q3, max) of pooled per-topic |reldiffs|
    boxplot_by_version: dict[int, tuple[float, float, float, float, float]]


def five_number_summary(values: Sequence[float]) -> tuple[float, float, float, float, float]:
    """min, Q1, median, Q3, max with linearly interpolated quartiles and
    whiskers at the extremes (no outlier fencing)."""
    arr = np.asarray(values, dtype=float)
    if arr.size == 0:
        raise AviatorError("five_number_summary of empty data")
    q = np.percentile(arr, [0, 25, 50, 75, 100], method="linear")
    return (float(q[0]), float(q[1]), float(q[2]), float(q[3]), float(q[4]))


def convergence_report(matrix: MeasureMatrix) -> ConvergenceReport:
    """Relative-difference, tau and boxplot series for versions 1..n."""
    matrix.check_complete()
    final = matrix.versions[-1]
    final_means = matrix.system_means(final)

    reldiff_by_system: dict[tuple[str, int], float] = {}
    tau_by_version: dict[int, float] = {}
    boxplot_by_version: dict[int, tuple[float, float, float, float, float]] = {}

    for version in matrix.versions:
        for pid in matrix.pipelines:
            diffs = []
            for topic_id in matrix.topics:
                cell = (pid, version, topic_id)
                final_cell = (pid, final, topic_id)
                if cell not in matrix.values or final_cell not in matrix.values:
                    continue
                rd = relative_difference(
                    matrix.values[cell], matrix.values[final_cell]
                )
                if not math.isnan(rd):
                    diffs.append(rd)
            reldiff_by_system[(pid, version)] = (
                math.fsum(diffs) / len(diffs) if diffs else 0.0
            )

        tau_by_version[version] = kendall_tau(
            matrix.system_means(version), final_means
        )

        pooled = []
        for pid in matrix.pipelines:
            for topic_id in matrix.topics:
                cell = (pid, version, topic_id)
                final_cell = (pid, final, topic_id)
                if cell not in matrix.values or final_cell not in matrix.values:
                    continue
                rd = relative_difference(
                    matrix.values[cell], matrix.values[final_cell]
                )
                if not math.isnan(rd):
                    pooled.append(rd)
        boxplot_by_version[version] = five_number_summary(pooled)

    return ConvergenceReport(
        measure=str(matrix.measure),
        final_version=final,
        reldiff_by_system=reldiff_by_system,
        tau_by_version=tau_by_version,
        boxplot_by_version=boxplot_by_version,
    )


def write_matrix_csv(matrix: MeasureMatrix, stream: IO[str]) -> None:
    """Matrix export: pipeline,version,topic,value with an "all" row per
    (pipeline, version) carrying the mean."""
    stream.write("pipeline,version,topic,value\n")
    for pid in matrix.pipelines:
        for version in matrix.versions:
            for topic_id in matrix.topics:
                cell = (pid, version, topic_id)
                if cell in matrix.values:
                    stream.write(
                        f"{pid},{version},{topic_id},{matrix.values[cell]!r}\n"
                    )
            if (pid, version) in matrix.mean_values:
                stream.write(
                    f"{pid},{version},all,{matrix.mean_values[(pid, version)]!r}\n"
                )


def read_matrix_csv(stream: IO[str] | str, measure: str = "ndcg") -> MeasureMatrix:
    text = stream if isinstance(stream, str) else stream.read()
    lines = text.splitlines()
    if not lines or lines[0] != "pipeline,version,topic,value":
        raise AviatorError("not a measure-matrix CSV")
    pipelines: list[str] = []
    versions: set[int] = set()
    topics: set[str] = set()
    values: dict[tuple[str, int, str], float] = {}
    means: dict[tuple[str, int], float] = {}
    for line in lines[1:]:
        if not line.strip():
            continue
        pid, version_s, topic_id, value_s = line.split(",")
        version = int(version_s)
        versions.add(version)
        if pid not in pipelines:
            pipelines.append(pid)
        if topic_id == "all":
            means[(pid, version)] = float(value_s)
        else:
            topics.add(topic_id)
            values[(pid, version, topic_id)] = float(value_s)
    matrix = MeasureMatrix(
        measure=parse_measure(measure),
        pipelines=pipelines,
        versions=sorted(versions),
        topics=sorted(topics, key=topic_sort_key),
        values=values,
        mean_values=means,
    )
    return matrix


def write_reldiff_csv(report: ConvergenceReport, stream: IO[str]) -> None:
    stream.write("pipeline,version,mean_relative_difference\n")
    for (pid, version), value in sorted(report.reldiff_by_system.items()):
        stream.write(f"{pid},{version},{value!r}\n")


def write_tau_csv(report: ConvergenceReport, stream: IO[str]) -> None:
    stream.write("version,tau\n")
    for version in sorted(report.tau_by_version):
        stream.write(f"{version},{report.tau_by_version[version]!r}\n")


def write_boxplot_csv(report: ConvergenceReport, stream: IO[str]) -> None:
    stream.write("version,min,q1,median,q3,max\n")
    for version in sorted(report.boxplot_by_version):
        lo, q1, med, q3, hi = report.boxplot_by_version[version]
        stream.write(f"{version},{lo!r},{q1!r},{med!r},{q3!r},{hi!r}\n")
