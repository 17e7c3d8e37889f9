"""Effectiveness measures over a run and relevance judgments.

Implemented subset: average precision, nDCG (full and cutoff), P@k,
R-precision and reciprocal rank, following the usual batch-evaluation
conventions: unjudged documents count as nonrelevant, relevant means
grade > 0, and topics without any relevant judgment are excluded from
means and reported separately.

nDCG uses linear gain (the grade itself) and a log2(rank+1) discount
from rank 1; that is this package's single canonical definition.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from typing import IO

from .corpus_io import Qrels, Run, RunEntry, topic_sort_key
from .errors import AviatorError


class NoRelevantDocs(AviatorError):
    pass


class NoJudgedTopics(AviatorError):
    pass


class UnknownMeasure(AviatorError):
    pass


@dataclass(frozen=True)
class MeasureSpec:
    """A measure id plus optional cutoff, e.g. "ndcg", "ndcg@10", "p@5"."""

    measure_id: str
    k: int | None = None

    def __str__(self) -> str:
        return f"{self.measure_id}@{self.k}" if self.k is not None else self.measure_id


@dataclass(frozen=True)
class MeasureValue:
    measure_id: str
    topic_id: str
    value: float
    k: int | None = None


@dataclass
class EvaluationResult:
    run_tag: str
    snapshot_version: int
    measure: MeasureSpec
    per_topic: dict[str, float] = field(default_factory=dict)
    mean: float = 0.0
    # topics that had judgments but no relevant ones; excluded from the mean
    excluded_topics: list[str] = field(default_factory=list)


_CUTOFF_MEASURES = {"ndcg", "p"}
_PLAIN_MEASURES = {"ap", "ndcg", "rprec", "recip_rank"}


def parse_measure(spec: str) -> MeasureSpec:
    """Parse "ap", "ndcg", "ndcg@20", "p@5", "rprec", "recip_rank"."""
    m = re.fullmatch(r"([a-z_]+)@(\d+)", spec.strip().lower())
    if m:
        measure_id, k = m.group(1), int(m.group(2))
        if measure_id not in _CUTOFF_MEASURES or k < 1:
            raise UnknownMeasure(spec)
        return MeasureSpec(measure_id, k)
    name = spec.strip().lower()
    if name == "p":
        raise UnknownMeasure("p requires a cutoff, e.g. p@10")
    if name not in _PLAIN_MEASURES:
        raise UnknownMeasure(spec)
    return MeasureSpec(name)


def _relevant_total(topic_qrels: dict[str, int]) -> int:
    return sum(1 for g in topic_qrels.values() if g > 0)


def average_precision(ranked: list[RunEntry], topic_qrels: dict[str, int]) -> float:
    """Mean of precision at each rank holding a relevant document,
    normalized by the total number of relevant documents."""
    r_total = _relevant_total(topic_qrels)
    if r_total == 0:
        raise NoRelevantDocs("topic has no relevant judged documents")
    hits = 0
    precision_sum = 0.0
    for i, entry in enumerate(ranked, start=1):
        if topic_qrels.get(entry.doc_id, 0) > 0:
            hits += 1
            precision_sum += hits / i
    return precision_sum / r_total


def ndcg(
    ranked: list[RunEntry],
    topic_qrels: dict[str, int],
    cutoff: int | None = None,
) -> float:
    """DCG with gain = grade and discount log2(rank + 1), normalized by the
    ideal DCG from the judged grades sorted descending (same cutoff)."""
    grades = sorted((g for g in topic_qrels.values() if g > 0), reverse=True)
    if not grades:
        raise NoRelevantDocs("topic has no positively judged documents")
    limit = len(ranked) if cutoff is None else min(cutoff, len(ranked))
    dcg = sum(
        topic_qrels.get(ranked[i].doc_id, 0) / math.log2(i + 2)
        for i in range(limit)
    )
    ideal_limit = len(grades) if cutoff is None else min(cutoff, len(grades))
    idcg = sum(grades[i] / math.log2(i + 2) for i in range(ideal_limit))
    return dcg / idcg


def precision_at_k(ranked: list[RunEntry], topic_qrels: dict[str, int], k: int) -> float:
    """Relevant fraction of the top k; the denominator stays k even when
    fewer documents were retrieved."""
    if k < 1:
        raise AviatorError(f"cutoff must be >= 1, got {k}")
    hits = sum(1 for e in ranked[:k] if topic_qrels.get(e.doc_id, 0) > 0)
    return hits / k


def rprec(ranked: list[RunEntry], topic_qrels: dict[str, int]) -> float:
    """Precision at rank R, where R is the number of relevant documents."""
    r_total = _relevant_total(topic_qrels)
    if r_total == 0:
        raise NoRelevantDocs("topic has no relevant judged documents")
    hits = sum(1 for e in ranked[:r_total] if topic_qrels.get(e.doc_id, 0) > 0)
    return hits / r_total


def recip_rank(ranked: list[RunEntry], topic_qrels: dict[str, int]) -> float:
    """1/rank of the first relevant document; 0 when none is retrieved."""
    for entry in ranked:
        if topic_qrels.get(entry.doc_id, 0) > 0:
            return 1.0 / entry.rank
    return 0.0


def compute_measure(
    spec: MeasureSpec, ranked: list[RunEntry], topic_qrels: dict[str, int]
) -> float:
    if spec.measure_id == "ap":
        return average_precision(ranked, topic_qrels)
    if spec.measure_id == "ndcg":
        return ndcg(ranked, topic_qrels, cutoff=spec.k)
    if spec.measure_id == "p":
        assert spec.k is not None
        return precision_at_k(ranked, topic_qrels, spec.k)
    if spec.measure_id == "rprec":
        return rprec(ranked, topic_qrels)
    if spec.measure_id == "recip_rank":
        return recip_rank(ranked, topic_qrels)
    raise UnknownMeasure(spec.measure_id)


def evaluate_run(run: Run, qrels: Qrels, measure: MeasureSpec | str) -> EvaluationResult:
    """Per-topic measure values plus their mean.

    The topic universe is every judged topic: topics in the qrels that
    the run did not rank at all score 0. Topics without any relevant
    judgment are excluded from the mean and listed separately; run topics
    without judgments are ignored.
    """
    if isinstance(measure, str):
        measure = parse_measure(measure)
    judged_topics = qrels.topic_ids()
    if not judged_topics:
        raise NoJudgedTopics("qrels are empty")

    result = EvaluationResult(
        run_tag=run.tag, snapshot_version=run.snapshot_version, measure=measure
    )
    included: list[float] = []
    for topic_id in judged_topics:
        topic_qrels = qrels.for_topic(topic_id)
        ranked = run.entries.get(topic_id, [])
        if _relevant_total(topic_qrels) == 0:
            result.excluded_topics.append(topic_id)
            continue
        value = compute_measure(measure, ranked, topic_qrels)
        result.per_topic[topic_id] = value
        included.append(value)
    if not included:
        raise NoJudgedTopics("no judged topic has relevant documents")
    result.mean = math.fsum(included) / len(included)
    return result


MEAN_PSEUDO_TOPIC = "all"


def write_evaluation_csv(
    results: list[tuple[str, EvaluationResult]], stream: IO[str]
) -> None:
    """CSV export: measure,topic,system,snapshot_version,value with one
    "all" pseudo-topic row per result carrying the mean."""
    stream.write("measure,topic,system,snapshot_version,value\n")
    for system, res in results:
        name = str(res.measure)
        for topic_id in sorted(res.per_topic, key=topic_sort_key):
            stream.write(
                f"{name},{topic_id},{system},{res.snapshot_version},"
                f"{res.per_topic[topic_id]!r}\n"
            )
        stream.write(
            f"{name},{MEAN_PSEUDO_TOPIC},{system},{res.snapshot_version},{res.mean!r}\n"
        )
