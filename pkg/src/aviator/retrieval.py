"""Retrieval models over an index snapshot, and TREC-style batch runs.

All scorers share the same contract: candidates are the documents that
contain at least one query term, results are sorted by score descending
with ascending doc_id as the tie-break, ranks are consecutive from 1 and
the list is truncated to the requested depth. BM25, TF-IDF and the
matching coefficient drop zero-scored documents; the Dirichlet language
model keeps every candidate (its log-probabilities are negative).

Scorers are pure functions over immutable snapshots, so they are safe to
run concurrently; batch output is assembled in topic order and therefore
byte-deterministic.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass

from .corpus_io import Run, RunEntry, Topic
from .errors import AviatorError
from .index_core import IndexSnapshot
from .textproc import Pipeline, pipeline_terms

logger = logging.getLogger(__name__)

DEFAULT_DEPTH = 1000
DEFAULT_K1 = 1.2
DEFAULT_B = 0.75
DEFAULT_MU = 1000.0

MIN_BATCH_TOPICS = 50


class EmptySnapshot(AviatorError):
    pass


@dataclass(frozen=True)
class Query:
    """Pipeline-processed query; duplicate terms are preserved because the
    language model weighs repeated occurrences."""

    topic_id: str
    terms: tuple[str, ...]


Scored = list[tuple[str, float]]


def _require_nonempty(snapshot: IndexSnapshot) -> None:
    if snapshot.doc_count == 0:
        raise EmptySnapshot("snapshot contains no documents")


def _candidates(query_terms: set[str], snapshot: IndexSnapshot) -> set[str]:
    docs: set[str] = set()
    for term in query_terms:
        plist = snapshot.postings.get(term)
        if plist:
            docs.update(doc_id for doc_id, _ in plist)
    return docs


def _ranked(scores: dict[str, float], depth: int, keep_zero: bool = False) -> Scored:
    items = [
        (doc_id, score)
        for doc_id, score in scores.items()
        if keep_zero or score != 0.0
    ]
    items.sort(key=lambda kv: (-kv[1], kv[0]))
    return items[:depth]


def score_bm25(
    query: Query,
    snapshot: IndexSnapshot,
    k1: float = DEFAULT_K1,
    b: float = DEFAULT_B,
    depth: int = DEFAULT_DEPTH,
) -> Scored:
    """Okapi BM25 with idf = ln(1 + (N - df + 0.5)/(df + 0.5))."""
    if k1 < 0 or not 0 <= b <= 1:
        raise AviatorError(f"bm25 requires k1 >= 0 and 0 <= b <= 1, got {k1}, {b}")
    _require_nonempty(snapshot)
    n = snapshot.doc_count
    avgdl = snapshot.avg_doc_len
    scores: dict[str, float] = {}
    for term in set(query.terms):
        plist = snapshot.postings.get(term)
        if not plist:
            continue
        idf = math.log(1.0 + (n - len(plist) + 0.5) / (len(plist) + 0.5))
        for doc_id, tf in plist:
            dl = snapshot.doc_lengths[doc_id]
            contrib = idf * tf * (k1 + 1.0) / (tf + k1 * (1.0 - b + b * dl / avgdl))
            scores[doc_id] = scores.get(doc_id, 0.0) + contrib
    return _ranked(scores, depth)


def score_tfidf(
    query: Query, snapshot: IndexSnapshot, depth: int = DEFAULT_DEPTH
) -> Scored:
    """tf * ln(N/df) summed over unique query terms with df > 0."""
    _require_nonempty(snapshot)
    n = snapshot.doc_count
    scores: dict[str, float] = {}
    for term in set(query.terms):
        plist = snapshot.postings.get(term)
        if not plist:
            continue
        idf = math.log(n / len(plist))
        for doc_id, tf in plist:
            scores[doc_id] = scores.get(doc_id, 0.0) + tf * idf
    return _ranked(scores, depth)


def score_dirichlet_lm(
    query: Query,
    snapshot: IndexSnapshot,
    mu: float = DEFAULT_MU,
    depth: int = DEFAULT_DEPTH,
) -> Scored:
    """Dirichlet-smoothed query likelihood.

    Sums ln((tf + mu * cf/|C|) / (doclen + mu)) over every query term
    occurrence (duplicates included); terms unseen in the collection are
    skipped; only documents containing at least one query term are scored.
    """
    if mu <= 0:
        raise AviatorError(f"dirichlet_lm requires mu > 0, got {mu}")
    _require_nonempty(snapshot)
    total = snapshot.total_tokens
    candidates = _candidates(set(query.terms), snapshot)
    if not candidates:
        return []
    tf_by_doc: dict[str, dict[str, int]] = {}
    for term in set(query.terms):
        plist = snapshot.postings.get(term)
        if not plist:
            continue
        index = tf_by_doc.setdefault(term, {})
        for doc_id, tf in plist:
            index[doc_id] = tf
    scores: dict[str, float] = {}
    for doc_id in candidates:
        dl = snapshot.doc_lengths[doc_id]
        s = 0.0
        for term in query.terms:  # every occurrence counts
            cf = snapshot.collection_term_freq.get(term, 0)
            if cf == 0:
                continue
            tf = tf_by_doc.get(term, {}).get(doc_id, 0)
            s += math.log((tf + mu * cf / total) / (dl + mu))
        scores[doc_id] = s
    return _ranked(scores, depth, keep_zero=True)


def score_boolean(
    query: Query, snapshot: IndexSnapshot, depth: int = DEFAULT_DEPTH
) -> Scored:
    """Simple matching coefficient: fraction of unique query terms present."""
    _require_nonempty(snapshot)
    unique = set(query.terms)
    if not unique:
        return []
    scores: dict[str, float] = {}
    for term in unique:
        plist = snapshot.postings.get(term)
        if not plist:
            continue
        for doc_id, _ in plist:
            scores[doc_id] = scores.get(doc_id, 0.0) + 1.0
    scores = {d: c / len(unique) for d, c in scores.items()}
    return _ranked(scores, depth)


def score(
    query: Query,
    snapshot: IndexSnapshot,
    model_id: str,
    params: dict[str, float] | None = None,
    depth: int = DEFAULT_DEPTH,
) -> Scored:
    """Dispatch to a scorer by model id with per-request parameters."""
    params = params or {}
    if model_id == "bm25":
        return score_bm25(
            query,
            snapshot,
            k1=params.get("k1", DEFAULT_K1),
            b=params.get("b", DEFAULT_B),
            depth=depth,
        )
    if model_id == "tfidf":
        return score_tfidf(query, snapshot, depth=depth)
    if model_id == "dirichlet_lm":
        return score_dirichlet_lm(
            query, snapshot, mu=params.get("mu", DEFAULT_MU), depth=depth
        )
    if model_id == "boolean":
        return score_boolean(query, snapshot, depth=depth)
    raise AviatorError(f"unknown retrieval model {model_id!r}")


def build_query(topic: Topic, pipeline: Pipeline, use_description: bool = False) -> Query:
    """Topic title (optionally plus description) through the pipeline."""
    text = topic.title
    if use_description and topic.description:
        text = f"{topic.title} {topic.description}"
    return Query(topic_id=topic.topic_id, terms=tuple(pipeline_terms(text, pipeline)))


def make_run_tag(pipeline: Pipeline, snapshot_version: int) -> str:
    return f"{pipeline.pipeline_id}.v{snapshot_version}"


def run_batch(
    topics: list[Topic],
    pipeline: Pipeline,
    snapshot: IndexSnapshot,
    depth: int = DEFAULT_DEPTH,
    use_description: bool = False,
) -> Run:
    """Score every topic against the snapshot and assemble a Run.

    Topics that retrieve nothing stay present with an empty list, so the
    evaluation side can tell "asked and found nothing" from "not asked".
    """
    if not topics:
        raise AviatorError("run_batch requires at least one topic")
    if len(topics) < MIN_BATCH_TOPICS:
        logger.warning(
            "batch has %d topics; batch evaluation normally uses at least %d",
            len(topics), MIN_BATCH_TOPICS,
        )
    run = Run(tag=make_run_tag(pipeline, snapshot.version),
              snapshot_version=snapshot.version)
    for topic in topics:
        query = build_query(topic, pipeline, use_description=use_description)
        ranked = score(query, snapshot, pipeline.model_id, pipeline.model_params,
                       depth=depth)
        run.entries[topic.topic_id] = [
            RunEntry(doc_id, s, rank)
            for rank, (doc_id, s) in enumerate(ranked, start=1)
        ]
    return run
