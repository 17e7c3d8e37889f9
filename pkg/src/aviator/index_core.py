"""Inverted-index segments and immutable versioned snapshots.

One segment is built per corpus bundle; merging segment v+1 into the
snapshot for bundles 1..v yields the snapshot for 1..v+1. Snapshots are
values: merge is copy-on-write at the posting-list level (posting lists
are tuples and shared between versions when a term is untouched), so the
query-serving side can keep reading version v while v+1 is assembled.

A fold of merges must be observationally identical to one batch build
over the corresponding bundle union; the test suite enforces that
equivalence against a naive counting oracle.
"""

from __future__ import annotations

import hashlib
import json
import struct
from dataclasses import dataclass
from pathlib import Path
from typing import BinaryIO, Iterable, Mapping

from .corpus_io import Document
from .errors import AviatorError
from .textproc import Pipeline, pipeline_terms

_SEGMENT_MAGIC = b"AVSEG001"


class DuplicateDoc(AviatorError):
    pass


class VersionMismatch(AviatorError):
    pass


class OverlappingDocs(AviatorError):
    pass


class MalformedSegmentFile(AviatorError):
    pass


Posting = tuple[str, int]  # (doc_id, term frequency >= 1)


@dataclass
class IndexSegment:
    """Index over one bundle; posting lists sorted by doc_id."""

    bundle_index: int
    postings: dict[str, tuple[Posting, ...]]
    doc_lengths: dict[str, int]

    @property
    def doc_count(self) -> int:
        return len(self.doc_lengths)

    @property
    def total_tokens(self) -> int:
        return sum(self.doc_lengths.values())


@dataclass(frozen=True)
class IndexSnapshot:
    """Immutable index over bundles 1..version.

    The contained mappings are never mutated after construction; merge
    produces a new snapshot that shares unchanged posting tuples.
    """

    version: int
    postings: Mapping[str, tuple[Posting, ...]]
    doc_lengths: Mapping[str, int]
    collection_term_freq: Mapping[str, int]
    doc_count: int
    total_tokens: int
    avg_doc_len: float

    def stats(self, term: str) -> tuple[int, int]:
        """(document frequency, collection frequency); (0, 0) if unseen."""
        plist = self.postings.get(term)
        if plist is None:
            return (0, 0)
        return (len(plist), self.collection_term_freq[term])

    def doc_length(self, doc_id: str) -> int:
        return self.doc_lengths[doc_id]


def empty_snapshot() -> IndexSnapshot:
    return IndexSnapshot(
        version=0,
        postings={},
        doc_lengths={},
        collection_term_freq={},
        doc_count=0,
        total_tokens=0,
        avg_doc_len=0.0,
    )


def index_bundle(
    docs: Iterable[Document], pipeline: Pipeline, bundle_index: int = 1
) -> IndexSegment:
    """Index one bundle of documents under the pipeline's preprocessing.

    Document lengths are post-pipeline token counts (after stopword
    removal and stemming); each document's ``token_count`` is updated.
    """
    postings_acc: dict[str, list[Posting]] = {}
    doc_lengths: dict[str, int] = {}
    for doc in sorted(docs, key=lambda d: d.doc_id):
        if doc.doc_id in doc_lengths:
            raise DuplicateDoc(doc.doc_id)
        terms = pipeline_terms(doc.text, pipeline)
        doc.token_count = len(terms)
        doc_lengths[doc.doc_id] = len(terms)
        counts: dict[str, int] = {}
        for t in terms:
            counts[t] = counts.get(t, 0) + 1
        for term, tf in counts.items():
            postings_acc.setdefault(term, []).append((doc.doc_id, tf))
    # iteration was in doc_id order, so each posting list is already sorted
    return IndexSegment(
        bundle_index=bundle_index,
        postings={t: tuple(pl) for t, pl in postings_acc.items()},
        doc_lengths=doc_lengths,
    )


def _merge_postings(a: tuple[Posting, ...], b: tuple[Posting, ...]) -> tuple[Posting, ...]:
    merged: list[Posting] = []
    i = j = 0
    while i < len(a) and j < len(b):
        if a[i][0] <= b[j][0]:
            merged.append(a[i])
            i += 1
        else:
            merged.append(b[j])
            j += 1
    merged.extend(a[i:])
    merged.extend(b[j:])
    return tuple(merged)


def merge(snapshot: IndexSnapshot, segment: IndexSegment) -> IndexSnapshot:
    """Merge the next bundle's segment into a new snapshot (version + 1)."""
    if segment.bundle_index != snapshot.version + 1:
        raise VersionMismatch(
            f"segment {segment.bundle_index} cannot extend snapshot "
            f"version {snapshot.version}"
        )
    overlap = snapshot.doc_lengths.keys() & segment.doc_lengths.keys()
    if overlap:
        raise OverlappingDocs(f"{len(overlap)} docs, e.g. {sorted(overlap)[:3]}")

    postings = dict(snapshot.postings)
    for term, plist in segment.postings.items():
        existing = postings.get(term)
        postings[term] = plist if existing is None else _merge_postings(existing, plist)

    doc_lengths = dict(snapshot.doc_lengths)
    doc_lengths.update(segment.doc_lengths)

    cf = dict(snapshot.collection_term_freq)
    for term, plist in segment.postings.items():
        cf[term] = cf.get(term, 0) + sum(tf for _, tf in plist)

    doc_count = snapshot.doc_count + segment.doc_count
    total_tokens = snapshot.total_tokens + segment.total_tokens
    return IndexSnapshot(
        version=snapshot.version + 1,
        postings=postings,
        doc_lengths=doc_lengths,
        collection_term_freq=cf,
        doc_count=doc_count,
        total_tokens=total_tokens,
        avg_doc_len=total_tokens / doc_count if doc_count else 0.0,
    )


def build_snapshot(
    bundles: Iterable[list[Document]], pipeline: Pipeline
) -> IndexSnapshot:
    """Fold index_bundle + merge over consecutive bundles."""
    snap = empty_snapshot()
    for i, docs in enumerate(bundles, start=1):
        snap = merge(snap, index_bundle(docs, pipeline, bundle_index=i))
    return snap


def stats(snapshot: IndexSnapshot, term: str) -> tuple[int, int]:
    return snapshot.stats(term)


def snapshot_fingerprint(snapshot: IndexSnapshot) -> str:
    """Stable content hash over everything observable in a snapshot.

    Used by immutability and torn-read tests: two reads of the same
    logical snapshot must fingerprint identically.
    """
    h = hashlib.sha256()
    h.update(str(snapshot.version).encode())
    h.update(struct.pack("<qqd", snapshot.doc_count, snapshot.total_tokens,
                         snapshot.avg_doc_len))
    for term in sorted(snapshot.postings):
        h.update(term.encode())
        h.update(str(snapshot.collection_term_freq[term]).encode())
        for doc_id, tf in snapshot.postings[term]:
            h.update(f"{doc_id}:{tf};".encode())
    for doc_id in sorted(snapshot.doc_lengths):
        h.update(f"{doc_id}={snapshot.doc_lengths[doc_id]};".encode())
    return h.hexdigest()


def snapshot_stats_json(snapshot: IndexSnapshot) -> str:
    """Debug dump of aggregate snapshot statistics."""
    return json.dumps(
        {
            "version": snapshot.version,
            "doc_count": snapshot.doc_count,
            "total_tokens": snapshot.total_tokens,
            "avg_doc_len": snapshot.avg_doc_len,
            "vocabulary_size": len(snapshot.postings),
        },
        sort_keys=True,
    )


def _write_varint(out: BinaryIO, value: int) -> None:
    if value < 0:
        raise ValueError("varint must be nonnegative")
    while True:
        byte = value & 0x7F
        value >>= 7
        if value:
            out.write(bytes([byte | 0x80]))
        else:
            out.write(bytes([byte]))
            return


def _read_varint(data: bytes, pos: int) -> tuple[int, int]:
    result = 0
    shift = 0
    while True:
        if pos >= len(data):
            raise MalformedSegmentFile("truncated varint")
        byte = data[pos]
        pos += 1
        result |= (byte & 0x7F) << shift
        if not byte & 0x80:
            return result, pos
        shift += 7


def _write_str(out: BinaryIO, s: str) -> None:
    raw = s.encode("utf-8")
    _write_varint(out, len(raw))
    out.write(raw)


def _read_str(data: bytes, pos: int) -> tuple[str, int]:
    length, pos = _read_varint(data, pos)
    if pos + length > len(data):
        raise MalformedSegmentFile("truncated string")
    return data[pos:pos + length].decode("utf-8"), pos + length


def write_segment(segment: IndexSegment, path: str | Path) -> None:
    """Binary segment file: magic header, doc table, term dictionary with
    postings as (doc-ordinal delta, tf) varint pairs."""
    doc_ids = sorted(segment.doc_lengths)
    ordinal = {d: i for i, d in enumerate(doc_ids)}
    with open(path, "wb") as out:
        out.write(_SEGMENT_MAGIC)
        _write_varint(out, segment.bundle_index)
        _write_varint(out, len(doc_ids))
        for doc_id in doc_ids:
            _write_str(out, doc_id)
            _write_varint(out, segment.doc_lengths[doc_id])
        _write_varint(out, len(segment.postings))
        for term in sorted(segment.postings):
            _write_str(out, term)
            plist = segment.postings[term]
            _write_varint(out, len(plist))
            prev = -1
            for doc_id, tf in plist:
                o = ordinal[doc_id]
                _write_varint(out, o - prev)
                _write_varint(out, tf)
                prev = o


def read_segment(path: str | Path) -> IndexSegment:
    data = Path(path).read_bytes()
    if data[: len(_SEGMENT_MAGIC)] != _SEGMENT_MAGIC:
        raise MalformedSegmentFile(f"bad magic in {path}")
    pos = len(_SEGMENT_MAGIC)
    bundle_index, pos = _read_varint(data, pos)
    n_docs, pos = _read_varint(data, pos)
    doc_ids: list[str] = []
    doc_lengths: dict[str, int] = {}
    for _ in range(n_docs):
        doc_id, pos = _read_str(data, pos)
        length, pos = _read_varint(data, pos)
        doc_ids.append(doc_id)
        doc_lengths[doc_id] = length
    n_terms, pos = _read_varint(data, pos)
    postings: dict[str, tuple[Posting, ...]] = {}
    for _ in range(n_terms):
        term, pos = _read_str(data, pos)
        count, pos = _read_varint(data, pos)
        plist: list[Posting] = []
        prev = -1
        for _ in range(count):
            delta, pos = _read_varint(data, pos)
            tf, pos = _read_varint(data, pos)
            prev += delta
            if prev >= len(doc_ids):
                raise MalformedSegmentFile(f"ordinal out of range for {term!r}")
            plist.append((doc_ids[prev], tf))
        postings[term] = tuple(plist)
    return IndexSegment(
        bundle_index=bundle_index, postings=postings, doc_lengths=doc_lengths
    )
