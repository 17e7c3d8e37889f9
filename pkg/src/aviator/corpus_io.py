"""TREC-format corpus I/O: documents, topics, qrels and run files.

The parsers are deliberately lenient about layout (whitespace, tag case,
element order) but strict about the invariants that matter downstream:
unique document ids, non-negative relevance grades, consecutive ranks.
Input bytes are decoded as UTF-8 with lossy replacement so that stray
bytes in legacy collections never abort an evaluation.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import IO, Iterable, NamedTuple

from .errors import AviatorError

RUN_DEPTH_DEFAULT = 1000


class ParseError(AviatorError):
    """Structured parse failure; subclasses identify the violation."""


class MissingDocno(ParseError):
    pass


class InvalidDocno(ParseError):
    pass


class DuplicateDocId(ParseError):
    pass


class UnterminatedBlock(ParseError):
    pass


class MalformedLine(ParseError):
    def __init__(self, line_no: int, reason: str):
        super().__init__(f"line {line_no}: {reason}")
        self.line_no = line_no


class NegativeGrade(ParseError):
    pass


class DuplicateJudgment(ParseError):
    pass


class MissingNum(ParseError):
    pass


class MissingTitle(ParseError):
    pass


class DuplicateTopicId(ParseError):
    pass


class InvalidRun(ParseError):
    pass


@dataclass
class Document:
    """One corpus document. ``token_count`` is filled in by the indexer
    after pipeline tokenization and is 0 until then."""

    doc_id: str
    text: str
    token_count: int = 0

    def __post_init__(self) -> None:
        if not self.doc_id or re.search(r"\s", self.doc_id):
            raise InvalidDocno(f"bad document id: {self.doc_id!r}")


@dataclass
class Topic:
    topic_id: str
    title: str
    description: str = ""
    narrative: str = ""


@dataclass
class Qrels:
    """Relevance judgments: (topic_id, doc_id) -> grade >= 0."""

    judgments: dict[tuple[str, str], int] = field(default_factory=dict)

    def grade(self, topic_id: str, doc_id: str) -> int:
        """Grade of a judged document, 0 for unjudged ones."""
        return self.judgments.get((topic_id, doc_id), 0)

    def is_judged(self, topic_id: str, doc_id: str) -> bool:
        return (topic_id, doc_id) in self.judgments

    def topic_ids(self) -> list[str]:
        return sorted({t for t, _ in self.judgments}, key=topic_sort_key)

    def for_topic(self, topic_id: str) -> dict[str, int]:
        return {
            d: g for (t, d), g in self.judgments.items() if t == topic_id
        }

    def relevant_count(self, topic_id: str) -> int:
        return sum(
            1 for (t, _), g in self.judgments.items() if t == topic_id and g > 0
        )


class RunEntry(NamedTuple):
    doc_id: str
    score: float
    rank: int


@dataclass
class Run:
    """Ranked retrieval output of one system over one snapshot.

    ``entries`` maps topic_id to its ranked list; per topic the ranks are
    1..m consecutive, doc ids distinct, entries already in rank order.
    """

    tag: str
    snapshot_version: int = 0
    entries: dict[str, list[RunEntry]] = field(default_factory=dict)

    def validate(self, depth: int = RUN_DEPTH_DEFAULT) -> None:
        for topic_id, ranked in self.entries.items():
            if len(ranked) > depth:
                raise InvalidRun(f"topic {topic_id}: more than {depth} entries")
            seen: set[str] = set()
            for i, entry in enumerate(ranked, start=1):
                if entry.rank != i:
                    raise InvalidRun(
                        f"topic {topic_id}: rank {entry.rank} at position {i}"
                    )
                if entry.doc_id in seen:
                    raise InvalidRun(
                        f"topic {topic_id}: duplicate doc {entry.doc_id}"
                    )
                seen.add(entry.doc_id)


def topic_sort_key(topic_id: str):
    """Ascending numeric order for all-digit ids, lexicographic otherwise;
    numeric ids sort before non-numeric ones."""
    if topic_id.isdigit():
        return (0, int(topic_id), topic_id)
    return (1, 0, topic_id)


def _decode(stream: IO[bytes] | bytes | str) -> str:
    if isinstance(stream, str):
        return stream
    if isinstance(stream, bytes):
        return stream.decode("utf-8", errors="replace")
    data = stream.read()
    if isinstance(data, bytes):
        return data.decode("utf-8", errors="replace")
    return data


_DOC_OPEN = re.compile(r"<DOC>", re.IGNORECASE)
_DOC_CLOSE = re.compile(r"</DOC>", re.IGNORECASE)
_DOCNO = re.compile(r"<DOCNO>(.*?)</DOCNO>", re.IGNORECASE | re.DOTALL)
_TAG = re.compile(r"<[^>]*>")


def parse_trec_documents(stream: IO[bytes] | bytes | str) -> list[Document]:
    """Parse a TREC SGML-style container into documents.

    One document per <DOC> block; the id is the trimmed <DOCNO> content
    and the body is the tag-stripped content of every other element, in
    document order, joined with single spaces.
    """
    text = _decode(stream)
    docs: list[Document] = []
    seen: set[str] = set()
    pos = 0
    while True:
        m_open = _DOC_OPEN.search(text, pos)
        if m_open is None:
            break
        m_close = _DOC_CLOSE.search(text, m_open.end())
        if m_close is None:
            raise UnterminatedBlock(
                f"<DOC> at offset {m_open.start()} has no closing </DOC>"
            )
        block = text[m_open.end():m_close.start()]
        pos = m_close.end()

        docnos = _DOCNO.findall(block)
        if len(docnos) != 1:
            raise MissingDocno(
                f"<DOC> block needs exactly one <DOCNO>, found {len(docnos)}"
            )
        doc_id = docnos[0].strip()
        if doc_id in seen:
            raise DuplicateDocId(doc_id)
        seen.add(doc_id)

        body = _DOCNO.sub(" ", block)
        body = _TAG.sub(" ", body)
        docs.append(Document(doc_id=doc_id, text=" ".join(body.split())))
    return docs


_TOP_BLOCK = re.compile(r"<top>(.*?)</top>", re.IGNORECASE | re.DOTALL)
_TOPIC_FIELD = re.compile(r"<(num|title|desc|narr)>", re.IGNORECASE)
_FIELD_LABEL = {
    "num": re.compile(r"^\s*Number\s*:", re.IGNORECASE),
    "title": re.compile(r"^\s*Topic\s*:", re.IGNORECASE),
    "desc": re.compile(r"^\s*Description\s*:", re.IGNORECASE),
    "narr": re.compile(r"^\s*Narrative\s*:", re.IGNORECASE),
}


def parse_topics(stream: IO[bytes] | bytes | str) -> list[Topic]:
    """Parse TREC topic blocks (<top> with <num>/<title>/<desc>/<narr>).

    Handles both the classic unclosed-tag layout (field runs until the
    next tag) and explicitly closed tags.
    """
    text = _decode(stream)
    topics: list[Topic] = []
    seen: set[str] = set()
    for block_match in _TOP_BLOCK.finditer(text):
        block = block_match.group(1)
        fields: dict[str, str] = {}
        matches = list(_TOPIC_FIELD.finditer(block))
        for i, m in enumerate(matches):
            name = m.group(1).lower()
            end = matches[i + 1].start() if i + 1 < len(matches) else len(block)
            content = block[m.end():end]
            content = re.sub(rf"</{name}>", " ", content, flags=re.IGNORECASE)
            content = _FIELD_LABEL[name].sub(" ", content)
            fields[name] = " ".join(content.split())

        if "num" not in fields or not fields["num"].strip():
            raise MissingNum("topic block without a usable <num>")
        topic_id = fields["num"].split()[0]
        title = fields.get("title", "").strip()
        if not title:
            raise MissingTitle(f"topic {topic_id} has no <title>")
        if topic_id in seen:
            raise DuplicateTopicId(topic_id)
        seen.add(topic_id)
        topics.append(
            Topic(
                topic_id=topic_id,
                title=title,
                description=fields.get("desc", ""),
                narrative=fields.get("narr", ""),
            )
        )
    return topics


def parse_qrels(stream: IO[bytes] | bytes | str) -> Qrels:
    """Parse 4-column qrels lines: topic, iteration (ignored), doc, grade."""
    text = _decode(stream)
    qrels = Qrels()
    for line_no, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        parts = line.split()
        if len(parts) != 4:
            raise MalformedLine(line_no, f"expected 4 fields, got {len(parts)}")
        topic_id, _iteration, doc_id, grade_str = parts
        try:
            grade = int(grade_str)
        except ValueError:
            raise MalformedLine(line_no, f"grade {grade_str!r} is not an integer")
        if grade < 0:
            raise NegativeGrade(f"line {line_no}: grade {grade}")
        key = (topic_id, doc_id)
        if key in qrels.judgments:
            raise DuplicateJudgment(f"line {line_no}: {topic_id}/{doc_id}")
        qrels.judgments[key] = grade
    return qrels


def write_run(run: Run, stream: IO[str]) -> None:
    """Write the 6-column TREC run format, bit-exactly.

    topic Q0 doc rank score tag, single-space separated, score with six
    decimals, topics in ascending numeric-then-lexicographic order and
    entries in rank order.
    """
    run.validate()
    for topic_id in sorted(run.entries, key=topic_sort_key):
        for entry in run.entries[topic_id]:
            stream.write(
                f"{topic_id} Q0 {entry.doc_id} {entry.rank} "
                f"{entry.score:.6f} {run.tag}\n"
            )


def run_to_string(run: Run) -> str:
    import io

    buf = io.StringIO()
    write_run(run, buf)
    return buf.getvalue()


_TAG_VERSION = re.compile(r"\.v(\d+)$")


def parse_run(stream: IO[bytes] | bytes | str) -> Run:
    """Parse a 6-column run file back into a Run (round-trip of write_run).

    The snapshot version is recovered from a ``.vN`` suffix on the tag
    when present.
    """
    text = _decode(stream)
    entries: dict[str, list[RunEntry]] = {}
    tag: str | None = None
    for line_no, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        parts = line.split()
        if len(parts) != 6:
            raise MalformedLine(line_no, f"expected 6 fields, got {len(parts)}")
        topic_id, q0, doc_id, rank_str, score_str, line_tag = parts
        if q0 != "Q0":
            raise MalformedLine(line_no, f"second field must be Q0, got {q0!r}")
        try:
            rank = int(rank_str)
            score = float(score_str)
        except ValueError:
            raise MalformedLine(line_no, "rank/score not numeric")
        if tag is None:
            tag = line_tag
        elif tag != line_tag:
            raise InvalidRun(f"mixed tags {tag!r} and {line_tag!r}")
        entries.setdefault(topic_id, []).append(RunEntry(doc_id, score, rank))

    m = _TAG_VERSION.search(tag) if tag else None
    run = Run(
        tag=tag or "",
        snapshot_version=int(m.group(1)) if m else 0,
        entries=entries,
    )
    run.validate()
    return run


def write_trec_documents(docs: Iterable[Document], stream: IO[str]) -> None:
    """Emit documents in the SGML container format parse_trec_documents reads."""
    for doc in docs:
        stream.write(f"<DOC>\n<DOCNO> {doc.doc_id} </DOCNO>\n")
        stream.write(f"<TEXT>\n{doc.text}\n</TEXT>\n</DOC>\n")


def write_topics(topics: Iterable[Topic], stream: IO[str]) -> None:
    for t in topics:
        stream.write(f"<top>\n<num> Number: {t.topic_id}\n<title> {t.title}\n")
        if t.description:
            stream.write(f"<desc> Description:\n{t.description}\n")
        if t.narrative:
            stream.write(f"<narr> Narrative:\n{t.narrative}\n")
        stream.write("</top>\n")


def write_qrels(qrels: Qrels, stream: IO[str]) -> None:
    for (topic_id, doc_id), grade in sorted(
        qrels.judgments.items(), key=lambda kv: (topic_sort_key(kv[0][0]), kv[0][1])
    ):
        stream.write(f"{topic_id} 0 {doc_id} {grade}\n")
