"""Deterministic synthetic test collections.

Generates a corpus, topics and graded judgments in the TREC formats the
parsers read, so convergence experiments run at desk scale without any
licensed collection. Term draws follow a bounded Zipf distribution whose
head ranks are real English function words (so stoplists bite), pseudo
words carry inflectional suffixes (so stemmers bite), and each topic is
built around a small theme: documents injected with a high theme-term
density are graded 2, medium density 1, and a sample of untouched
documents is judged 0. Everything is a pure function of the spec seed.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .corpus_io import Document, Qrels, Topic
from .errors import AviatorError

_STOP_HEAD = (
    "the", "of", "and", "to", "in", "a", "is", "that", "for", "it",
    "as", "was", "with", "on", "be", "by", "at", "this", "are", "from",
)

_SYLLABLES = (
    "ba", "co", "da", "fe", "gi", "ho", "ju", "ka", "lo", "mu",
    "na", "pe", "qui", "ra", "so", "ta", "vu", "wa", "xe", "zo",
)

_SUFFIXES = ("", "s", "ing", "ed")
_SUFFIX_P = (0.70, 0.15, 0.08, 0.07)

# theme-term density bands: fraction of the document length injected
_DENSITY_GRADE2 = 0.10
_DENSITY_GRADE1 = 0.04

_THEME_SIZE = 3
_HEAD_EXCLUDE = 50  # theme roots avoid the most frequent vocabulary ranks


class InfeasibleSpec(AviatorError):
    pass


@dataclass(frozen=True)
class SynthSpec:
    n_docs: int = 1000
    vocab_size: int = 2000
    n_topics: int = 50
    relevant_per_topic: int = 10
    seed: int = 0
    zipf_s: float = 1.1
    doc_len_mu: float = 5.0  # log-normal parameters of token counts
    doc_len_sigma: float = 0.5

    def validate(self) -> None:
        if min(self.n_docs, self.vocab_size, self.n_topics,
               self.relevant_per_topic) <= 0:
            raise InfeasibleSpec("all counts must be positive")
        if self.relevant_per_topic > self.n_docs:
            raise InfeasibleSpec(
                f"cannot make {self.relevant_per_topic} documents relevant "
                f"in a corpus of {self.n_docs}"
            )
        roots_needed = _HEAD_EXCLUDE + self.n_topics * _THEME_SIZE
        if self.vocab_size < roots_needed:
            raise InfeasibleSpec(
                f"vocab_size {self.vocab_size} too small for "
                f"{self.n_topics} disjoint topic themes (need >= {roots_needed})"
            )


def _root(i: int) -> str:
    """Pseudo-word for vocabulary rank i; the head ranks are stopwords."""
    if i < len(_STOP_HEAD):
        return _STOP_HEAD[i]
    parts = []
    x = i
    for _ in range(3):
        parts.append(_SYLLABLES[x % len(_SYLLABLES)])
        x //= len(_SYLLABLES)
    return "".join(parts)


def _inflect(root: str, rng: np.random.Generator) -> str:
    if root in _STOP_HEAD:
        return root
    return root + _SUFFIXES[rng.choice(len(_SUFFIXES), p=_SUFFIX_P)]


def generate(spec: SynthSpec) -> tuple[list[Document], list[Topic], Qrels]:
    """Generate (documents, topics, qrels), fully determined by the seed."""
    spec.validate()
    rng = np.random.Generator(np.random.PCG64(spec.seed))

    vocab = [_root(i) for i in range(spec.vocab_size)]
    weights = 1.0 / np.arange(1, spec.vocab_size + 1) ** spec.zipf_s
    weights /= weights.sum()

    doc_tokens: list[list[str]] = []
    for _ in range(spec.n_docs):
        length = max(10, int(round(rng.lognormal(spec.doc_len_mu, spec.doc_len_sigma))))
        draws = rng.choice(spec.vocab_size, size=length, p=weights)
        doc_tokens.append([_inflect(vocab[i], rng) for i in draws])

    theme_pool = rng.permutation(
        np.arange(_HEAD_EXCLUDE, spec.vocab_size)
    )
    topics: list[Topic] = []
    qrels = Qrels()
    for t in range(spec.n_topics):
        topic_id = str(t + 1)
        theme = [
            vocab[theme_pool[t * _THEME_SIZE + j]] for j in range(_THEME_SIZE)
        ]
        topics.append(
            Topic(
                topic_id=topic_id,
                title=" ".join(theme),
                description=f"documents about {', '.join(theme)}",
            )
        )

        chosen = rng.choice(spec.n_docs, size=spec.relevant_per_topic, replace=False)
        n_grade2 = (spec.relevant_per_topic + 1) // 2
        for rank, doc_idx in enumerate(chosen):
            tokens = doc_tokens[doc_idx]
            density = _DENSITY_GRADE2 if rank < n_grade2 else _DENSITY_GRADE1
            count = max(2, int(round(density * len(tokens))))
            for _ in range(count):
                pos = int(rng.integers(0, len(tokens) + 1))
                theme_term = _inflect(theme[int(rng.integers(0, _THEME_SIZE))], rng)
                tokens.insert(pos, theme_term)
            grade = 2 if rank < n_grade2 else 1
            key = (topic_id, _doc_id(int(doc_idx)))
            if qrels.judgments.get(key, 0) < grade:
                qrels.judgments[key] = grade

        # judged-but-nonrelevant pool entries
        n_zero = min(2 * spec.relevant_per_topic, spec.n_docs)
        for doc_idx in rng.choice(spec.n_docs, size=n_zero, replace=False):
            key = (topic_id, _doc_id(int(doc_idx)))
            qrels.judgments.setdefault(key, 0)

    documents = [
        Document(doc_id=_doc_id(i), text=" ".join(tokens))
        for i, tokens in enumerate(doc_tokens)
    ]

    for topic in topics:  # generator post-check
        if qrels.relevant_count(topic.topic_id) < 1:
            raise InfeasibleSpec(f"topic {topic.topic_id} has no relevant document")
    return documents, topics, qrels


def _doc_id(i: int) -> str:
    return f"SYN-{i:06d}"
