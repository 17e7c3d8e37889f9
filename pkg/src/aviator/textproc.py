"""Preprocessing: tokenization, stopword removal, stemming.

Varying these stages (together with the retrieval model) is what spans
the pipeline grid, so every stage is pure and deterministic: stoplist
tables are immutable after load and stemmers are plain token->token
functions registered by id.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from functools import lru_cache
from importlib import resources
from typing import Callable, Iterable

from . import porter
from .errors import AviatorError

STOPLIST_IDS = ("indri", "lucene", "terrier", "nostop")

MODEL_IDS = ("bm25", "boolean", "dirichlet_lm", "tfidf")

# Valid model_params keys per retrieval model.
MODEL_PARAM_KEYS: dict[str, frozenset[str]] = {
    "bm25": frozenset({"k1", "b"}),
    "boolean": frozenset(),
    "dirichlet_lm": frozenset({"mu"}),
    "tfidf": frozenset(),
}


class UnknownStoplist(AviatorError):
    pass


class UnknownStemmer(AviatorError):
    pass


class UnknownModel(AviatorError):
    pass


class InvalidModelParams(AviatorError):
    pass


_TOKEN = re.compile(r"[^\W_]+")  # Unicode letters and digits


def tokenize(text: str) -> list[str]:
    """Lowercase and split on every character that is not a letter or digit."""
    return _TOKEN.findall(text.lower())


def parse_stoplist(lines: Iterable[str]) -> frozenset[str]:
    """Stoplist file format: UTF-8, one term per line, '#' comments allowed.

    Terms must already be single tokens of the tokenizer above.
    """
    terms: set[str] = set()
    for raw in lines:
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        tokens = tokenize(line)
        if tokens != [line]:
            raise AviatorError(
                f"stoplist entry {line!r} is not a single pre-tokenized term"
            )
        terms.add(line)
    return frozenset(terms)


@lru_cache(maxsize=None)
def stoplist(stoplist_id: str) -> frozenset[str]:
    if stoplist_id == "nostop":
        return frozenset()
    if stoplist_id not in STOPLIST_IDS:
        raise UnknownStoplist(stoplist_id)
    ref = resources.files(__package__) / "stoplists" / f"{stoplist_id}.txt"
    return parse_stoplist(ref.read_text(encoding="utf-8").splitlines())


def apply_stoplist(tokens: list[str], stoplist_id: str) -> list[str]:
    table = stoplist(stoplist_id)
    if not table:
        return tokens
    return [t for t in tokens if t not in table]


StemFn = Callable[[str], str]

_STEMMERS: dict[str, StemFn] = {
    "porter": porter.stem,
    "nostem": lambda token: token,
}


def register_stemmer(stemmer_id: str, fn: StemFn) -> None:
    """Plugin hook: register an additional term->term stemmer by id."""
    _STEMMERS[stemmer_id] = fn


def stemmer_ids() -> tuple[str, ...]:
    return tuple(_STEMMERS)


def stem(token: str, stemmer_id: str) -> str:
    try:
        fn = _STEMMERS[stemmer_id]
    except KeyError:
        raise UnknownStemmer(stemmer_id) from None
    return fn(token)


@dataclass(frozen=True)
class Pipeline:
    """One grid cell: (stoplist, stemmer, retrieval model) plus model params."""

    stoplist_id: str
    stemmer_id: str
    model_id: str
    model_params: dict[str, float] = field(default_factory=dict, hash=False)

    def __post_init__(self) -> None:
        if self.stoplist_id not in STOPLIST_IDS:
            raise UnknownStoplist(self.stoplist_id)
        if self.stemmer_id not in _STEMMERS:
            raise UnknownStemmer(self.stemmer_id)
        if self.model_id not in MODEL_IDS:
            raise UnknownModel(self.model_id)
        bad = set(self.model_params) - MODEL_PARAM_KEYS[self.model_id]
        if bad:
            raise InvalidModelParams(
                f"params {sorted(bad)} not valid for model {self.model_id}"
            )

    @property
    def preproc_key(self) -> tuple[str, str]:
        """Index identity: pipelines sharing (stoplist, stemmer) share indexes."""
        return (self.stoplist_id, self.stemmer_id)

    @property
    def pipeline_id(self) -> str:
        return f"{self.stoplist_id}.{self.stemmer_id}.{self.model_id}"


def pipeline_terms(text: str, pipeline: Pipeline) -> list[str]:
    """tokenize -> stoplist -> stem, in that order."""
    tokens = apply_stoplist(tokenize(text), pipeline.stoplist_id)
    if pipeline.stemmer_id == "nostem":
        return tokens
    fn = _STEMMERS[pipeline.stemmer_id]
    return [fn(t) for t in tokens]
