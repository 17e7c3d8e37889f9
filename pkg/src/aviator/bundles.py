"""Corpus partitioning into disjoint, uniformly sampled bundles.

The corpus is split into n bundles: the first n-1 hold exactly
floor(|D|/n) documents and the last holds the remainder. Assignment is a
contiguous slicing of one seeded permutation, which makes disjointness
and exhaustiveness structural rather than probabilistic.

The permutation is a Fisher-Yates shuffle over the lexicographically
sorted doc id list, driven by splitmix64 -- a fixed 64-bit generator with
published reference outputs -- so a (doc id set, n, seed) triple yields
the same plan on every platform and in every language that implements
the same generator.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import IO, Iterator, Sequence

from .errors import AviatorError

DEFAULT_BUNDLE_COUNT = 10

_MASK64 = (1 << 64) - 1


class TooManyBundles(AviatorError):
    pass


class EmptyCorpus(AviatorError):
    pass


class IndexOutOfRange(AviatorError):
    pass


class MalformedPlan(AviatorError):
    pass


def splitmix64(seed: int) -> Iterator[int]:
    """Infinite stream of 64-bit outputs of splitmix64 for the given seed."""
    state = seed & _MASK64
    while True:
        state = (state + 0x9E3779B97F4A7C15) & _MASK64
        z = state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
        yield z ^ (z >> 31)


def seeded_shuffle(items: list, seed: int) -> None:
    """In-place Fisher-Yates shuffle driven by splitmix64.

    The index draw is `next() mod (i+1)`; the modulo bias is below 2^-57
    for any list this engine handles and keeps the algorithm portable.
    """
    rng = splitmix64(seed)
    for i in range(len(items) - 1, 0, -1):
        j = next(rng) % (i + 1)
        items[i], items[j] = items[j], items[i]


def bundle_sizes(corpus_size: int, n: int) -> list[int]:
    """Sizes [|B_1|..|B_n|]: k = floor(|D|/n) for the first n-1 bundles,
    |D| - k(n-1) for the last."""
    k = corpus_size // n
    return [k] * (n - 1) + [corpus_size - k * (n - 1)]


@dataclass
class BundlePlan:
    n: int
    seed: int
    corpus_size: int
    assignment: dict[str, int] = field(default_factory=dict)

    def bundle_members(self, i: int) -> set[str]:
        if not 1 <= i <= self.n:
            raise IndexOutOfRange(f"bundle index {i} not in [1, {self.n}]")
        return {d for d, b in self.assignment.items() if b == i}

    def members_upto(self, version: int) -> set[str]:
        """Doc ids covered by bundles 1..version."""
        if not 0 <= version <= self.n:
            raise IndexOutOfRange(f"version {version} not in [0, {self.n}]")
        return {d for d, b in self.assignment.items() if b <= version}

    def size_upto(self, version: int) -> int:
        return sum(bundle_sizes(self.corpus_size, self.n)[:version])


def plan_bundles(doc_ids: Sequence[str], n: int, seed: int) -> BundlePlan:
    """Partition doc_ids into n bundles by contiguous slices of one
    seeded uniform permutation."""
    if len(doc_ids) == 0:
        raise EmptyCorpus("cannot bundle an empty corpus")
    if n < 1:
        raise AviatorError(f"bundle count must be >= 1, got {n}")
    if n > len(doc_ids):
        raise TooManyBundles(f"{n} bundles for {len(doc_ids)} documents")
    if len(set(doc_ids)) != len(doc_ids):
        raise AviatorError("doc_ids must be distinct")

    order = sorted(doc_ids)
    seeded_shuffle(order, seed)

    assignment: dict[str, int] = {}
    pos = 0
    for i, size in enumerate(bundle_sizes(len(order), n), start=1):
        for doc_id in order[pos:pos + size]:
            assignment[doc_id] = i
        pos += size
    return BundlePlan(n=n, seed=seed, corpus_size=len(order), assignment=assignment)


def bundle_members(plan: BundlePlan, i: int) -> set[str]:
    return plan.bundle_members(i)


def write_plan(plan: BundlePlan, stream: IO[str]) -> None:
    """Text serialization: header "n seed corpus_size", then one
    "doc_id bundle_index" line per document, sorted by doc_id."""
    stream.write(f"{plan.n} {plan.seed} {plan.corpus_size}\n")
    for doc_id in sorted(plan.assignment):
        stream.write(f"{doc_id} {plan.assignment[doc_id]}\n")


def read_plan(stream: IO[str] | str) -> BundlePlan:
    text = stream if isinstance(stream, str) else stream.read()
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines:
        raise MalformedPlan("empty plan file")
    header = lines[0].split()
    if len(header) != 3:
        raise MalformedPlan(f"bad header: {lines[0]!r}")
    try:
        n, seed, corpus_size = (int(x) for x in header)
    except ValueError:
        raise MalformedPlan(f"non-integer header: {lines[0]!r}")
    assignment: dict[str, int] = {}
    for ln in lines[1:]:
        parts = ln.split()
        if len(parts) != 2:
            raise MalformedPlan(f"bad assignment line: {ln!r}")
        doc_id, bundle = parts[0], int(parts[1])
        if not 1 <= bundle <= n:
            raise MalformedPlan(f"bundle index {bundle} out of range")
        if doc_id in assignment:
            raise MalformedPlan(f"duplicate doc id {doc_id}")
        assignment[doc_id] = bundle
    if len(assignment) != corpus_size:
        raise MalformedPlan(
            f"header says {corpus_size} docs, found {len(assignment)}"
        )
    return BundlePlan(n=n, seed=seed, corpus_size=corpus_size, assignment=assignment)
