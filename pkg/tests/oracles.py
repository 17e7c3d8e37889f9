"""Independent brute-force reference implementations used as test oracles.

Nothing here touches the engine's index, scorer or evaluator code paths:
scoring scans raw per-document term lists and evaluates the closed-form
formulas directly, index statistics are recounted with nested loops, and
measures are recomputed rank by rank. Deliberately slow and simple.
"""

from __future__ import annotations

import math


# -- index statistics ----------------------------------------------------

def ref_index(docs_terms: dict[str, list[str]]) -> dict:
    """Recount postings, document/collection frequencies and lengths."""
    postings: dict[str, list[tuple[str, int]]] = {}
    vocabulary = sorted({t for terms in docs_terms.values() for t in terms})
    for term in vocabulary:
        plist = []
        for doc_id in sorted(docs_terms):
            tf = docs_terms[doc_id].count(term)
            if tf > 0:
                plist.append((doc_id, tf))
        postings[term] = plist
    doc_lengths = {d: len(ts) for d, ts in docs_terms.items()}
    total = sum(doc_lengths.values())
    return {
        "postings": postings,
        "doc_lengths": doc_lengths,
        "df": {t: len(p) for t, p in postings.items()},
        "cf": {t: sum(tf for _, tf in p) for t, p in postings.items()},
        "doc_count": len(docs_terms),
        "total_tokens": total,
        "avg_doc_len": total / len(docs_terms) if docs_terms else 0.0,
    }


# -- scoring -------------------------------------------------------------

def _rank(scores: dict[str, float], depth: int = 1000) -> list[tuple[str, float]]:
    return sorted(scores.items(), key=lambda kv: (-kv[1], kv[0]))[:depth]


def ref_bm25(query_terms, docs_terms, k1=1.2, b=0.75, depth=1000):
    n = len(docs_terms)
    avgdl = sum(len(ts) for ts in docs_terms.values()) / n
    scores = {}
    for doc_id, terms in docs_terms.items():
        s = 0.0
        for t in set(query_terms):
            df = sum(1 for ts in docs_terms.values() if t in ts)
            tf = terms.count(t)
            if df == 0 or tf == 0:
                continue
            idf = math.log(1 + (n - df + 0.5) / (df + 0.5))
            s += idf * tf * (k1 + 1) / (tf + k1 * (1 - b + b * len(terms) / avgdl))
        if s != 0.0:
            scores[doc_id] = s
    return _rank(scores, depth)


def ref_tfidf(query_terms, docs_terms, depth=1000):
    n = len(docs_terms)
    scores = {}
    for doc_id, terms in docs_terms.items():
        s = 0.0
        for t in set(query_terms):
            df = sum(1 for ts in docs_terms.values() if t in ts)
            tf = terms.count(t)
            if df == 0 or tf == 0:
                continue
            s += tf * math.log(n / df)
        if s != 0.0:
            scores[doc_id] = s
    return _rank(scores, depth)


def ref_dirichlet(query_terms, docs_terms, mu=1000.0, depth=1000):
    total = sum(len(ts) for ts in docs_terms.values())
    cf = {}
    for terms in docs_terms.values():
        for t in terms:
            cf[t] = cf.get(t, 0) + 1
    scores = {}
    for doc_id, terms in docs_terms.items():
        if not any(t in terms for t in set(query_terms)):
            continue
        s = 0.0
        for t in query_terms:  # every occurrence
            if cf.get(t, 0) == 0:
                continue
            tf = terms.count(t)
            s += math.log((tf + mu * cf[t] / total) / (len(terms) + mu))
        scores[doc_id] = s
    return _rank(scores, depth)


def ref_boolean(query_terms, docs_terms, depth=1000):
    unique = set(query_terms)
    scores = {}
    for doc_id, terms in docs_terms.items():
        matched = sum(1 for t in unique if t in terms)
        if matched:
            scores[doc_id] = matched / len(unique)
    return _rank(scores, depth)


REF_SCORERS = {
    "bm25": ref_bm25,
    "tfidf": ref_tfidf,
    "dirichlet_lm": ref_dirichlet,
    "boolean": ref_boolean,
}


# -- effectiveness measures ------------------------------------------------

def ref_precision_at(ranked_docs: list[str], grades: dict[str, int], k: int) -> float:
    relevant = 0
    for doc in ranked_docs[:k]:
        if grades.get(doc, 0) > 0:
            relevant += 1
    return relevant / k


def ref_average_precision(ranked_docs: list[str], grades: dict[str, int]) -> float:
    r_total = len([d for d, g in grades.items() if g > 0])
    acc = 0.0
    for rank in range(1, len(ranked_docs) + 1):
        if grades.get(ranked_docs[rank - 1], 0) > 0:
            acc += ref_precision_at(ranked_docs, grades, rank)
    return acc / r_total


def ref_ndcg(ranked_docs: list[str], grades: dict[str, int], cutoff=None) -> float:
    limit = len(ranked_docs) if cutoff is None else min(cutoff, len(ranked_docs))
    dcg = 0.0
    for rank in range(1, limit + 1):
        gain = grades.get(ranked_docs[rank - 1], 0)
        dcg += gain / (math.log(rank + 1) / math.log(2))
    ideal = sorted(grades.values(), reverse=True)
    ideal_limit = len(ideal) if cutoff is None else min(cutoff, len(ideal))
    idcg = 0.0
    for rank in range(1, ideal_limit + 1):
        idcg += ideal[rank - 1] / (math.log(rank + 1) / math.log(2))
    return dcg / idcg


def ref_rprec(ranked_docs: list[str], grades: dict[str, int]) -> float:
    r_total = len([d for d, g in grades.items() if g > 0])
    return ref_precision_at(ranked_docs, grades, r_total)


def ref_recip_rank(ranked_docs: list[str], grades: dict[str, int]) -> float:
    rank = 1
    for doc in ranked_docs:
        if grades.get(doc, 0) > 0:
            return 1.0 / rank
        rank += 1
    return 0.0
