"""Produce the committed measure-oracle fixture.

Builds a small deterministic collection (3 topics, 20 documents), a run
file over it, and the golden expected values for every implemented
measure, computed with the brute-force reference evaluator in
tests/oracles.py -- not with the engine's evaluation module. The outputs
are committed under tests/data/ and the test suite compares the engine
against them.

Run from the repository root:  python3 scripts/gen_measure_golden.py
"""

from __future__ import annotations

import json
import random
import sys
from pathlib import Path

ROOT = Path(__file__).resolve().parent.parent
sys.path.insert(0, str(ROOT / "tests"))

import oracles  # noqa: E402

DOCS = [f"D{i:02d}" for i in range(20)]
TOPICS = ["351", "352", "353"]


def build_fixture() -> tuple[dict, dict]:
    rng = random.Random(2024)
    qrels: dict[str, dict[str, int]] = {}
    rankings: dict[str, list[str]] = {}
    for topic in TOPICS:
        grades = {}
        judged = rng.sample(DOCS, 14)
        for doc in judged:
            grades[doc] = rng.choice([0, 0, 0, 1, 1, 2])
        if not any(g > 0 for g in grades.values()):
            grades[judged[0]] = 1
        qrels[topic] = grades
        ranked = rng.sample(DOCS, 15)
        rankings[topic] = ranked
    return qrels, rankings


def main() -> None:
    qrels, rankings = build_fixture()
    data_dir = ROOT / "tests" / "data"
    data_dir.mkdir(parents=True, exist_ok=True)

    with open(data_dir / "measure_fixture_qrels.txt", "w") as fh:
        for topic in TOPICS:
            for doc in sorted(qrels[topic]):
                fh.write(f"{topic} 0 {doc} {qrels[topic][doc]}\n")

    with open(data_dir / "measure_fixture_run.txt", "w") as fh:
        for topic in TOPICS:
            for rank, doc in enumerate(rankings[topic], start=1):
                score = 20.0 - rank + 0.5
                fh.write(f"{topic} Q0 {doc} {rank} {score:.6f} fixture\n")

    golden: dict[str, dict[str, float]] = {}
    for topic in TOPICS:
        ranked = rankings[topic]
        grades = qrels[topic]
        golden[topic] = {
            "ap": oracles.ref_average_precision(ranked, grades),
            "ndcg": oracles.ref_ndcg(ranked, grades),
            "ndcg@10": oracles.ref_ndcg(ranked, grades, cutoff=10),
            "p@5": oracles.ref_precision_at(ranked, grades, 5),
            "p@10": oracles.ref_precision_at(ranked, grades, 10),
            "rprec": oracles.ref_rprec(ranked, grades),
            "recip_rank": oracles.ref_recip_rank(ranked, grades),
        }
    means = {
        name: sum(golden[t][name] for t in TOPICS) / len(TOPICS)
        for name in golden[TOPICS[0]]
    }
    payload = {"per_topic": golden, "mean": means}
    with open(data_dir / "measure_golden.json", "w") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
    print(f"golden values written to {data_dir}")


if __name__ == "__main__":
    main()
