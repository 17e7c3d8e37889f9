"""Acceptance suite: one test per criterion, at the stated tolerance.

Each test doubles as the exit gate for its subsystem; the conftest hook
prints one pass/fail line per criterion at the end of the run. Budgets
(merge equivalence < 60 s, partition < 5 s, measures < 1 s, scorers
< 10 s, tau < 10 s, convergence < 5 min, progression < 2 min,
determinism < 5 min, service < 2 min) hold with a wide margin on
desk-grade hardware.
"""

import json
import math
import random
import threading
import time
from pathlib import Path

import numpy as np
import pytest
from fastapi.testclient import TestClient
from scipy import stats as scipy_stats

from aviator.analysis import convergence_report, grid_run, kendall_tau
from aviator.bundles import plan_bundles
from aviator.cli import main as cli_main
from aviator.corpus_io import (
    Document,
    parse_qrels,
    parse_run,
    write_qrels,
    write_topics,
    write_trec_documents,
)
from aviator.evaluation import evaluate_run
from aviator.index_core import (
    empty_snapshot,
    index_bundle,
    merge,
    snapshot_fingerprint,
)
from aviator.progression import Decision, NotYetAvailable, ProgressionEngine
from aviator.retrieval import Query, score
from aviator.service import create_app
from aviator.synth import SynthSpec, generate
from aviator.textproc import Pipeline, pipeline_terms

from oracles import (
    REF_SCORERS,
    ref_average_precision,
    ref_index,
    ref_ndcg,
    ref_precision_at,
    ref_recip_rank,
    ref_rprec,
)
from test_progression import _explore_all_traces

DATA = Path(__file__).parent / "data"
IDENTITY = Pipeline("nostop", "nostem", "bm25")


def _random_docs(rng, max_docs=200, vocab=30):
    words = [f"w{i}" for i in range(vocab)]
    n = rng.randint(1, max_docs)
    return [
        Document(f"doc{i:04d}", " ".join(rng.choices(words, k=rng.randint(0, 30))))
        for i in range(n)
    ]


def test_merge_equivalence_oracle():
    """Incremental chains equal batch builds at every version, exactly,
    for >= 100 random corpora (<= 200 docs, n in [1, 10])."""
    rng = random.Random(20240801)
    corpora = 0
    versions_checked = 0
    while corpora < 100:
        docs = _random_docs(rng)
        n = rng.randint(1, min(10, len(docs)))
        plan = plan_bundles([d.doc_id for d in docs], n, seed=rng.getrandbits(32))
        by_id = {d.doc_id: d for d in docs}
        snapshot = empty_snapshot()
        for version in range(1, n + 1):
            members = sorted(plan.bundle_members(version))
            snapshot = merge(
                snapshot,
                index_bundle([by_id[m] for m in members], IDENTITY, version),
            )
            union = sorted(plan.members_upto(version))
            batch = merge(
                empty_snapshot(),
                index_bundle([by_id[m] for m in union], IDENTITY, 1),
            )
            # observational identity: postings, lengths, all statistics
            assert dict(snapshot.postings) == dict(batch.postings)
            assert dict(snapshot.doc_lengths) == dict(batch.doc_lengths)
            assert dict(snapshot.collection_term_freq) == dict(
                batch.collection_term_freq
            )
            assert snapshot.doc_count == batch.doc_count
            assert snapshot.total_tokens == batch.total_tokens
            assert snapshot.avg_doc_len == batch.avg_doc_len
            # and against the naive recounting oracle
            expected = ref_index(
                {m: pipeline_terms(by_id[m].text, IDENTITY) for m in union}
            )
            assert dict(snapshot.postings) == {
                t: tuple(p) for t, p in expected["postings"].items()
            }
            assert dict(snapshot.doc_lengths) == expected["doc_lengths"]
            versions_checked += 1
        corpora += 1
    assert corpora >= 100 and versions_checked >= 100


def test_bundle_partition_properties():
    """Disjointness, exhaustiveness and the exact size formula for
    randomized (|D|, n)."""
    rng = random.Random(77)
    for _ in range(250):
        corpus_size = rng.randint(1, 500)
        n = rng.randint(1, min(corpus_size, 25))
        ids = [f"D{i:05d}" for i in range(corpus_size)]
        plan = plan_bundles(ids, n, seed=rng.getrandbits(64))
        k = corpus_size // n
        union = set()
        for i in range(1, n + 1):
            members = plan.bundle_members(i)
            expected = k if i < n else corpus_size - k * (n - 1)
            assert len(members) == expected
            assert not (union & members)
            union |= members
        assert union == set(ids)


def test_measure_oracles_on_golden_fixture():
    """AP, nDCG, P@k, Rprec and RR on the committed 3-topic/20-doc
    fixture match the brute-force reference evaluator within 1e-4."""
    run = parse_run((DATA / "measure_fixture_run.txt").read_text())
    qrels = parse_qrels((DATA / "measure_fixture_qrels.txt").read_text())
    golden = json.loads((DATA / "measure_golden.json").read_text())

    # golden file still matches the oracle it was produced by
    oracle = {
        "ap": ref_average_precision,
        "ndcg": ref_ndcg,
        "rprec": ref_rprec,
        "recip_rank": ref_recip_rank,
    }
    for topic, expected in golden["per_topic"].items():
        ranked = [e.doc_id for e in run.entries[topic]]
        grades = qrels.for_topic(topic)
        for name, fn in oracle.items():
            assert fn(ranked, grades) == pytest.approx(expected[name], abs=1e-12)
        assert ref_ndcg(ranked, grades, cutoff=10) == pytest.approx(
            expected["ndcg@10"], abs=1e-12
        )
        assert ref_precision_at(ranked, grades, 5) == pytest.approx(
            expected["p@5"], abs=1e-12
        )

    # the engine matches the golden values
    for measure in ("ap", "ndcg", "ndcg@10", "p@5", "p@10", "rprec", "recip_rank"):
        result = evaluate_run(run, qrels, measure)
        for topic, expected in golden["per_topic"].items():
            assert result.per_topic[topic] == pytest.approx(
                expected[measure], abs=1e-4
            ), (measure, topic)
        assert result.mean == pytest.approx(golden["mean"][measure], abs=1e-4)


def test_scorer_oracles_full_scan():
    """All four models match brute-force full-scan scoring on corpora of
    <= 50 docs: identical rankings, scores within 1e-9."""
    rng = random.Random(31337)
    words = [f"w{i}" for i in range(12)]
    for trial in range(40):
        texts = {
            f"doc{i:03d}": " ".join(rng.choices(words, k=rng.randint(1, 25)))
            for i in range(rng.randint(1, 50))
        }
        docs = [Document(d, t) for d, t in texts.items()]
        snapshot = merge(empty_snapshot(), index_bundle(docs, IDENTITY))
        terms = {d: pipeline_terms(t, IDENTITY) for d, t in texts.items()}
        query_terms = tuple(rng.choices(words, k=rng.randint(1, 5)))
        for model in ("bm25", "tfidf", "dirichlet_lm", "boolean"):
            got = score(Query("q", query_terms), snapshot, model)
            want = REF_SCORERS[model](list(query_terms), terms)
            assert [d for d, _ in got] == [d for d, _ in want], (trial, model)
            for (doc, s_got), (_, s_want) in zip(got, want):
                assert abs(s_got - s_want) <= 1e-9, (trial, model, doc)


def test_kendall_tau_against_pair_counting_oracle():
    """tau-b equals an independent oracle on 1000 random score-vector
    pairs with injected ties, within 1e-12; exact at the extremes."""
    rng = random.Random(2718)
    for trial in range(1000):
        n = rng.randint(2, 30)
        ids = [f"s{i}" for i in range(n)]
        levels = rng.choice([4, 8, 1000])  # coarse grids inject ties
        a = {i: rng.randint(0, levels) / levels for i in ids}
        b = {i: rng.randint(0, levels) / levels for i in ids}
        got = kendall_tau(a, b)
        want = scipy_stats.kendalltau(
            [a[i] for i in ids], [b[i] for i in ids], variant="b"
        ).statistic
        if math.isnan(want):
            assert math.isnan(got) or got == 1.0, trial
        else:
            assert abs(got - want) <= 1e-12, trial

    # tie-free extremes, exact
    scores = {f"s{i}": float(i) for i in range(20)}
    reverse = {k: -v for k, v in scores.items()}
    assert kendall_tau(scores, dict(scores)) == 1.0
    assert kendall_tau(scores, reverse) == -1.0


def test_convergence_shape_on_synthetic_grid():
    """2000 docs, 50 topics, n=10, 2x2x4 pipeline grid: the tau series
    ends at exactly 1.0, mean |relative difference| at version 10 is
    exactly 0, tau correlates positively with the version index, and the
    median |relative difference| is nonincreasing (<= 1 inversion)."""
    docs, topics, qrels = generate(
        SynthSpec(n_docs=2000, vocab_size=3000, n_topics=50,
                  relevant_per_topic=10, seed=7)
    )
    plan = plan_bundles([d.doc_id for d in docs], 10, seed=7)
    pipelines = [
        Pipeline(stop, stem, model)
        for stop in ("nostop", "lucene")
        for stem in ("nostem", "porter")
        for model in ("bm25", "tfidf", "dirichlet_lm", "boolean")
    ]
    assert len(pipelines) == 16
    matrix = grid_run(pipelines, topics, qrels, plan, docs, measure="ndcg")
    assert matrix.chains_built == 4  # chains per (stoplist, stemmer), not model
    report = convergence_report(matrix)

    final = matrix.versions[-1]
    assert report.tau_by_version[final] == 1.0

    mean_abs_rd_final = np.mean(
        [abs(report.reldiff_by_system[(p, final)]) for p in matrix.pipelines]
    )
    assert mean_abs_rd_final == 0.0

    versions = sorted(report.tau_by_version)
    taus = [report.tau_by_version[v] for v in versions]
    spearman = scipy_stats.spearmanr(versions, taus).statistic
    assert spearman > 0.0, taus

    def median_abs_rd(version):
        values = []
        for p in matrix.pipelines:
            for t in matrix.topics:
                full = matrix.values[(p, final, t)]
                part = matrix.values[(p, version, t)]
                if full == 0.0 and part == 0.0:
                    values.append(0.0)
                elif full != 0.0:
                    values.append(abs((part - full) / full))
        return float(np.median(values))

    medians = [median_abs_rd(v) for v in versions]
    inversions = sum(
        1 for a, b in zip(medians, medians[1:]) if b > a + 1e-12
    )
    assert inversions <= 1, medians


def test_progression_protocol():
    """Model-based exploration for n <= 4 plus a torn-read stress test:
    >= 10k reads racing 10 adoption swaps see whole versions only."""
    for n in (1, 2, 3, 4):
        outcomes = _explore_all_traces(n)
        assert outcomes
        for trace, machine in outcomes:
            assert machine.complete == (trace.count("update") == n - 1), trace

    docs = [Document(f"d{i:03d}", f"w{i % 7} w{i % 3} common") for i in range(60)]
    plan = plan_bundles([d.doc_id for d in docs], 10, seed=5)
    engine = ProgressionEngine(docs, plan, IDENTITY)
    observed: list[tuple[int, str]] = []

    def reader():
        local = []
        while len(local) < 1250:
            try:
                snap = engine.current_snapshot()
            except NotYetAvailable:
                continue
            local.append((snap.version, snapshot_fingerprint(snap)))
        observed.extend(local)

    readers = [threading.Thread(target=reader) for _ in range(8)]
    engine.start()
    for t in readers:
        t.start()
    swaps = 0
    try:
        while True:
            state = engine.wait_for(
                lambda s: s.pending_version is not None or s.status.value == "complete",
                timeout=60,
            )
            if state.status.value == "complete":
                break
            engine.decide(Decision.UPDATE)
            swaps += 1
        canonical = {
            v: snapshot_fingerprint(engine.snapshot_for_version(v))
            for v in range(1, 11)
        }
    finally:
        for t in readers:
            t.join(timeout=60)
        engine.stop()

    assert swaps >= 9  # versions 2..10 all adopted while reads raced
    assert len(observed) >= 10_000
    mixed = [
        (version, fp) for version, fp in observed if canonical[version] != fp
    ]
    assert mixed == []


def test_cli_pipeline_determinism(tmp_path):
    """synth -> bundle -> grid -> analyze, twice, with one seed: every
    CSV byte-identical."""

    def execute(root: Path) -> dict[str, bytes]:
        data = root / "data"
        assert cli_main([
            "synth", "--out-dir", str(data), "--docs", "200", "--vocab", "600",
            "--topics", "8", "--relevant-per-topic", "6", "--seed", "99",
        ]) == 0
        assert cli_main([
            "bundle", "--corpus", str(data / "corpus.sgml"),
            "--bundles", "5", "--seed", "99", "--out", str(root / "plan.txt"),
        ]) == 0
        assert cli_main([
            "grid",
            "--corpus", str(data / "corpus.sgml"),
            "--topics", str(data / "topics.txt"),
            "--qrels", str(data / "qrels.txt"),
            "--plan", str(root / "plan.txt"),
            "--stoplist", "nostop,lucene", "--stemmer", "nostem,porter",
            "--model", "bm25,dirichlet_lm", "--measure", "ndcg",
            "--out", str(root / "matrix.csv"),
        ]) == 0
        assert cli_main([
            "analyze", "--matrix", str(root / "matrix.csv"),
            "--measure", "ndcg", "--out-dir", str(root / "report"),
        ]) == 0
        outputs = {"matrix.csv": (root / "matrix.csv").read_bytes()}
        for name in ("reldiff_by_system.csv", "tau_by_version.csv",
                     "boxplot_by_version.csv"):
            outputs[name] = (root / "report" / name).read_bytes()
        return outputs

    first = execute(tmp_path / "one")
    second = execute(tmp_path / "two")
    assert first == second
    assert first["matrix.csv"].startswith(b"pipeline,version,topic,value\n")


def test_service_contract(tmp_path):
    """Every endpoint example against a live in-process service with a
    replay-mode synthetic session."""
    collection = tmp_path / "collection"
    collection.mkdir()
    docs, topics, qrels = generate(
        SynthSpec(n_docs=100, vocab_size=400, n_topics=5,
                  relevant_per_topic=5, seed=13)
    )
    with open(collection / "corpus.sgml", "w") as fh:
        write_trec_documents(docs, fh)
    with open(collection / "topics.txt", "w") as fh:
        write_topics(topics, fh)
    with open(collection / "qrels.txt", "w") as fh:
        write_qrels(qrels, fh)

    config = {
        "corpus_path": str(collection / "corpus.sgml"),
        "topics_path": str(collection / "topics.txt"),
        "qrels_path": str(collection / "qrels.txt"),
        "n_bundles": 5,
        "seed": 1,
        "stoplist_id": "lucene",
        "stemmer_id": "porter",
        "model_id": "bm25",
        "measure": "ndcg",
        "replay": {"enabled": True, "speedup_factor": 1e6},
    }

    def wait_status(client, sid, predicate, timeout=30.0):
        deadline = time.monotonic() + timeout
        while time.monotonic() < deadline:
            payload = client.get(f"/sessions/{sid}/status").json()
            if predicate(payload):
                return payload
            time.sleep(0.01)
        raise TimeoutError(payload)

    app = create_app(tmp_path / "state")
    with TestClient(app) as client:
        # POST /sessions: valid -> 201, bad path -> 400, bad corpus -> 422
        response = client.post("/sessions", json=config)
        assert response.status_code == 201
        sid = response.json()["session_id"]
        assert client.post(
            "/sessions", json={**config, "qrels_path": str(collection / "no.txt")}
        ).status_code == 400
        bad = collection / "bad.sgml"
        bad.write_text("<DOC><TEXT>x</TEXT></DOC>")
        assert client.post(
            "/sessions", json={**config, "corpus_path": str(bad)}
        ).status_code == 422

        # GET status: percent tracks adopted bundles; pending -> decision
        payload = wait_status(client, sid, lambda p: p["pending_version"] == 2)
        assert payload["status"] == "pending_decision"
        assert payload["percent_indexed"] == pytest.approx(20.0)

        # decision: update advances, continue retains, none -> 409
        assert client.post(
            f"/sessions/{sid}/index/decision", json={"action": "update"}
        ).json()["active_version"] == 2
        wait_status(client, sid, lambda p: p["pending_version"] == 3)
        retained = client.post(
            f"/sessions/{sid}/index/decision", json={"action": "continue"}
        ).json()
        assert retained["active_version"] == 2
        assert retained["pending_version"] == 3

        # runs: first run evaluates; fifth distinct model -> 409
        first_run = client.post(f"/sessions/{sid}/runs", json={"model_id": "bm25"})
        assert first_run.status_code == 201
        assert first_run.json()["snapshot_version"] == 2
        for model in ({"model_id": "tfidf"}, {"model_id": "boolean"},
                      {"model_id": "dirichlet_lm"}):
            assert client.post(
                f"/sessions/{sid}/runs", json=model
            ).status_code == 201
        assert client.post(
            f"/sessions/{sid}/runs", json={"model_id": "bm25", "params": {"k1": 2.0}}
        ).status_code == 409

        # evaluations: per-topic scatter data, overall means, 400 unknown
        scatter = client.get(
            f"/sessions/{sid}/evaluations",
            params={"measure": "ndcg", "scope": "topic"},
        ).json()
        assert len(scatter["models"]["bm25"]) == 5
        overall = client.get(
            f"/sessions/{sid}/evaluations", params={"scope": "overall"}
        ).json()
        assert len(overall["models"]) == 4
        assert client.get(
            f"/sessions/{sid}/evaluations", params={"measure": "nope"}
        ).status_code == 400

        # convergence: 409 before the final bundle, tau ends at 1.0 after
        assert client.get(
            f"/sessions/{sid}/analysis/convergence"
        ).status_code == 409
        while True:
            payload = wait_status(
                client, sid,
                lambda p: p["pending_version"] is not None
                or p["status"] == "complete",
            )
            if payload["status"] == "complete":
                break
            client.post(f"/sessions/{sid}/index/decision", json={"action": "update"})
        convergence = client.get(f"/sessions/{sid}/analysis/convergence").json()
        assert convergence["tau_by_version_csv"].splitlines()[-1] == "5,1.0"

    # replay determinism: a second identical session yields identical payloads
    app2 = create_app(tmp_path / "state2")
    with TestClient(app2) as client2:
        sid2 = client2.post("/sessions", json=config).json()["session_id"]
        while True:
            payload = wait_status(
                client2, sid2,
                lambda p: p["pending_version"] is not None
                or p["status"] == "complete",
            )
            if payload["status"] == "complete":
                break
            client2.post(
                f"/sessions/{sid2}/index/decision", json={"action": "update"}
            )
        for model in ({"model_id": "tfidf"}, {"model_id": "boolean"},
                      {"model_id": "dirichlet_lm"}):
            client2.post(f"/sessions/{sid2}/runs", json=model)
        convergence2 = client2.get(f"/sessions/{sid2}/analysis/convergence").json()
    assert convergence2 == convergence
