"""HTTP control plane: sessions, progression control, runs, evaluations.

One session = one corpus + one preprocessing chain. The session starts
the background indexer immediately; clients poll GET status at their own
rate (polling never blocks the builder), answer index-update offers via
the decision endpoint, submit model runs against the active snapshot and
read evaluations per topic or overall. Once the final bundle is adopted
the convergence payloads are available.

Session state survives restarts: every transition persists a JSON record
under the data directory (AVIATOR_DATA_DIR or --data-dir), and on boot
each recorded session is rebuilt deterministically and fast-forwarded
through its recorded decisions, so a pending offer is pending again.
"""

from __future__ import annotations

import json
import os
import secrets
import threading
from contextlib import asynccontextmanager
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

from fastapi import FastAPI, HTTPException, Response
from pydantic import BaseModel, Field

from . import analysis, corpus_io, evaluation, retrieval
from .bundles import plan_bundles
from .corpus_io import ParseError, Qrels, Run, Topic
from .errors import AviatorError
from .evaluation import EvaluationResult, UnknownMeasure, parse_measure
from .progression import NoPendingVersion, ProgressionEngine
from .textproc import (
    MODEL_IDS,
    MODEL_PARAM_KEYS,
    STOPLIST_IDS,
    Pipeline,
    stemmer_ids,
)

DATA_DIR_ENV = "AVIATOR_DATA_DIR"
MAX_MODELS = 4
EST_SECONDS_PER_DOC = 0.01  # per-document indexing-time estimate for replay


DEFAULT_REPLAY_SPEEDUP = 100.0


class ReplayConfig(BaseModel):
    enabled: bool = False
    # None falls back to the server-wide default (serve --replay-speedup)
    speedup_factor: float | None = None


class SessionConfig(BaseModel):
    corpus_path: str
    topics_path: str
    qrels_path: str
    n_bundles: int = 10
    seed: int = 0
    stoplist_id: str = "nostop"
    stemmer_id: str = "nostem"
    model_id: str = "bm25"
    model_params: dict[str, float] = Field(default_factory=dict)
    measure: str = "ndcg"
    depth: int = 1000
    replay: ReplayConfig = Field(default_factory=ReplayConfig)


class DecisionRequest(BaseModel):
    action: str  # "update" | "continue"


class RunRequest(BaseModel):
    model_id: str
    params: dict[str, float] = Field(default_factory=dict)


def _model_key(model_id: str, params: dict[str, float]) -> str:
    if not params:
        return model_id
    inner = ",".join(f"{k}={params[k]:g}" for k in sorted(params))
    return f"{model_id}({inner})"


@dataclass
class Session:
    session_id: str
    config: SessionConfig
    engine: ProgressionEngine
    topics: list[Topic]
    qrels: Qrels
    models: dict[str, dict[str, float]] = field(default_factory=dict)
    selected_measure: str = "ndcg"
    runs: dict[str, Run] = field(default_factory=dict)
    run_index: dict[tuple[str, int], str] = field(default_factory=dict)
    eval_cache: dict[tuple[str, int, str], EvaluationResult] = field(
        default_factory=dict
    )
    convergence_cache: dict[str, dict[str, str]] = field(default_factory=dict)
    lock: threading.Lock = field(default_factory=threading.Lock)
    run_counter: int = 0

    def pipeline_for(self, model_id: str, params: dict[str, float]) -> Pipeline:
        return Pipeline(
            stoplist_id=self.config.stoplist_id,
            stemmer_id=self.config.stemmer_id,
            model_id=model_id,
            model_params=params,
        )


def _validate_config(config: SessionConfig) -> None:
    problems = []
    for label, path in (
        ("corpus_path", config.corpus_path),
        ("topics_path", config.topics_path),
        ("qrels_path", config.qrels_path),
    ):
        if not Path(path).is_file():
            problems.append(f"{label} does not exist: {path}")
    if config.n_bundles < 1:
        problems.append(f"n_bundles must be >= 1, got {config.n_bundles}")
    if config.stoplist_id not in STOPLIST_IDS:
        problems.append(f"unknown stoplist {config.stoplist_id!r}")
    if config.stemmer_id not in stemmer_ids():
        problems.append(f"unknown stemmer {config.stemmer_id!r}")
    if config.model_id not in MODEL_IDS:
        problems.append(f"unknown model {config.model_id!r}")
    elif set(config.model_params) - MODEL_PARAM_KEYS[config.model_id]:
        problems.append(f"invalid params for {config.model_id}")
    if config.replay.speedup_factor is not None and config.replay.speedup_factor <= 0:
        problems.append("replay.speedup_factor must be > 0")
    try:
        parse_measure(config.measure)
    except UnknownMeasure:
        problems.append(f"unknown measure {config.measure!r}")
    if problems:
        raise HTTPException(status_code=400, detail="; ".join(problems))


class SessionRegistry:
    def __init__(
        self,
        data_dir: Path | None,
        default_replay_speedup: float | None = None,
    ):
        self.data_dir = data_dir
        self.default_replay_speedup = default_replay_speedup or DEFAULT_REPLAY_SPEEDUP
        self.sessions: dict[str, Session] = {}
        self._lock = threading.Lock()
        if data_dir is not None:
            data_dir.mkdir(parents=True, exist_ok=True)

    # -- persistence ----------------------------------------------------

    def _session_file(self, session_id: str) -> Path | None:
        if self.data_dir is None:
            return None
        return self.data_dir / f"session-{session_id}.json"

    def persist(self, session: Session) -> None:
        path = self._session_file(session.session_id)
        if path is None:
            return
        # the lock covers the write-then-rename so concurrent transitions
        # (builder events vs endpoint handlers) cannot race on the temp file
        with session.lock:
            record = {
                "session_id": session.session_id,
                "config": session.config.model_dump(),
                "models": session.models,
                "selected_measure": session.selected_measure,
                "decisions": [
                    [d.version, d.decision.value]
                    for d in session.engine.machine.decisions
                ],
            }
            tmp = path.with_suffix(".tmp")
            tmp.write_text(json.dumps(record, indent=2))
            tmp.replace(path)

    def load_persisted(self) -> None:
        if self.data_dir is None:
            return
        for path in sorted(self.data_dir.glob("session-*.json")):
            record = json.loads(path.read_text())
            config = SessionConfig.model_validate(record["config"])
            try:
                session = self._build_session(config, record["session_id"])
            except (AviatorError, OSError, HTTPException):
                continue  # source files moved; the record stays on disk
            session.models = {
                k: {p: float(x) for p, x in v.items()}
                for k, v in record.get("models", {}).items()
            }
            session.selected_measure = record.get("selected_measure", "ndcg")
            self.sessions[session.session_id] = session
            session.engine.start()
            decisions = [d[1] for d in record.get("decisions", [])]
            threading.Thread(
                target=self._catch_up, args=(session, decisions), daemon=True
            ).start()

    def _catch_up(self, session: Session, decisions: list[str]) -> None:
        for action in decisions:
            try:
                session.engine.wait_for(
                    lambda s: s.pending_version is not None, timeout=60
                )
                session.engine.decide(action)
            except (AviatorError, TimeoutError):
                return

    # -- construction -----------------------------------------------------

    def _build_session(self, config: SessionConfig, session_id: str) -> Session:
        _validate_config(config)
        try:
            docs = corpus_io.parse_trec_documents(
                Path(config.corpus_path).read_bytes()
            )
            topics = corpus_io.parse_topics(Path(config.topics_path).read_bytes())
            qrels = corpus_io.parse_qrels(Path(config.qrels_path).read_bytes())
        except ParseError as exc:
            raise HTTPException(
                status_code=422, detail=f"corpus parse failure: {exc}"
            ) from exc
        try:
            plan = plan_bundles(
                [d.doc_id for d in docs], config.n_bundles, config.seed
            )
        except AviatorError as exc:
            raise HTTPException(status_code=400, detail=str(exc)) from exc

        seconds_per_bundle = 0.0
        if config.replay.enabled:
            speedup = config.replay.speedup_factor or self.default_replay_speedup
            bundle_docs = len(docs) / config.n_bundles
            seconds_per_bundle = bundle_docs * EST_SECONDS_PER_DOC / speedup
        pipeline = Pipeline(
            stoplist_id=config.stoplist_id,
            stemmer_id=config.stemmer_id,
            model_id=config.model_id,
            model_params=config.model_params,
        )
        engine = ProgressionEngine(
            docs, plan, pipeline, seconds_per_bundle=seconds_per_bundle
        )
        session = Session(
            session_id=session_id,
            config=config,
            engine=engine,
            topics=topics,
            qrels=qrels,
            selected_measure=config.measure,
        )
        session.models[_model_key(config.model_id, config.model_params)] = dict(
            config.model_params
        )
        engine.on_event = lambda _event: self.persist(session)
        return session

    def create(self, config: SessionConfig) -> Session:
        session_id = secrets.token_hex(8)
        session = self._build_session(config, session_id)
        with self._lock:
            self.sessions[session_id] = session
        session.engine.start()
        self.persist(session)
        return session

    def get(self, session_id: str) -> Session:
        session = self.sessions.get(session_id)
        if session is None:
            raise HTTPException(status_code=404, detail=f"no session {session_id}")
        return session

    def shutdown(self) -> None:
        for session in self.sessions.values():
            session.engine.stop()


def _status_payload(session: Session) -> dict[str, Any]:
    state = session.engine.state()
    payload: dict[str, Any] = {
        "session_id": session.session_id,
        "active_version": state.active_version,
        "pending_version": state.pending_version,
        "percent_indexed": state.percent_indexed,
        "docs_indexed": state.docs_indexed,
        "status": state.status.value,
        "n_bundles": state.n,
        "selected_measure": session.selected_measure,
        "models": sorted(session.models),
    }
    return payload


def _evaluate_cached(
    session: Session, model_key: str, version: int, measure: str
) -> EvaluationResult | None:
    run_id = session.run_index.get((model_key, version))
    if run_id is None:
        return None
    cache_key = (model_key, version, measure)
    cached = session.eval_cache.get(cache_key)
    if cached is not None:
        return cached
    result = evaluation.evaluate_run(session.runs[run_id], session.qrels, measure)
    session.eval_cache[cache_key] = result
    return result


def create_app(
    data_dir: Path | str | None = None,
    default_replay_speedup: float | None = None,
) -> FastAPI:
    if data_dir is None:
        env = os.environ.get(DATA_DIR_ENV)
        data_dir = Path(env) if env else None
    elif not isinstance(data_dir, Path):
        data_dir = Path(data_dir)

    registry = SessionRegistry(data_dir, default_replay_speedup)

    @asynccontextmanager
    async def lifespan(_app: FastAPI):
        yield
        registry.shutdown()

    app = FastAPI(title="aviator", version="0.1.0", lifespan=lifespan)
    app.state.registry = registry
    registry.load_persisted()

    try:
        from fastapi.middleware.cors import CORSMiddleware

        app.add_middleware(
            CORSMiddleware,
            allow_origins=["*"],
            allow_methods=["*"],
            allow_headers=["*"],
        )
    except ImportError:  # pragma: no cover
        pass

    @app.post("/sessions", status_code=201)
    def create_session(config: SessionConfig) -> dict[str, str]:
        session = registry.create(config)
        return {"session_id": session.session_id}

    @app.get("/sessions/{session_id}/status")
    def status(session_id: str) -> dict[str, Any]:
        return _status_payload(registry.get(session_id))

    @app.post("/sessions/{session_id}/index/decision")
    def decide(session_id: str, request: DecisionRequest) -> dict[str, Any]:
        session = registry.get(session_id)
        if request.action not in ("update", "continue"):
            raise HTTPException(
                status_code=400, detail=f"unknown action {request.action!r}"
            )
        try:
            session.engine.decide(request.action)
        except NoPendingVersion as exc:
            raise HTTPException(status_code=409, detail=str(exc)) from exc
        registry.persist(session)
        return _status_payload(session)

    @app.post("/sessions/{session_id}/runs", status_code=201)
    def submit_run(session_id: str, request: RunRequest) -> dict[str, Any]:
        session = registry.get(session_id)
        if request.model_id not in MODEL_IDS:
            raise HTTPException(
                status_code=400, detail=f"unknown model {request.model_id!r}"
            )
        if set(request.params) - MODEL_PARAM_KEYS[request.model_id]:
            raise HTTPException(
                status_code=400, detail=f"invalid params for {request.model_id}"
            )
        model_key = _model_key(request.model_id, request.params)
        with session.lock:
            if model_key not in session.models and len(session.models) >= MAX_MODELS:
                raise HTTPException(
                    status_code=409,
                    detail=f"at most {MAX_MODELS} models can be compared; "
                    f"registered: {sorted(session.models)}",
                )
            session.models.setdefault(model_key, dict(request.params))
        try:
            snapshot = session.engine.current_snapshot()
        except AviatorError as exc:
            raise HTTPException(status_code=409, detail=str(exc)) from exc
        pipeline = session.pipeline_for(request.model_id, request.params)
        run = retrieval.run_batch(
            session.topics, pipeline, snapshot, depth=session.config.depth
        )
        with session.lock:
            session.run_counter += 1
            run_id = f"run-{session.run_counter:04d}"
            session.runs[run_id] = run
            session.run_index[(model_key, snapshot.version)] = run_id
        result = _evaluate_cached(
            session, model_key, snapshot.version, session.selected_measure
        )
        registry.persist(session)
        return {
            "run_id": run_id,
            "model": model_key,
            "snapshot_version": snapshot.version,
            "mean": None if result is None else result.mean,
            "measure": session.selected_measure,
        }

    @app.get("/sessions/{session_id}/runs/{run_id}")
    def fetch_run(session_id: str, run_id: str) -> Response:
        session = registry.get(session_id)
        run = session.runs.get(run_id)
        if run is None:
            raise HTTPException(status_code=404, detail=f"no run {run_id}")
        return Response(
            content=corpus_io.run_to_string(run), media_type="text/plain"
        )

    @app.get("/sessions/{session_id}/evaluations")
    def evaluations(
        session_id: str, measure: str = "", scope: str = "overall"
    ) -> dict[str, Any]:
        session = registry.get(session_id)
        measure = measure or session.selected_measure
        try:
            parse_measure(measure)
        except UnknownMeasure as exc:
            raise HTTPException(status_code=400, detail=str(exc)) from exc
        if scope not in ("topic", "overall"):
            raise HTTPException(status_code=400, detail=f"unknown scope {scope!r}")
        session.selected_measure = measure
        version = session.engine.state().active_version
        models: dict[str, Any] = {}
        absent: list[str] = []
        for model_key in sorted(session.models):
            result = _evaluate_cached(session, model_key, version, measure)
            if result is None:
                absent.append(model_key)
                continue
            if scope == "topic":
                models[model_key] = [
                    {"topic": t, "value": v}
                    for t, v in sorted(
                        result.per_topic.items(),
                        key=lambda kv: corpus_io.topic_sort_key(kv[0]),
                    )
                ]
            else:
                models[model_key] = result.mean
        registry.persist(session)
        return {
            "measure": measure,
            "scope": scope,
            "active_version": version,
            "models": models,
            "absent": absent,
        }

    @app.get("/sessions/{session_id}/analysis/convergence")
    def convergence(session_id: str) -> dict[str, str]:
        session = registry.get(session_id)
        state = session.engine.state()
        if state.active_version < state.n:
            raise HTTPException(
                status_code=409,
                detail=(
                    f"convergence needs the complete index: "
                    f"active version {state.active_version} of {state.n}"
                ),
            )
        measure = session.selected_measure
        with session.lock:
            cached = session.convergence_cache.get(measure)
            if cached is not None:
                return cached
            payload = _convergence_payload(session, measure)
            session.convergence_cache[measure] = payload
            return payload

    return app


def _convergence_payload(session: Session, measure: str) -> dict[str, str]:
    import io

    spec = parse_measure(measure)
    matrix = analysis.MeasureMatrix(
        measure=spec,
        pipelines=[],
        versions=list(range(1, session.engine.machine.n + 1)),
        topics=[],
    )
    topic_set: set[str] = set()
    for model_key in sorted(session.models):
        params = session.models[model_key]
        model_id = model_key.split("(", 1)[0]
        pipeline = session.pipeline_for(model_id, params)
        pid = f"{pipeline.pipeline_id}:{model_key}"
        matrix.pipelines.append(pid)
        for version in matrix.versions:
            snapshot = session.engine.snapshot_for_version(version)
            run = retrieval.run_batch(
                session.topics, pipeline, snapshot, depth=session.config.depth
            )
            result = evaluation.evaluate_run(run, session.qrels, spec)
            for topic_id, value in result.per_topic.items():
                matrix.values[(pid, version, topic_id)] = value
                topic_set.add(topic_id)
            matrix.mean_values[(pid, version)] = result.mean
    matrix.topics = sorted(topic_set, key=corpus_io.topic_sort_key)
    matrix.chains_built = 1
    report = analysis.convergence_report(matrix)

    def render(writer) -> str:
        buf = io.StringIO()
        writer(report, buf)
        return buf.getvalue()

    return {
        "measure": report.measure,
        "reldiff_by_system_csv": render(analysis.write_reldiff_csv),
        "tau_by_version_csv": render(analysis.write_tau_csv),
        "boxplot_by_version_csv": render(analysis.write_boxplot_csv),
    }
