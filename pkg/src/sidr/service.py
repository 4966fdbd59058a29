"""Stateful HTTP session service.

Exposes corpora, interactive sessions, projections, interaction
submission, asynchronous model updates, history, and save/load. One
session serializes all model writes behind a lock; training runs on a
background thread and reads served during training return the last
committed layout. Labels are attached to projection responses for
display only; the pipeline API never receives them.
"""

from __future__ import annotations

import json
import tempfile
import threading
import uuid
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from fastapi import FastAPI, Request
from fastapi.exceptions import RequestValidationError
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse
from pydantic import BaseModel

from .corpus import Corpus, CorpusError, embed_tfidf, load_corpus
from .mds import MdsConfig
from .persist import (
    SNAPSHOT_VERSION,
    SnapshotError,
    batch_from_obj,
    batch_to_obj,
    check_version,
    model_state_from_obj,
    model_state_to_obj,
)
from .pipelines import (
    PIPELINES,
    InteractionBatch,
    InteractionError,
    ModelState,
    Move,
    PipelineConfig,
    forward,
    init_state,
    update,
    validate_batch,
)


class ApiError(Exception):
    def __init__(self, status: int, code: str, message: str):
        super().__init__(message)
        self.status = status
        self.code = code
        self.message = message


@dataclass
class HistoryEntry:
    iteration: int
    positions: np.ndarray
    batches: list[InteractionBatch] = field(default_factory=list)


@dataclass
class Session:
    session_id: str
    corpus_id: str
    state: ModelState
    history: list[HistoryEntry] = field(default_factory=list)
    queue: list[InteractionBatch] = field(default_factory=list)
    status: str = "idle"
    job_count: int = 0
    last_error: str | None = None
    lock: threading.Lock = field(default_factory=threading.Lock)


class CorpusUploadBody(BaseModel):
    name: str | None = None
    jsonl: str
    embed_dim: int | None = None


class CreateSessionBody(BaseModel):
    corpus_id: str
    pipeline: str
    config: dict = {}


class MoveBody(BaseModel):
    id: str
    x: float
    y: float


class InteractionsBody(BaseModel):
    moves: list[MoveBody]


class PathBody(BaseModel):
    path: str


def config_from_dict(raw: dict) -> PipelineConfig:
    fields = dict(raw)
    mds_raw = fields.pop("mds", None)
    try:
        cfg = PipelineConfig(**fields)
        if mds_raw is not None:
            cfg.mds = MdsConfig(**mds_raw)
        return cfg
    except (TypeError, ValueError) as exc:
        raise ApiError(400, "invalid_config", str(exc)) from exc


def create_app(register_bundled: bool = False) -> FastAPI:
    app = FastAPI(title="sidr session service")
    app.add_middleware(
        CORSMiddleware, allow_origins=["*"], allow_methods=["*"], allow_headers=["*"]
    )
    corpora: dict[str, Corpus] = {}
    sessions: dict[str, Session] = {}
    registry_lock = threading.Lock()

    @app.exception_handler(ApiError)
    async def handle_api_error(request: Request, exc: ApiError):
        return JSONResponse(
            status_code=exc.status, content={"code": exc.code, "message": exc.message}
        )

    @app.exception_handler(RequestValidationError)
    async def handle_validation_error(request: Request, exc: RequestValidationError):
        return JSONResponse(
            status_code=422, content={"code": "invalid_request", "message": str(exc.errors())}
        )

    def get_session(session_id: str) -> Session:
        session = sessions.get(session_id)
        if session is None:
            raise ApiError(404, "unknown_session", f"no session {session_id!r}")
        return session

    def register_corpus(corpus: Corpus, corpus_id: str | None = None) -> str:
        corpus_id = corpus_id or f"corpus-{uuid.uuid4().hex[:8]}"
        with registry_lock:
            corpora[corpus_id] = corpus
        return corpus_id

    app.state.register_corpus = register_corpus

    if register_bundled:
        from .corpus import bundled_corpus

        for name in ("articles4", "notes3"):
            raw = bundled_corpus(name)
            register_corpus(embed_tfidf(raw, 128, clamp_rank=True), corpus_id=name)

    def corpus_summary(corpus_id: str, corpus: Corpus) -> dict:
        return {
            "corpus_id": corpus_id,
            "n": len(corpus),
            "dim": corpus.dim,
            "label_count": corpus.label_count,
            "vectorized": corpus.is_vectorized,
        }

    @app.post("/corpora")
    def upload_corpus(body: CorpusUploadBody):
        with tempfile.NamedTemporaryFile("w", suffix=".jsonl", delete=False) as fh:
            fh.write(body.jsonl)
            tmp = fh.name
        try:
            corpus = load_corpus(tmp, fmt="jsonl")
            if not corpus.is_vectorized or body.embed_dim is not None:
                corpus = embed_tfidf(corpus, body.embed_dim or 128, clamp_rank=True)
        except CorpusError as exc:
            raise ApiError(400, "invalid_corpus", str(exc)) from exc
        finally:
            Path(tmp).unlink(missing_ok=True)
        corpus_id = register_corpus(corpus, body.name)
        return corpus_summary(corpus_id, corpus)

    @app.get("/corpora")
    def list_corpora():
        with registry_lock:
            return [corpus_summary(cid, c) for cid, c in sorted(corpora.items())]

    def projection_payload(session: Session, entry: HistoryEntry) -> dict:
        corpus = session.state.corpus
        labels = None
        if all(d.label is not None for d in corpus.docs):
            labels = [d.label for d in corpus.docs]
        return {
            "session_id": session.session_id,
            "iteration": entry.iteration,
            "pipeline": session.state.pipeline,
            "ids": corpus.ids,
            "positions": entry.positions.tolist(),
            "labels": labels,
            "status": session.status,
        }

    @app.post("/sessions")
    def create_session(body: CreateSessionBody):
        corpus = corpora.get(body.corpus_id)
        if corpus is None:
            raise ApiError(404, "unknown_corpus", f"no corpus {body.corpus_id!r}")
        if body.pipeline not in PIPELINES:
            raise ApiError(
                400, "invalid_pipeline", f"pipeline must be one of {list(PIPELINES)}"
            )
        cfg = config_from_dict(body.config)
        try:
            state = init_state(corpus, body.pipeline, cfg)
        except (ValueError, CorpusError) as exc:
            raise ApiError(400, "invalid_config", str(exc)) from exc
        proj = forward(state, corpus)
        session = Session(
            session_id=f"session-{uuid.uuid4().hex[:8]}",
            corpus_id=body.corpus_id,
            state=state,
        )
        session.history.append(HistoryEntry(iteration=proj.iteration, positions=proj.positions))
        sessions[session.session_id] = session
        return projection_payload(session, session.history[0])

    @app.get("/sessions/{session_id}/projection")
    def get_projection(session_id: str, iteration: int | None = None):
        session = get_session(session_id)
        with session.lock:
            if iteration is None:
                entry = session.history[-1]
            else:
                matches = [e for e in session.history if e.iteration == iteration]
                if not matches:
                    raise ApiError(
                        404, "unknown_iteration", f"no layout for iteration {iteration}"
                    )
                entry = matches[0]
            return projection_payload(session, entry)

    @app.post("/sessions/{session_id}/interactions")
    def submit_interactions(session_id: str, body: InteractionsBody):
        session = get_session(session_id)
        batch = InteractionBatch(moves=[Move(m.id, m.x, m.y) for m in body.moves])
        with session.lock:
            if session.status != "idle":
                raise ApiError(409, "busy", "session is training")
            try:
                validate_batch(batch, session.state.corpus)
            except InteractionError as exc:
                raise ApiError(400, "invalid_batch", str(exc)) from exc
            session.queue.append(batch)
            return {"accepted": True, "queued": len(session.queue)}

    def run_training(session: Session, batches: list[InteractionBatch]):
        try:
            for batch in batches:
                update(session.state, batch)
            proj = forward(session.state, session.state.corpus)
            with session.lock:
                session.history.append(
                    HistoryEntry(
                        iteration=proj.iteration, positions=proj.positions, batches=batches
                    )
                )
                session.status = "idle"
        except Exception as exc:  # surface the failure via /status
            with session.lock:
                session.status = "idle"
                session.last_error = str(exc)

    @app.post("/sessions/{session_id}/update")
    def trigger_update(session_id: str, background: bool = True):
        session = get_session(session_id)
        with session.lock:
            if session.status != "idle":
                raise ApiError(409, "busy", "a training job is already running")
            if not session.queue:
                raise ApiError(400, "nothing_queued", "no queued interaction batch")
            batches = session.queue[:]
            session.queue.clear()
            session.status = "training"
            session.job_count += 1
            job_id = f"{session.session_id}:{session.job_count}"
        if background:
            threading.Thread(
                target=run_training, args=(session, batches), daemon=True
            ).start()
        else:
            run_training(session, batches)
        return {"job_id": job_id, "status": session.status}

    @app.get("/sessions/{session_id}/status")
    def get_status(session_id: str):
        session = get_session(session_id)
        with session.lock:
            return {
                "session_id": session.session_id,
                "status": session.status,
                "pipeline": session.state.pipeline,
                "iteration": session.history[-1].iteration,
                "queued": len(session.queue),
                "history_length": len(session.history),
                "last_error": session.last_error,
            }

    @app.get("/sessions/{session_id}/history")
    def get_history(session_id: str):
        session = get_session(session_id)
        with session.lock:
            return [
                {
                    "iteration": e.iteration,
                    "batches": [batch_to_obj(b) for b in e.batches],
                }
                for e in session.history
            ]

    @app.post("/sessions/{session_id}/save")
    def save_session(session_id: str, body: PathBody):
        session = get_session(session_id)
        with session.lock:
            if session.status != "idle":
                raise ApiError(409, "busy", "cannot save while training")
            snapshot = {
                "version": SNAPSHOT_VERSION,
                "session_id": session.session_id,
                "corpus_id": session.corpus_id,
                "state": model_state_to_obj(session.state),
                "history": [
                    {
                        "iteration": e.iteration,
                        "positions": e.positions.tolist(),
                        "batches": [batch_to_obj(b) for b in e.batches],
                    }
                    for e in session.history
                ],
                "queue": [batch_to_obj(b) for b in session.queue],
            }
        try:
            Path(body.path).write_text(json.dumps(snapshot), encoding="utf-8")
        except OSError as exc:
            raise ApiError(400, "unwritable_path", str(exc)) from exc
        return {"saved": True, "path": body.path}

    @app.post("/sessions/load")
    def load_session(body: PathBody):
        try:
            snapshot = json.loads(Path(body.path).read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError) as exc:
            raise ApiError(400, "unreadable_snapshot", str(exc)) from exc
        try:
            check_version(snapshot)
            state = model_state_from_obj(snapshot["state"])
            history = [
                HistoryEntry(
                    iteration=e["iteration"],
                    positions=np.asarray(e["positions"], dtype=np.float64),
                    batches=[batch_from_obj(b) for b in e["batches"]],
                )
                for e in snapshot["history"]
            ]
            queue = [batch_from_obj(b) for b in snapshot["queue"]]
        except (SnapshotError, KeyError, ValueError) as exc:
            raise ApiError(400, "corrupt_snapshot", str(exc)) from exc
        corpus_id = snapshot["corpus_id"]
        with registry_lock:
            corpora.setdefault(corpus_id, state.corpus)
        session_id = snapshot["session_id"]
        if session_id in sessions:
            session_id = f"session-{uuid.uuid4().hex[:8]}"
        session = Session(
            session_id=session_id,
            corpus_id=corpus_id,
            state=state,
            history=history,
            queue=queue,
        )
        sessions[session_id] = session
        return {
            "session_id": session_id,
            "iteration": session.history[-1].iteration,
            "status": session.status,
        }

    return app


def main_app() -> FastAPI:
    """App with the bundled corpora pre-registered (uvicorn factory)."""
    return create_app(register_bundled=True)
