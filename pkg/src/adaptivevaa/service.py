"""HTTP session service for the adaptive questionnaire.

JSON over HTTP: create a session, fetch/answer questions (skipping allowed),
inspect the posterior heatmap, and read live Type I / Type II candidate
recommendations. Sessions persist in a sqlite file (rebuilt belief on load,
TTL eviction) so a questionnaire survives restarts; per-session operations
are serialized, everything else is shared read-only.
"""

from __future__ import annotations

import json
import os
import secrets
import sqlite3
import threading
import time
from dataclasses import dataclass, field
from pathlib import Path

from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse
from fastapi.staticfiles import StaticFiles

from . import belief as bel
from .dataset import binarize, load_survey_dir
from .latent import load_model
from .recommender import recommend
from .selectors import SELECTOR_NAMES, SelectorContext, SelectorState, make_selector

__all__ = ["ServiceConfig", "ApiError", "create_app", "load_config"]


@dataclass
class ServiceConfig:
    data_dir: Path
    model_path: Path
    host: str = "127.0.0.1"
    port: int = 8000
    default_selector: str = "posterior_rmse"
    m: int = 32
    grid_resolution: int = 61
    session_db: Path | None = None
    session_ttl_hours: float = 24.0
    frontend_dir: Path | None = None


_ENV_OVERRIDES = {
    "AQVAA_DATA": ("data_dir", Path),
    "AQVAA_MODEL": ("model_path", Path),
    "AQVAA_HOST": ("host", str),
    "AQVAA_PORT": ("port", int),
    "AQVAA_SELECTOR": ("default_selector", str),
    "AQVAA_M": ("m", int),
    "AQVAA_GRID": ("grid_resolution", int),
    "AQVAA_SESSION_DB": ("session_db", Path),
    "AQVAA_TTL_HOURS": ("session_ttl_hours", float),
    "AQVAA_FRONTEND": ("frontend_dir", Path),
}


def load_config(path: str | Path | None = None, **overrides) -> ServiceConfig:
    """Config from an optional JSON file, then environment, then kwargs."""
    values: dict = {}
    if path is not None:
        values.update(json.loads(Path(path).read_text()))
    for env, (key, cast) in _ENV_OVERRIDES.items():
        if env in os.environ:
            values[key] = cast(os.environ[env])
    values.update({k: v for k, v in overrides.items() if v is not None})
    for key in ("data_dir", "model_path", "session_db", "frontend_dir"):
        if values.get(key) is not None:
            values[key] = Path(values[key])
    return ServiceConfig(**values)


class ApiError(Exception):
    def __init__(self, status: int, code: str, message: str):
        super().__init__(message)
        self.status = status
        self.code = code
        self.message = message


@dataclass
class Session:
    session_id: str
    selector: str
    m: int
    answers: list[tuple[str, int]] = field(default_factory=list)
    skipped: list[str] = field(default_factory=list)
    created: float = 0.0
    updated: float = 0.0

    def payload(self) -> dict:
        return {
            "selector": self.selector,
            "m": self.m,
            "answers": [[q, v] for q, v in self.answers],
            "skipped": list(self.skipped),
            "created": self.created,
            "updated": self.updated,
        }

    @classmethod
    def from_payload(cls, session_id: str, payload: dict) -> "Session":
        return cls(session_id, payload["selector"], payload["m"],
                   [(q, int(v)) for q, v in payload["answers"]],
                   list(payload["skipped"]), payload["created"], payload["updated"])


class SessionStore:
    """sqlite-backed session persistence with TTL eviction."""

    def __init__(self, path: str | Path, ttl_seconds: float):
        self.ttl = ttl_seconds
        self._conn = sqlite3.connect(str(path), check_same_thread=False)
        self._lock = threading.Lock()
        with self._lock:
            self._conn.execute(
                "CREATE TABLE IF NOT EXISTS sessions "
                "(id TEXT PRIMARY KEY, payload TEXT NOT NULL, updated REAL NOT NULL)")
            self._conn.commit()

    def purge(self, now: float | None = None) -> None:
        now = time.time() if now is None else now
        with self._lock:
            self._conn.execute("DELETE FROM sessions WHERE updated < ?", (now - self.ttl,))
            self._conn.commit()

    def get(self, session_id: str) -> dict | None:
        self.purge()
        with self._lock:
            row = self._conn.execute(
                "SELECT payload FROM sessions WHERE id = ?", (session_id,)).fetchone()
        return json.loads(row[0]) if row else None

    def put(self, session: Session) -> None:
        with self._lock:
            self._conn.execute(
                "INSERT OR REPLACE INTO sessions (id, payload, updated) VALUES (?, ?, ?)",
                (session.session_id, json.dumps(session.payload()), session.updated))
            self._conn.commit()


class Engine:
    """Shared immutable model/data state plus the per-selector instances."""

    def __init__(self, config: ServiceConfig):
        self.config = config
        survey = load_survey_dir(config.data_dir)
        matrix = survey.train if survey.train is not None else survey.reactions
        if matrix is None or not matrix.is_complete():
            raise ValueError("service needs a complete candidate matrix")
        self.model = load_model(config.model_path)
        if tuple(self.model.question_ids) != tuple(matrix.question_ids):
            raise ValueError("model and candidate matrix disagree on question ids")
        self.candidates = binarize(matrix)
        self.questions = survey.questions
        self.grid = bel.LatentGrid(config.grid_resolution)
        self.lik = bel.likelihoods_for(self.model, self.grid)
        context = SelectorContext(
            lik=self.lik, candidates=self.candidates,
            default_order=survey.default_order or self.candidates.question_ids,
            rapid_order=survey.rapid_order, seed=0)
        self.selector_names = tuple(
            n for n in SELECTOR_NAMES if n != "rapid_version" or survey.rapid_order)
        self.selectors = {name: make_selector(name, context)
                          for name in self.selector_names}

    def question_payload(self, question_id: str | None) -> dict | None:
        if question_id is None:
            return None
        meta = self.questions.get(question_id, {})
        return {
            "id": question_id,
            "index": self.candidates.question_index(question_id),
            "text": meta.get("text", question_id),
            "n_options": meta.get("n_options", 2),
        }

    def rebuild_belief(self, session: Session) -> bel.PosteriorBelief:
        return bel.batch_posterior(self.lik, session.answers)

    def next_question(self, session: Session, belief) -> str | None:
        selector = self.selectors[session.selector]
        result = selector.select(SelectorState(belief, frozenset(session.skipped)))
        return result.question_id if result else None

    def recommendations(self, session: Session, belief) -> dict:
        answered = dict(session.answers)
        type1 = None
        if answered:
            rec = recommend(answered, self.candidates, session.m, "I")
            type1 = [{"candidate_id": c, "distance": d}
                     for c, d in zip(rec.candidate_ids, rec.distances)]
        preds = bel.predictive_all(belief, self.lik)
        predictions = {q: float(preds[j])
                       for j, q in enumerate(self.candidates.question_ids)
                       if q not in answered}
        rec2 = recommend(answered, self.candidates, session.m, "II",
                         predictions=predictions)
        type2 = [{"candidate_id": c, "distance": d}
                 for c, d in zip(rec2.candidate_ids, rec2.distances)]
        return {"type1": type1, "type2": type2, "predictions": predictions}


def create_app(config: ServiceConfig) -> FastAPI:
    engine = Engine(config)
    db_path = config.session_db or (config.data_dir / "sessions.sqlite")
    store = SessionStore(db_path, config.session_ttl_hours * 3600.0)
    sessions: dict[str, Session] = {}
    locks: dict[str, threading.Lock] = {}
    registry_lock = threading.Lock()

    app = FastAPI(title="adaptivevaa", version="0.1.0")

    @app.exception_handler(ApiError)
    async def _api_error(request: Request, exc: ApiError):
        return JSONResponse(status_code=exc.status,
                            content={"code": exc.code, "message": exc.message})

    def session_lock(session_id: str) -> threading.Lock:
        with registry_lock:
            return locks.setdefault(session_id, threading.Lock())

    def load_session(session_id: str) -> Session:
        # the store is the source of truth (its get() applies TTL eviction)
        payload = store.get(session_id)
        if payload is None:
            sessions.pop(session_id, None)
            raise ApiError(404, "session_not_found", f"no session {session_id!r}")
        session = sessions.get(session_id)
        if session is None:
            session = Session.from_payload(session_id, payload)
            sessions[session_id] = session
        return session

    def progress(session: Session) -> dict:
        return {"answered": len(session.answers), "skipped": len(session.skipped),
                "total": engine.candidates.n_questions}

    def state_payload(session: Session) -> dict:
        # one payload per click: the UI renders heatmap and recommendations
        # from this single response
        belief = engine.rebuild_belief(session)
        next_q = engine.next_question(session, belief)
        recs = engine.recommendations(session, belief)
        return {
            "session_id": session.session_id,
            "selector": session.selector,
            "m": session.m,
            "done": next_q is None,
            "question": engine.question_payload(next_q),
            "progress": progress(session),
            "belief": bel.belief_export(belief),
            "belief_summary": {
                "map_estimate": bel.map_estimate(belief).tolist(),
                "spatial_variance": bel.spatial_variance(belief),
            },
            "recommendations": {"type1": recs["type1"], "type2": recs["type2"]},
            "predictions": recs["predictions"],
        }

    @app.post("/api/sessions", status_code=201)
    async def create_session(body: dict | None = None):
        body = body or {}
        selector = body.get("selector", config.default_selector)
        m = int(body.get("m", config.m))
        if selector not in engine.selector_names:
            raise ApiError(400, "unknown_selector",
                           f"unknown selector {selector!r}; known: "
                           f"{', '.join(engine.selector_names)}")
        if not 1 <= m <= engine.candidates.n_users:
            raise ApiError(400, "bad_recommendation_size",
                           f"m must be in [1, {engine.candidates.n_users}]")
        now = time.time()
        session = Session(secrets.token_urlsafe(12), selector, m,
                          created=now, updated=now)
        sessions[session.session_id] = session
        store.put(session)
        return state_payload(session)

    @app.get("/api/sessions/{session_id}")
    async def get_session(session_id: str):
        with session_lock(session_id):
            session = load_session(session_id)
            payload = state_payload(session)
            payload["answers"] = [[q, v] for q, v in session.answers]
            payload["skipped"] = list(session.skipped)
            payload["created"] = session.created
            payload["updated"] = session.updated
            return payload

    @app.post("/api/sessions/{session_id}/answers")
    async def submit_answer(session_id: str, body: dict):
        question_id = body.get("question_id")
        answer = body.get("answer")
        with session_lock(session_id):
            session = load_session(session_id)
            if question_id not in engine.candidates.question_ids:
                raise ApiError(400, "unknown_question",
                               f"unknown question id {question_id!r}")
            answered = dict(session.answers)
            if question_id in answered or question_id in session.skipped:
                raise ApiError(409, "already_answered",
                               f"question {question_id!r} was already submitted")
            if answer == "skip":
                session.skipped.append(question_id)
            elif answer in (0, 1):
                session.answers.append((question_id, int(answer)))
            else:
                raise ApiError(400, "bad_answer",
                               "answer must be 0, 1, or \"skip\"")
            session.updated = time.time()
            store.put(session)
            return state_payload(session)

    @app.get("/api/sessions/{session_id}/belief")
    async def get_belief(session_id: str):
        with session_lock(session_id):
            session = load_session(session_id)
            return bel.belief_export(engine.rebuild_belief(session))

    @app.get("/api/sessions/{session_id}/recommendations")
    async def get_recommendations(session_id: str):
        with session_lock(session_id):
            session = load_session(session_id)
            recs = engine.recommendations(session, engine.rebuild_belief(session))
            return {"m": session.m, "type1": recs["type1"], "type2": recs["type2"]}

    @app.get("/api/meta/questions")
    async def meta_questions():
        return [engine.question_payload(q) for q in engine.candidates.question_ids]

    @app.get("/api/meta/selectors")
    async def meta_selectors():
        return {"selectors": list(engine.selector_names),
                "default": config.default_selector}

    frontend = config.frontend_dir
    if frontend and Path(frontend).is_dir():
        app.mount("/", StaticFiles(directory=str(frontend), html=True), name="ui")
    return app
