"""HTTP facade for the human-in-the-loop flow.

Session state machine: created -> params complete -> path verified ->
generated. Generation is refused (409) until the missing list is empty and
the user has approved the previewed toolpath.
"""

from __future__ import annotations

import time
import uuid
from dataclasses import dataclass, field
from typing import Optional

from fastapi import FastAPI
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse, PlainTextResponse
from pydantic import BaseModel

from .corrector import LoopConfig, LoopResult, run_loop
from .errors import GCodeGenError, GeneratorUnavailable, InvalidValue
from .generation import make_generator
from .taskparams import TaskParameters, count_shapes, extract_parameters, find_missing, merge_user_answers
from .toolpath import construct_user_path, render_svg

DEFAULT_SESSION_TTL = 3600.0  # seconds


@dataclass
class Session:
    id: str
    params: TaskParameters
    shape_count: int
    verified: bool = False
    result: Optional[LoopResult] = None
    created_at: float = field(default_factory=time.time)

    @property
    def missing(self) -> list[str]:
        return find_missing(self.params)


class SessionStore:
    """In-memory store with lazy TTL expiry; one owner per session."""

    def __init__(self, ttl: float = DEFAULT_SESSION_TTL):
        self.ttl = ttl
        self._sessions: dict[str, Session] = {}

    def create(self, params: TaskParameters, shape_count: int) -> Session:
        self._purge()
        session = Session(id=uuid.uuid4().hex, params=params, shape_count=shape_count)
        self._sessions[session.id] = session
        return session

    def get(self, session_id: str) -> Optional[Session]:
        self._purge()
        return self._sessions.get(session_id)

    def _purge(self) -> None:
        now = time.time()
        expired = [k for k, s in self._sessions.items() if now - s.created_at > self.ttl]
        for k in expired:
            del self._sessions[k]


class CreateSessionBody(BaseModel):
    description: str


class AnswersBody(BaseModel):
    answers: dict


class VerifyBody(BaseModel):
    approved: bool


class GenerateBody(BaseModel):
    generator: str = "template"
    max_iterations: Optional[int] = None
    tolerance: Optional[float] = None
    safe_height: Optional[float] = None


def _error(status: int, error: str, detail: str) -> JSONResponse:
    return JSONResponse(status_code=status, content={"error": error, "detail": detail})


def _session_view(session: Session) -> dict:
    return {
        "id": session.id,
        "params": session.params.to_dict(),
        "missing": session.missing,
        "shape_count": session.shape_count,
        "verified": session.verified,
    }


def create_app(ttl: float = DEFAULT_SESSION_TTL, config: Optional[LoopConfig] = None) -> FastAPI:
    app = FastAPI(title="gcodegen service")
    app.add_middleware(
        CORSMiddleware,
        allow_origins=["*"],
        allow_methods=["*"],
        allow_headers=["*"],
    )
    store = SessionStore(ttl=ttl)
    base_config = config or LoopConfig()

    @app.get("/health")
    def health():
        return {"status": "ok"}

    @app.post("/sessions", status_code=201)
    def create_session(body: CreateSessionBody):
        if not body.description.strip():
            return _error(400, "empty_description", "description must not be empty")
        params = extract_parameters(body.description)
        session = store.create(params, count_shapes(body.description))
        return _session_view(session)

    @app.patch("/sessions/{session_id}/params")
    def patch_params(session_id: str, body: AnswersBody):
        session = store.get(session_id)
        if session is None:
            return _error(404, "unknown_session", session_id)
        try:
            session.params = merge_user_answers(session.params, body.answers)
        except InvalidValue as exc:
            return _error(422, "invalid_value", str(exc))
        return {"params": session.params.to_dict(), "missing": session.missing}

    @app.get("/sessions/{session_id}/preview")
    def preview(session_id: str):
        session = store.get(session_id)
        if session is None:
            return _error(404, "unknown_session", session_id)
        try:
            path = construct_user_path(session.params)
            svg = render_svg([path])
        except GCodeGenError as exc:
            return _error(409, "insufficient_geometry", str(exc))
        return {"svg": svg, "toolpath": path.to_dict()}

    @app.post("/sessions/{session_id}/verify")
    def verify(session_id: str, body: VerifyBody):
        session = store.get(session_id)
        if session is None:
            return _error(404, "unknown_session", session_id)
        session.verified = bool(body.approved)
        return {"verified": session.verified}

    @app.post("/sessions/{session_id}/generate")
    def generate(session_id: str, body: GenerateBody):
        session = store.get(session_id)
        if session is None:
            return _error(404, "unknown_session", session_id)
        if session.missing:
            return _error(409, "missing_params",
                          "missing parameters: " + ", ".join(session.missing))
        if not session.verified:
            return _error(409, "not_verified",
                          "the previewed toolpath has not been approved")
        overrides = {}
        if body.max_iterations is not None:
            overrides["max_iterations"] = body.max_iterations
        if body.tolerance is not None:
            overrides["tolerance"] = body.tolerance
        if body.safe_height is not None:
            overrides["safety"] = type(base_config.safety)(safe_height=body.safe_height)
        config = LoopConfig(
            max_iterations=overrides.get("max_iterations", base_config.max_iterations),
            tolerance=overrides.get("tolerance", base_config.tolerance),
            safety=overrides.get("safety", base_config.safety),
            dedup_eps=base_config.dedup_eps,
            chord_tol=base_config.chord_tol,
            registry=base_config.registry,
            template=base_config.template,
        )
        try:
            generator = make_generator(body.generator)
        except ValueError as exc:
            return _error(422, "unknown_generator", str(exc))
        try:
            result = run_loop(session.params, generator, config, session=session.id)
        except GeneratorUnavailable as exc:
            return _error(502, "generator_unavailable", str(exc))
        session.result = result
        return result.to_dict()

    @app.get("/sessions/{session_id}/gcode")
    def gcode(session_id: str):
        session = store.get(session_id)
        if session is None:
            return _error(404, "unknown_session", session_id)
        if session.result is None:
            return _error(404, "not_generated", "run generation first")
        if not session.result.success:
            resp = _error(404, "generation_failed",
                          f"loop failed after {session.result.iterations_used} iterations")
            resp.headers["X-Failure-Summary"] = (
                f"failed after {session.result.iterations_used} iterations")
            return resp
        return PlainTextResponse(session.result.final_gcode,
                                 media_type="text/plain; charset=utf-8")

    return app
