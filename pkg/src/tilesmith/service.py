"""Session-oriented HTTP service: prompt in, refinement rounds, map out.

Refinement runs asynchronously in a worker thread per round; clients poll
the session phase (refining -> executing -> done | failed) and fetch the
trace and artifact when ready.  Follow-up prompts start the next round
against the same agents, mirroring the human-in-the-loop efficiency
protocol.  Sessions persist to disk (write-temp-then-rename) and are
reloaded on restart.
"""

from __future__ import annotations

import json
import logging
import os
import threading
import time
from dataclasses import dataclass, field
from pathlib import Path

from fastapi import FastAPI, HTTPException
from fastapi.responses import JSONResponse
from pydantic import BaseModel, Field

from .agents import AgentConfig, TokenUsage, make_actor, make_critic
from .artifact import MapArtifact
from .execution import execute
from .ids import new_session_id
from .refinement import RefinementTrace, refine, trace_to_lines, traces_from_lines
from .registry import Registry, default_registry, render_documentation, render_examples

log = logging.getLogger(__name__)

PHASES = ("refining", "executing", "done", "failed")


class AgentSpec(BaseModel):
    backend: str = "llm"  # llm | rule_based | scripted
    model_id: str = ""
    endpoint: str = ""
    temperature: float | None = None
    plans: list[dict] | None = None  # scripted actor
    critiques: list[dict] | None = None  # scripted critic
    usages: list[dict] | None = None  # scripted token accounting
    delay_seconds: float = 0.0  # scripted pacing, used by tests/demos


class SessionConfig(BaseModel):
    actor: AgentSpec = Field(default_factory=AgentSpec)
    critic: AgentSpec = Field(default_factory=lambda: AgentSpec(backend="rule_based"))
    max_iterations: int = Field(default=1, ge=0)
    seed: int = Field(default=0, ge=0)


class CreateSessionRequest(BaseModel):
    prompt: str = Field(min_length=1)
    config: SessionConfig = Field(default_factory=SessionConfig)


class FollowupRequest(BaseModel):
    prompt: str = Field(min_length=1)


class _PacedActor:
    def __init__(self, inner, delay: float):
        self._inner = inner
        self._delay = delay

    def propose(self, *args, **kwargs):
        time.sleep(self._delay)
        return self._inner.propose(*args, **kwargs)


def build_agents(config: SessionConfig, registry: Registry):
    actor_cfg = AgentConfig(
        role="actor",
        backend=config.actor.backend,
        model_id=config.actor.model_id or os.environ.get("LLM_MODEL", ""),
        endpoint=config.actor.endpoint or os.environ.get("LLM_ENDPOINT", ""),
        temperature=config.actor.temperature,
    )
    usages = None
    if config.actor.usages:
        usages = [TokenUsage(agent_role="actor", **u) for u in config.actor.usages]
    actor = make_actor(actor_cfg, scripted_plans=config.actor.plans or [], scripted_usages=usages)
    if config.actor.delay_seconds > 0:
        actor = _PacedActor(actor, config.actor.delay_seconds)

    critic_cfg = AgentConfig(
        role="critic",
        backend=config.critic.backend,
        model_id=config.critic.model_id or os.environ.get("LLM_MODEL", ""),
        endpoint=config.critic.endpoint or os.environ.get("LLM_ENDPOINT", ""),
        temperature=config.critic.temperature,
    )
    critic_usages = None
    if config.critic.usages:
        critic_usages = [TokenUsage(agent_role="critic", **u) for u in config.critic.usages]
    critic = make_critic(
        critic_cfg,
        registry,
        scripted_critiques=config.critic.critiques or [],
        scripted_usages=critic_usages,
    )
    return actor, critic


@dataclass
class Session:
    id: str
    created_at: float
    prompt: str
    config: SessionConfig
    followups: list[str] = field(default_factory=list)
    phase: str = "refining"
    error: str | None = None
    traces: list[RefinementTrace] = field(default_factory=list)
    artifact: MapArtifact | None = None
    actor: object = None
    critic: object = None
    lock: threading.Lock = field(default_factory=threading.Lock)

    def status_dict(self) -> dict:
        return {
            "session_id": self.id,
            "phase": self.phase,
            "created_at": self.created_at,
            "prompt": self.prompt,
            "followups": list(self.followups),
            "rounds": len(self.traces),
            "error": self.error,
            "has_map": self.artifact is not None,
        }

    def combined_prompt(self) -> str:
        out = self.prompt
        for f in self.followups:
            out += f"\n\nFollow-up: {f}"
        return out


class SessionStore:
    """Owns all sessions, their worker threads, and their on-disk form."""

    def __init__(self, data_dir: str | Path, registry: Registry | None = None):
        self.data_dir = Path(data_dir)
        self.registry = registry or default_registry()
        self.sessions: dict[str, Session] = {}
        self._lock = threading.Lock()
        (self.data_dir / "sessions").mkdir(parents=True, exist_ok=True)
        self._load_existing()

    # -- lifecycle ---------------------------------------------------------

    def create_session(self, prompt: str, config: SessionConfig) -> Session:
        session = Session(
            id=new_session_id(),
            created_at=time.time(),
            prompt=prompt,
            config=config,
        )
        session.actor, session.critic = build_agents(config, self.registry)
        with self._lock:
            self.sessions[session.id] = session
        self._persist_meta(session)
        self._start_round(session, round_index=0)
        return session

    def followup(self, session_id: str, prompt: str) -> Session:
        session = self.get(session_id)
        with session.lock:
            if session.phase in ("refining", "executing"):
                raise RoundInFlightError(session_id)
            if session.actor is None:
                # Reloaded from disk: rebuild the agents before the next round.
                session.actor, session.critic = build_agents(session.config, self.registry)
            session.followups.append(prompt)
            session.phase = "refining"
            session.error = None
        self._persist_meta(session)
        self._start_round(session, round_index=len(session.traces))
        return session

    def get(self, session_id: str) -> Session:
        with self._lock:
            session = self.sessions.get(session_id)
        if session is None:
            raise UnknownSessionError(session_id)
        return session

    def list_ids(self) -> list[str]:
        with self._lock:
            return sorted(self.sessions)

    def _start_round(self, session: Session, round_index: int) -> None:
        thread = threading.Thread(
            target=self._run_round, args=(session, round_index), daemon=True
        )
        thread.start()

    def _run_round(self, session: Session, round_index: int) -> None:
        try:
            trace = refine(
                session.combined_prompt(),
                self.registry,
                session.actor,
                session.critic,
                session.config.max_iterations,
                session_id=f"{session.id}-r{round_index}",
            )
            with session.lock:
                session.traces.append(trace)
            self._append_trace(session, trace, round_index)

            if trace.final_trajectory is None:
                self._transition(session, "failed",
                                 error=trace.error or "refinement produced no trajectory")
                return

            self._transition(session, "executing")
            report = execute(
                trace.final_trajectory,
                self.registry,
                master_seed=session.config.seed + round_index,
            )
            if report.artifact is None:
                step = report.failed_step
                diag = report.steps[step].diagnostics if step is not None else ""
                self._transition(session, "failed",
                                 error=f"execution failed at step {step}: {diag}")
            else:
                self._write_atomic(
                    self._session_dir(session.id) / "map.json", report.artifact.to_json()
                )
                self._transition(session, "done", artifact=report.artifact)
        except Exception as e:  # worker threads must never die silently
            log.exception("session %s round %d crashed", session.id, round_index)
            self._transition(session, "failed", error=f"internal error: {e}")

    def _transition(self, session: Session, phase: str, error: str | None = None, artifact=None) -> None:
        """Persist the new phase before exposing it in memory, so any
        observer that sees the phase can rely on the on-disk state being at
        least as new (a restart never regresses an observed transition)."""
        self._persist_meta(session, phase=phase, error=error)
        with session.lock:
            session.phase = phase
            session.error = error
            if artifact is not None:
                session.artifact = artifact

    # -- persistence ---------------------------------------------------------

    def _session_dir(self, session_id: str) -> Path:
        path = self.data_dir / "sessions" / session_id
        path.mkdir(parents=True, exist_ok=True)
        return path

    def _write_atomic(self, path: Path, content: str) -> None:
        tmp = path.with_name(path.name + ".tmp")
        tmp.write_text(content, encoding="utf-8")
        os.replace(tmp, path)

    def _persist_meta(self, session: Session, phase: str | None = None, error: str | None = None) -> None:
        with session.lock:
            meta = {
                "id": session.id,
                "created_at": session.created_at,
                "prompt": session.prompt,
                "followups": list(session.followups),
                "config": session.config.model_dump(),
                "phase": phase if phase is not None else session.phase,
                "error": error if phase is not None else session.error,
            }
        self._write_atomic(
            self._session_dir(session.id) / "meta.json",
            json.dumps(meta, indent=2, sort_keys=True),
        )

    def _append_trace(self, session: Session, trace: RefinementTrace, round_index: int) -> None:
        path = self._session_dir(session.id) / "trace.jsonl"
        lines = trace_to_lines(trace, round_index=round_index)
        with path.open("a", encoding="utf-8") as fh:
            for line in lines:
                fh.write(line + "\n")

    def _load_existing(self) -> None:
        root = self.data_dir / "sessions"
        for meta_path in sorted(root.glob("*/meta.json")):
            try:
                meta = json.loads(meta_path.read_text(encoding="utf-8"))
                session = Session(
                    id=meta["id"],
                    created_at=meta["created_at"],
                    prompt=meta["prompt"],
                    config=SessionConfig.model_validate(meta.get("config", {})),
                    followups=list(meta.get("followups", [])),
                    phase=meta.get("phase", "failed"),
                    error=meta.get("error"),
                )
                trace_path = meta_path.parent / "trace.jsonl"
                if trace_path.exists():
                    session.traces = traces_from_lines(
                        trace_path.read_text(encoding="utf-8").splitlines()
                    )
                map_path = meta_path.parent / "map.json"
                if map_path.exists():
                    session.artifact = MapArtifact.from_json(map_path.read_text(encoding="utf-8"))
                if session.phase in ("refining", "executing"):
                    # The worker died with the process; the round cannot resume.
                    session.phase = "failed"
                    session.error = "interrupted by restart"
                    self._persist_meta(session)
                with self._lock:
                    self.sessions[session.id] = session
            except Exception:
                log.exception("could not load session from %s", meta_path)


class UnknownSessionError(KeyError):
    pass


class RoundInFlightError(RuntimeError):
    pass


# ---------------------------------------------------------------------------
# FastAPI wiring


def create_app(store: SessionStore, ui_dir: str | Path | None = None) -> FastAPI:
    app = FastAPI(title="tilesmith", version="0.1.0")

    @app.exception_handler(UnknownSessionError)
    async def _unknown(request, exc):
        return JSONResponse(status_code=404, content={"detail": f"unknown session {exc.args[0]}"})

    @app.exception_handler(RoundInFlightError)
    async def _conflict(request, exc):
        return JSONResponse(
            status_code=409,
            content={"detail": f"session {exc.args[0]} has a round in flight"},
        )

    @app.get("/healthz")
    async def healthz():
        return {"status": "ok"}

    @app.get("/tools")
    async def tools():
        return {
            "registry_version": store.registry.version,
            "tools": store.registry.names(),
            "documentation": render_documentation(store.registry),
            "examples": render_examples(store.registry),
        }

    @app.post("/sessions", status_code=201)
    async def create_session(body: CreateSessionRequest):
        session = store.create_session(body.prompt, body.config)
        return {"session_id": session.id}

    @app.get("/sessions")
    async def list_sessions():
        return {"sessions": [store.get(sid).status_dict() for sid in store.list_ids()]}

    @app.get("/sessions/{session_id}")
    async def session_status(session_id: str):
        return store.get(session_id).status_dict()

    @app.get("/sessions/{session_id}/trace")
    async def session_trace(session_id: str):
        session = store.get(session_id)
        return {
            "session_id": session.id,
            "rounds": [t.to_dict() for t in session.traces],
        }

    @app.get("/sessions/{session_id}/map")
    async def session_map(session_id: str):
        session = store.get(session_id)
        if session.artifact is None:
            raise HTTPException(status_code=404, detail="no map yet")
        return session.artifact.to_dict()

    @app.post("/sessions/{session_id}/followup", status_code=202)
    async def followup(session_id: str, body: FollowupRequest):
        session = store.followup(session_id, body.prompt)
        return {"session_id": session.id, "round": len(session.followups)}

    if ui_dir and Path(ui_dir).is_dir():
        from fastapi.staticfiles import StaticFiles

        app.mount("/ui", StaticFiles(directory=str(ui_dir), html=True), name="ui")

    return app
