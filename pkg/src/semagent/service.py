"""HTTP control plane for live plan execution.

Each session wraps one executor. A background thread advances running
sessions one primitive at a time (optionally throttled), while HTTP
callers pause, single-step, edit the remaining plan, and follow the
event feed over SSE. Every session writes a JSONL episode log whose
scene recipe and action list reproduce the run bit for bit.
"""

from __future__ import annotations

import hashlib
import json
import os
import threading
import time
import uuid
from datetime import datetime, timezone
from pathlib import Path
from typing import Iterator, Literal

from fastapi import FastAPI, Request
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse, StreamingResponse
from pydantic import BaseModel, Field

from .bench import BENCH_TASKS, TASK_BY_KEY
from .errors import (
    EditRejectedError,
    IllegalTransitionError,
    LayoutMismatchError,
    SemagentError,
)
from .executor import EditOp, ExecEvent, ExecStatus, Executor, PlanEdit
from .policy import LearnedLowLevel, QPolicy, checkpoint_path_for
from .semantics import ConfigLayout, describe_goal, goal_from_atoms
from .translate import subgoal_for
from .world import SceneInitializer, SceneSpec, WorldState, step as world_step

SERVICE_VERSION = "1"
LOG_FORMAT_VERSION = 1
HEARTBEAT_SECONDS = 15.0


# ------------------------------------------------------------- request bodies


class SceneBody(BaseModel):
    profile: str
    initializer: str
    seed: int = 0


class SessionBody(BaseModel):
    task: str | None = None
    scene: SceneBody | None = None
    goal: dict[str, bool] | None = None
    seed: int = 0
    policy: Literal["scripted", "learned"] = "scripted"
    start_paused: bool = False
    step_delay: float = Field(default=0.0, ge=0.0, le=2.0)
    max_replans: int = Field(default=3, ge=0, le=10)
    subgoal_budget: int = Field(default=120, ge=1, le=1000)


class ControlBody(BaseModel):
    command: Literal["pause", "resume", "step"]


class EditBody(BaseModel):
    op: str
    index: int | None = None
    action: str | None = None
    order: list[int] = Field(default_factory=list)
    plan: list[str] = Field(default_factory=list)


# -------------------------------------------------------------------- errors


class ApiError(Exception):
    def __init__(self, status_code: int, code: str, message: str, **extra):
        super().__init__(message)
        self.status_code = status_code
        self.payload = {"code": code, "message": message, **extra}


# ------------------------------------------------------------------ sessions


class Session:
    """One executor plus the machinery to drive and observe it."""

    def __init__(
        self,
        sid: str,
        executor: Executor,
        policy_kind: str,
        step_delay: float,
        log_path: Path | None,
    ):
        self.sid = sid
        self.executor = executor
        self.policy_kind = policy_kind
        self.step_delay = step_delay
        self.lock = threading.RLock()
        self.cond = threading.Condition()
        self.revision = 0
        self.created = datetime.now(timezone.utc).isoformat()
        self._runner: threading.Thread | None = None
        self._log_path = log_path
        self._log_file = log_path.open("a", encoding="utf-8") if log_path else None
        self._logged_ticks = 0
        self._finalized = False
        executor.observers.append(self._on_event)

    # -- event + log plumbing (called with self.lock held) -----------------

    def _on_event(self, event: ExecEvent) -> None:
        self._write_log({"type": "event", **event.to_dict()})
        with self.cond:
            self.cond.notify_all()

    def _write_log(self, row: dict) -> None:
        if self._log_file is None:
            return
        self._log_file.write(json.dumps(row, separators=(",", ":")) + "\n")
        self._log_file.flush()

    def write_header(self, goal_desc: str, config: dict) -> None:
        digest = hashlib.sha256(
            json.dumps(config, sort_keys=True).encode()
        ).hexdigest()[:12]
        self._write_log(
            {
                "type": "header",
                "version": LOG_FORMAT_VERSION,
                "session": self.sid,
                "created": self.created,
                "scene": self.executor.scene.to_dict(),
                "profile": self.executor.scene.profile_name,
                "goal": goal_desc,
                "policy": self.policy_kind,
                "config": config,
                "config_hash": digest,
            }
        )

    def _log_new_ticks(self) -> None:
        log = self.executor.action_log
        while self._logged_ticks < len(log):
            self._write_log(
                {"type": "tick", "tick": self._logged_ticks + 1, "action": log[self._logged_ticks]}
            )
            self._logged_ticks += 1

    def _finalize_if_terminal(self) -> None:
        if self._finalized or not self.executor.status.terminal:
            return
        self._finalized = True
        self._write_log(
            {
                "type": "footer",
                "status": self.executor.status.value,
                "ticks": self.executor.tick,
                "replans": self.executor.replans_used,
            }
        )
        if self._log_file is not None:
            self._log_file.close()
            self._log_file = None

    # -- state transitions --------------------------------------------------

    def bump(self) -> None:
        self.revision += 1

    def step_once(self) -> None:
        self.executor.step()
        self.bump()
        self._log_new_ticks()
        self._finalize_if_terminal()

    def ensure_runner(self) -> None:
        if self._runner is not None and self._runner.is_alive():
            return
        self._runner = threading.Thread(target=self._run_loop, daemon=True)
        self._runner.start()

    def _run_loop(self) -> None:
        while True:
            with self.lock:
                if self.executor.status is not ExecStatus.RUNNING:
                    break
                self.step_once()
            if self.step_delay > 0.0:
                time.sleep(self.step_delay)
        with self.cond:
            self.cond.notify_all()

    def state_payload(self) -> dict:
        return {
            "session": self.sid,
            "revision": self.revision,
            "policy": self.policy_kind,
            "created": self.created,
            **self.executor.snapshot(),
        }

    def plan_payload(self) -> dict:
        ex = self.executor
        steps = []
        for i, action in enumerate(ex.plan):
            if i < ex.cursor:
                state = "done"
            elif i == ex.cursor and not ex.status.terminal:
                state = "active"
            else:
                state = "pending"
            steps.append(
                {
                    "index": i,
                    "action": action.name,
                    "subgoal": describe_goal(subgoal_for(action, ex.layout), ex.layout),
                    "state": state,
                }
            )
        return {
            "session": self.sid,
            "revision": self.revision,
            "cursor": ex.cursor,
            "status": ex.status.value,
            "steps": steps,
            "actions": ex.action_vocabulary(),
        }


# --------------------------------------------------------------- app factory


def _task_catalog() -> list[dict]:
    out = []
    for task in BENCH_TASKS:
        out.append(
            {
                "id": task.key,
                "profile": task.profile_name,
                "initializer": task.initializer.value,
                "goal_atoms": dict(task.goal_atoms) if task.goal_atoms else None,
                "scene_dependent_goal": task.goal_fn is not None,
            }
        )
    return out


def _low_level_for(kind: str, scene: SceneSpec):
    if kind == "scripted":
        return None  # executor defaults to the scripted controller
    path = checkpoint_path_for(scene.profile_name, "hier")
    if not path.exists():
        raise ApiError(
            400,
            "NO_POLICY",
            f"no trained policy cached for profile {scene.profile_name!r}; "
            f"train one first (expected at {path})",
        )
    try:
        policy = QPolicy.load(str(path), scene.profile())
    except (LayoutMismatchError, KeyError, ValueError) as err:
        raise ApiError(400, "NO_POLICY", f"cached policy unusable: {err}")
    return LearnedLowLevel(policy)


def _build_session(body: SessionBody, log_dir: Path | None) -> tuple[Session, dict]:
    if (body.task is None) == (body.scene is None):
        raise ApiError(400, "INVALID_REQUEST", "pass exactly one of task or scene")
    if body.task is not None:
        task = TASK_BY_KEY.get(body.task)
        if task is None:
            raise ApiError(
                404, "UNKNOWN_TASK", f"unknown task {body.task!r}", known=[t.key for t in BENCH_TASKS]
            )
        scene = SceneSpec(task.profile_name, task.initializer, body.seed)
        layout = ConfigLayout(scene.profile())
        goal = task.goal_for(scene.build(), layout)
    else:
        try:
            scene = SceneSpec(
                body.scene.profile, SceneInitializer(body.scene.initializer), body.scene.seed
            )
            layout = ConfigLayout(scene.profile())
        except ValueError as err:
            raise ApiError(400, "INVALID_REQUEST", str(err))
        if not body.goal:
            raise ApiError(400, "INVALID_REQUEST", "a custom scene needs a goal")
        try:
            goal = goal_from_atoms(layout, body.goal)
        except (LayoutMismatchError, SemagentError) as err:
            raise ApiError(400, "INVALID_REQUEST", f"bad goal: {err}")

    low_level = _low_level_for(body.policy, scene)
    executor = Executor(
        scene,
        goal,
        policy=low_level,
        max_replans=body.max_replans,
        subgoal_budget=body.subgoal_budget,
    )
    sid = uuid.uuid4().hex[:12]
    log_path = (log_dir / f"{sid}.jsonl") if log_dir else None
    session = Session(sid, executor, body.policy, body.step_delay, log_path)
    config = {
        "task": body.task,
        "goal": describe_goal(goal, layout),
        "policy": body.policy,
        "max_replans": body.max_replans,
        "subgoal_budget": body.subgoal_budget,
        "step_delay": body.step_delay,
    }
    session.write_header(config["goal"], config)
    return session, config


def create_app(log_dir: str | Path | None = None) -> FastAPI:
    app = FastAPI(title="semagent control service", version=SERVICE_VERSION)
    # the operator console is a static page, usually served from another
    # origin (or file://); there is no auth layer to protect anyway
    app.add_middleware(
        CORSMiddleware, allow_origins=["*"], allow_methods=["*"], allow_headers=["*"]
    )
    sessions: dict[str, Session] = {}
    app.state.sessions = sessions
    logs = Path(log_dir) if log_dir else None
    if logs:
        logs.mkdir(parents=True, exist_ok=True)
    app.state.log_dir = logs

    @app.exception_handler(ApiError)
    async def on_api_error(request: Request, exc: ApiError):
        return JSONResponse(status_code=exc.status_code, content={"error": exc.payload})

    def lookup(sid: str) -> Session:
        session = sessions.get(sid)
        if session is None:
            raise ApiError(404, "UNKNOWN_SESSION", f"unknown session {sid!r}")
        return session

    @app.get("/v1/health")
    def health():
        return {"status": "ok", "version": SERVICE_VERSION, "sessions": len(sessions)}

    @app.get("/v1/tasks")
    def tasks():
        return {"tasks": _task_catalog()}

    @app.post("/v1/sessions", status_code=201)
    def create_session(body: SessionBody):
        session, _ = _build_session(body, logs)
        sessions[session.sid] = session
        with session.lock:
            session.executor.start(paused=body.start_paused)
            session.bump()
            session._finalize_if_terminal()
            if session.executor.status is ExecStatus.RUNNING:
                session.ensure_runner()
            return session.state_payload()

    @app.get("/v1/sessions")
    def list_sessions():
        out = []
        for session in sessions.values():
            with session.lock:
                ex = session.executor
                out.append(
                    {
                        "session": session.sid,
                        "status": ex.status.value,
                        "revision": session.revision,
                        "profile": ex.scene.profile_name,
                        "tick": ex.tick,
                    }
                )
        return {"sessions": out}

    @app.get("/v1/sessions/{sid}/state")
    def session_state(sid: str):
        session = lookup(sid)
        with session.lock:
            return session.state_payload()

    @app.get("/v1/sessions/{sid}/plan")
    def session_plan(sid: str):
        session = lookup(sid)
        with session.lock:
            return session.plan_payload()

    @app.post("/v1/sessions/{sid}/control")
    def control(sid: str, body: ControlBody):
        session = lookup(sid)
        with session.lock:
            ex = session.executor
            try:
                if body.command == "pause":
                    ex.pause()
                    session.bump()
                elif body.command == "resume":
                    ex.resume()
                    session.bump()
                    session.ensure_runner()
                else:  # manual step only makes sense while the runner is parked
                    if ex.status not in (ExecStatus.PAUSED, ExecStatus.AWAITING_EDIT):
                        raise IllegalTransitionError(
                            f"manual step requires a paused session, not {ex.status.value}",
                            ex.status.value,
                        )
                    session.step_once()
            except IllegalTransitionError as err:
                raise ApiError(409, "ILLEGAL_TRANSITION", str(err), status=err.status)
            return session.state_payload()

    @app.post("/v1/sessions/{sid}/plan/edits")
    def edit_plan(sid: str, body: EditBody):
        session = lookup(sid)
        try:
            edit = PlanEdit(
                op=EditOp(body.op),
                index=body.index,
                action=body.action,
                order=tuple(body.order),
                plan=tuple(body.plan),
            )
        except ValueError:
            raise ApiError(
                400,
                "INVALID_REQUEST",
                f"unknown edit op {body.op!r}",
                known=[op.value for op in EditOp],
            )
        with session.lock:
            try:
                session.executor.apply_edit(edit)
                session.bump()
            except IllegalTransitionError as err:
                raise ApiError(409, "ILLEGAL_TRANSITION", str(err), status=err.status)
            except EditRejectedError as err:
                raise ApiError(
                    422,
                    "EDIT_REJECTED",
                    str(err),
                    missing=err.missing,
                    failed_step=err.failed_step,
                )
            return session.plan_payload()

    @app.get("/v1/sessions/{sid}/events")
    def events(sid: str, request: Request, after: int = -1):
        session = lookup(sid)
        header_id = request.headers.get("last-event-id")
        if header_id is not None:
            try:
                after = max(after, int(header_id))
            except ValueError:
                pass
        return StreamingResponse(
            _event_stream(session, after),
            media_type="text/event-stream",
            headers={"cache-control": "no-cache", "x-accel-buffering": "no"},
        )

    return app


def _event_stream(session: Session, after: int) -> Iterator[str]:
    cursor = after + 1
    while True:
        with session.lock:
            pending = list(session.executor.events[cursor:])
            terminal = session.executor.status.terminal
        for ev in pending:
            yield f"id: {ev.index}\nevent: {ev.kind.value}\ndata: {json.dumps(ev.to_dict())}\n\n"
            cursor = ev.index + 1
        if terminal:
            return
        if not pending:
            with session.cond:
                notified = session.cond.wait(timeout=HEARTBEAT_SECONDS)
            if not notified:
                yield ": heartbeat\n\n"


# ------------------------------------------------------------------- replay


def read_episode_log(path: str | Path) -> dict:
    """Parse one JSONL episode log into header/ticks/events/footer."""
    header = footer = None
    ticks: list[dict] = []
    events: list[dict] = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            row = json.loads(line)
            kind = row.pop("type")
            if kind == "header":
                header = row
            elif kind == "tick":
                ticks.append(row)
            elif kind == "event":
                events.append(row)
            elif kind == "footer":
                footer = row
    if header is None:
        raise ValueError(f"{path}: missing header row")
    return {"header": header, "ticks": ticks, "events": events, "footer": footer}


def replay_episode_log(path: str | Path) -> WorldState:
    """Rebuild the final world state recorded in an episode log."""
    log = read_episode_log(path)
    state = SceneSpec.from_dict(log["header"]["scene"]).build()
    for row in log["ticks"]:
        state = world_step(state, row["action"])
    return state


def serve(
    host: str | None = None, port: int | None = None, log_dir: str | None = None
) -> None:
    import uvicorn

    host = host or os.environ.get("SEMAGENT_HOST", "127.0.0.1")
    port = port if port is not None else int(os.environ.get("SEMAGENT_PORT", "8030"))
    log_dir = log_dir or os.environ.get("SEMAGENT_LOG_DIR") or None
    uvicorn.run(create_app(log_dir=log_dir), host=host, port=port, log_level="warning")
