"""Session-oriented HTTP service exposing the live adaptation loop.

A human client replaces the simulated user: it views the failed rollout,
submits a verdict and a demonstration, answers the two feedback questions,
and polls the asynchronous finetune job. The service drives the same
DfaSession state machine as the headless loop, so session logs are
directly comparable.

All responses carry {"version": API_VERSION}; errors use the body
{"code", "message", "allowed"}.
"""

from __future__ import annotations

import threading
import time
import uuid
from concurrent.futures import Future, ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from fastapi import FastAPI, WebSocket, WebSocketDisconnect
from fastapi.responses import JSONResponse
from pydantic import BaseModel

from .. import envs
from ..adapt import AdaptConfig, DfaSession
from ..concept import abstract
from ..counterfactual import SearchConfig
from ..envs.trajectory import Trajectory, encode_observation, horizon_for
from ..experts import PAD_ACTION
from ..harness import SHIFT_TYPES, eval_scenes_for, gen_shift_task, gen_train_task
from ..policy import PolicyParams, TrainConfig, architecture_for, init, train_bc

API_VERSION = 1
DOMAINS = ("nav2d", "doorkey")


class ApiError(Exception):
    def __init__(self, status: int, code: str, message: str, allowed=None, headers=None):
        self.status = status
        self.code = code
        self.message = message
        self.allowed = list(allowed) if allowed else []
        self.headers = headers or {}


class CreateSessionRequest(BaseModel):
    domain: str
    shift_type: str
    seed: int
    train_seed: int = 0
    train_epochs: int = 300
    finetune_epochs: int = 600
    learning_rate: float = 0.02
    max_rounds: int = 3
    eval_count: int = 10


class VerdictRequest(BaseModel):
    success: bool


class DemoRequest(BaseModel):
    actions: list
    # The live user is the authority on their reward; override lets them
    # keep a demo the server-side success check rejects.
    override: bool = False


class FeedbackRequest(BaseModel):
    valid: bool
    relevance: str


@dataclass
class SessionEntry:
    id: str
    domain: str
    shift_type: str
    seed: int
    session: DfaSession
    reward_prompt: str
    created: float = field(default_factory=time.time)
    lock: threading.Lock = field(default_factory=threading.Lock)
    job: Optional[Future] = None
    cf_payload: Optional[dict] = None


def _frames(trajectory: Trajectory) -> list[dict]:
    # Horizon-length frame sequence: frame t shows the scene before action t.
    return [encode_observation(o, "png") for o in trajectory.observations[:-1]]


def _trajectory_payload(trajectory: Trajectory) -> dict:
    return {
        "provenance": trajectory.provenance,
        "scene": trajectory.scene.to_json(),
        "frames": _frames(trajectory),
        "actions": [_action_json(a) for a in trajectory.actions],
    }


def _action_json(action):
    if isinstance(action, (int, np.integer)):
        return int(action)
    return [float(v) for v in action]


def _parse_action(domain: str, raw):
    if domain == "nav2d":
        return np.asarray(raw, dtype=np.float64)
    return int(raw)


def _pad_action(domain: str):
    return np.zeros(2) if domain == "nav2d" else PAD_ACTION


def _reward_prompt(reward) -> str:
    color = reward.goal_color or "any-colored"
    return f"go to the {color} goal"


def create_app(workers: int = 2) -> FastAPI:
    app = FastAPI(title="cfadapt session service", version=str(API_VERSION))
    sessions: dict[str, SessionEntry] = {}
    store_lock = threading.Lock()
    executor = ThreadPoolExecutor(max_workers=workers)
    policy_cache: dict[tuple, PolicyParams] = {}
    policy_lock = threading.Lock()

    @app.exception_handler(ApiError)
    async def _api_error(_, exc: ApiError):
        return JSONResponse(
            status_code=exc.status,
            content={"code": exc.code, "message": exc.message, "allowed": exc.allowed},
            headers=exc.headers,
        )

    def base_policy(domain: str, req: CreateSessionRequest) -> PolicyParams:
        key = (domain, req.train_seed, req.train_epochs, req.learning_rate)
        with policy_lock:
            if key not in policy_cache:
                train = gen_train_task(domain, req.train_seed)
                params = init(architecture_for(domain), req.train_seed)
                cfg = TrainConfig(
                    learning_rate=req.learning_rate,
                    epochs=req.train_epochs,
                    seed=req.train_seed,
                )
                params, _ = train_bc(params, train.demos, cfg)
                policy_cache[key] = params
            return policy_cache[key]

    def entry_for(session_id: str) -> SessionEntry:
        with store_lock:
            entry = sessions.get(session_id)
        if entry is None:
            raise ApiError(404, "not_found", f"no session {session_id!r}")
        return entry

    def session_view(entry: SessionEntry) -> dict:
        s = entry.session
        return {
            "version": API_VERSION,
            "id": entry.id,
            "domain": entry.domain,
            "shift_type": entry.shift_type,
            "seed": entry.seed,
            "phase": s.phase,
            "round": s.round,
            "status": s.status,
            "horizon": horizon_for(entry.domain),
            "reward_prompt": entry.reward_prompt,
            "log": s.log,
            "created": entry.created,
        }

    def require_phase(entry: SessionEntry, phase: str) -> None:
        if entry.session.phase != phase:
            raise ApiError(
                409,
                "phase_violation",
                f"operation requires phase {phase!r}, session is in {entry.session.phase!r}",
                allowed=[phase],
            )

    def start_finetune(entry: SessionEntry) -> None:
        def job():
            with entry.lock:
                entry.session.run_finetune()

        entry.job = executor.submit(job)

    @app.post("/sessions")
    def create_session(req: CreateSessionRequest):
        if req.domain not in DOMAINS:
            raise ApiError(422, "unknown_domain", f"unknown domain {req.domain!r}", DOMAINS)
        if req.shift_type not in SHIFT_TYPES:
            raise ApiError(
                422, "unknown_shift", f"unknown shift type {req.shift_type!r}", SHIFT_TYPES
            )
        params = base_policy(req.domain, req)
        task = gen_shift_task(gen_train_task(req.domain, req.train_seed), req.shift_type, req.seed)
        cfg = AdaptConfig(
            search=SearchConfig(),
            train=TrainConfig(
                learning_rate=req.learning_rate,
                epochs=req.finetune_epochs,
                seed=req.train_seed,
            ),
            max_rounds=req.max_rounds,
        )
        eval_scenes = eval_scenes_for(task, req.eval_count) if req.eval_count else []
        session = DfaSession(
            params,
            task.test_scene,
            cfg,
            eval_scenes=eval_scenes,
            eval_reward=task.reward if eval_scenes else None,
        )
        entry = SessionEntry(
            id=uuid.uuid4().hex,
            domain=req.domain,
            shift_type=req.shift_type,
            seed=req.seed,
            session=session,
            reward_prompt=_reward_prompt(task.reward),
        )
        with store_lock:
            sessions[entry.id] = entry
        view = session_view(entry)
        view["rollout"] = _trajectory_payload(session.rollout)
        return view

    @app.get("/sessions/{session_id}")
    def get_session(session_id: str):
        entry = entry_for(session_id)
        with entry.lock:
            view = session_view(entry)
            if entry.session.rollout is not None:
                view["rollout"] = _trajectory_payload(entry.session.rollout)
            return view

    @app.post("/sessions/{session_id}/verdict")
    def submit_verdict(session_id: str, req: VerdictRequest):
        entry = entry_for(session_id)
        with entry.lock:
            require_phase(entry, "awaiting_verdict")
            phase = entry.session.submit_verdict(req.success)
            return {"version": API_VERSION, "phase": phase, "status": entry.session.status}

    @app.post("/sessions/{session_id}/demo")
    def submit_demo(session_id: str, req: DemoRequest):
        entry = entry_for(session_id)
        with entry.lock:
            require_phase(entry, "awaiting_demo")
            session = entry.session
            T = horizon_for(entry.domain)
            if len(req.actions) != T:
                raise ApiError(
                    422,
                    "bad_demo_length",
                    f"expected {T} actions, got {len(req.actions)}",
                    [T],
                )
            try:
                actions = [_parse_action(entry.domain, a) for a in req.actions]
                demo = envs.replay(session.test_scene, actions, provenance="human_demo")
            except (ValueError, TypeError, envs.MalformedActionError) as e:
                raise ApiError(422, "bad_demo_actions", str(e))
            if session.eval_reward is not None and not req.override:
                if not envs.success(demo, session.eval_reward):
                    raise ApiError(
                        409,
                        "demo_failed_success_check",
                        "demo does not satisfy the server-side success check; "
                        "resubmit with override=true to keep it",
                        ["override"],
                    )
            result = session.submit_demo(demo)
            payload = {
                "version": API_VERSION,
                "phase": session.phase,
                "counterfactual": result.to_json(),
            }
            if result.found:
                base = abstract(session.test_scene, session.schema)
                payload["edit_description"] = result.edit.describe(base)
                payload["counterfactual_trajectory"] = _trajectory_payload(result.trajectory)
                payload["demo_trajectory"] = _trajectory_payload(demo)
                entry.cf_payload = payload
            else:
                entry.cf_payload = None
                start_finetune(entry)
            return payload

    @app.get("/sessions/{session_id}/counterfactual")
    def get_counterfactual(session_id: str):
        entry = entry_for(session_id)
        with entry.lock:
            if entry.cf_payload is None:
                raise ApiError(404, "no_counterfactual", "no counterfactual for this round")
            return entry.cf_payload

    @app.post("/sessions/{session_id}/feedback")
    def submit_feedback(session_id: str, req: FeedbackRequest):
        entry = entry_for(session_id)
        with entry.lock:
            require_phase(entry, "awaiting_feedback")
            if req.relevance not in ("TI", "TR"):
                raise ApiError(
                    422, "bad_relevance", f"unknown relevance {req.relevance!r}", ["TI", "TR"]
                )
            finetune_set = entry.session.submit_feedback(req.valid, req.relevance)
            start_finetune(entry)
            return {
                "version": API_VERSION,
                "phase": entry.session.phase,
                "job": {"id": entry.id, "demos": len(finetune_set)},
            }

    @app.get("/sessions/{session_id}/eval")
    def get_eval(session_id: str):
        entry = entry_for(session_id)
        if entry.job is None:
            raise ApiError(409, "no_job", "no finetune job for this session")
        if not entry.job.done():
            raise ApiError(
                202, "pending", "finetune job still running", headers={"Retry-After": "1"}
            )
        entry.job.result()  # surface job exceptions
        with entry.lock:
            session = entry.session
            last_round = session.log["rounds"][-1]
            payload = {
                "version": API_VERSION,
                "phase": session.phase,
                "status": session.status,
                "round": session.round,
                "eval": last_round.get("eval"),
                "finetune": last_round.get("finetune"),
            }
            if session.phase == "awaiting_verdict":
                payload["rollout"] = _trajectory_payload(session.rollout)
            return payload

    @app.websocket("/sessions/{session_id}/stream")
    async def stream(websocket: WebSocket, session_id: str):
        """Incremental demo capture: step actions through the environment
        one at a time for live preview, then commit to a padded sequence."""
        with store_lock:
            entry = sessions.get(session_id)
        await websocket.accept()
        if entry is None:
            await websocket.send_json(
                {"type": "error", "code": "not_found", "message": session_id, "allowed": []}
            )
            await websocket.close()
            return
        domain = entry.domain
        T = horizon_for(domain)
        scene = entry.session.test_scene
        state, obs = envs.reset(scene)
        actions: list = []
        try:
            while True:
                msg = await websocket.receive_json()
                kind = msg.get("type")
                if kind == "reset":
                    state, obs = envs.reset(scene)
                    actions = []
                    await websocket.send_json(
                        {"type": "state", "t": 0, "frame": encode_observation(obs, "png")}
                    )
                elif kind == "step":
                    if len(actions) >= T:
                        await websocket.send_json(
                            {
                                "type": "error",
                                "code": "horizon_exceeded",
                                "message": f"horizon is {T}",
                                "allowed": [],
                            }
                        )
                        continue
                    try:
                        action = _parse_action(domain, msg["action"])
                        state, obs = envs.step(state, action)
                    except (KeyError, ValueError, TypeError, envs.MalformedActionError) as e:
                        await websocket.send_json(
                            {
                                "type": "error",
                                "code": "bad_action",
                                "message": str(e),
                                "allowed": [],
                            }
                        )
                        continue
                    actions.append(action)
                    await websocket.send_json(
                        {
                            "type": "state",
                            "t": len(actions),
                            "frame": encode_observation(obs, "png"),
                            "done": len(actions) >= T,
                        }
                    )
                elif kind == "commit":
                    padding = T - len(actions)
                    padded = list(actions) + [_pad_action(domain)] * padding
                    await websocket.send_json(
                        {
                            "type": "actions",
                            "actions": [_action_json(a) for a in padded],
                            "padding": padding,
                        }
                    )
                else:
                    await websocket.send_json(
                        {
                            "type": "error",
                            "code": "bad_message",
                            "message": f"unknown type {kind!r}",
                            "allowed": ["reset", "step", "commit"],
                        }
                    )
        except WebSocketDisconnect:
            pass

    return app
