"""Feedback and adaptation: augmentation, the finetune set, and the
round-based adaptation loop.

The loop is phase-structured (rollout -> verdict -> demo -> counterfactual
-> feedback -> finetune) so the same state machine can be driven headlessly
by a simulated user or over the wire by a human client, producing identical
session logs.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

from . import envs
from .concept import ConceptEdit, realize, target_variants
from .counterfactual import (
    CounterfactualResult,
    SearchConfig,
    search_min_edit,
)
from .envs.trajectory import Trajectory
from .oracle import TI, UserModel
from .policy import PolicyParams, TrainConfig, finetune, predict_fn
from .rewards import RewardSpec
from .scenes import ConceptSchema, SceneDescriptor, schema_for


class PhaseError(RuntimeError):
    """An operation invoked outside its phase in the session state machine."""


@dataclass(frozen=True)
class AdaptConfig:
    search: SearchConfig = SearchConfig()
    train: TrainConfig = TrainConfig(epochs=600)
    max_rounds: int = 3


@dataclass
class FinetuneSet:
    """The human demo plus augmented demos, with their generating edits."""

    demo: Trajectory
    augmented: list[Trajectory] = field(default_factory=list)
    target: Optional[tuple[str, str]] = None

    def trajectories(self) -> list[Trajectory]:
        return [self.demo] + self.augmented

    def __len__(self) -> int:
        return 1 + len(self.augmented)


def augment(
    demo: Trajectory,
    ti_concept: tuple[str, str],
    schema: Optional[ConceptSchema] = None,
    budget: Optional[int] = None,
) -> list[Trajectory]:
    """One augmented demo per instantiation of the identified TI concept.

    Each variant re-realizes the demo's initial scene with the concept set
    to that instantiation (including the demo's own, kept deliberately) and
    replays the demo's actions through the transition function, so actions
    are identical and intermediate states stay physically consistent.
    """
    if demo.provenance != "human_demo":
        raise ValueError("augmentation expects a human demonstration")
    schema = schema or schema_for(demo.scene)
    variants = target_variants(demo.scene, ti_concept, schema)
    if budget is not None:
        variants = variants[:budget]
    out = []
    for cv in variants:
        scene = realize(cv, demo.scene)
        out.append(envs.replay(scene, demo.actions, provenance="augmented"))
    return out


PHASES = (
    "awaiting_verdict",
    "awaiting_demo",
    "awaiting_feedback",
    "finetuning",
    "evaluated",
)


class DfaSession:
    """One adaptation session over a fixed test scene.

    Drives the diagnose/feedback/adapt loop one phase at a time; the
    session log records every round for audit and parity checks.
    """

    def __init__(
        self,
        params: PolicyParams,
        test_scene: SceneDescriptor,
        cfg: AdaptConfig = AdaptConfig(),
        eval_scenes: Sequence[SceneDescriptor] = (),
        eval_reward: Optional[RewardSpec] = None,
    ):
        self.params = params
        self.test_scene = test_scene
        self.schema = schema_for(test_scene)
        self.cfg = cfg
        self.eval_scenes = list(eval_scenes)
        self.eval_reward = eval_reward
        self.phase = "awaiting_verdict"
        self.round = 0
        self.status = "running"
        self.rollout: Optional[Trajectory] = None
        self.demo: Optional[Trajectory] = None
        self.cf: Optional[CounterfactualResult] = None
        self.finetune_set: Optional[FinetuneSet] = None
        self.log: dict = {"max_rounds": cfg.max_rounds, "status": "running", "rounds": []}
        self._round_log: dict = {}
        self._begin_round()

    def _require(self, phase: str) -> None:
        if self.phase != phase:
            raise PhaseError(f"operation requires phase {phase!r}, session is in {self.phase!r}")

    def _begin_round(self) -> None:
        self.round += 1
        self.rollout = envs.rollout(predict_fn(self.params), self.test_scene)
        self.demo = None
        self.cf = None
        self.finetune_set = None
        self._round_log = {"round": self.round, "rollout_digest": self.rollout.digest()}
        self.phase = "awaiting_verdict"

    def submit_verdict(self, success: bool) -> str:
        self._require("awaiting_verdict")
        self._round_log["verdict"] = bool(success)
        if success:
            self.log["rounds"].append(self._round_log)
            self._close("success")
        else:
            self.phase = "awaiting_demo"
        return self.phase

    def submit_demo(self, demo: Trajectory) -> CounterfactualResult:
        self._require("awaiting_demo")
        if demo.scene != self.test_scene:
            raise ValueError("demo must start from the test scene")
        self.demo = demo
        self.finetune_set = FinetuneSet(demo=demo)
        self.cf = search_min_edit(
            predict_fn(self.params),
            self.test_scene,
            demo,
            self.schema,
            self.cfg.search,
        )
        self._round_log["demo_digest"] = demo.digest()
        self._round_log["counterfactual"] = self.cf.to_json()
        self.phase = "awaiting_feedback" if self.cf.found else "finetuning"
        if not self.cf.found:
            self._round_log["feedback"] = None
        return self.cf

    def submit_feedback(self, valid: bool, relevance: str) -> FinetuneSet:
        self._require("awaiting_feedback")
        assert self.cf is not None and self.cf.found and self.finetune_set is not None
        self._round_log["feedback"] = {"valid": bool(valid), "relevance": relevance}
        if valid and relevance == TI:
            target = self.cf.edit.targets()[0]
            self.finetune_set.target = target
            self.finetune_set.augmented = augment(self.demo, target, self.schema)
        self.phase = "finetuning"
        return self.finetune_set

    def run_finetune(self) -> tuple[PolicyParams, list[float]]:
        self._require("finetuning")
        assert self.finetune_set is not None
        demos = self.finetune_set.trajectories()
        self.params, losses = finetune(self.params, demos, self.cfg.train)
        self._round_log["augmented"] = len(self.finetune_set.augmented)
        self._round_log["finetune"] = {
            "demos": len(demos),
            "epochs": self.cfg.train.epochs,
            "final_loss": losses[-1] if losses else None,
        }
        self._round_log["eval"] = self._evaluate()
        self.log["rounds"].append(self._round_log)
        if self.round >= self.cfg.max_rounds:
            self._close("budget_exhausted")
        else:
            self._begin_round()
        return self.params, losses

    def _evaluate(self) -> Optional[dict]:
        if not self.eval_scenes or self.eval_reward is None:
            return None
        fn = predict_fn(self.params)
        per_scene = [
            bool(envs.success(envs.rollout(fn, s), self.eval_reward))
            for s in self.eval_scenes
        ]
        return {"per_scene": per_scene, "mean": sum(per_scene) / len(per_scene)}

    def _close(self, status: str) -> None:
        self.status = status
        self.log["status"] = status
        self.phase = "evaluated"

    @property
    def closed(self) -> bool:
        return self.phase == "evaluated"


def run_dfa(
    params: PolicyParams,
    test_scene: SceneDescriptor,
    user: UserModel,
    cfg: AdaptConfig = AdaptConfig(),
    eval_scenes: Sequence[SceneDescriptor] = (),
) -> tuple[PolicyParams, dict]:
    """Drive a full session with the simulated user; returns the adapted
    params (unchanged if the first rollout already succeeds) and the log."""
    session = DfaSession(
        params,
        test_scene,
        cfg,
        eval_scenes=eval_scenes,
        eval_reward=user.reward if eval_scenes else None,
    )
    while not session.closed:
        if session.submit_verdict(user.judge_success(session.rollout)) == "evaluated":
            break
        demo = user.provide_demo(test_scene)
        result = session.submit_demo(demo)
        if result.found:
            valid = user.verify_counterfactual(result.edit, result.trajectory)
            relevance = user.label_relevance(result.edit)
            session.submit_feedback(valid, relevance)
        session.run_finetune()
    return session.params, session.log
