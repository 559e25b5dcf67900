"""The four feedback-quality conditions and single-cell execution.

All conditions share the task's demo, evaluation scenes, and random stream
(common random numbers): the concept-pick draw uses a condition-independent
seed, so a condition with higher accuracy picks the true concept on a
superset of the seeds where a lower-accuracy one does.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field, replace
from typing import Optional

from .. import envs
from ..adapt import augment
from ..concept import augmentation_targets, target_variants
from ..experts import expert_demo
from ..oracle import UserModel
from ..policy import PolicyParams, TrainConfig, finetune, predict_fn
from .tasks import TI_SHIFTS, TaskSpec, eval_scenes_for

CONDITION_KINDS = ("NHRandom", "BaselineH", "CFH", "OracleFB")


@dataclass(frozen=True)
class ConditionKind:
    kind: str
    accuracy: float = 1.0  # concept-identification accuracy for BaselineH/CFH

    def __post_init__(self):
        if self.kind not in CONDITION_KINDS:
            raise ValueError(f"kind must be one of {CONDITION_KINDS}")
        if not 0.0 <= self.accuracy <= 1.0:
            raise ValueError("accuracy must lie in [0, 1]")

    @property
    def label(self) -> str:
        return self.kind


@dataclass(frozen=True)
class RunConfig:
    train: TrainConfig = TrainConfig(epochs=600)
    eval_count: int = 10
    run_seed: int = 0


@dataclass(frozen=True)
class ResultRecord:
    task_id: str
    domain: str
    shift_type: str
    condition: str
    accuracy: float
    task_seed: int
    run_seed: int
    pre_success: float
    post_success: float
    demos_used: int
    augmented: int
    eval_count: int
    picked_target: Optional[tuple[str, str]]
    wall_time: float

    def to_json(self) -> dict:
        return {
            "task_id": self.task_id,
            "domain": self.domain,
            "shift_type": self.shift_type,
            "condition": self.condition,
            "accuracy": self.accuracy,
            "task_seed": self.task_seed,
            "run_seed": self.run_seed,
            "pre_success": self.pre_success,
            "post_success": self.post_success,
            "demos_used": self.demos_used,
            "augmented": self.augmented,
            "eval_count": self.eval_count,
            "picked_target": list(self.picked_target) if self.picked_target else None,
            "wall_time": self.wall_time,
        }

    def key(self) -> tuple:
        return (self.task_id, self.condition, self.run_seed)

    def deterministic_fields(self) -> dict:
        """Everything except wall time, for bit-exact reproduction checks."""
        d = self.to_json()
        d.pop("wall_time")
        return d


def _mean_success(params: PolicyParams, scenes, reward) -> float:
    fn = predict_fn(params)
    hits = [envs.success(envs.rollout(fn, s), reward) for s in scenes]
    return sum(hits) / len(hits)


def run_condition(
    params: PolicyParams,
    task: TaskSpec,
    condition: ConditionKind,
    cfg: RunConfig = RunConfig(),
) -> ResultRecord:
    """Finetune under one feedback condition and evaluate on reward-sampled
    scenes. All conditions get one demo and the same augmentation budget."""
    if task.shift_type not in TI_SHIFTS:
        raise ValueError(
            f"augmentation conditions need a TI-bearing task, got {task.shift_type}"
        )
    start = time.perf_counter()
    demo = expert_demo(task.test_scene, task.reward)
    eval_scenes = eval_scenes_for(task, cfg.eval_count)
    pre = _mean_success(params, eval_scenes, task.reward)

    pool = augmentation_targets(task.test_scene)
    if condition.kind == "OracleFB":
        q_eff = 1.0
    elif condition.kind == "NHRandom":
        q_eff = 1.0 / len(pool)  # uniform pick over the candidate pool
    else:
        q_eff = condition.accuracy
    user = UserModel(
        reward=task.reward,
        true_shift=task.shifted,
        q=q_eff,
        seed=[task.seed, cfg.run_seed, 0x636F],
    )
    target = user.behaviour_only_guess(task.test_scene)
    budget = len(target_variants(task.test_scene, task.shifted))
    augmented = augment(demo, target, budget=budget) if target else []

    tuned, _ = finetune(
        params, [demo] + augmented, replace(cfg.train, seed=cfg.run_seed)
    )
    post = _mean_success(tuned, eval_scenes, task.reward)
    return ResultRecord(
        task_id=f"{task.domain}-{task.shift_type}-{task.seed}",
        domain=task.domain,
        shift_type=task.shift_type,
        condition=condition.label,
        accuracy=condition.accuracy,
        task_seed=task.seed,
        run_seed=cfg.run_seed,
        pre_success=pre,
        post_success=post,
        demos_used=1,
        augmented=len(augmented),
        eval_count=cfg.eval_count,
        picked_target=target,
        wall_time=time.perf_counter() - start,
    )
