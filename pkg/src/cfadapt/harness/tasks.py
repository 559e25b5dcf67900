"""Seeded task generation: train scenes with expert demos, and the five
distribution-shift test tasks with their paired user rewards."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .. import constants as C
from ..concept import abstract
from ..envs.trajectory import Trajectory
from ..experts import expert_demo
from ..rewards import RewardSpec
from ..scenes import (
    SceneDescriptor,
    SceneObject,
    validate_scene,
)

SHIFT_TYPES = ("ConceptTI", "ConceptTR", "DistractorTI", "DistractorTR", "Other")
TI_SHIFTS = ("ConceptTI", "DistractorTI")

DEMOS_PER_TRAIN_TASK = 10


@dataclass(frozen=True)
class TrainTask:
    domain: str
    scene: SceneDescriptor
    reward: RewardSpec  # the designer's broad training reward
    demos: tuple[Trajectory, ...]
    seed: int


@dataclass(frozen=True)
class TaskSpec:
    domain: str
    train_scene: SceneDescriptor
    test_scene: SceneDescriptor
    shift_type: str
    # Ground-truth shifted concept as (object, concept); presence shifts use
    # the 'presence' pseudo-concept. None for "Other".
    shifted: Optional[tuple[str, str]]
    reward: RewardSpec
    seed: int

    def to_json(self) -> dict:
        return {
            "domain": self.domain,
            "train_scene": self.train_scene.to_json(),
            "test_scene": self.test_scene.to_json(),
            "shift_type": self.shift_type,
            "shifted": list(self.shifted) if self.shifted else None,
            "reward": self.reward.to_json(),
            "seed": self.seed,
        }

    @staticmethod
    def from_json(d: dict) -> "TaskSpec":
        return TaskSpec(
            domain=d["domain"],
            train_scene=SceneDescriptor.from_json(d["train_scene"]),
            test_scene=SceneDescriptor.from_json(d["test_scene"]),
            shift_type=d["shift_type"],
            shifted=tuple(d["shifted"]) if d["shifted"] else None,
            reward=RewardSpec.from_json(d["reward"]),
            seed=d["seed"],
        )


def _nav2d_scene(goal_color: str, goal_pos=C.NAV2D_TRAIN_GOAL) -> SceneDescriptor:
    return SceneDescriptor(
        domain="nav2d",
        objects=(
            SceneObject("goal", True, (goal_color,), tuple(goal_pos)),
            SceneObject("distractor", False, (), None),
        ),
        agent_pos=C.NAV2D_AGENT_START,
    )


def _doorkey_scene(
    key_color: str, door_color: str, goal_color: str, goal_cell=C.DOORKEY_GOAL_CELL
) -> SceneDescriptor:
    return SceneDescriptor(
        domain="doorkey",
        objects=(
            SceneObject("key", True, (key_color,), C.DOORKEY_KEY_CELL),
            SceneObject("door", True, (door_color,), C.DOORKEY_DOOR_CELL),
            SceneObject("goal", True, (goal_color,), tuple(goal_cell)),
            SceneObject("lava", False, (), None),
        ),
        agent_pos=C.DOORKEY_AGENT_START,
    )


def gen_train_task(domain: str, seed: int) -> TrainTask:
    """Seeded training task: random colors at fixed geometry, no distractor,
    plus the 10 expert demonstrations at the domain horizon."""
    rng = np.random.default_rng([seed, 0x7261])
    if domain == "nav2d":
        scene = _nav2d_scene(_choice(rng, C.OBJECT_COLORS))
    elif domain == "doorkey":
        scene = _doorkey_scene(
            _choice(rng, C.OBJECT_COLORS),
            _choice(rng, C.OBJECT_COLORS),
            _choice(rng, C.OBJECT_COLORS),
        )
    else:
        raise ValueError(f"unknown domain {domain!r}")
    validate_scene(scene)
    reward = RewardSpec(domain=domain)
    demo = expert_demo(scene, reward)
    demos = tuple(demo for _ in range(DEMOS_PER_TRAIN_TASK))
    return TrainTask(domain=domain, scene=scene, reward=reward, demos=demos, seed=seed)


def _choice(rng: np.random.Generator, options) -> str:
    return options[int(rng.integers(len(options)))]


def _on_path_position(scene: SceneDescriptor) -> tuple[float, float]:
    ax, ay = scene.agent_pos
    gx, gy = scene.object("goal").position
    t = C.NAV2D_ON_PATH_T
    return (ax + t * (gx - ax), ay + t * (gy - ay))


def _off_path_position(scene: SceneDescriptor) -> tuple[float, float]:
    import math

    ax, ay = scene.agent_pos
    gx, gy = scene.object("goal").position
    x, y = _on_path_position(scene)
    norm = math.hypot(gx - ax, gy - ay) or 1.0
    px, py = -(gy - ay) / norm, (gx - ax) / norm
    return (
        min(max(x + C.NAV2D_OFF_PATH_OFFSET * px, 0.05), 0.95),
        min(max(y + C.NAV2D_OFF_PATH_OFFSET * py, 0.05), 0.95),
    )


def gen_shift_task(train: TrainTask, shift: str, seed: int) -> TaskSpec:
    """Test scene plus user-intended reward for one of the five shifts."""
    if shift not in SHIFT_TYPES:
        raise ValueError(f"shift must be one of {SHIFT_TYPES}, got {shift!r}")
    rng = np.random.default_rng([seed, 0x7465, SHIFT_TYPES.index(shift)])
    scene = train.scene
    domain = train.domain
    if shift in ("ConceptTI", "ConceptTR"):
        if domain == "nav2d":
            obj = "goal"
        else:
            obj = _choice(rng, ("key", "door", "goal"))
        old = scene.object(obj).values[0]
        new = _choice(rng, tuple(c for c in C.OBJECT_COLORS if c != old))
        test = scene.with_object(
            SceneObject(obj, True, (new,), scene.object(obj).position)
        )
        if shift == "ConceptTI":
            reward = RewardSpec(domain=domain)
        elif obj == "goal":
            reward = RewardSpec(domain=domain, goal_color=new)
        else:
            reward = RewardSpec(
                domain=domain, tr_concepts=frozenset({(obj, "color")})
            )
        shifted = (obj, "color")
    elif shift in ("DistractorTI", "DistractorTR"):
        on_path = shift == "DistractorTR"
        if domain == "nav2d":
            color = _choice(rng, C.OBJECT_COLORS)
            pos = _on_path_position(scene) if on_path else _off_path_position(scene)
            test = scene.with_object(SceneObject("distractor", True, (color,), pos))
            obj = "distractor"
        else:
            color = _choice(rng, C.LAVA_COLORS)
            cell = C.DOORKEY_LAVA_TR_CELL if on_path else C.DOORKEY_LAVA_TI_CELL
            test = scene.with_object(SceneObject("lava", True, (color,), cell))
            obj = "lava"
        if on_path:
            # "ignore the <color> distractor": the reward names the
            # distractor, making both its presence and color task-relevant.
            reward = RewardSpec(
                domain=domain,
                tr_concepts=frozenset({(obj, "presence"), (obj, "color")}),
            )
        else:
            reward = RewardSpec(domain=domain)
        shifted = (obj, "presence")
    else:  # Other: same concepts, moved goal; always TR, no shifted concept
        goal = scene.object("goal")
        new_pos = (
            C.NAV2D_OTHER_GOAL if domain == "nav2d" else C.DOORKEY_OTHER_GOAL_CELL
        )
        test = scene.with_object(SceneObject("goal", True, goal.values, new_pos))
        reward = RewardSpec(domain=domain)
        shifted = None
    validate_scene(test)
    task = TaskSpec(
        domain=domain,
        train_scene=scene,
        test_scene=test,
        shift_type=shift,
        shifted=shifted,
        reward=reward,
        seed=seed,
    )
    validate_task(task)
    return task


def validate_task(task: TaskSpec) -> None:
    """Shift well-formedness: the scene delta matches the declared type."""
    cv_tr = abstract(task.train_scene)
    cv_te = abstract(task.test_scene)
    diff_blocks = []
    for i, spec in enumerate(cv_tr.schema.objects):
        for j, c in enumerate(spec.concepts):
            a = (cv_tr.presence[i], cv_tr.values[i][j])
            b = (cv_te.presence[i], cv_te.values[i][j])
            if a != b:
                diff_blocks.append((spec.name, c.name, cv_tr.presence[i], cv_te.presence[i]))
    if task.shift_type in ("ConceptTI", "ConceptTR"):
        ok = (
            len(diff_blocks) == 1
            and diff_blocks[0][2]
            and diff_blocks[0][3]
            and (diff_blocks[0][0], diff_blocks[0][1]) == task.shifted
        )
    elif task.shift_type in ("DistractorTI", "DistractorTR"):
        ok = (
            len(diff_blocks) == 1
            and not diff_blocks[0][2]
            and diff_blocks[0][3]
            and task.shifted == (diff_blocks[0][0], "presence")
        )
    else:
        positions_differ = any(
            a.present
            and b.present
            and tuple(a.position) != tuple(b.position)
            for a, b in zip(task.train_scene.objects, task.test_scene.objects)
        )
        ok = not diff_blocks and positions_differ and task.shifted is None
    if not ok:
        raise ValueError(
            f"task delta inconsistent with shift {task.shift_type}: {diff_blocks}"
        )


def eval_scenes_for(task: TaskSpec, count: int = 10) -> list[SceneDescriptor]:
    """Evaluation scenes sampled from the user reward: geometry fixed,
    reward-irrelevant instantiations of the shifted concept resampled."""
    from ..concept import realize, target_variants

    rng = np.random.default_rng([task.seed, 0x6576])
    if task.shifted is None:
        return [task.test_scene] * count
    variants = target_variants(task.test_scene, task.shifted)
    # Drop variants the reward forbids (only bites for TR rewards).
    keep = []
    for cv in variants:
        color = cv.instantiation("goal", "color") if cv.is_present("goal") else None
        if not cv.is_present("goal"):
            continue
        if task.reward.goal_satisfies(color):
            keep.append(cv)
    scenes = []
    for _ in range(count):
        cv = keep[int(rng.integers(len(keep)))]
        scenes.append(realize(cv, task.test_scene))
    return scenes
