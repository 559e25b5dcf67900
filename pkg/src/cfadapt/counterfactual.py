"""Minimum-edit counterfactual search over the concept space.

Candidates are enumerated in a fixed order (cardinality ascending, presence
edits first), realized into scenes, rolled out through the black-box
policy, and tested against the user demonstration with a per-step action
distance constraint. The first satisfying candidate is the result; a
heuristic-free exhaustive twin serves as the testing reference.
"""

from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Optional

from . import envs
from .concept import ConceptEdit, abstract, edit_distance, enumerate_edits, realize_edit
from .envs.trajectory import Trajectory
from .scenes import ConceptSchema, SceneDescriptor

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class SearchConfig:
    # Per-step L1 tolerance for continuous actions; half the max
    # per-component step by default. Discrete actions must match exactly.
    action_tolerance: float = 0.05
    max_edits: int = 2
    presence_first: bool = True
    parallelism: int = 1

    def __post_init__(self):
        if self.action_tolerance <= 0:
            raise ValueError("action tolerance must be > 0")
        if self.max_edits < 1:
            raise ValueError("max_edits must be >= 1")
        if self.parallelism < 1:
            raise ValueError("parallelism must be >= 1")


@dataclass(frozen=True, eq=False)
class CounterfactualResult:
    status: str  # "found" | "none"
    edit: Optional[ConceptEdit] = None
    scene: Optional[SceneDescriptor] = None
    trajectory: Optional[Trajectory] = None
    edit_count: int = 0          # directives in the edit
    block_distance: int = 0      # differing (object, concept) blocks
    candidates_evaluated: int = 0
    skipped: tuple = ()

    @property
    def found(self) -> bool:
        return self.status == "found"

    def to_json(self) -> dict:
        return {
            "status": self.status,
            "edit": self.edit.to_json() if self.edit else None,
            "scene": self.scene.to_json() if self.scene else None,
            "edit_count": self.edit_count,
            "block_distance": self.block_distance,
            "candidates_evaluated": self.candidates_evaluated,
            "trajectory_digest": self.trajectory.digest() if self.trajectory else None,
        }


def action_distance(a_cf, a_h, domain: str) -> list[float]:
    """Per-step distances: L1 over components (continuous) or 0/1 (discrete)."""
    if len(a_cf) != len(a_h):
        raise ValueError(f"length mismatch: {len(a_cf)} vs {len(a_h)}")
    if domain == "nav2d":
        return [
            abs(c[0] - h[0]) + abs(c[1] - h[1]) for c, h in zip(a_cf, a_h)
        ]
    return [0.0 if c == h else 1.0 for c, h in zip(a_cf, a_h)]


def matches(traj_cf: Trajectory, traj_h: Trajectory, cfg: SearchConfig) -> bool:
    """Every per-step distance strictly below tolerance (continuous) or an
    exact match at every step (discrete)."""
    if traj_cf.domain != traj_h.domain:
        raise ValueError("domain mismatch")
    dists = action_distance(traj_cf.actions, traj_h.actions, traj_cf.domain)
    if traj_cf.domain == "nav2d":
        return all(d < cfg.action_tolerance for d in dists)
    return all(d == 0.0 for d in dists)


def _evaluate(predict_fn, test_scene, demo, cfg, edit):
    """Realize + rollout + match for one candidate; exceptions bubble up."""
    scene = realize_edit(edit, test_scene)
    traj = envs.rollout(predict_fn, scene, provenance="counterfactual")
    return scene, traj, matches(traj, demo, cfg)


def _search(
    predict_fn: Callable,
    test_scene: SceneDescriptor,
    demo: Trajectory,
    schema: Optional[ConceptSchema],
    cfg: SearchConfig,
    presence_first: bool,
) -> CounterfactualResult:
    if demo.scene != test_scene:
        raise ValueError("demo must start at the test scene's initial state")
    base_cv = abstract(test_scene, schema)
    candidates = enumerate_edits(
        base_cv, schema, max_edits=cfg.max_edits, presence_first=presence_first
    )
    evaluated = 0
    skipped: list[str] = []

    def run(edit):
        return _evaluate(predict_fn, test_scene, demo, cfg, edit)

    def finish(edit, scene, traj):
        from .concept import apply_edit

        return CounterfactualResult(
            status="found",
            edit=edit,
            scene=scene,
            trajectory=traj,
            edit_count=len(edit),
            block_distance=edit_distance(base_cv, apply_edit(base_cv, edit)),
            candidates_evaluated=evaluated,
            skipped=tuple(skipped),
        )

    if cfg.parallelism == 1:
        for edit in candidates:
            evaluated += 1
            try:
                scene, traj, ok = run(edit)
            except Exception as e:  # realize/rollout failures skip the candidate
                log.warning("candidate %s skipped: %s", edit, e)
                skipped.append(f"{edit.to_json()}: {e}")
                continue
            if ok:
                return finish(edit, scene, traj)
    else:
        # Chunked evaluation: selection is by enumeration index, never by
        # completion order, so any width yields the sequential result.
        with ThreadPoolExecutor(max_workers=cfg.parallelism) as pool:
            for start in range(0, len(candidates), cfg.parallelism):
                chunk = candidates[start : start + cfg.parallelism]
                futures = [pool.submit(run, e) for e in chunk]
                hit = None
                for edit, fut in zip(chunk, futures):
                    evaluated += 1
                    try:
                        scene, traj, ok = fut.result()
                    except Exception as e:
                        log.warning("candidate %s skipped: %s", edit, e)
                        skipped.append(f"{edit.to_json()}: {e}")
                        continue
                    if ok and hit is None:
                        hit = (edit, scene, traj)
                if hit is not None:
                    return finish(*hit)
    return CounterfactualResult(
        status="none", candidates_evaluated=evaluated, skipped=tuple(skipped)
    )


def search_min_edit(
    predict_fn: Callable,
    test_scene: SceneDescriptor,
    demo: Trajectory,
    schema: Optional[ConceptSchema] = None,
    cfg: SearchConfig = SearchConfig(),
) -> CounterfactualResult:
    """First satisfying candidate in heuristic order (minimum cardinality,
    presence edits prioritized when configured)."""
    return _search(predict_fn, test_scene, demo, schema, cfg, cfg.presence_first)


def brute_force_oracle(
    predict_fn: Callable,
    test_scene: SceneDescriptor,
    demo: Trajectory,
    schema: Optional[ConceptSchema] = None,
    cfg: SearchConfig = SearchConfig(),
) -> CounterfactualResult:
    """Heuristic-free exhaustive reference: evaluates every candidate up to
    max_edits in the canonical schema order and returns the minimum-
    cardinality satisfier under that total order."""
    if demo.scene != test_scene:
        raise ValueError("demo must start at the test scene's initial state")
    base_cv = abstract(test_scene, schema)
    candidates = enumerate_edits(
        base_cv, schema, max_edits=cfg.max_edits, presence_first=False
    )
    best = None
    evaluated = 0
    skipped: list[str] = []
    for edit in candidates:
        evaluated += 1
        try:
            scene, traj, ok = _evaluate(predict_fn, test_scene, demo, cfg, edit)
        except Exception as e:
            skipped.append(f"{edit.to_json()}: {e}")
            continue
        if ok and (best is None or len(edit) < len(best[0])):
            best = (edit, scene, traj)
    if best is None:
        return CounterfactualResult(
            status="none", candidates_evaluated=evaluated, skipped=tuple(skipped)
        )
    from .concept import apply_edit

    edit, scene, traj = best
    return CounterfactualResult(
        status="found",
        edit=edit,
        scene=scene,
        trajectory=traj,
        edit_count=len(edit),
        block_distance=edit_distance(base_cv, apply_edit(base_cv, edit)),
        candidates_evaluated=evaluated,
        skipped=tuple(skipped),
    )
