"""Deterministic simulators for the two domains, plus rollout and success."""

from __future__ import annotations

from typing import Callable

import numpy as np

from .. import constants as C
from ..rewards import RewardSpec
from ..scenes import SceneDescriptor, SceneError
from . import doorkey, nav2d
from .trajectory import DOORKEY_ACTIONS, Trajectory, horizon_for


class MalformedActionError(ValueError):
    """A policy produced an action the domain cannot interpret."""


def reset(scene: SceneDescriptor):
    if scene.domain == "nav2d":
        state = nav2d.reset(scene)
        return state, nav2d.render(state)
    if scene.domain == "doorkey":
        state = doorkey.reset(scene)
        return state, doorkey.render(state)
    raise SceneError(f"unknown domain {scene.domain!r}")


def step(state, action):
    if isinstance(state, nav2d.Nav2dState):
        nxt = nav2d.step(state, _check_nav2d_action(action))
        return nxt, nav2d.render(nxt)
    nxt = doorkey.step(state, _check_doorkey_action(action))
    return nxt, doorkey.render(nxt)


def render(state) -> np.ndarray:
    if isinstance(state, nav2d.Nav2dState):
        return nav2d.render(state)
    return doorkey.render(state)


def _check_nav2d_action(action) -> tuple[float, float]:
    try:
        dx, dy = float(action[0]), float(action[1])
    except (TypeError, ValueError, IndexError) as e:
        raise MalformedActionError(f"bad nav2d action {action!r}") from e
    if not (np.isfinite(dx) and np.isfinite(dy)):
        raise MalformedActionError(f"non-finite nav2d action {action!r}")
    return nav2d.clip_action((dx, dy))


def _check_doorkey_action(action) -> int:
    try:
        a = int(action)
    except (TypeError, ValueError) as e:
        raise MalformedActionError(f"bad doorkey action {action!r}") from e
    if not 0 <= a < len(DOORKEY_ACTIONS):
        raise MalformedActionError(f"doorkey action {a} out of range")
    return a


def rollout(
    policy: Callable[[np.ndarray], object],
    scene: SceneDescriptor,
    provenance: str = "rollout",
) -> Trajectory:
    """Run a black-box policy for the full domain horizon."""
    state, obs = reset(scene)
    states, observations, actions = [state], [obs], []
    for _ in range(horizon_for(scene.domain)):
        raw = policy(obs)
        if scene.domain == "nav2d":
            action = _check_nav2d_action(raw)
        else:
            action = _check_doorkey_action(raw)
        state, obs = step(state, action)
        states.append(state)
        observations.append(obs)
        actions.append(action)
    return Trajectory(
        provenance=provenance,
        scene=scene,
        states=tuple(states),
        observations=tuple(observations),
        actions=tuple(actions),
    )


def replay(
    scene: SceneDescriptor, actions, provenance: str = "human_demo"
) -> Trajectory:
    """Regenerate states and observations by replaying a fixed action list."""
    T = horizon_for(scene.domain)
    if len(actions) != T:
        raise ValueError(f"expected {T} actions, got {len(actions)}")
    state, obs = reset(scene)
    states, observations, checked = [state], [obs], []
    for raw in actions:
        if scene.domain == "nav2d":
            action = _check_nav2d_action(raw)
        else:
            action = _check_doorkey_action(raw)
        state, obs = step(state, action)
        states.append(state)
        observations.append(obs)
        checked.append(action)
    return Trajectory(
        provenance=provenance,
        scene=scene,
        states=tuple(states),
        observations=tuple(observations),
        actions=tuple(checked),
    )


def success(traj: Trajectory, reward: RewardSpec) -> bool:
    """Evaluate the reward's success predicate against a trajectory."""
    if traj.domain != reward.domain:
        raise ValueError(f"trajectory domain {traj.domain!r} != reward {reward.domain!r}")
    goal = traj.scene.object("goal")
    if not goal.present or not reward.goal_satisfies(goal.values[0]):
        return False
    if traj.domain == "nav2d":
        final = traj.states[-1]
        return nav2d.reached(final.agent_pos, goal.position, reward.goal_radius)
    return any(tuple(s.agent_pos) == tuple(goal.position) for s in traj.states)
