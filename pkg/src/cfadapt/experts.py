"""Scripted expert demonstrators for both domains."""

from __future__ import annotations

import math
from collections import deque

from . import constants as C
from . import envs
from .envs import doorkey as dk
from .envs.trajectory import Trajectory, horizon_for
from .rewards import RewardSpec
from .scenes import SceneDescriptor


class ExpertError(RuntimeError):
    """The scene contains no goal satisfying the reward (task generator bug)."""


def expert_demo(scene: SceneDescriptor, reward: RewardSpec) -> Trajectory:
    if scene.domain == "nav2d":
        actions = nav2d_plan(scene, reward)
    else:
        actions = doorkey_plan(scene, reward)
    return envs.replay(scene, actions, provenance="human_demo")


# --- nav2d: straight-line pursuit with a perpendicular detour ---------------

def _seg_distance(p, a, b):
    """Distance from point p to segment a-b, and the closest segment point."""
    ax, ay = a
    bx, by = b
    px, py = p
    vx, vy = bx - ax, by - ay
    L2 = vx * vx + vy * vy
    if L2 == 0:
        return math.hypot(px - ax, py - ay), (ax, ay)
    t = max(0.0, min(1.0, ((px - ax) * vx + (py - ay) * vy) / L2))
    cx, cy = ax + t * vx, ay + t * vy
    return math.hypot(px - cx, py - cy), (cx, cy)


def nav2d_plan(scene: SceneDescriptor, reward: RewardSpec) -> list[tuple[float, float]]:
    goal = scene.object("goal")
    if not goal.present or not reward.goal_satisfies(goal.values[0]):
        raise ExpertError("no reward-satisfying goal in scene")
    start = tuple(scene.agent_pos)
    waypoints = [tuple(goal.position)]
    distractor = scene.object("distractor")
    if distractor.present:
        d, closest = _seg_distance(distractor.position, start, goal.position)
        if d < C.NAV2D_BLOCK_CLEARANCE:
            # Offset perpendicular to the blocked segment, on the side away
            # from the distractor (left of travel when it sits dead center).
            vx = goal.position[0] - start[0]
            vy = goal.position[1] - start[1]
            norm = math.hypot(vx, vy) or 1.0
            px, py = -vy / norm, vx / norm
            side = (distractor.position[0] - closest[0]) * px + (
                distractor.position[1] - closest[1]
            ) * py
            sign = -1.0 if side >= 0 else 1.0
            wx = min(max(closest[0] + sign * C.NAV2D_DETOUR_OFFSET * px, 0.0), 1.0)
            wy = min(max(closest[1] + sign * C.NAV2D_DETOUR_OFFSET * py, 0.0), 1.0)
            waypoints.insert(0, (wx, wy))
    actions: list[tuple[float, float]] = []
    pos = start
    wp = 0
    for _ in range(horizon_for("nav2d")):
        while wp < len(waypoints) - 1 and math.hypot(
            waypoints[wp][0] - pos[0], waypoints[wp][1] - pos[1]
        ) < 1e-9:
            wp += 1
        tx, ty = waypoints[wp]
        dx, dy = tx - pos[0], ty - pos[1]
        dist = math.hypot(dx, dy)
        if dist < 1e-12:
            actions.append((0.0, 0.0))
            continue
        scale = min(C.NAV2D_MAX_STEP, dist) / dist
        a = (dx * scale, dy * scale)
        actions.append(a)
        pos = (pos[0] + a[0], pos[1] + a[1])
    return actions


# --- doorkey: breadth-first shortest action plan -----------------------------

# Padding action once the plan is done; `use` is a no-op away from a closed
# door.
PAD_ACTION = dk.USE


def doorkey_plan(scene: SceneDescriptor, reward: RewardSpec) -> list[int]:
    goal = scene.object("goal")
    if not goal.present or not reward.goal_satisfies(goal.values[0]):
        raise ExpertError("no reward-satisfying goal in scene")
    target = tuple(goal.position)
    start = dk.reset(scene)
    key0 = (start.agent_pos, start.key_held, start.door_open)
    frontier = deque([(start, [])])
    seen = {key0}
    plan = None
    while frontier:
        state, actions = frontier.popleft()
        if tuple(state.agent_pos) == target:
            plan = actions
            break
        if len(actions) >= horizon_for("doorkey"):
            continue
        for a in range(6):
            nxt = dk.step(state, a)
            key = (nxt.agent_pos, nxt.key_held, nxt.door_open)
            if key not in seen:
                seen.add(key)
                frontier.append((nxt, actions + [a]))
    if plan is None:
        raise ExpertError("goal unreachable within the horizon")
    T = horizon_for("doorkey")
    return plan + [PAD_ACTION] * (T - len(plan))
