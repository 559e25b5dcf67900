"""Continuous 2D navigation: unit square, additive dynamics, 36x36 renders."""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .. import constants as C
from ..scenes import SceneDescriptor, validate_scene


@dataclass(frozen=True)
class Nav2dState:
    scene: SceneDescriptor
    agent_pos: tuple[float, float]
    t: int


def reset(scene: SceneDescriptor) -> Nav2dState:
    validate_scene(scene)
    return Nav2dState(scene=scene, agent_pos=tuple(scene.agent_pos), t=0)


def clip_action(action) -> tuple[float, float]:
    dx, dy = float(action[0]), float(action[1])
    m = C.NAV2D_MAX_STEP
    return (min(max(dx, -m), m), min(max(dy, -m), m))


def step(state: Nav2dState, action) -> Nav2dState:
    dx, dy = clip_action(action)
    x = min(max(state.agent_pos[0] + dx, 0.0), 1.0)
    y = min(max(state.agent_pos[1] + dy, 0.0), 1.0)
    return replace(state, agent_pos=(x, y), t=state.t + 1)


def _to_px(coord: float) -> int:
    return int(round(coord * (C.IMAGE_SIZE - 1)))


def _fill(img: np.ndarray, pos: tuple[float, float], size: int, color: str) -> None:
    cx, cy = _to_px(pos[0]), _to_px(pos[1])
    half = size // 2
    x0, x1 = max(cx - half, 0), min(cx + half + 1, C.IMAGE_SIZE)
    y0, y1 = max(cy - half, 0), min(cy + half + 1, C.IMAGE_SIZE)
    img[y0:y1, x0:x1] = C.PALETTE[color]


def render(state: Nav2dState) -> np.ndarray:
    img = np.empty((C.IMAGE_SIZE, C.IMAGE_SIZE, 3), dtype=np.uint8)
    img[:] = C.PALETTE["background"]
    for obj in state.scene.objects:
        if obj.present:
            size = (
                C.NAV2D_GOAL_FOOTPRINT
                if obj.name == "goal"
                else C.NAV2D_DISTRACTOR_FOOTPRINT
            )
            _fill(img, obj.position, size, obj.values[0])
    _fill(img, state.agent_pos, C.NAV2D_AGENT_FOOTPRINT, "white")
    return img.astype(np.float64) / 255.0


def footprint_mask(pos: tuple[float, float], size: int) -> np.ndarray:
    """Boolean pixel mask of the footprint drawn at pos."""
    mask = np.zeros((C.IMAGE_SIZE, C.IMAGE_SIZE), dtype=bool)
    cx, cy = _to_px(pos[0]), _to_px(pos[1])
    half = size // 2
    x0, x1 = max(cx - half, 0), min(cx + half + 1, C.IMAGE_SIZE)
    y0, y1 = max(cy - half, 0), min(cy + half + 1, C.IMAGE_SIZE)
    mask[y0:y1, x0:x1] = True
    return mask


def reached(agent_pos: tuple[float, float], goal_pos: tuple, radius: float) -> bool:
    return math.hypot(agent_pos[0] - goal_pos[0], agent_pos[1] - goal_pos[1]) <= radius
