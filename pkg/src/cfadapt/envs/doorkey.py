"""DoorKey gridworld: 9x9 grid, wall column with a locked door, 6 actions."""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .. import constants as C
from ..scenes import SceneDescriptor, validate_scene
from .trajectory import DOORKEY_ACTIONS

UP, DOWN, LEFT, RIGHT, PICKUP, USE = range(6)

_MOVES = {UP: (0, -1), DOWN: (0, 1), LEFT: (-1, 0), RIGHT: (1, 0)}


@dataclass(frozen=True)
class DoorKeyState:
    scene: SceneDescriptor
    agent_pos: tuple[int, int]
    key_held: bool
    door_open: bool
    t: int


def reset(scene: SceneDescriptor) -> DoorKeyState:
    validate_scene(scene)
    return DoorKeyState(
        scene=scene,
        agent_pos=tuple(scene.agent_pos),
        key_held=scene.key_held,
        door_open=scene.door_open,
        t=0,
    )


def _is_wall(state: DoorKeyState, cell: tuple[int, int]) -> bool:
    x, y = cell
    if not (0 <= x < C.DOORKEY_GRID and 0 <= y < C.DOORKEY_GRID):
        return True
    if x == C.DOORKEY_WALL_X:
        door = state.scene.object("door")
        if door.present and tuple(door.position) == (x, y):
            return not state.door_open
        return True
    return False


def _blocked(state: DoorKeyState, cell: tuple[int, int]) -> bool:
    if _is_wall(state, cell):
        return True
    lava = state.scene.object("lava")
    if lava.present and tuple(lava.position) == tuple(cell):
        return True
    key = state.scene.object("key")
    if key.present and not state.key_held and tuple(key.position) == tuple(cell):
        return True
    return False


def _adjacent(a: tuple[int, int], b: tuple) -> bool:
    return abs(a[0] - b[0]) + abs(a[1] - b[1]) == 1


def step(state: DoorKeyState, action: int) -> DoorKeyState:
    action = int(action)
    if not 0 <= action < len(DOORKEY_ACTIONS):
        raise ValueError(f"doorkey action {action} out of range")
    nxt = replace(state, t=state.t + 1)
    if action in _MOVES:
        dx, dy = _MOVES[action]
        cell = (state.agent_pos[0] + dx, state.agent_pos[1] + dy)
        if not _blocked(state, cell):
            nxt = replace(nxt, agent_pos=cell)
    elif action == PICKUP:
        key = state.scene.object("key")
        if key.present and not state.key_held and _adjacent(state.agent_pos, key.position):
            nxt = replace(nxt, key_held=True)
    else:  # USE
        door = state.scene.object("door")
        if (
            door.present
            and not state.door_open
            and state.key_held
            and _adjacent(state.agent_pos, door.position)
        ):
            nxt = replace(nxt, door_open=True)
    return nxt


def _cell_px(cell: tuple[int, int]) -> tuple[slice, slice]:
    x, y = cell
    s = C.DOORKEY_CELL_PX
    return slice(y * s, (y + 1) * s), slice(x * s, (x + 1) * s)


def render(state: DoorKeyState) -> np.ndarray:
    img = np.empty((C.IMAGE_SIZE, C.IMAGE_SIZE, 3), dtype=np.uint8)
    img[:] = C.PALETTE["background"]
    door = state.scene.object("door")
    for y in range(C.DOORKEY_GRID):
        cell = (C.DOORKEY_WALL_X, y)
        if door.present and tuple(door.position) == cell:
            continue
        ys, xs = _cell_px(cell)
        img[ys, xs] = C.PALETTE["grey"]
    if door.present:
        ys, xs = _cell_px(door.position)
        img[ys, xs] = C.PALETTE[door.values[0]]
        if state.door_open:
            # Open door keeps a colored frame with a floor-colored interior.
            img[ys.start + 1 : ys.stop - 1, xs.start + 1 : xs.stop - 1] = C.PALETTE[
                "background"
            ]
    key = state.scene.object("key")
    if key.present and not state.key_held:
        ys, xs = _cell_px(key.position)
        # Keys render as a 2x2 block centered in the cell.
        img[ys.start + 1 : ys.stop - 1, xs.start + 1 : xs.stop - 1] = C.PALETTE[
            key.values[0]
        ]
    goal = state.scene.object("goal")
    if goal.present:
        ys, xs = _cell_px(goal.position)
        img[ys, xs] = C.PALETTE[goal.values[0]]
    lava = state.scene.object("lava")
    if lava.present:
        ys, xs = _cell_px(lava.position)
        img[ys, xs] = C.PALETTE[lava.values[0]]
    ys, xs = _cell_px(state.agent_pos)
    img[ys, xs] = C.PALETTE["white"]
    return img.astype(np.float64) / 255.0


def cell_mask(cell: tuple[int, int]) -> np.ndarray:
    mask = np.zeros((C.IMAGE_SIZE, C.IMAGE_SIZE), dtype=bool)
    ys, xs = _cell_px(cell)
    mask[ys, xs] = True
    return mask
