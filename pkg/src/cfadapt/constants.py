"""Shared rendering and geometry constants.

Every magic number about the visual appearance of the two domains lives
here: the color palette, object footprint sizes, and the fixed world
geometry used by the task generators.
"""

from __future__ import annotations

# 8-bit RGB palette. Observations are produced by dividing by 255.
PALETTE: dict[str, tuple[int, int, int]] = {
    "red": (220, 40, 40),
    "green": (40, 200, 60),
    "blue": (50, 90, 220),
    "yellow": (230, 220, 50),
    "orange": (240, 150, 40),
    "pink": (240, 120, 190),
    "white": (255, 255, 255),
    "grey": (120, 120, 120),
    "background": (20, 20, 25),
}

OBJECT_COLORS = ("red", "green", "blue", "yellow")
LAVA_COLORS = ("orange", "pink")

IMAGE_SIZE = 36  # observations are IMAGE_SIZE x IMAGE_SIZE x 3

# --- nav2d -----------------------------------------------------------------
# Unit square, x to the right, y downward (so "top left" is (0.1, 0.1)).
NAV2D_HORIZON = 20
NAV2D_MAX_STEP = 0.1          # per-component action bound
NAV2D_GOAL_RADIUS = 0.05
NAV2D_AGENT_START = (0.1, 0.1)
NAV2D_TRAIN_GOAL = (0.9, 0.9)       # bottom right
NAV2D_OTHER_GOAL = (0.1, 0.9)       # bottom left, used by the "other" shift
NAV2D_GOAL_FOOTPRINT = 5      # side length in pixels
NAV2D_DISTRACTOR_FOOTPRINT = 5
NAV2D_AGENT_FOOTPRINT = 3
# Expert avoidance geometry: detour if a distractor sits within this
# distance of the straight agent->goal segment.
NAV2D_BLOCK_CLEARANCE = 0.08
NAV2D_DETOUR_OFFSET = 0.18
# On-path / off-path distractor placement for DistractorTR / DistractorTI.
NAV2D_ON_PATH_T = 0.55        # fraction along the agent->goal segment
NAV2D_OFF_PATH_OFFSET = 0.25  # perpendicular offset for the TI placement
# Candidate cells for spawned distractors, scanned in order; the first
# position clear of existing footprints wins.
NAV2D_SPAWN_CANDIDATES = ((0.5, 0.5), (0.3, 0.7), (0.7, 0.3), (0.5, 0.2))

# --- doorkey ---------------------------------------------------------------
DOORKEY_HORIZON = 35
DOORKEY_GRID = 9              # 9x9 cells at 4 px/cell = 36 px
DOORKEY_CELL_PX = 4
DOORKEY_WALL_X = 4            # vertical wall column
DOORKEY_DOOR_CELL = (4, 4)
DOORKEY_KEY_CELL = (2, 6)
DOORKEY_GOAL_CELL = (7, 4)
DOORKEY_AGENT_START = (1, 1)
DOORKEY_OTHER_GOAL_CELL = (7, 7)   # "other" shift moves the goal here
DOORKEY_LAVA_TR_CELL = (6, 4)      # on the door->goal corridor
DOORKEY_LAVA_TI_CELL = (7, 1)      # out of the way
# Spawn candidates for lava introduced by a concept edit.
DOORKEY_SPAWN_CANDIDATES = ((6, 4), (6, 2), (6, 6), (2, 3))
