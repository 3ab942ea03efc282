"""Geometric constants and small vector helpers for the tabletop world.

All lengths are in meters. The workspace is a box over the table plane
(z = 0 is the table surface). These numbers are tuned together: spawn
separation > close threshold > block width > grasp/stack tolerances, and
the gripper move step divides the distances between the home pose and
every interesting target region.
"""

from __future__ import annotations

import math

Vec3 = tuple[float, float, float]

WORKSPACE_MIN: Vec3 = (0.0, 0.0, 0.0)
WORKSPACE_MAX: Vec3 = (0.6, 0.6, 0.3)

MOVE_DELTA = 0.02
BLOCK_WIDTH = 0.05
BLOCK_HALF = BLOCK_WIDTH / 2.0
GRASP_TOL = 0.03
STACK_TOL = 0.03
CLOSE_THRESHOLD = 0.08

# Separation enforced when a released block would overlap one already on
# the table; slightly above BLOCK_WIDTH so the strict overlap check never
# flaps on float equality.
MIN_SEPARATION = 0.052

GRIPPER_HOME: Vec3 = (0.30, 0.30, 0.10)
CARRY_Z = 0.10

# Blocks spawn inside this central box; keeps random exploration near the
# action and away from the bin.
SPAWN_MIN = 0.14
SPAWN_MAX = 0.44
FAR_MIN_DIST = 0.13
CLOSE_SPAWN_DIST = 0.065

# Bin: an axis-aligned region in the north-east corner with fixed drop
# slots so settled blocks never overlap.
BIN_RECT: tuple[float, float, float, float] = (0.46, 0.46, 0.60, 0.60)  # x0, y0, x1, y1
BIN_SLOTS: tuple[tuple[float, float], ...] = (
    (0.49, 0.49),
    (0.55, 0.49),
    (0.49, 0.55),
    (0.55, 0.55),
)
BIN_CENTER: tuple[float, float] = (0.52, 0.52)


def dist_xy(a: Vec3 | tuple[float, float], b: Vec3 | tuple[float, float]) -> float:
    return math.hypot(a[0] - b[0], a[1] - b[1])


def dist3(a: Vec3, b: Vec3) -> float:
    return math.sqrt((a[0] - b[0]) ** 2 + (a[1] - b[1]) ** 2 + (a[2] - b[2]) ** 2)


def clip(v: float, lo: float, hi: float) -> float:
    return lo if v < lo else hi if v > hi else v


def in_bin_region(x: float, y: float) -> bool:
    x0, y0, x1, y1 = BIN_RECT
    return x0 <= x <= x1 and y0 <= y <= y1


def snap_to_grid(value: float, origin: float) -> float:
    """Nearest point reachable from `origin` by MOVE_DELTA increments."""
    return origin + round((value - origin) / MOVE_DELTA) * MOVE_DELTA
