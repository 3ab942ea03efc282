"""Deterministic kinematic tabletop simulator.

One gripper, up to four colored blocks, optionally a bin region. The
action set is eight discrete primitives: six axis moves of a fixed step
and open/close of the grip. Dynamics are purely kinematic: a closed grip
over a block grasps it, an opened grip releases it and the block settles
by fixed priority rules (bin slot, then stack on a nearby block, then the
table with overlap displacement). There is no inertia and no noise, so a
state is reproduced bit for bit by replaying the same actions from the
same seed.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, replace

import numpy as np

from .errors import ConfigurationError, UnknownActionError
from .geometry import (
    BIN_SLOTS,
    BLOCK_HALF,
    BLOCK_WIDTH,
    CLOSE_SPAWN_DIST,
    FAR_MIN_DIST,
    GRASP_TOL,
    GRIPPER_HOME,
    MIN_SEPARATION,
    MOVE_DELTA,
    SPAWN_MAX,
    SPAWN_MIN,
    STACK_TOL,
    WORKSPACE_MAX,
    WORKSPACE_MIN,
    Vec3,
    clip,
    dist_xy,
    in_bin_region,
)
from .profiles import EnvironmentProfile, profile_by_name


class PrimitiveAction(enum.IntEnum):
    MOVE_X_POS = 0
    MOVE_X_NEG = 1
    MOVE_Y_POS = 2
    MOVE_Y_NEG = 3
    MOVE_Z_POS = 4
    MOVE_Z_NEG = 5
    GRIP_CLOSE = 6
    GRIP_OPEN = 7


N_ACTIONS = len(PrimitiveAction)

_MOVE_VECTORS: dict[PrimitiveAction, Vec3] = {
    PrimitiveAction.MOVE_X_POS: (MOVE_DELTA, 0.0, 0.0),
    PrimitiveAction.MOVE_X_NEG: (-MOVE_DELTA, 0.0, 0.0),
    PrimitiveAction.MOVE_Y_POS: (0.0, MOVE_DELTA, 0.0),
    PrimitiveAction.MOVE_Y_NEG: (0.0, -MOVE_DELTA, 0.0),
    PrimitiveAction.MOVE_Z_POS: (0.0, 0.0, MOVE_DELTA),
    PrimitiveAction.MOVE_Z_NEG: (0.0, 0.0, -MOVE_DELTA),
}


class SceneInitializer(str, enum.Enum):
    ALL_FAR = "all_far"
    ALL_CLOSE = "all_close"
    STACKED_RANDOM_ORDER = "stacked_random_order"
    SCATTERED_WITH_BIN = "scattered_with_bin"


@dataclass(frozen=True)
class BlockState:
    name: str
    pos: Vec3
    stacked_on: str | None = None
    in_bin: bool = False

    @property
    def top(self) -> float:
        return self.pos[2] + BLOCK_HALF


@dataclass(frozen=True)
class WorldState:
    tick: int
    gripper: Vec3
    grip_closed: bool
    held: str | None
    blocks: tuple[BlockState, ...]
    has_bin: bool = False

    def block(self, name: str) -> BlockState:
        for b in self.blocks:
            if b.name == name:
                return b
        raise KeyError(name)

    def covered(self, name: str) -> bool:
        return any(b.stacked_on == name for b in self.blocks)

    def block_names(self) -> tuple[str, ...]:
        return tuple(b.name for b in self.blocks)


@dataclass(frozen=True)
class SceneSpec:
    """Seeded recipe for an initial world state."""

    profile_name: str
    initializer: SceneInitializer
    seed: int

    def profile(self) -> EnvironmentProfile:
        return profile_by_name(self.profile_name)

    def build(self) -> WorldState:
        return reset(self.profile(), self.initializer, self.seed)

    def to_dict(self) -> dict:
        return {
            "profile": self.profile_name,
            "initializer": self.initializer.value,
            "seed": self.seed,
        }

    @staticmethod
    def from_dict(d: dict) -> "SceneSpec":
        return SceneSpec(d["profile"], SceneInitializer(d["initializer"]), int(d["seed"]))


def _sample_spread(rng: np.random.Generator, n: int, min_dist: float) -> list[tuple[float, float]]:
    # restart-on-failure keeps the result a pure function of the rng stream
    for _ in range(1000):
        pts: list[tuple[float, float]] = []
        ok = True
        for _ in range(n):
            placed = False
            for _ in range(200):
                x = float(rng.uniform(SPAWN_MIN, SPAWN_MAX))
                y = float(rng.uniform(SPAWN_MIN, SPAWN_MAX))
                if all(dist_xy((x, y), p) >= min_dist for p in pts):
                    pts.append((x, y))
                    placed = True
                    break
            if not placed:
                ok = False
                break
        if ok:
            return pts
    raise ConfigurationError(f"could not scatter {n} blocks at min_dist={min_dist}")


_RING_RADIUS = {1: 0.0, 2: 0.0325, 3: 0.0347, 4: 0.0375}


def reset(
    profile: EnvironmentProfile,
    initializer: SceneInitializer,
    seed: int,
) -> WorldState:
    rng = np.random.default_rng(seed)
    n = profile.n_objects
    blocks: list[BlockState]

    if initializer is SceneInitializer.ALL_FAR:
        pts = _sample_spread(rng, n, FAR_MIN_DIST)
        blocks = [
            BlockState(name, (x, y, BLOCK_HALF))
            for name, (x, y) in zip(profile.objects, pts)
        ]
    elif initializer is SceneInitializer.ALL_CLOSE:
        r = _RING_RADIUS[n]
        cx = float(rng.uniform(SPAWN_MIN + r, SPAWN_MAX - r))
        cy = float(rng.uniform(SPAWN_MIN + r, SPAWN_MAX - r))
        theta = float(rng.uniform(0.0, 2.0 * np.pi))
        blocks = []
        for i, name in enumerate(profile.objects):
            ang = theta + 2.0 * np.pi * i / max(n, 1)
            x = cx + r * float(np.cos(ang))
            y = cy + r * float(np.sin(ang))
            blocks.append(BlockState(name, (x, y, BLOCK_HALF)))
        if n > 1:
            span = max(
                dist_xy(a.pos, b.pos) for a in blocks for b in blocks if a.name != b.name
            )
            assert span <= CLOSE_SPAWN_DIST + 1e-9
    elif initializer is SceneInitializer.STACKED_RANDOM_ORDER:
        order = [profile.objects[i] for i in rng.permutation(n)]
        x = float(rng.uniform(SPAWN_MIN, SPAWN_MAX))
        y = float(rng.uniform(SPAWN_MIN, SPAWN_MAX))
        by_name: dict[str, BlockState] = {}
        for level, name in enumerate(order):
            below = order[level - 1] if level > 0 else None
            by_name[name] = BlockState(
                name, (x, y, BLOCK_HALF + level * BLOCK_WIDTH), stacked_on=below
            )
        blocks = [by_name[name] for name in profile.objects]
    elif initializer is SceneInitializer.SCATTERED_WITH_BIN:
        if not profile.has_bin:
            raise ConfigurationError(
                f"initializer {initializer.value} needs a bin, profile {profile.name} has none"
            )
        pts = _sample_spread(rng, n, FAR_MIN_DIST)
        blocks = [
            BlockState(name, (x, y, BLOCK_HALF))
            for name, (x, y) in zip(profile.objects, pts)
        ]
    else:
        raise ConfigurationError(f"unknown initializer: {initializer!r}")

    return WorldState(
        tick=0,
        gripper=GRIPPER_HOME,
        grip_closed=False,
        held=None,
        blocks=tuple(blocks),
        has_bin=profile.has_bin,
    )


def _clip_workspace(p: Vec3) -> Vec3:
    return (
        clip(p[0], WORKSPACE_MIN[0], WORKSPACE_MAX[0]),
        clip(p[1], WORKSPACE_MIN[1], WORKSPACE_MAX[1]),
        clip(p[2], WORKSPACE_MIN[2], WORKSPACE_MAX[2]),
    )


def _with_block(state: WorldState, updated: BlockState) -> tuple[BlockState, ...]:
    return tuple(updated if b.name == updated.name else b for b in state.blocks)


def _grasp_target(state: WorldState) -> BlockState | None:
    gx, gy, gz = state.gripper
    best: BlockState | None = None
    best_d = float("inf")
    for b in state.blocks:
        if state.covered(b.name):
            continue
        d = dist_xy((gx, gy), b.pos)
        if d <= GRASP_TOL and abs(gz - b.top) <= GRASP_TOL and d < best_d:
            best = b
            best_d = d
    return best


def _bin_slot(state: WorldState) -> tuple[float, float]:
    for sx, sy in BIN_SLOTS:
        taken = any(
            b.in_bin and dist_xy((sx, sy), b.pos) < BLOCK_WIDTH for b in state.blocks
        )
        if not taken:
            return sx, sy
    # one gripper, four slots, at most four blocks: cannot happen
    raise ConfigurationError("bin slots exhausted")


def _support_target(state: WorldState, held: str) -> BlockState | None:
    gx, gy, _ = state.gripper
    best: BlockState | None = None
    best_d = float("inf")
    for b in state.blocks:
        if b.name == held or b.in_bin or state.covered(b.name):
            continue
        d = dist_xy((gx, gy), b.pos)
        if d <= STACK_TOL and d < best_d:
            best = b
            best_d = d
    return best


def _table_conflict(
    state: WorldState, held: str, x: float, y: float
) -> BlockState | None:
    conflict: BlockState | None = None
    conflict_d = float("inf")
    for b in state.blocks:
        if b.name == held or b.in_bin or b.stacked_on is not None:
            continue
        d = dist_xy((x, y), b.pos)
        if d < MIN_SEPARATION and d < conflict_d:
            conflict = b
            conflict_d = d
    return conflict


def _settle_on_table(state: WorldState, held: str) -> Vec3:
    x, y = state.gripper[0], state.gripper[1]
    lo = WORKSPACE_MIN[0] + BLOCK_HALF
    hi = WORKSPACE_MAX[0] - BLOCK_HALF
    for _ in range(8):
        conflict = _table_conflict(state, held, x, y)
        if conflict is None:
            return (x, y, BLOCK_HALF)
        dx = x - conflict.pos[0]
        dy = y - conflict.pos[1]
        norm = (dx * dx + dy * dy) ** 0.5
        if norm < 1e-9:
            dx, dy, norm = 1.0, 0.0, 1.0
        # padded push so rounding never re-triggers the same conflict
        push = MIN_SEPARATION * 1.0001
        x = clip(conflict.pos[0] + dx / norm * push, lo, hi)
        y = clip(conflict.pos[1] + dy / norm * push, lo, hi)
    # pushes can chase each other near a wall; fall back to the nearest
    # clear point on a coarse grid, which always exists on this table
    gx, gy = state.gripper[0], state.gripper[1]
    pitch = 0.03
    candidates = []
    steps = int((hi - lo) / pitch) + 1
    for i in range(steps):
        for j in range(steps):
            cx, cy = lo + i * pitch, lo + j * pitch
            candidates.append((dist_xy((cx, cy), (gx, gy)), cx, cy))
    candidates.sort()
    for _, cx, cy in candidates:
        if _table_conflict(state, held, cx, cy) is None:
            return (cx, cy, BLOCK_HALF)
    raise ConfigurationError("no free table position")  # pragma: no cover


def step(state: WorldState, action: PrimitiveAction | int) -> WorldState:
    """Pure transition; the tick advances on every call, no-ops included."""
    try:
        action = PrimitiveAction(action)
    except ValueError:
        raise UnknownActionError(f"not a primitive action: {action!r}") from None
    tick = state.tick + 1

    if action in _MOVE_VECTORS:
        dx, dy, dz = _MOVE_VECTORS[action]
        g = _clip_workspace(
            (state.gripper[0] + dx, state.gripper[1] + dy, state.gripper[2] + dz)
        )
        blocks = state.blocks
        if state.held is not None:
            carried = replace(
                state.block(state.held), pos=(g[0], g[1], g[2] - BLOCK_HALF)
            )
            blocks = _with_block(state, carried)
        return replace(state, tick=tick, gripper=g, blocks=blocks)

    if action is PrimitiveAction.GRIP_CLOSE:
        if state.grip_closed:
            return replace(state, tick=tick)
        target = _grasp_target(state)
        if target is None:
            return replace(state, tick=tick, grip_closed=True)
        g = state.gripper
        grabbed = replace(
            target,
            pos=(g[0], g[1], g[2] - BLOCK_HALF),
            stacked_on=None,
            in_bin=False,
        )
        return replace(
            state,
            tick=tick,
            grip_closed=True,
            held=target.name,
            blocks=_with_block(state, grabbed),
        )

    if action is PrimitiveAction.GRIP_OPEN:
        if not state.grip_closed:
            return replace(state, tick=tick)
        if state.held is None:
            return replace(state, tick=tick, grip_closed=False)
        held = state.held
        gx, gy = state.gripper[0], state.gripper[1]
        if state.has_bin and in_bin_region(gx, gy):
            sx, sy = _bin_slot(state)
            landed = replace(
                state.block(held), pos=(sx, sy, BLOCK_HALF), stacked_on=None, in_bin=True
            )
        else:
            support = _support_target(state, held)
            if support is not None:
                landed = replace(
                    state.block(held),
                    pos=(support.pos[0], support.pos[1], support.top + BLOCK_HALF),
                    stacked_on=support.name,
                    in_bin=False,
                )
            else:
                landed = replace(
                    state.block(held),
                    pos=_settle_on_table(state, held),
                    stacked_on=None,
                    in_bin=False,
                )
        return replace(
            state,
            tick=tick,
            grip_closed=False,
            held=None,
            blocks=_with_block(state, landed),
        )

    raise UnknownActionError(f"unhandled action: {action!r}")


def state_to_dict(state: WorldState) -> dict:
    return {
        "tick": state.tick,
        "gripper": list(state.gripper),
        "grip_closed": state.grip_closed,
        "held": state.held,
        "has_bin": state.has_bin,
        "blocks": [
            {
                "name": b.name,
                "pos": list(b.pos),
                "stacked_on": b.stacked_on,
                "in_bin": b.in_bin,
            }
            for b in state.blocks
        ],
    }
