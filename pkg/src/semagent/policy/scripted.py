"""Hand-written closed-loop controller for semantic sub-goals.

Reads the intent straight out of the partial goal (which relation is
pinned for which object), then emits one primitive per call: climb to
carry height, line up the x axis, then y, then act. Deterministic by
construction, so it doubles as the oracle low-level policy in tests and
benchmarks.
"""

from __future__ import annotations

from dataclasses import dataclass

from ..errors import ControllerError, ControllerPreconditionError
from ..geometry import (
    BIN_CENTER,
    BLOCK_HALF,
    CARRY_Z,
    CLOSE_THRESHOLD,
    MIN_SEPARATION,
    MOVE_DELTA,
    STACK_TOL,
    WORKSPACE_MAX,
    WORKSPACE_MIN,
    dist_xy,
    in_bin_region,
    snap_to_grid,
)
from ..profiles import PredicateKind
from ..semantics import ConfigLayout, Goal, evaluate
from ..world import PrimitiveAction, WorldState

_ALIGN_TOL = MOVE_DELTA / 2 + 1e-9

# near spots: four axis offsets then four diagonals, all ~0.06 from the anchor
_NEAR_OFFSETS = (
    (0.06, 0.0),
    (-0.06, 0.0),
    (0.0, 0.06),
    (0.0, -0.06),
    (0.0424, 0.0424),
    (-0.0424, 0.0424),
    (0.0424, -0.0424),
    (-0.0424, -0.0424),
)

_FAR_SPOTS = (
    (0.14, 0.14),
    (0.44, 0.14),
    (0.14, 0.44),
    (0.44, 0.44),
    (0.14, 0.29),
    (0.44, 0.29),
    (0.29, 0.14),
    (0.29, 0.44),
)


@dataclass(frozen=True)
class _Intent:
    kind: str  # grasp, stack, near, away, bin, table, release
    obj: str
    anchor: str | None = None


def _parse_intent(goal: Goal, layout: ConfigLayout, state: WorldState) -> _Intent:
    pins: dict[PredicateKind, list[tuple[tuple[str, ...], int]]] = {}
    for atom, t, m in zip(layout.atoms, goal.target, goal.mask):
        if m:
            pins.setdefault(atom.kind, []).append((atom.args, t))

    for args, t in pins.get(PredicateKind.HOLDING, []):
        if t == 1:
            return _Intent("grasp", args[0])

    held_zero = [args[0] for args, t in pins.get(PredicateKind.HOLDING, []) if t == 0]
    if not held_zero:
        return _greedy_intent(goal, layout, state)
    if len(held_zero) != 1:
        raise ControllerError(f"cannot infer manipulated object from goal pins {pins}")
    obj = held_zero[0]

    for args, t in pins.get(PredicateKind.ABOVE, []):
        if t == 1 and args[0] == obj:
            return _Intent("stack", obj, args[1])
    for args, t in pins.get(PredicateKind.CLOSE, []):
        if obj in args:
            other = args[1] if args[0] == obj else args[0]
            return _Intent("near" if t == 1 else "away", obj, other)
    for args, t in pins.get(PredicateKind.IN_BIN, []):
        if args[0] == obj:
            return _Intent("bin" if t == 1 else "table", obj)
    return _Intent("release", obj)


def _greedy_intent(goal: Goal, layout: ConfigLayout, state: WorldState) -> _Intent:
    """Whole-task goal with no holding pins: fix one broken relation.

    Re-parsed every step, so multi-relation goals get handled one
    manipulation at a time as earlier relations come true. A held block
    steers the choice: its own broken relations come first, and it gets
    dropped when it has none left.
    """
    achieved = evaluate(state, layout)
    broken = [
        (atom, goal.target[i])
        for i, atom in enumerate(layout.atoms)
        if goal.mask[i] and achieved[i] != goal.target[i]
    ]
    if not broken:
        raise ControllerError("goal already satisfied, nothing to do")
    if state.held is not None:
        involved = [bw for bw in broken if state.held in bw[0].args]
        if not involved:
            return _Intent("release", state.held)
        broken = involved
    atom, want = broken[0]
    if atom.kind is PredicateKind.ABOVE:
        top, base = atom.args
        if want == 0:
            return _Intent("away", top, base)
        if state.held == base:  # holding the support: put it down first
            return _Intent("release", base)
        return _Intent("stack", top, base)
    if atom.kind is PredicateKind.CLOSE:
        a, b = atom.args
        degree = dict.fromkeys((a, b), 0)
        for j, other in enumerate(layout.atoms):
            if goal.mask[j] and other.kind is PredicateKind.CLOSE:
                for n in (a, b):
                    if n in other.args:
                        degree[n] += 1
        # prefer the in-hand object, avoid covered ones, otherwise move
        # the less constrained of the pair so hub objects stay put
        if state.held in (a, b):
            obj = state.held
        elif state.covered(a):
            obj = b
        elif state.covered(b):
            obj = a
        else:
            obj = a if degree[a] <= degree[b] else b
        anchor = b if obj == a else a
        return _Intent("near" if want == 1 else "away", obj, anchor)
    if atom.kind is PredicateKind.IN_BIN:
        return _Intent("bin" if want == 1 else "table", atom.args[0])
    if atom.kind is PredicateKind.HOLDING:  # pragma: no cover - filtered above
        return _Intent("grasp", atom.args[0])
    raise ControllerError(f"no strategy for goal atom {atom}")


class ScriptedPolicy:
    """Low-level policy interface: act(state, goal) -> primitive."""

    def __init__(self, layout: ConfigLayout):
        self.layout = layout

    def reset(self) -> None:
        pass

    def act(self, state: WorldState, goal: Goal) -> PrimitiveAction:
        intent = _parse_intent(goal, self.layout, state)
        if intent.kind == "grasp":
            return self._grasp_step(state, intent.obj)
        if state.held != intent.obj:
            if state.held is None:
                return self._grasp_step(state, intent.obj)
            raise ControllerPreconditionError(
                f"holding {state.held}, cannot manipulate {intent.obj}"
            )
        if intent.kind == "release":
            return PrimitiveAction.GRIP_OPEN
        if intent.kind == "stack":
            return self._place_step(state, self._stack_target(state, intent))
        if intent.kind == "near":
            return self._place_step(state, self._near_target(state, intent))
        if intent.kind == "away":
            return self._place_step(state, self._far_target(state, intent, avoid=True))
        if intent.kind == "bin":
            return self._place_step(state, BIN_CENTER)
        if intent.kind == "table":
            return self._place_step(state, self._far_target(state, intent, avoid=False))
        raise ControllerError(f"unhandled intent {intent.kind!r}")  # pragma: no cover

    # ------------------------------------------------------------- grasp

    def _grasp_step(self, state: WorldState, obj: str) -> PrimitiveAction:
        if state.held == obj:
            return PrimitiveAction.GRIP_CLOSE  # nothing left to do
        if state.held is not None:
            raise ControllerPreconditionError(f"gripper is full ({state.held})")
        if state.covered(obj):
            raise ControllerPreconditionError(f"{obj} is covered by another block")
        block = state.block(obj)
        gx, gy, gz = state.gripper
        tx = snap_to_grid(block.pos[0], gx)
        ty = snap_to_grid(block.pos[1], gy)
        if abs(gx - tx) > _ALIGN_TOL or abs(gy - ty) > _ALIGN_TOL:
            # travel at carry height so nothing is clipped along the way
            if gz < CARRY_Z - _ALIGN_TOL:
                return PrimitiveAction.MOVE_Z_POS
            return _move_xy(gx, gy, tx, ty)
        tz = snap_to_grid(block.top, gz)
        if abs(gz - tz) > _ALIGN_TOL:
            return PrimitiveAction.MOVE_Z_NEG if gz > tz else PrimitiveAction.MOVE_Z_POS
        if state.grip_closed:
            # aligned but closed on nothing: reopen, then close onto the block
            return PrimitiveAction.GRIP_OPEN
        return PrimitiveAction.GRIP_CLOSE

    # ------------------------------------------------------------- place

    def _place_step(self, state: WorldState, target_xy: tuple[float, float]) -> PrimitiveAction:
        gx, gy, gz = state.gripper
        tx = snap_to_grid(target_xy[0], gx)
        ty = snap_to_grid(target_xy[1], gy)
        if gz < CARRY_Z - _ALIGN_TOL:
            return PrimitiveAction.MOVE_Z_POS
        if abs(gx - tx) > _ALIGN_TOL or abs(gy - ty) > _ALIGN_TOL:
            return _move_xy(gx, gy, tx, ty)
        return PrimitiveAction.GRIP_OPEN

    # ------------------------------------------------------ target picks

    def _stack_target(self, state: WorldState, intent: _Intent) -> tuple[float, float]:
        support = state.block(intent.anchor)
        if state.covered(intent.anchor):
            raise ControllerPreconditionError(f"{intent.anchor} is covered")
        return support.pos[0], support.pos[1]

    def _near_target(self, state: WorldState, intent: _Intent) -> tuple[float, float]:
        anchor = state.block(intent.anchor)
        gx, gy, _ = state.gripper
        others = [
            b.pos for b in state.blocks if b.name not in (intent.obj, intent.anchor)
        ]
        fallback: tuple[float, tuple[float, float]] | None = None
        for ox, oy in _NEAR_OFFSETS:
            rx = snap_to_grid(anchor.pos[0] + ox, gx)
            ry = snap_to_grid(anchor.pos[1] + oy, gy)
            if not _on_table(rx, ry):
                continue
            d_anchor = dist_xy((rx, ry), anchor.pos)
            if not (STACK_TOL + 1e-3 < d_anchor <= CLOSE_THRESHOLD - 0.006):
                continue
            d_other = min((dist_xy((rx, ry), p) for p in others), default=1.0)
            if d_other >= 0.11:
                return rx, ry
            if fallback is None or d_other > fallback[0]:
                fallback = (d_other, (rx, ry))
        if fallback is not None:
            return fallback[1]
        raise ControllerError(f"no free spot near {intent.anchor}")

    def _far_target(
        self, state: WorldState, intent: _Intent, avoid: bool
    ) -> tuple[float, float]:
        avoid_pos = state.block(intent.anchor).pos if avoid else None
        others = [
            b.pos
            for b in state.blocks
            if b.name != intent.obj and (intent.anchor is None or b.name != intent.anchor)
        ]
        gx, gy, _ = state.gripper
        best: tuple[float, tuple[float, float]] | None = None
        for sx, sy in _FAR_SPOTS:
            rx = snap_to_grid(sx, gx)
            ry = snap_to_grid(sy, gy)
            if in_bin_region(rx, ry):
                continue
            if avoid_pos is not None and dist_xy((rx, ry), avoid_pos) < 0.15:
                continue
            score = min(
                (dist_xy((rx, ry), p) for p in others), default=1.0
            )
            if avoid_pos is not None:
                score = min(score, dist_xy((rx, ry), avoid_pos))
            if best is None or score > best[0]:
                best = (score, (rx, ry))
        if best is None or best[0] < MIN_SEPARATION:
            raise ControllerError("no free far spot on the table")
        return best[1]


def _move_xy(gx: float, gy: float, tx: float, ty: float) -> PrimitiveAction:
    if abs(gx - tx) > _ALIGN_TOL:
        return PrimitiveAction.MOVE_X_POS if tx > gx else PrimitiveAction.MOVE_X_NEG
    return PrimitiveAction.MOVE_Y_POS if ty > gy else PrimitiveAction.MOVE_Y_NEG


def _on_table(x: float, y: float) -> bool:
    return (
        WORKSPACE_MIN[0] + BLOCK_HALF <= x <= WORKSPACE_MAX[0] - BLOCK_HALF
        and WORKSPACE_MIN[1] + BLOCK_HALF <= y <= WORKSPACE_MAX[1] - BLOCK_HALF
        and not in_bin_region(x, y)
    )
