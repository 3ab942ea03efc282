"""Hierarchical task executor.

Runs a symbolic plan one primitive at a time: each plan step is
translated into a partial relational goal and handed to a low-level
policy until the goal's pinned atoms hold in the simulated scene.
Timeouts and controller refusals trigger replanning from the current
relational configuration.  A paused executor accepts human plan edits,
which are admitted only if the edited step sequence still executes and
reaches the task goal under the symbolic model.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Callable

from .errors import ControllerError, EditRejectedError, IllegalTransitionError
from .pddl.ground import GroundAction, GroundTask
from .planner import plan as search_plan
from .planner import validate_plan
from .policy.scripted import ScriptedPolicy
from .semantics import ConfigLayout, Goal, describe_goal, evaluate
from .translate import ground_for, subgoal_for
from .world import PrimitiveAction, SceneSpec, WorldState, state_to_dict, step as world_step


class ExecStatus(str, enum.Enum):
    PLANNING = "planning"
    RUNNING = "running"
    PAUSED = "paused"
    AWAITING_EDIT = "awaiting_edit"
    SUCCEEDED = "succeeded"
    FAILED = "failed"

    @property
    def terminal(self) -> bool:
        return self in (ExecStatus.SUCCEEDED, ExecStatus.FAILED)


class EventKind(str, enum.Enum):
    PLAN_CREATED = "plan_created"
    SUBGOAL_STARTED = "subgoal_started"
    SUBGOAL_ACHIEVED = "subgoal_achieved"
    SUBGOAL_TIMEOUT = "subgoal_timeout"
    REPLANNED = "replanned"
    INTERVENTION_APPLIED = "intervention_applied"
    TASK_SUCCEEDED = "task_succeeded"
    TASK_FAILED = "task_failed"


@dataclass(frozen=True)
class ExecEvent:
    index: int
    tick: int
    kind: EventKind
    detail: dict

    def to_dict(self) -> dict:
        return {
            "index": self.index,
            "tick": self.tick,
            "kind": self.kind.value,
            "detail": self.detail,
        }


class EditOp(str, enum.Enum):
    INSERT = "insert"
    REMOVE = "remove"
    REORDER = "reorder"
    REPLACE_PLAN = "replace_plan"


@dataclass(frozen=True)
class PlanEdit:
    """One human intervention on the remaining plan suffix.

    insert: put ground action `action` before remaining position `index`.
    remove: delete remaining position `index`.
    reorder: permute the remaining steps by `order`.
    replace_plan: swap the whole remaining suffix for `plan`.
    """

    op: EditOp
    index: int | None = None
    action: str | None = None
    order: tuple[int, ...] = ()
    plan: tuple[str, ...] = ()

    @staticmethod
    def from_dict(d: dict) -> "PlanEdit":
        return PlanEdit(
            op=EditOp(d["op"]),
            index=d.get("index"),
            action=d.get("action"),
            order=tuple(d.get("order", ())),
            plan=tuple(d.get("plan", ())),
        )


Observer = Callable[[ExecEvent], None]


@dataclass
class Executor:
    """Plan/execute loop over one scene with intervention hooks.

    The executor owns the world state.  `step()` advances exactly one
    primitive; `run()` loops while the status stays RUNNING.  All
    primitives taken are appended to `action_log`, so any trajectory
    can be replayed bit-exactly from the SceneSpec alone.
    """

    scene: SceneSpec
    goal: Goal
    policy: object | None = None
    max_replans: int = 3
    subgoal_budget: int = 120

    status: ExecStatus = field(init=False, default=ExecStatus.PLANNING)
    tick: int = field(init=False, default=0)
    cursor: int = field(init=False, default=0)
    replans_used: int = field(init=False, default=0)

    def __post_init__(self) -> None:
        self.layout = ConfigLayout(self.scene.profile())
        if self.policy is None:
            self.policy = ScriptedPolicy(self.layout)
        if self.goal.size != self.layout.size:
            raise ValueError(
                f"goal width {self.goal.size} does not match profile width {self.layout.size}"
            )
        self.world: WorldState = self.scene.build()
        self.plan: tuple[GroundAction, ...] = ()
        self.events: list[ExecEvent] = []
        self.action_log: list[int] = []
        self.observers: list[Observer] = []
        self._started = False
        self._subgoal_steps = 0
        self._announced = False

    # -- event plumbing ---------------------------------------------------

    def _emit(self, kind: EventKind, **detail) -> None:
        ev = ExecEvent(index=len(self.events), tick=self.tick, kind=kind, detail=detail)
        self.events.append(ev)
        for obs in list(self.observers):
            obs(ev)

    def plan_names(self) -> list[str]:
        return [a.name for a in self.plan]

    def plan_subgoals(self) -> list[str]:
        return [describe_goal(subgoal_for(a, self.layout), self.layout) for a in self.plan]

    def action_vocabulary(self) -> list[str]:
        """Every grounded action name legal for this scene's profile."""
        return sorted(a.name for a in self._ground("vocabulary").actions)

    def current_subgoal(self) -> Goal | None:
        if self.cursor < len(self.plan):
            return subgoal_for(self.plan[self.cursor], self.layout)
        return None

    def config(self) -> tuple[int, ...]:
        return evaluate(self.world, self.layout)

    # -- lifecycle --------------------------------------------------------

    def start(self, paused: bool = False) -> ExecStatus:
        if self._started:
            raise IllegalTransitionError("executor already started", self.status.value)
        self._started = True
        task = self._ground("start")
        result = search_plan(task)
        if not result.solved:
            self.status = ExecStatus.FAILED
            self._emit(
                EventKind.TASK_FAILED,
                reason=f"no plan found ({result.status.name.lower()})",
            )
            return self.status
        self.plan = result.actions
        self.cursor = 0
        self._emit(
            EventKind.PLAN_CREATED,
            plan=self.plan_names(),
            subgoals=self.plan_subgoals(),
            length=len(self.plan),
        )
        self.status = ExecStatus.PAUSED if paused else ExecStatus.RUNNING
        if not self.plan and self.goal.satisfied(self.config()):
            self._succeed()
        return self.status

    def pause(self) -> None:
        if self.status is not ExecStatus.RUNNING:
            raise IllegalTransitionError(f"cannot pause while {self.status.value}", self.status.value)
        self.status = ExecStatus.PAUSED

    def resume(self) -> None:
        if self.status not in (ExecStatus.PAUSED, ExecStatus.AWAITING_EDIT):
            raise IllegalTransitionError(f"cannot resume while {self.status.value}", self.status.value)
        self.status = ExecStatus.RUNNING

    def step(self) -> PrimitiveAction | None:
        """Advance one primitive.  Legal while running or paused.

        A manual step from PAUSED or AWAITING_EDIT keeps the executor
        paused afterwards; only terminal transitions override that.
        """
        if not self._started:
            raise IllegalTransitionError("executor not started", self.status.value)
        if self.status.terminal or self.status is ExecStatus.PLANNING:
            raise IllegalTransitionError(f"cannot step while {self.status.value}", self.status.value)

        if not self._enter_boundary():
            return None
        subgoal = subgoal_for(self.plan[self.cursor], self.layout)
        try:
            action = PrimitiveAction(self.policy.act(self.world, subgoal))
        except ControllerError as err:
            self._emit(
                EventKind.SUBGOAL_TIMEOUT,
                index=self.cursor,
                action=self.plan[self.cursor].name,
                steps=self._subgoal_steps,
                reason=str(err),
            )
            self._announced = False
            self._replan("controller refused sub-goal")
            return None

        self.world = world_step(self.world, action)
        self.action_log.append(int(action))
        self.tick += 1
        self._subgoal_steps += 1

        config = self.config()
        if subgoal.satisfied(config):
            self._emit(
                EventKind.SUBGOAL_ACHIEVED,
                index=self.cursor,
                action=self.plan[self.cursor].name,
                steps=self._subgoal_steps,
            )
            self.cursor += 1
            self._announced = False
            if self.goal.satisfied(config):
                self._succeed()
        elif self._subgoal_steps >= self.subgoal_budget:
            self._emit(
                EventKind.SUBGOAL_TIMEOUT,
                index=self.cursor,
                action=self.plan[self.cursor].name,
                steps=self._subgoal_steps,
                reason="step budget exhausted",
            )
            self._announced = False
            self._replan("sub-goal step budget exhausted")
        return action

    def run(self, max_ticks: int = 10_000) -> ExecStatus:
        if not self._started:
            self.start()
        taken = 0
        while self.status is ExecStatus.RUNNING and taken < max_ticks:
            self.step()
            taken += 1
        return self.status

    # -- interventions ----------------------------------------------------

    def apply_edit(self, edit: PlanEdit) -> None:
        """Admit a plan edit or raise EditRejectedError.

        Edits address the remaining suffix plan[cursor:].  The candidate
        is simulated symbolically from the current configuration and must
        both execute and end with the task goal satisfied.
        """
        if not self._started:
            raise IllegalTransitionError("executor not started", self.status.value)
        if self.status not in (ExecStatus.PAUSED, ExecStatus.AWAITING_EDIT):
            raise IllegalTransitionError(f"cannot edit plan while {self.status.value}", self.status.value)

        remaining = self.plan_names()[self.cursor :]
        candidate = self._edited(remaining, edit)
        task = self._ground("edit")
        report = validate_plan(task, list(candidate), require_goal=True)
        if not report.ok:
            raise EditRejectedError(
                report.reason, missing=list(report.missing), failed_step=report.failed_step
            )
        resolved = tuple(task.action_by_name(n) for n in candidate)
        self.plan = resolved
        self.cursor = 0
        self._announced = False
        self.status = ExecStatus.AWAITING_EDIT
        self._emit(
            EventKind.INTERVENTION_APPLIED,
            op=edit.op.value,
            plan=list(candidate),
            subgoals=self.plan_subgoals(),
        )

    @staticmethod
    def _edited(remaining: list[str], edit: PlanEdit) -> list[str]:
        if edit.op is EditOp.INSERT:
            if edit.action is None:
                raise EditRejectedError("insert requires an action name")
            if edit.index is None or not 0 <= edit.index <= len(remaining):
                raise EditRejectedError(f"insert index {edit.index} out of range")
            return remaining[: edit.index] + [edit.action] + remaining[edit.index :]
        if edit.op is EditOp.REMOVE:
            if edit.index is None or not 0 <= edit.index < len(remaining):
                raise EditRejectedError(f"remove index {edit.index} out of range")
            return remaining[: edit.index] + remaining[edit.index + 1 :]
        if edit.op is EditOp.REORDER:
            if sorted(edit.order) != list(range(len(remaining))):
                raise EditRejectedError(
                    f"order {list(edit.order)} is not a permutation of the remaining steps"
                )
            return [remaining[i] for i in edit.order]
        if edit.op is EditOp.REPLACE_PLAN:
            return list(edit.plan)
        raise EditRejectedError(f"unknown edit op {edit.op!r}")

    # -- internals --------------------------------------------------------

    def _ground(self, name: str) -> GroundTask:
        return ground_for(self.layout, self.config(), self.goal, name=name)

    def _succeed(self) -> None:
        self.status = ExecStatus.SUCCEEDED
        self._emit(EventKind.TASK_SUCCEEDED, ticks=self.tick)

    def _fail(self, reason: str) -> None:
        self.status = ExecStatus.FAILED
        self._emit(EventKind.TASK_FAILED, reason=reason)

    def _enter_boundary(self) -> bool:
        """Advance past satisfied sub-goals; announce the active one.

        Returns False when the walk ended the episode (task success,
        replan, or failure) and no primitive should be taken this call.
        """
        if self._announced:
            return True
        while True:
            config = self.config()
            if self.goal.satisfied(config):
                self._succeed()
                return False
            if self.cursor >= len(self.plan):
                self._replan("plan exhausted short of the goal")
                if self.status.terminal:
                    return False
                continue
            action = self.plan[self.cursor]
            subgoal = subgoal_for(action, self.layout)
            self._emit(
                EventKind.SUBGOAL_STARTED,
                index=self.cursor,
                action=action.name,
                subgoal=describe_goal(subgoal, self.layout),
            )
            if subgoal.satisfied(config):
                # already true in the scene, no primitives needed
                self._emit(
                    EventKind.SUBGOAL_ACHIEVED, index=self.cursor, action=action.name, steps=0
                )
                self.cursor += 1
                continue
            self.policy.reset()
            self._subgoal_steps = 0
            self._announced = True
            return True

    def _replan(self, reason: str) -> None:
        if self.replans_used >= self.max_replans:
            self._fail(f"replan budget exhausted after: {reason}")
            return
        self.replans_used += 1
        task = self._ground(f"replan{self.replans_used}")
        result = search_plan(task)
        if not result.solved:
            self._fail(f"replan found no plan ({result.status.name.lower()})")
            return
        self.plan = result.actions
        self.cursor = 0
        self._announced = False
        self._emit(
            EventKind.REPLANNED,
            plan=self.plan_names(),
            subgoals=self.plan_subgoals(),
            reason=reason,
            attempt=self.replans_used,
        )

    # -- inspection -------------------------------------------------------

    def snapshot(self) -> dict:
        subgoal = self.current_subgoal()
        return {
            "status": self.status.value,
            "tick": self.tick,
            "cursor": self.cursor,
            "plan": self.plan_names(),
            "subgoals": self.plan_subgoals(),
            "subgoal": describe_goal(subgoal, self.layout) if subgoal else None,
            "goal": describe_goal(self.goal, self.layout),
            "goal_vec": {"target": list(self.goal.target), "mask": list(self.goal.mask)},
            "atoms": list(self.layout.atom_names()),
            "config": list(self.config()),
            "world": state_to_dict(self.world),
            "replans_used": self.replans_used,
            "event_count": len(self.events),
        }


def replay(scene: SceneSpec, action_log: list[int]) -> WorldState:
    """Rebuild the final world state from a scene recipe and action log."""
    state = scene.build()
    for a in action_log:
        state = world_step(state, a)
    return state
