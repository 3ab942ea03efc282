"""Search over grounded tasks: breadth-first and A*, plus plan validation.

Breadth-first with FIFO expansion in grounded-action order is the
reference planner: unit costs make it optimal and the expansion order
makes the returned plan deterministic. A* is available with two
heuristics; hmax is admissible, goal_count is cheaper but can
overcount when one action fixes several goal literals at once.
"""

from __future__ import annotations

import enum
import heapq
from collections import deque
from dataclasses import dataclass

from .pddl.ground import GroundAction, GroundTask

DEFAULT_NODE_BUDGET = 1_000_000


class PlanStatus(enum.Enum):
    SOLVED = "solved"
    UNSOLVABLE = "unsolvable"
    BUDGET_EXCEEDED = "budget_exceeded"


@dataclass(frozen=True)
class PlanResult:
    status: PlanStatus
    actions: tuple[GroundAction, ...] = ()
    expanded: int = 0
    generated: int = 0

    @property
    def solved(self) -> bool:
        return self.status is PlanStatus.SOLVED

    def action_names(self) -> tuple[str, ...]:
        return tuple(a.name for a in self.actions)


def _extract(parents: dict[int, tuple[int, GroundAction]], state: int) -> tuple[GroundAction, ...]:
    plan: list[GroundAction] = []
    while state in parents:
        state, action = parents[state]
        plan.append(action)
    plan.reverse()
    return tuple(plan)


def bfs_plan(
    task: GroundTask,
    start: int | None = None,
    node_budget: int = DEFAULT_NODE_BUDGET,
) -> PlanResult:
    state = task.init if start is None else start
    if task.goal_satisfied(state):
        return PlanResult(PlanStatus.SOLVED, (), 0, 1)
    frontier: deque[int] = deque([state])
    parents: dict[int, tuple[int, GroundAction]] = {}
    seen = {state}
    expanded = 0
    generated = 1
    while frontier:
        current = frontier.popleft()
        expanded += 1
        if expanded > node_budget:
            return PlanResult(PlanStatus.BUDGET_EXCEEDED, (), expanded, generated)
        for action in task.actions:
            if not task.applicable(current, action):
                continue
            nxt = task.apply(current, action)
            if nxt in seen:
                continue
            seen.add(nxt)
            parents[nxt] = (current, action)
            generated += 1
            if task.goal_satisfied(nxt):
                return PlanResult(PlanStatus.SOLVED, _extract(parents, nxt), expanded, generated)
            frontier.append(nxt)
    return PlanResult(PlanStatus.UNSOLVABLE, (), expanded, generated)


def goal_count(task: GroundTask, state: int) -> int:
    unmet = (task.goal_pos & ~state) | (task.goal_neg & state)
    return unmet.bit_count()


def hmax(task: GroundTask, state: int) -> float:
    """Admissible max-cost estimate over positive and negative literals.

    Cost of making atom i true (pos table) or false (neg table), with
    both relaxations: effects never conflict, costs combine by max.
    """
    inf = float("inf")
    n = len(task.atoms)
    pos = [0.0 if state >> i & 1 else inf for i in range(n)]
    neg = [inf if state >> i & 1 else 0.0 for i in range(n)]
    changed = True
    while changed:
        changed = False
        for action in task.actions:
            cost = 1.0
            feasible = True
            for i in range(n):
                bit = 1 << i
                if action.pre_pos & bit:
                    if pos[i] == inf:
                        feasible = False
                        break
                    cost = max(cost, 1.0 + pos[i])
                if action.pre_neg & bit:
                    if neg[i] == inf:
                        feasible = False
                        break
                    cost = max(cost, 1.0 + neg[i])
            if not feasible:
                continue
            for i in range(n):
                bit = 1 << i
                if action.add & bit and cost < pos[i]:
                    pos[i] = cost
                    changed = True
                if action.delete & bit and cost < neg[i]:
                    neg[i] = cost
                    changed = True
    h = 0.0
    for i in range(n):
        bit = 1 << i
        if task.goal_pos & bit:
            h = max(h, pos[i])
        if task.goal_neg & bit:
            h = max(h, neg[i])
    return h


_HEURISTICS = {"goal_count": goal_count, "hmax": hmax}


def astar_plan(
    task: GroundTask,
    heuristic: str = "hmax",
    start: int | None = None,
    node_budget: int = DEFAULT_NODE_BUDGET,
) -> PlanResult:
    try:
        h = _HEURISTICS[heuristic]
    except KeyError:
        raise ValueError(f"unknown heuristic {heuristic!r}; have {sorted(_HEURISTICS)}") from None
    state = task.init if start is None else start
    h0 = h(task, state)
    if h0 == float("inf"):
        return PlanResult(PlanStatus.UNSOLVABLE, (), 0, 1)
    counter = 0
    heap: list[tuple[float, int, int, int]] = [(h0, 0, counter, state)]
    best_g: dict[int, int] = {state: 0}
    parents: dict[int, tuple[int, GroundAction]] = {}
    expanded = 0
    generated = 1
    while heap:
        f, g, _, current = heapq.heappop(heap)
        if g > best_g.get(current, -1):
            continue  # stale entry
        if task.goal_satisfied(current):
            return PlanResult(PlanStatus.SOLVED, _extract(parents, current), expanded, generated)
        expanded += 1
        if expanded > node_budget:
            return PlanResult(PlanStatus.BUDGET_EXCEEDED, (), expanded, generated)
        for action in task.actions:
            if not task.applicable(current, action):
                continue
            nxt = task.apply(current, action)
            ng = g + 1
            if ng >= best_g.get(nxt, 1 << 62):
                continue
            hn = h(task, nxt)
            if hn == float("inf"):
                continue
            best_g[nxt] = ng
            parents[nxt] = (current, action)
            counter += 1
            generated += 1
            heapq.heappush(heap, (ng + hn, ng, counter, nxt))
    return PlanResult(PlanStatus.UNSOLVABLE, (), expanded, generated)


def plan(
    task: GroundTask,
    algorithm: str = "bfs",
    start: int | None = None,
    node_budget: int = DEFAULT_NODE_BUDGET,
) -> PlanResult:
    if algorithm == "bfs":
        return bfs_plan(task, start=start, node_budget=node_budget)
    if algorithm.startswith("astar"):
        heuristic = algorithm.split(":", 1)[1] if ":" in algorithm else "hmax"
        return astar_plan(task, heuristic=heuristic, start=start, node_budget=node_budget)
    raise ValueError(f"unknown algorithm {algorithm!r}; use bfs, astar, astar:goal_count")


@dataclass(frozen=True)
class ValidationReport:
    ok: bool
    failed_step: int | None = None
    missing: tuple[str, ...] = ()
    goal_satisfied: bool = False
    final_state: int = 0
    reason: str = ""

    @property
    def valid_prefix(self) -> bool:
        return self.failed_step is None


def validate_plan(
    task: GroundTask,
    actions: list[GroundAction | str],
    start: int | None = None,
    require_goal: bool = True,
) -> ValidationReport:
    """Simulate a plan; report the first inapplicable step or unmet goal."""
    state = task.init if start is None else start
    for i, entry in enumerate(actions):
        if isinstance(entry, str):
            action = task.action_by_name(entry)
            if action is None:
                return ValidationReport(
                    ok=False,
                    failed_step=i,
                    missing=(),
                    goal_satisfied=task.goal_satisfied(state),
                    final_state=state,
                    reason=f"unknown action {entry!r}",
                )
        else:
            action = entry
        if not task.applicable(state, action):
            return ValidationReport(
                ok=False,
                failed_step=i,
                missing=tuple(task.missing_literals(state, action)),
                goal_satisfied=task.goal_satisfied(state),
                final_state=state,
                reason=f"preconditions of {action.name} not satisfied",
            )
        state = task.apply(state, action)
    goal_ok = task.goal_satisfied(state)
    if require_goal and not goal_ok:
        return ValidationReport(
            ok=False,
            failed_step=None,
            missing=tuple(task.unmet_goal_literals(state)),
            goal_satisfied=False,
            final_state=state,
            reason="plan ends short of the goal",
        )
    return ValidationReport(ok=True, goal_satisfied=goal_ok, final_state=state)
