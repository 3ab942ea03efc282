from __future__ import annotations

import heapq

import numpy as np
import pytest

from semagent.pddl.ground import GroundTask, ground
from semagent.pddl.parser import parse_domain
from semagent.planner import (
    PlanStatus,
    astar_plan,
    bfs_plan,
    goal_count,
    hmax,
    plan,
    validate_plan,
)
from semagent.translate import _read_domain_text, load_problem_file


@pytest.fixture(scope="module")
def blocks():
    return parse_domain(_read_domain_text("blocks.pddl"))


@pytest.fixture(scope="module")
def desk():
    return parse_domain(_read_domain_text("desk.pddl"))


def load_task(name: str, dom) -> GroundTask:
    return ground(dom, load_problem_file(name, dom))


def dijkstra_optimum(task: GroundTask, start: int | None = None) -> int | None:
    """Independent shortest-path oracle over the full transition graph."""
    s0 = task.init if start is None else start
    dist = {s0: 0}
    heap = [(0, s0)]
    while heap:
        d, s = heapq.heappop(heap)
        if d > dist.get(s, -1):
            continue
        if task.goal_satisfied(s):
            return d
        for a in task.actions:
            if task.applicable(s, a):
                n = task.apply(s, a)
                if d + 1 < dist.get(n, 1 << 60):
                    dist[n] = d + 1
                    heapq.heappush(heap, (d + 1, n))
    return None


# ------------------------------------------------------------ golden plans


def test_mc2_plan(blocks):
    res = bfs_plan(load_task("mc2.pddl", blocks))
    assert res.status is PlanStatus.SOLVED
    assert res.action_names() == (
        "pick-from-table(red, green)",
        "put-near(red, green)",
    )


def test_ma2_plan(blocks):
    res = bfs_plan(load_task("ma2.pddl", blocks))
    assert res.action_names() == (
        "pick-from-table(red, green)",
        "put-away(red, green)",
    )


def test_swap2_plan(blocks):
    res = bfs_plan(load_task("swap2.pddl", blocks))
    assert res.action_names() == (
        "unstack(red, green)",
        "put-near(red, green)",
        "pick-from-table(green, red)",
        "stack-on(green, red)",
    )


def test_pinned_plan_lengths(blocks, desk):
    expectations = [
        ("mc2.pddl", blocks, 2),
        ("ma2.pddl", blocks, 2),
        ("swap2.pddl", blocks, 4),
        ("mc3.pddl", blocks, 4),
        ("ma3.pddl", blocks, 6),
        ("dc2.pddl", desk, 4),
        ("dc3.pddl", desk, 6),
        ("dc4.pddl", desk, 8),
    ]
    for name, dom, length in expectations:
        task = ground(dom, load_problem_file(name, dom))
        res = bfs_plan(task)
        assert res.status is PlanStatus.SOLVED, name
        assert len(res.actions) == length, name
        report = validate_plan(task, list(res.actions))
        assert report.ok and report.goal_satisfied, name


def test_trivial_goal_gives_empty_plan(blocks):
    task = load_task("mc2.pddl", blocks)
    state = task.init
    for name in ("pick-from-table(red, green)", "put-near(red, green)"):
        state = task.apply(state, task.action_by_name(name))
    res = bfs_plan(task, start=state)
    assert res.status is PlanStatus.SOLVED
    assert res.actions == ()


# ------------------------------------------------ optimality vs the oracle


def _random_reachable_cases(task: GroundTask, n_cases: int, seed: int):
    """Random (start, goal-state-derived) variants of a task by walking it."""
    rng = np.random.default_rng(seed)
    for _ in range(n_cases):
        state = task.init
        for _ in range(int(rng.integers(0, 8))):
            apps = [a for a in task.actions if task.applicable(state, a)]
            if not apps:
                break
            state = task.apply(state, apps[int(rng.integers(0, len(apps)))])
        yield state


@pytest.mark.parametrize("name", ["mc2.pddl", "ma2.pddl", "swap2.pddl", "mc3.pddl", "ma3.pddl"])
def test_bfs_matches_dijkstra_everywhere(blocks, name):
    task = load_task(name, blocks)
    for i, start in enumerate(_random_reachable_cases(task, 40, seed=hash(name) % 2**32)):
        optimum = dijkstra_optimum(task, start)
        res = bfs_plan(task, start=start)
        if optimum is None:
            assert res.status is PlanStatus.UNSOLVABLE, f"case {i}"
        else:
            assert res.status is PlanStatus.SOLVED, f"case {i}"
            assert len(res.actions) == optimum, f"case {i}"
            assert validate_plan(task, list(res.actions), start=start).ok


def test_astar_hmax_is_optimal(blocks, desk):
    for name, dom in [
        ("mc2.pddl", blocks),
        ("ma2.pddl", blocks),
        ("swap2.pddl", blocks),
        ("mc3.pddl", blocks),
        ("dc3.pddl", desk),
    ]:
        task = ground(dom, load_problem_file(name, dom))
        for start in _random_reachable_cases(task, 15, seed=7):
            best = bfs_plan(task, start=start)
            res = astar_plan(task, heuristic="hmax", start=start)
            assert res.status == best.status
            if best.solved:
                assert len(res.actions) == len(best.actions)
                assert validate_plan(task, list(res.actions), start=start).ok


def test_astar_goal_count_finds_valid_plans(blocks):
    for name in ("mc2.pddl", "swap2.pddl", "mc3.pddl"):
        task = load_task(name, blocks)
        res = astar_plan(task, heuristic="goal_count")
        assert res.solved
        assert validate_plan(task, list(res.actions)).ok


def test_hmax_is_a_lower_bound(blocks, desk):
    for name, dom in [
        ("mc2.pddl", blocks),
        ("swap2.pddl", blocks),
        ("ma3.pddl", blocks),
        ("dc4.pddl", desk),
    ]:
        task = ground(dom, load_problem_file(name, dom))
        optimum = dijkstra_optimum(task)
        assert hmax(task, task.init) <= optimum
        assert goal_count(task, task.init) >= 0


# ----------------------------------------------------- budgets and failure


def test_unsolvable_reported(blocks):
    task = load_task("mc2.pddl", blocks)
    # holding two blocks at once is unreachable with a single gripper
    both_held = task.state_from_atoms(
        tuple(a for a in task.atoms if a.name == "holding")
    )
    unreachable_goal_task = GroundTask(
        task.atoms,
        task.actions,
        task.init,
        goal_pos=both_held,
        goal_neg=0,
    )
    res = bfs_plan(unreachable_goal_task)
    assert res.status is PlanStatus.UNSOLVABLE
    res = astar_plan(unreachable_goal_task, heuristic="goal_count")
    assert res.status is PlanStatus.UNSOLVABLE


def test_budget_exceeded(blocks):
    task = load_task("swap2.pddl", blocks)
    res = bfs_plan(task, node_budget=1)
    assert res.status is PlanStatus.BUDGET_EXCEEDED
    assert res.actions == ()
    res = astar_plan(task, node_budget=1)
    assert res.status is PlanStatus.BUDGET_EXCEEDED


def test_plan_dispatch(blocks):
    task = load_task("mc2.pddl", blocks)
    assert plan(task, "bfs").solved
    assert plan(task, "astar").solved
    assert plan(task, "astar:goal_count").solved
    with pytest.raises(ValueError):
        plan(task, "dfs")
    with pytest.raises(ValueError):
        astar_plan(task, heuristic="nope")


# ------------------------------------------------------------- validation


def test_validate_reports_failing_step(blocks):
    task = load_task("swap2.pddl", blocks)
    report = validate_plan(
        task,
        ["pick-from-table(red, green)", "stack-on(red, green)"],
    )
    assert not report.ok
    assert report.failed_step == 0
    assert report.missing == ("(not (above red green))",)


def test_validate_reports_short_plan(blocks):
    task = load_task("mc2.pddl", blocks)
    report = validate_plan(task, ["pick-from-table(red, green)"])
    assert not report.ok
    assert report.failed_step is None  # every step applied fine
    assert report.missing == ("(close red green)",)
    assert not report.goal_satisfied
    report = validate_plan(task, ["pick-from-table(red, green)"], require_goal=False)
    assert report.ok and not report.goal_satisfied


def test_validate_unknown_action_name(blocks):
    task = load_task("mc2.pddl", blocks)
    report = validate_plan(task, ["fly-to-moon(red)"])
    assert not report.ok
    assert report.failed_step == 0
    assert "unknown action" in report.reason
