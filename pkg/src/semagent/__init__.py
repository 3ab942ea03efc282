"""Tabletop rearrangement agent: symbolic planning over learned skills.

A deterministic kinematic simulator exposes semantic relations (close,
above, in-bin, holding) over colored blocks. A forward-search planner
sequences those relations into sub-goals, and a goal-conditioned policy
(scripted or learned) turns each sub-goal into gripper primitives. The
executor around them replans on failure, accepts live plan edits, and
logs every episode for bit-exact replay.
"""

from .bench import (
    BENCH_TASKS,
    BenchReport,
    TaskDef,
    episode_seed,
    flat_agent,
    flat_train_config,
    hier_agent,
    hier_train_config,
    run_benchmark,
    run_task,
)
from .errors import (
    ControllerError,
    EditRejectedError,
    IllegalTransitionError,
    PddlError,
    SemagentError,
)
from .executor import EditOp, EventKind, ExecEvent, ExecStatus, Executor, PlanEdit, replay
from .planner import PlanResult, plan, validate_plan
from .semantics import Config, ConfigLayout, Goal, describe_goal, evaluate, goal_from_atoms
from .translate import ground_for, plan_to_goals, subgoal_for
from .world import PrimitiveAction, SceneInitializer, SceneSpec, WorldState, reset, step

__version__ = "0.1.0"

__all__ = [
    "BENCH_TASKS",
    "BenchReport",
    "Config",
    "ConfigLayout",
    "ControllerError",
    "EditOp",
    "EditRejectedError",
    "EventKind",
    "ExecEvent",
    "ExecStatus",
    "Executor",
    "Goal",
    "IllegalTransitionError",
    "PddlError",
    "PlanEdit",
    "PlanResult",
    "PrimitiveAction",
    "SceneInitializer",
    "SceneSpec",
    "SemagentError",
    "TaskDef",
    "WorldState",
    "describe_goal",
    "episode_seed",
    "evaluate",
    "flat_agent",
    "flat_train_config",
    "goal_from_atoms",
    "ground_for",
    "hier_agent",
    "hier_train_config",
    "plan",
    "plan_to_goals",
    "replay",
    "reset",
    "run_benchmark",
    "run_task",
    "step",
    "subgoal_for",
    "validate_plan",
]
