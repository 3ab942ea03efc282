"""Command line front door: plan, run, train, bench, serve."""

from __future__ import annotations

import argparse
import re
import sys
from pathlib import Path

from .bench import (
    BENCH_TASKS,
    EXEC_EPSILON,
    TASK_BY_KEY,
    flat_agent,
    flat_train_config,
    hier_agent,
    hier_train_config,
    run_benchmark,
)
from .executor import Executor
from .planner import plan as search_plan
from .policy.scripted import ScriptedPolicy
from .policy.train import (
    LearnedLowLevel,
    QPolicy,
    checkpoint_path_for,
    load_or_train,
)
from .profiles import profile_by_name
from .semantics import ConfigLayout, describe_goal, evaluate, goal_from_atoms
from .translate import ground_for, subgoal_for
from .world import SceneInitializer, SceneSpec

PROFILES = ("two_blocks", "three_blocks", "desk_cleanup_2", "desk_cleanup_3", "desk_cleanup_4")


def _parse_goal_spec(spec: str) -> dict[str, bool]:
    """"close(red, green)=1, in_bin(blue)=0" -> {name: bool}."""
    out: dict[str, bool] = {}
    # split only on commas outside the argument parentheses
    for part in re.split(r",(?![^(]*\))", spec):
        part = part.strip()
        if not part:
            continue
        if "=" not in part:
            raise SystemExit(f"goal term {part!r} needs =0 or =1")
        name, _, value = part.rpartition("=")
        if value not in ("0", "1"):
            raise SystemExit(f"goal term {part!r} must end in =0 or =1")
        out[name.strip()] = value == "1"
    if not out:
        raise SystemExit("empty goal spec")
    return out


def _scene_and_goal(args) -> tuple[SceneSpec, object, ConfigLayout]:
    if args.task:
        try:
            task = TASK_BY_KEY[args.task]
        except KeyError:
            raise SystemExit(f"unknown task {args.task!r}; known: {', '.join(TASK_BY_KEY)}")
        scene = SceneSpec(task.profile_name, task.initializer, args.seed)
        layout = ConfigLayout(scene.profile())
        goal = task.goal_for(scene.build(), layout)
        return scene, goal, layout
    if not (args.profile and args.goal):
        raise SystemExit("need either --task or both --profile and --goal")
    scene = SceneSpec(args.profile, SceneInitializer(args.initializer), args.seed)
    layout = ConfigLayout(scene.profile())
    goal = goal_from_atoms(layout, _parse_goal_spec(args.goal))
    return scene, goal, layout


def _learned_policy_for(variant: str):
    cache: dict[str, LearnedLowLevel] = {}

    def policy_for(profile_name: str):
        if profile_name not in cache:
            path = checkpoint_path_for(profile_name, variant)
            if not path.exists():
                raise SystemExit(
                    f"no {variant} checkpoint for {profile_name} at {path}; "
                    f"run: semagent train --profile {profile_name} --variant {variant}"
                )
            qp = QPolicy.load(path, profile_by_name(profile_name))
            cache[profile_name] = LearnedLowLevel(qp, epsilon=EXEC_EPSILON)
        return cache[profile_name]

    return policy_for


def _scripted_policy_for():
    cache: dict[str, ScriptedPolicy] = {}

    def policy_for(profile_name: str):
        if profile_name not in cache:
            cache[profile_name] = ScriptedPolicy(ConfigLayout(profile_by_name(profile_name)))
        return cache[profile_name]

    return policy_for


# ------------------------------------------------------------------ commands


def cmd_plan(args) -> int:
    scene, goal, layout = _scene_and_goal(args)
    world = scene.build()
    task = ground_for(layout, evaluate(world, layout), goal)
    result = search_plan(task, algorithm=args.algorithm)
    print(f"goal: {describe_goal(goal, layout)}")
    if not result.solved:
        print(f"no plan ({result.status.name.lower()}, {result.expanded} nodes)")
        return 1
    print(f"plan ({len(result.actions)} steps, {result.expanded} nodes):")
    for i, action in enumerate(result.actions):
        sub = subgoal_for(action, layout)
        print(f"  {i}. {action.name:28s} -> {describe_goal(sub, layout)}")
    return 0


def cmd_run(args) -> int:
    scene, goal, layout = _scene_and_goal(args)
    policy = None
    if args.policy == "learned":
        policy = _learned_policy_for("hier")(scene.profile_name)
    ex = Executor(
        scene,
        goal,
        policy=policy,
        subgoal_budget=args.subgoal_budget,
        max_replans=args.max_replans,
    )
    if not args.quiet:
        ex.observers.append(
            lambda ev: print(f"[{ev.tick:4d}] {ev.kind.value:20s} {ev.detail}")
        )
    status = ex.run()
    print(f"{status.value} after {ex.tick} ticks, {ex.replans_used} replans")
    return 0 if status.value == "succeeded" else 1


def cmd_train(args) -> int:
    make = hier_train_config if args.variant == "hier" else flat_train_config
    overrides = {"seed": args.seed}
    if args.steps:
        overrides["total_steps"] = args.steps
    cfg = make(args.profile, **overrides)
    path = Path(args.out) if args.out else checkpoint_path_for(args.profile, args.variant)
    if args.force and path.exists():
        path.unlink()
    policy, stats = load_or_train(cfg, path=path, log=print)
    print(f"checkpoint: {path}")
    print(f"stats: {stats}")
    return 0


def cmd_bench(args) -> int:
    agents = {}
    for name in args.agents.split(","):
        name = name.strip()
        if name == "hier-scripted":
            agents[name] = hier_agent()
        elif name == "hier-learned":
            agents[name] = hier_agent(policy_for=_learned_policy_for("hier"))
        elif name == "flat-learned":
            agents[name] = flat_agent(policy_for=_learned_policy_for("flat"))
        elif name == "flat-scripted":
            agents[name] = flat_agent(policy_for=_scripted_policy_for())
        else:
            raise SystemExit(
                f"unknown agent {name!r}; known: hier-scripted, hier-learned, "
                f"flat-learned, flat-scripted"
            )
    if args.tasks:
        keys = [k.strip() for k in args.tasks.split(",")]
        unknown = [k for k in keys if k not in TASK_BY_KEY]
        if unknown:
            raise SystemExit(f"unknown tasks: {', '.join(unknown)}")
        tasks = tuple(TASK_BY_KEY[k] for k in keys)
    else:
        tasks = BENCH_TASKS
    seeds = tuple(int(s) for s in args.seeds.split(","))
    log = None if args.quiet else print
    report = run_benchmark(agents, tasks=tasks, episodes=args.episodes, seeds=seeds, log=log)
    print(report.format_table())
    if args.csv:
        Path(args.csv).write_text(report.to_csv())
        print(f"rows written to {args.csv}")
    return 0


def cmd_serve(args) -> int:
    from .service import serve

    serve(host=args.host, port=args.port, log_dir=args.log_dir)
    return 0


# --------------------------------------------------------------------- main


def _add_scene_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--task", help=f"benchmark task key ({', '.join(t.key for t in BENCH_TASKS)})")
    p.add_argument("--profile", choices=PROFILES, help="profile for a custom scene")
    p.add_argument(
        "--initializer",
        default="all_far",
        choices=[i.value for i in SceneInitializer],
        help="scene layout family for a custom scene",
    )
    p.add_argument("--goal", help='custom goal, e.g. "close(red, green)=1, in_bin(blue)=0"')
    p.add_argument("--seed", type=int, default=0, help="scene seed")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="semagent",
        description="plan, execute, train and serve tabletop rearrangement agents",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("plan", help="print the symbolic plan and its sub-goals")
    _add_scene_args(p)
    p.add_argument("--algorithm", default="bfs", help="bfs, astar, or astar:goal_count")
    p.set_defaults(fn=cmd_plan)

    p = sub.add_parser("run", help="execute one episode and print the event trace")
    _add_scene_args(p)
    p.add_argument("--policy", default="scripted", choices=("scripted", "learned"))
    p.add_argument("--subgoal-budget", type=int, default=120)
    p.add_argument("--max-replans", type=int, default=3)
    p.add_argument("--quiet", action="store_true", help="only print the outcome line")
    p.set_defaults(fn=cmd_run)

    p = sub.add_parser("train", help="train a low-level policy checkpoint")
    p.add_argument("--profile", required=True, choices=PROFILES)
    p.add_argument("--variant", default="hier", choices=("hier", "flat"))
    p.add_argument("--steps", type=int, help="override the profile's step budget")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", help="checkpoint path (default: the policy cache)")
    p.add_argument("--force", action="store_true", help="retrain even if cached")
    p.set_defaults(fn=cmd_train)

    p = sub.add_parser("bench", help="run the task grid for one or more agents")
    p.add_argument(
        "--agents",
        default="hier-scripted",
        help="comma list: hier-scripted, hier-learned, flat-learned, flat-scripted",
    )
    p.add_argument("--tasks", help="comma list of task keys (default: all)")
    p.add_argument("--episodes", type=int, default=50)
    p.add_argument("--seeds", default="0,1,2")
    p.add_argument("--csv", help="also write rows to this CSV file")
    p.add_argument("--quiet", action="store_true")
    p.set_defaults(fn=cmd_bench)

    p = sub.add_parser("serve", help="start the live session HTTP service")
    p.add_argument("--host", default=None)
    p.add_argument("--port", type=int, default=None)
    p.add_argument("--log-dir", default=None)
    p.set_defaults(fn=cmd_serve)

    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    return args.fn(args)


if __name__ == "__main__":
    sys.exit(main())
