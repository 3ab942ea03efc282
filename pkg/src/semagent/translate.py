"""Bridge between the semantic vector world and the symbolic planner.

Three jobs: load the packaged domain for a profile, turn a semantic
configuration into planner facts (and back into problems), and turn each
plan step into the partial goal handed to the low-level policy.
"""

from __future__ import annotations

from dataclasses import replace
from functools import lru_cache
from importlib import resources

from .errors import TranslationError
from .pddl.ground import GroundAction, GroundTask, ground
from .pddl.model import Atom, DomainDef, Literal, ProblemDef
from .pddl.parser import parse_domain, parse_problem
from .profiles import EnvironmentProfile, PredicateKind
from .semantics import Config, ConfigLayout, Goal

# semantic kind <-> planner predicate spelling
_PRED_NAME = {
    PredicateKind.CLOSE: "close",
    PredicateKind.ABOVE: "above",
    PredicateKind.IN_BIN: "in-bin",
    PredicateKind.HOLDING: "holding",
}
_KIND_BY_PRED = {v: k for k, v in _PRED_NAME.items()}


def _read_domain_text(filename: str) -> str:
    return resources.files("semagent.pddl.domains").joinpath(filename).read_text()


@lru_cache(maxsize=None)
def _domain_cached(has_bin: bool) -> DomainDef:
    text = _read_domain_text("desk.pddl" if has_bin else "blocks.pddl")
    return parse_domain(text)


def domain_for(profile: EnvironmentProfile) -> DomainDef:
    return _domain_cached(profile.has_bin)


def load_problem_file(name: str, domain: DomainDef) -> ProblemDef:
    text = (
        resources.files("semagent.pddl.domains")
        .joinpath("problems")
        .joinpath(name)
        .read_text()
    )
    return parse_problem(text, domain)


def excluded_schemas(profile: EnvironmentProfile, domain: DomainDef) -> frozenset[str]:
    """Schemas whose effects touch predicates the profile does not track."""
    out = set()
    tracked = {_PRED_NAME[k] for k in profile.enabled}
    tracked |= {"holding", "handempty"}
    for schema in domain.actions:
        for lit in schema.effects:
            if lit.atom.name not in tracked:
                out.add(schema.name)
                break
    return frozenset(out)


def config_to_facts(config: Config, layout: ConfigLayout) -> tuple[Atom, ...]:
    """Planner init facts for a semantic configuration.

    Close pairs are emitted in their canonical orientation only; the
    domain effects keep both orientations in sync from then on. The only
    derived fact is handempty, true exactly when nothing is held.
    """
    facts: list[Atom] = []
    holding_any = False
    for atom, bit in zip(layout.atoms, config):
        if not bit:
            continue
        facts.append(Atom(_PRED_NAME[atom.kind], atom.args))
        if atom.kind is PredicateKind.HOLDING:
            holding_any = True
    if not holding_any:
        facts.append(Atom("handempty"))
    return tuple(facts)


def goal_to_literals(goal: Goal, layout: ConfigLayout) -> tuple[Literal, ...]:
    lits: list[Literal] = []
    for atom, target, mask in zip(layout.atoms, goal.target, goal.mask):
        if not mask:
            continue
        lits.append(Literal(Atom(_PRED_NAME[atom.kind], atom.args), positive=bool(target)))
    return tuple(lits)


def emit_problem(
    layout: ConfigLayout,
    config: Config,
    goal: Goal,
    name: str = "live",
    objects: tuple[str, ...] | None = None,
) -> ProblemDef:
    profile = layout.profile
    domain = domain_for(profile)
    objs = objects if objects is not None else profile.objects
    obj_type = "block" if "block" in domain.types else "object"
    return ProblemDef(
        name=name,
        domain=domain.name,
        objects=tuple((o, obj_type) for o in objs),
        init=config_to_facts(config, layout),
        goal=goal_to_literals(goal, layout),
    )


# placements that carry an object into a new neighborhood
_DISPLACING_SCHEMAS = ("put-near", "stack-on")


def _with_motion_deletes(task: GroundTask) -> GroundTask:
    """Void the moved object's bystander proximities on placement.

    A put-near or stack-on only guarantees where the carried object
    ends up relative to its target; every close pair it held with other
    objects is destroyed by the displacement. Without these deletes the
    planner happily routes one object between two far-apart partners
    and expects both proximities to survive.
    """
    rewritten = []
    changed = False
    for action in task.actions:
        if action.schema in _DISPLACING_SCHEMAS:
            moved, target = action.args[0], action.args[1]
            stale = 0
            for i, atom in enumerate(task.atoms):
                if atom.name == "close" and moved in atom.args:
                    other = atom.args[1] if atom.args[0] == moved else atom.args[0]
                    if other != target:
                        stale |= 1 << i
            if stale:
                action = replace(action, delete=action.delete | stale)
                changed = True
        rewritten.append(action)
    if not changed:
        return task
    return GroundTask(task.atoms, tuple(rewritten), task.init, task.goal_pos, task.goal_neg)


def ground_for(
    layout: ConfigLayout, config: Config, goal: Goal, name: str = "live"
) -> GroundTask:
    profile = layout.profile
    domain = domain_for(profile)
    problem = emit_problem(layout, config, goal, name=name)
    task = ground(domain, problem, exclude_schemas=excluded_schemas(profile, domain))
    return _with_motion_deletes(task)


def goal_set(layout: ConfigLayout) -> list[Goal]:
    """Every distinct sub-goal the profile's plans can produce.

    Grounding the profile domain and translating each action gives the
    pick/put goal for every object pair, deduplicated in action order.
    This is the goal pool the low-level policy trains against.
    """
    empty = Goal((0,) * layout.size, (0,) * layout.size)
    task = ground_for(layout, (0,) * layout.size, empty, name="goalset")
    out: list[Goal] = []
    seen: set[tuple[Config, Config]] = set()
    for action in task.actions:
        g = subgoal_for(action, layout)
        key = (g.target, g.mask)
        if key not in seen:
            seen.add(key)
            out.append(g)
    return out


def plan_to_goals(actions: tuple[GroundAction, ...], layout: ConfigLayout) -> list[Goal]:
    """Partial low-level goal for each plan step.

    Every step with effects on tracked predicates becomes a goal that
    pins exactly the relations the step is meant to change, plus the
    holding state that proves the manipulation finished.
    """
    return [subgoal_for(a, layout) for a in actions]


def subgoal_for(action: GroundAction, layout: ConfigLayout) -> Goal:
    target = [0] * layout.size
    mask = [0] * layout.size

    def pin(kind: PredicateKind, args: tuple[str, ...], value: int) -> None:
        i = layout.index(kind, *args)
        mask[i] = 1
        target[i] = value

    name = action.schema
    args = action.args
    if name in ("pick-from-table", "unstack"):
        pin(PredicateKind.HOLDING, (args[0],), 1)
    elif name == "put-near":
        pin(PredicateKind.HOLDING, (args[0],), 0)
        pin(PredicateKind.CLOSE, (args[0], args[1]), 1)
    elif name == "put-away":
        pin(PredicateKind.HOLDING, (args[0],), 0)
        pin(PredicateKind.CLOSE, (args[0], args[1]), 0)
    elif name == "stack-on":
        pin(PredicateKind.HOLDING, (args[0],), 0)
        pin(PredicateKind.ABOVE, (args[0], args[1]), 1)
        pin(PredicateKind.CLOSE, (args[0], args[1]), 1)
    elif name == "put-in-bin":
        pin(PredicateKind.HOLDING, (args[0],), 0)
        pin(PredicateKind.IN_BIN, (args[0],), 1)
    elif name == "put-on-table":
        pin(PredicateKind.HOLDING, (args[0],), 0)
        pin(PredicateKind.IN_BIN, (args[0],), 0)
    else:
        raise TranslationError(f"no goal translation for action {action.name!r}")
    return Goal(tuple(target), tuple(mask))
