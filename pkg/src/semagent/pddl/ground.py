"""Grounding: schemas + objects to a propositional task over int bitsets.

States are plain python ints, one bit per ground atom. Actions carry
positive/negative precondition masks and add/delete masks, so a
transition is two logical ops. Action order is schema order crossed with
object-index order, which downstream search relies on for deterministic
tie-breaking.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import product

from ..errors import VocabularyError
from .model import DEFAULT_TYPE, Atom, DomainDef, ProblemDef


@dataclass(frozen=True)
class GroundAction:
    index: int
    schema: str
    args: tuple[str, ...]
    pre_pos: int
    pre_neg: int
    add: int
    delete: int

    @property
    def name(self) -> str:
        if not self.args:
            return f"{self.schema}()"
        return f"{self.schema}({', '.join(self.args)})"


class GroundTask:
    def __init__(
        self,
        atoms: tuple[Atom, ...],
        actions: tuple[GroundAction, ...],
        init: int,
        goal_pos: int,
        goal_neg: int,
    ):
        self.atoms = atoms
        self.atom_index = {a: i for i, a in enumerate(atoms)}
        self.actions = actions
        self.init = init
        self.goal_pos = goal_pos
        self.goal_neg = goal_neg

    def applicable(self, state: int, action: GroundAction) -> bool:
        return (state & action.pre_pos) == action.pre_pos and not (state & action.pre_neg)

    def apply(self, state: int, action: GroundAction) -> int:
        return (state & ~action.delete) | action.add

    def goal_satisfied(self, state: int) -> bool:
        return (state & self.goal_pos) == self.goal_pos and not (state & self.goal_neg)

    def facts(self, state: int) -> tuple[str, ...]:
        return tuple(a.pddl() for i, a in enumerate(self.atoms) if state >> i & 1)

    def state_from_atoms(self, atoms: tuple[Atom, ...] | frozenset[Atom]) -> int:
        state = 0
        for atom in atoms:
            try:
                state |= 1 << self.atom_index[atom]
            except KeyError:
                raise VocabularyError(f"atom {atom.pddl()} is not in this task") from None
        return state

    def action_by_name(self, name: str) -> GroundAction | None:
        squeezed = name.replace(" ", "")
        for a in self.actions:
            if a.name.replace(" ", "") == squeezed:
                return a
        return None

    def missing_literals(self, state: int, action: GroundAction) -> list[str]:
        out = []
        for i, atom in enumerate(self.atoms):
            bit = 1 << i
            if action.pre_pos & bit and not state & bit:
                out.append(atom.pddl())
            if action.pre_neg & bit and state & bit:
                out.append(f"(not {atom.pddl()})")
        return out

    def unmet_goal_literals(self, state: int) -> list[str]:
        out = []
        for i, atom in enumerate(self.atoms):
            bit = 1 << i
            if self.goal_pos & bit and not state & bit:
                out.append(atom.pddl())
            if self.goal_neg & bit and state & bit:
                out.append(f"(not {atom.pddl()})")
        return out


def ground(
    domain: DomainDef,
    problem: ProblemDef,
    exclude_schemas: frozenset[str] | set[str] = frozenset(),
) -> GroundTask:
    objects = problem.objects
    by_type: dict[str, list[str]] = {}
    for name, t in objects:
        by_type.setdefault(t, []).append(name)

    def candidates(t: str) -> list[str]:
        if t == DEFAULT_TYPE:
            return [n for n, _ in objects]
        return by_type.get(t, [])

    atoms: list[Atom] = []
    for pred in domain.predicates:
        pools = [candidates(p.type) for p in pred.params]
        for combo in product(*pools):
            atoms.append(Atom(pred.name, combo))
    index = {a: i for i, a in enumerate(atoms)}

    def mask(ground_atoms) -> int:
        m = 0
        for a in ground_atoms:
            m |= 1 << index[a]
        return m

    actions: list[GroundAction] = []
    for schema in domain.actions:
        if schema.name in exclude_schemas:
            continue
        pools = [candidates(p.type) for p in schema.params]
        for combo in product(*pools):
            binding = {p.name: obj for p, obj in zip(schema.params, combo)}
            if any(binding[x] == binding[y] for x, y in schema.inequalities):
                continue
            pre_pos = pre_neg = add = delete = 0
            for lit in schema.preconditions:
                ga = Atom(lit.atom.name, tuple(binding[v] for v in lit.atom.args))
                if lit.positive:
                    pre_pos |= 1 << index[ga]
                else:
                    pre_neg |= 1 << index[ga]
            for lit in schema.effects:
                ga = Atom(lit.atom.name, tuple(binding[v] for v in lit.atom.args))
                if lit.positive:
                    add |= 1 << index[ga]
                else:
                    delete |= 1 << index[ga]
            # an atom both added and deleted resolves to added
            delete &= ~add
            actions.append(
                GroundAction(
                    index=len(actions),
                    schema=schema.name,
                    args=combo,
                    pre_pos=pre_pos,
                    pre_neg=pre_neg,
                    add=add,
                    delete=delete,
                )
            )

    init = 0
    for atom in problem.init:
        init |= 1 << index[atom]
    goal_pos = goal_neg = 0
    for lit in problem.goal:
        bit = 1 << index[lit.atom]
        if lit.positive:
            goal_pos |= bit
        else:
            goal_neg |= bit

    return GroundTask(tuple(atoms), tuple(actions), init, goal_pos, goal_neg)
