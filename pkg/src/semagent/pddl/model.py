"""Typed AST for the planning language subset used by the agent.

Supported: STRIPS actions with flat typing, conjunctive preconditions
with negated atoms, parameter inequality constraints written
(not (= ?x ?y)), and conjunctive goals with negated atoms. No type
hierarchies, no conditional effects, no quantifiers, no costs.
"""

from __future__ import annotations

from dataclasses import dataclass, field

DEFAULT_TYPE = "object"


@dataclass(frozen=True)
class Atom:
    name: str
    args: tuple[str, ...] = ()

    def pddl(self) -> str:
        if not self.args:
            return f"({self.name})"
        return f"({self.name} {' '.join(self.args)})"

    def __str__(self) -> str:
        return self.pddl()


@dataclass(frozen=True)
class Literal:
    atom: Atom
    positive: bool = True

    def pddl(self) -> str:
        return self.atom.pddl() if self.positive else f"(not {self.atom.pddl()})"

    def negate(self) -> "Literal":
        return Literal(self.atom, not self.positive)


@dataclass(frozen=True)
class Parameter:
    name: str  # with the leading question mark
    type: str = DEFAULT_TYPE


@dataclass(frozen=True)
class Predicate:
    name: str
    params: tuple[Parameter, ...] = ()

    @property
    def arity(self) -> int:
        return len(self.params)


@dataclass(frozen=True)
class ActionSchema:
    name: str
    params: tuple[Parameter, ...]
    preconditions: tuple[Literal, ...]
    inequalities: tuple[tuple[str, str], ...]  # parameter pairs forced distinct
    effects: tuple[Literal, ...]


@dataclass(frozen=True)
class DomainDef:
    name: str
    requirements: tuple[str, ...]
    types: tuple[str, ...]
    predicates: tuple[Predicate, ...]
    actions: tuple[ActionSchema, ...]

    def predicate(self, name: str) -> Predicate | None:
        for p in self.predicates:
            if p.name == name:
                return p
        return None


@dataclass(frozen=True)
class ProblemDef:
    name: str
    domain: str
    objects: tuple[tuple[str, str], ...]  # (object name, type name)
    init: tuple[Atom, ...] = ()
    goal: tuple[Literal, ...] = field(default=())

    def object_names(self) -> tuple[str, ...]:
        return tuple(n for n, _ in self.objects)
