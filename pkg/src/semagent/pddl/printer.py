"""Canonical text output for domains and problems.

The printer and parser round-trip: parsing printed output reproduces the
same AST values. Parameters of the default type print bare; typed ones
print with the `?x - t` marker.
"""

from __future__ import annotations

from .model import DEFAULT_TYPE, ActionSchema, DomainDef, Literal, Parameter, ProblemDef


def _typed_list(entries: list[tuple[str, str]]) -> str:
    # a bare name before a typed one would be captured by that type when
    # reparsed, so mixed lists spell out the default type explicitly
    if all(t == DEFAULT_TYPE for _, t in entries):
        return " ".join(name for name, _ in entries)
    return " ".join(f"{name} - {t}" for name, t in entries)


def _params(params: tuple[Parameter, ...]) -> str:
    return _typed_list([(p.name, p.type) for p in params])


def _action(a: ActionSchema) -> str:
    lines = [f"  (:action {a.name}", f"    :parameters ({_params(a.params)})"]
    pre_parts = [lit.pddl() for lit in a.preconditions]
    pre_parts += [f"(not (= {x} {y}))" for x, y in a.inequalities]
    if pre_parts:
        lines.append(f"    :precondition (and {' '.join(pre_parts)})")
    if a.effects:
        lines.append(f"    :effect (and {' '.join(lit.pddl() for lit in a.effects)})")
    return "\n".join(lines) + ")"


def print_domain(domain: DomainDef) -> str:
    lines = [f"(define (domain {domain.name})"]
    if domain.requirements:
        lines.append(f"  (:requirements {' '.join(domain.requirements)})")
    if domain.types:
        lines.append(f"  (:types {' '.join(domain.types)})")
    if domain.predicates:
        decls = []
        for p in domain.predicates:
            body = _params(p.params)
            decls.append(f"({p.name} {body})" if body else f"({p.name})")
        lines.append("  (:predicates " + " ".join(decls) + ")")
    for a in domain.actions:
        lines.append(_action(a))
    return "\n".join(lines) + ")\n"


def _goal(goal: tuple[Literal, ...]) -> str:
    return "(and " + " ".join(lit.pddl() for lit in goal) + ")"


def print_problem(problem: ProblemDef) -> str:
    lines = [
        f"(define (problem {problem.name})",
        f"  (:domain {problem.domain})",
        f"  (:objects {_typed_list(list(problem.objects))})",
    ]
    if problem.init:
        lines.append("  (:init " + " ".join(a.pddl() for a in problem.init) + ")")
    else:
        lines.append("  (:init)")
    lines.append(f"  (:goal {_goal(problem.goal)})")
    return "\n".join(lines) + ")\n"
