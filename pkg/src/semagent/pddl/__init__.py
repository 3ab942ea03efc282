from .model import ActionSchema, Atom, DomainDef, Literal, Parameter, Predicate, ProblemDef
from .parser import parse_domain, parse_problem
from .printer import print_domain, print_problem
from .ground import GroundAction, GroundTask, ground

__all__ = [
    "ActionSchema",
    "Atom",
    "DomainDef",
    "Literal",
    "Parameter",
    "Predicate",
    "ProblemDef",
    "parse_domain",
    "parse_problem",
    "print_domain",
    "print_problem",
    "GroundAction",
    "GroundTask",
    "ground",
]
