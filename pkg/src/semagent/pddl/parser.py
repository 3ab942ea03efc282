"""Recursive-descent parser for the planning subset, with positioned errors.

Every syntax problem raises ParseError and every use of an undeclared
name (predicate, type, object, variable) or an arity/type mismatch
raises VocabularyError; both carry the 1-based line and column of the
offending token. Input is case-insensitive and normalized to lower case.
"""

from __future__ import annotations

from dataclasses import dataclass

from ..errors import ParseError, VocabularyError
from .model import (
    DEFAULT_TYPE,
    ActionSchema,
    Atom,
    DomainDef,
    Literal,
    Parameter,
    Predicate,
    ProblemDef,
)

SUPPORTED_REQUIREMENTS = (
    ":strips",
    ":typing",
    ":equality",
    ":negative-preconditions",
)


@dataclass(frozen=True)
class Token:
    text: str
    line: int
    col: int


def tokenize(text: str) -> list[Token]:
    tokens: list[Token] = []
    line, col = 1, 1
    i = 0
    n = len(text)
    while i < n:
        c = text[i]
        if c == "\n":
            line += 1
            col = 1
            i += 1
        elif c in " \t\r":
            col += 1
            i += 1
        elif c == ";":
            while i < n and text[i] != "\n":
                i += 1
                col += 1
        elif c in "()":
            tokens.append(Token(c, line, col))
            col += 1
            i += 1
        else:
            start = i
            start_col = col
            while i < n and text[i] not in " \t\r\n();":
                i += 1
                col += 1
            tokens.append(Token(text[start:i].lower(), line, start_col))
    return tokens


class _Reader:
    def __init__(self, tokens: list[Token]):
        self._tokens = tokens
        self._pos = 0

    def _peek(self) -> Token | None:
        return self._tokens[self._pos] if self._pos < len(self._tokens) else None

    def read(self):
        tok = self._peek()
        if tok is None:
            last = self._tokens[-1] if self._tokens else Token("", 1, 1)
            raise ParseError("unexpected end of input", last.line, last.col)
        self._pos += 1
        if tok.text == "(":
            items = []
            while True:
                nxt = self._peek()
                if nxt is None:
                    raise ParseError("unclosed parenthesis", tok.line, tok.col)
                if nxt.text == ")":
                    self._pos += 1
                    return items
                items.append(self.read())
        if tok.text == ")":
            raise ParseError("unbalanced closing parenthesis", tok.line, tok.col)
        return tok

    def expect_done(self) -> None:
        tok = self._peek()
        if tok is not None:
            raise ParseError(f"trailing input: {tok.text!r}", tok.line, tok.col)


def _read_single(text: str):
    reader = _Reader(tokenize(text))
    sexp = reader.read()
    reader.expect_done()
    return sexp


def _head(sexp, what: str) -> Token:
    if not isinstance(sexp, list) or not sexp or not isinstance(sexp[0], Token):
        tok = sexp if isinstance(sexp, Token) else Token("?", 1, 1)
        raise ParseError(f"expected {what}", tok.line, tok.col)
    return sexp[0]


def _sym(sexp, what: str) -> Token:
    if not isinstance(sexp, Token):
        anchor = _head(sexp, what) if isinstance(sexp, list) and sexp else Token("?", 1, 1)
        raise ParseError(f"expected {what}, got a list", anchor.line, anchor.col)
    return sexp


def _parse_typed_names(items: list, *, variables: bool, what: str) -> list[tuple[Token, str]]:
    """Parse `a b - t c d - u e` name groups; untyped names get the default."""
    out: list[tuple[Token, str]] = []
    pending: list[Token] = []
    i = 0
    while i < len(items):
        tok = _sym(items[i], what)
        if tok.text == "-":
            if not pending:
                raise ParseError("dangling type marker", tok.line, tok.col)
            if i + 1 >= len(items):
                raise ParseError("missing type name after '-'", tok.line, tok.col)
            type_tok = _sym(items[i + 1], "type name")
            if type_tok.text.startswith("?") or type_tok.text == "-":
                raise ParseError("missing type name after '-'", type_tok.line, type_tok.col)
            for name in pending:
                out.append((name, type_tok.text))
            pending = []
            i += 2
            continue
        is_var = tok.text.startswith("?")
        if variables and not is_var:
            raise ParseError(f"expected a ?variable, got {tok.text!r}", tok.line, tok.col)
        if not variables and is_var:
            raise ParseError(f"expected a name, got variable {tok.text!r}", tok.line, tok.col)
        if len(tok.text) <= (1 if is_var else 0):
            raise ParseError("empty name", tok.line, tok.col)
        pending.append(tok)
        i += 1
    for name in pending:
        out.append((name, DEFAULT_TYPE))
    return out


def _check_type_known(type_name: str, tok: Token, types: tuple[str, ...]) -> None:
    if type_name != DEFAULT_TYPE and type_name not in types:
        raise VocabularyError(f"unknown type {type_name!r}", tok.line, tok.col)


def _parse_atom(
    sexp,
    domain_predicates: dict[str, Predicate],
    allowed_args: dict[str, str],
    types: tuple[str, ...],
    *,
    what: str,
) -> Atom:
    head = _head(sexp, f"{what} atom")
    pred = domain_predicates.get(head.text)
    if pred is None:
        raise VocabularyError(f"unknown predicate {head.text!r}", head.line, head.col)
    args = sexp[1:]
    if len(args) != pred.arity:
        raise VocabularyError(
            f"predicate {pred.name!r} takes {pred.arity} arguments, got {len(args)}",
            head.line,
            head.col,
        )
    names: list[str] = []
    for arg_sexp, param in zip(args, pred.params):
        arg = _sym(arg_sexp, "argument")
        if arg.text not in allowed_args:
            raise VocabularyError(f"unknown argument {arg.text!r}", arg.line, arg.col)
        arg_type = allowed_args[arg.text]
        if param.type not in (DEFAULT_TYPE, arg_type):
            raise VocabularyError(
                f"argument {arg.text!r} has type {arg_type!r}, expected {param.type!r}",
                arg.line,
                arg.col,
            )
        names.append(arg.text)
    return Atom(head.text, tuple(names))


def _parse_condition_list(sexp, what: str) -> list:
    """Unwrap (and e1 e2 ...) or treat a single element as a one-item list."""
    if isinstance(sexp, list) and sexp and isinstance(sexp[0], Token) and sexp[0].text == "and":
        return sexp[1:]
    return [sexp]


def parse_domain(text: str) -> DomainDef:
    sexp = _read_single(text)
    head = _head(sexp, "(define ...)")
    if head.text != "define":
        raise ParseError("expected (define (domain ...) ...)", head.line, head.col)
    if len(sexp) < 2:
        raise ParseError("missing (domain NAME)", head.line, head.col)
    dom_clause = sexp[1]
    dom_head = _head(dom_clause, "(domain NAME)")
    if dom_head.text != "domain" or len(dom_clause) != 2:
        raise ParseError("expected (domain NAME)", dom_head.line, dom_head.col)
    name = _sym(dom_clause[1], "domain name").text

    requirements: tuple[str, ...] = ()
    types: tuple[str, ...] = ()
    predicates: list[Predicate] = []
    actions: list[ActionSchema] = []
    for clause in sexp[2:]:
        chead = _head(clause, "domain section")
        if chead.text == ":requirements":
            reqs = []
            for item in clause[1:]:
                tok = _sym(item, "requirement")
                if tok.text not in SUPPORTED_REQUIREMENTS:
                    raise ParseError(
                        f"unsupported requirement {tok.text!r}", tok.line, tok.col
                    )
                reqs.append(tok.text)
            requirements = tuple(reqs)
        elif chead.text == ":types":
            entries = _parse_typed_names(clause[1:], variables=False, what="type name")
            for tok, parent in entries:
                if parent != DEFAULT_TYPE:
                    raise ParseError(
                        "type hierarchies are not supported", tok.line, tok.col
                    )
            types = tuple(tok.text for tok, _ in entries)
        elif chead.text == ":predicates":
            for pred_sexp in clause[1:]:
                phead = _head(pred_sexp, "predicate declaration")
                params = _parse_typed_names(pred_sexp[1:], variables=True, what="parameter")
                for tok, t in params:
                    _check_type_known(t, tok, types)
                predicates.append(
                    Predicate(
                        phead.text,
                        tuple(Parameter(tok.text, t) for tok, t in params),
                    )
                )
        elif chead.text == ":action":
            actions.append(_parse_action(clause, {p.name: p for p in predicates}, types))
        else:
            raise ParseError(f"unknown domain section {chead.text!r}", chead.line, chead.col)

    return DomainDef(
        name=name,
        requirements=requirements,
        types=types,
        predicates=tuple(predicates),
        actions=tuple(actions),
    )


def _parse_action(
    clause: list, predicates: dict[str, Predicate], types: tuple[str, ...]
) -> ActionSchema:
    chead = clause[0]
    if len(clause) < 2:
        raise ParseError("missing action name", chead.line, chead.col)
    name = _sym(clause[1], "action name").text

    sections: dict[str, object] = {}
    i = 2
    while i < len(clause):
        key = _sym(clause[i], "action keyword")
        if key.text not in (":parameters", ":precondition", ":effect"):
            raise ParseError(f"unknown action keyword {key.text!r}", key.line, key.col)
        if i + 1 >= len(clause):
            raise ParseError(f"missing value after {key.text}", key.line, key.col)
        if key.text in sections:
            raise ParseError(f"duplicate {key.text}", key.line, key.col)
        sections[key.text] = clause[i + 1]
        i += 2

    params_sexp = sections.get(":parameters", [])
    if not isinstance(params_sexp, list):
        tok = params_sexp
        raise ParseError("expected a parameter list", tok.line, tok.col)
    param_entries = _parse_typed_names(params_sexp, variables=True, what="parameter")
    params: list[Parameter] = []
    seen: dict[str, str] = {}
    for tok, t in param_entries:
        _check_type_known(t, tok, types)
        if tok.text in seen:
            raise ParseError(f"duplicate parameter {tok.text!r}", tok.line, tok.col)
        seen[tok.text] = t
        params.append(Parameter(tok.text, t))

    pre: list[Literal] = []
    inequalities: list[tuple[str, str]] = []
    if ":precondition" in sections:
        for entry in _parse_condition_list(sections[":precondition"], "precondition"):
            ehead = _head(entry, "precondition entry")
            if ehead.text == "not":
                if len(entry) != 2:
                    raise ParseError("(not ...) takes one argument", ehead.line, ehead.col)
                inner = entry[1]
                ihead = _head(inner, "negated entry")
                if ihead.text == "=":
                    if len(inner) != 3:
                        raise ParseError("(= ...) takes two arguments", ihead.line, ihead.col)
                    a = _sym(inner[1], "variable")
                    b = _sym(inner[2], "variable")
                    for v in (a, b):
                        if v.text not in seen:
                            raise VocabularyError(
                                f"unknown variable {v.text!r}", v.line, v.col
                            )
                    inequalities.append((a.text, b.text))
                else:
                    pre.append(
                        Literal(_parse_atom(inner, predicates, seen, types, what="precondition"), False)
                    )
            elif ehead.text == "=":
                raise ParseError(
                    "bare equality is not supported, use (not (= ?x ?y))",
                    ehead.line,
                    ehead.col,
                )
            else:
                pre.append(
                    Literal(_parse_atom(entry, predicates, seen, types, what="precondition"), True)
                )

    effects: list[Literal] = []
    if ":effect" in sections:
        for entry in _parse_condition_list(sections[":effect"], "effect"):
            ehead = _head(entry, "effect entry")
            if ehead.text == "not":
                if len(entry) != 2:
                    raise ParseError("(not ...) takes one argument", ehead.line, ehead.col)
                effects.append(
                    Literal(_parse_atom(entry[1], predicates, seen, types, what="effect"), False)
                )
            else:
                effects.append(
                    Literal(_parse_atom(entry, predicates, seen, types, what="effect"), True)
                )

    return ActionSchema(
        name=name,
        params=tuple(params),
        preconditions=tuple(pre),
        inequalities=tuple(inequalities),
        effects=tuple(effects),
    )


def parse_problem(text: str, domain: DomainDef) -> ProblemDef:
    sexp = _read_single(text)
    head = _head(sexp, "(define ...)")
    if head.text != "define":
        raise ParseError("expected (define (problem ...) ...)", head.line, head.col)
    if len(sexp) < 2:
        raise ParseError("missing (problem NAME)", head.line, head.col)
    prob_clause = sexp[1]
    phead = _head(prob_clause, "(problem NAME)")
    if phead.text != "problem" or len(prob_clause) != 2:
        raise ParseError("expected (problem NAME)", phead.line, phead.col)
    name = _sym(prob_clause[1], "problem name").text

    predicates = {p.name: p for p in domain.predicates}
    domain_name: str | None = None
    objects: list[tuple[str, str]] = []
    init: list[Atom] = []
    goal: list[Literal] = []
    seen_sections: set[str] = set()

    for clause in sexp[2:]:
        chead = _head(clause, "problem section")
        if chead.text in seen_sections:
            raise ParseError(f"duplicate section {chead.text!r}", chead.line, chead.col)
        seen_sections.add(chead.text)
        if chead.text == ":domain":
            if len(clause) != 2:
                raise ParseError("(:domain NAME)", chead.line, chead.col)
            tok = _sym(clause[1], "domain name")
            if tok.text != domain.name:
                raise VocabularyError(
                    f"problem is for domain {tok.text!r}, expected {domain.name!r}",
                    tok.line,
                    tok.col,
                )
            domain_name = tok.text
        elif chead.text == ":objects":
            entries = _parse_typed_names(clause[1:], variables=False, what="object name")
            names_seen = set()
            for tok, t in entries:
                _check_type_known(t, tok, domain.types)
                if tok.text in names_seen:
                    raise ParseError(f"duplicate object {tok.text!r}", tok.line, tok.col)
                names_seen.add(tok.text)
                objects.append((tok.text, t))
        elif chead.text == ":init":
            obj_types = dict(objects)
            for atom_sexp in clause[1:]:
                init.append(
                    _parse_atom(atom_sexp, predicates, obj_types, domain.types, what="init")
                )
        elif chead.text == ":goal":
            if len(clause) != 2:
                raise ParseError("(:goal CONDITION)", chead.line, chead.col)
            obj_types = dict(objects)
            for entry in _parse_condition_list(clause[1], "goal"):
                ehead = _head(entry, "goal entry")
                if ehead.text == "not":
                    if len(entry) != 2:
                        raise ParseError("(not ...) takes one argument", ehead.line, ehead.col)
                    goal.append(
                        Literal(
                            _parse_atom(entry[1], predicates, obj_types, domain.types, what="goal"),
                            False,
                        )
                    )
                else:
                    goal.append(
                        Literal(
                            _parse_atom(entry, predicates, obj_types, domain.types, what="goal"),
                            True,
                        )
                    )
        else:
            raise ParseError(f"unknown problem section {chead.text!r}", chead.line, chead.col)

    if domain_name is None:
        raise ParseError("problem has no (:domain ...) section", head.line, head.col)

    return ProblemDef(
        name=name,
        domain=domain_name,
        objects=tuple(objects),
        init=tuple(init),
        goal=tuple(goal),
    )
