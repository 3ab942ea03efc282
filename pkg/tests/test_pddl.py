from __future__ import annotations

import numpy as np
import pytest

from semagent.errors import ParseError, VocabularyError
from semagent.pddl.ground import ground
from semagent.pddl.model import (
    ActionSchema,
    Atom,
    DomainDef,
    Literal,
    Parameter,
    Predicate,
    ProblemDef,
)
from semagent.pddl.parser import parse_domain, parse_problem, tokenize
from semagent.pddl.printer import print_domain, print_problem
from semagent.translate import _read_domain_text, load_problem_file


@pytest.fixture(scope="module")
def blocks():
    return parse_domain(_read_domain_text("blocks.pddl"))


@pytest.fixture(scope="module")
def desk():
    return parse_domain(_read_domain_text("desk.pddl"))


# ---------------------------------------------------------------- parsing


def test_tokenizer_tracks_positions():
    toks = tokenize("(a bb\n  ccc) ; comment\n(d)")
    assert [(t.text, t.line, t.col) for t in toks] == [
        ("(", 1, 1),
        ("a", 1, 2),
        ("bb", 1, 4),
        ("ccc", 2, 3),
        (")", 2, 6),
        ("(", 3, 1),
        ("d", 3, 2),
        (")", 3, 3),
    ]


def test_blocks_domain_shape(blocks):
    assert blocks.name == "blocks-semantic"
    assert blocks.requirements == (
        ":strips",
        ":typing",
        ":equality",
        ":negative-preconditions",
    )
    assert blocks.types == ("block",)
    assert [p.name for p in blocks.predicates] == ["close", "above", "holding", "handempty"]
    assert [a.name for a in blocks.actions] == [
        "pick-from-table",
        "unstack",
        "put-near",
        "put-away",
        "stack-on",
    ]
    pick = blocks.actions[0]
    assert pick.params == (Parameter("?x", "block"), Parameter("?y", "block"))
    assert pick.inequalities == (("?x", "?y"),)
    assert Literal(Atom("above", ("?x", "?y")), False) in pick.preconditions
    assert pick.effects == (
        Literal(Atom("holding", ("?x",))),
        Literal(Atom("handempty"), False),
    )


def test_desk_domain_is_untyped(desk):
    assert desk.types == ()
    assert all(p.type == "object" for a in desk.actions for p in a.params)
    assert [a.name for a in desk.actions] == ["pick-from-table", "put-in-bin", "put-on-table"]


def test_case_is_normalized(blocks):
    d = parse_domain("(DEFINE (Domain D) (:Predicates (P ?X)))")
    assert d.name == "d"
    assert d.predicates[0].name == "p"
    assert d.predicates[0].params[0].name == "?x"


def test_golden_problems_parse(blocks, desk):
    mc2 = load_problem_file("mc2.pddl", blocks)
    assert mc2.objects == (("red", "block"), ("green", "block"))
    assert mc2.init == (Atom("handempty"),)
    assert mc2.goal == (Literal(Atom("close", ("red", "green"))),)
    ma3 = load_problem_file("ma3.pddl", blocks)
    assert len(ma3.init) == 4
    assert all(not lit.positive for lit in ma3.goal)
    dc4 = load_problem_file("dc4.pddl", desk)
    assert len(dc4.objects) == 4
    assert all(t == "object" for _, t in dc4.objects)


# ------------------------------------------------------------ round trips


def test_domain_round_trip(blocks, desk):
    for dom in (blocks, desk):
        assert parse_domain(print_domain(dom)) == dom


def test_problem_round_trip(blocks, desk):
    for fname, dom in [
        ("mc2.pddl", blocks),
        ("ma2.pddl", blocks),
        ("swap2.pddl", blocks),
        ("mc3.pddl", blocks),
        ("ma3.pddl", blocks),
        ("dc2.pddl", desk),
        ("dc3.pddl", desk),
        ("dc4.pddl", desk),
    ]:
        prob = load_problem_file(fname, dom)
        assert parse_problem(print_problem(prob), dom) == prob


def _random_domain(rng: np.random.Generator) -> DomainDef:
    n_types = int(rng.integers(0, 3))
    types = tuple(f"t{i}" for i in range(n_types))

    def rand_type() -> str:
        if n_types and rng.random() < 0.6:
            return str(types[int(rng.integers(0, n_types))])
        return "object"

    predicates = tuple(
        Predicate(
            f"p{i}",
            tuple(Parameter(f"?v{j}", rand_type()) for j in range(int(rng.integers(0, 4)))),
        )
        for i in range(int(rng.integers(1, 5)))
    )

    actions = []
    for i in range(int(rng.integers(0, 4))):
        params = tuple(
            Parameter(f"?x{j}", rand_type()) for j in range(int(rng.integers(0, 4)))
        )

        def bindable(pred: Predicate) -> list[tuple[str, ...]] | None:
            # one compatible argument tuple, or None
            args = []
            for pp in pred.params:
                pool = [
                    q.name for q in params if pp.type in ("object", q.type)
                ]
                if not pool:
                    return None
                args.append(pool[int(rng.integers(0, len(pool)))])
            return [tuple(args)]

        pres: list[Literal] = []
        effs: list[Literal] = []
        for out, budget in ((pres, 3), (effs, 3)):
            for _ in range(int(rng.integers(0, budget))):
                pred = predicates[int(rng.integers(0, len(predicates)))]
                got = bindable(pred)
                if got is None:
                    continue
                lit = Literal(Atom(pred.name, got[0]), bool(rng.random() < 0.7))
                if lit not in out:
                    out.append(lit)
        ineqs: list[tuple[str, str]] = []
        if len(params) >= 2 and rng.random() < 0.5:
            a, b = rng.choice(len(params), size=2, replace=False)
            ineqs.append((params[int(a)].name, params[int(b)].name))

        actions.append(
            ActionSchema(
                name=f"act{i}",
                params=params,
                preconditions=tuple(pres),
                inequalities=tuple(ineqs),
                effects=tuple(effs),
            )
        )

    reqs = tuple(
        r
        for r in (":strips", ":typing", ":equality", ":negative-preconditions")
        if rng.random() < 0.7
    )
    return DomainDef(
        name=f"dom{int(rng.integers(0, 1000))}",
        requirements=reqs,
        types=types,
        predicates=predicates,
        actions=tuple(actions),
    )


def _random_problem(rng: np.random.Generator, dom: DomainDef) -> ProblemDef:
    type_pool = dom.types + ("object",)
    objects = tuple(
        (f"o{i}", str(type_pool[int(rng.integers(0, len(type_pool)))]))
        for i in range(int(rng.integers(1, 5)))
    )

    def ground_atoms(pred: Predicate) -> Atom | None:
        args = []
        for pp in pred.params:
            pool = [n for n, t in objects if pp.type in ("object", t)]
            if not pool:
                return None
            args.append(pool[int(rng.integers(0, len(pool)))])
        return Atom(pred.name, tuple(args))

    init: list[Atom] = []
    for _ in range(int(rng.integers(0, 6))):
        a = ground_atoms(dom.predicates[int(rng.integers(0, len(dom.predicates)))])
        if a is not None and a not in init:
            init.append(a)
    goal: list[Literal] = []
    for _ in range(int(rng.integers(0, 4))):
        a = ground_atoms(dom.predicates[int(rng.integers(0, len(dom.predicates)))])
        if a is not None:
            lit = Literal(a, bool(rng.random() < 0.6))
            if lit not in goal:
                goal.append(lit)
    return ProblemDef(
        name=f"prob{int(rng.integers(0, 1000))}",
        domain=dom.name,
        objects=objects,
        init=tuple(init),
        goal=tuple(goal),
    )


def test_fuzz_round_trip_1000():
    rng = np.random.default_rng(20260815)
    for case in range(1000):
        dom = _random_domain(rng)
        assert parse_domain(print_domain(dom)) == dom, f"domain case {case}"
        prob = _random_problem(rng, dom)
        assert parse_problem(print_problem(prob), dom) == prob, f"problem case {case}"


# ---------------------------------------------------------------- errors


def expect_error(exc_type, text, fragment, *, domain=None):
    with pytest.raises(exc_type) as info:
        if domain is None:
            parse_domain(text)
        else:
            parse_problem(text, domain)
    err = info.value
    lines = text.split("\n")
    assert 1 <= err.line <= len(lines), str(err)
    at = lines[err.line - 1][err.column - 1 :]
    assert at.startswith(fragment), f"{err} points at {at[:20]!r}, expected {fragment!r}"
    return err


def test_parse_error_positions():
    err = expect_error(ParseError, "(define (domain d) (:junk))", ":junk")
    assert (err.line, err.column) == (1, 21)
    expect_error(ParseError, "(define (domain d)\n  (:requirements :adl))", ":adl")
    expect_error(ParseError, "(define (domain d)\n  (:types a - b))", "a - b")
    expect_error(
        ParseError,
        "(define (domain d) (:predicates (p))\n  (:action a :parameters (?x ?x)))",
        "?x)",
    )
    with pytest.raises(ParseError) as info:
        parse_domain("(define (domain d)")
    assert "unclosed" in str(info.value)
    with pytest.raises(ParseError):
        parse_domain("(define (domain d)))")


def test_unbalanced_and_empty_input():
    with pytest.raises(ParseError):
        parse_domain("")
    with pytest.raises(ParseError):
        parse_domain(")")


def test_vocabulary_error_positions(blocks):
    # unknown predicate in a precondition
    expect_error(
        VocabularyError,
        "(define (domain d) (:predicates (p ?x))\n"
        "  (:action a :parameters (?x)\n"
        "    :precondition (and (q ?x))))",
        "q ?x",
    )
    # arity mismatch
    expect_error(
        VocabularyError,
        "(define (domain d) (:predicates (p ?x))\n"
        "  (:action a :parameters (?x)\n"
        "    :effect (and (p ?x ?x))))",
        "p ?x ?x",
    )
    # unknown variable
    expect_error(
        VocabularyError,
        "(define (domain d) (:predicates (p ?x))\n"
        "  (:action a :parameters (?x)\n"
        "    :effect (and (p ?z))))",
        "?z",
    )
    # unknown type on a parameter
    expect_error(
        VocabularyError,
        "(define (domain d) (:types block)\n"
        "  (:predicates (p ?x - brick)))",
        "?x - brick",
    )
    # unknown object in a problem init
    expect_error(
        VocabularyError,
        "(define (problem x) (:domain blocks-semantic)\n"
        "  (:objects red - block)\n"
        "  (:init (holding cyan))\n  (:goal (and)))",
        "cyan",
        domain=blocks,
    )
    # object/parameter type mismatch
    expect_error(
        VocabularyError,
        "(define (problem x) (:domain blocks-semantic)\n"
        "  (:objects red)\n"
        "  (:init (holding red))\n  (:goal (and)))",
        "red)",
        domain=blocks,
    )
    # wrong domain reference
    expect_error(
        VocabularyError,
        "(define (problem x) (:domain desk-semantic)\n"
        "  (:objects red - block)\n  (:init)\n  (:goal (and)))",
        "desk-semantic",
        domain=blocks,
    )


def test_bare_equality_rejected():
    with pytest.raises(ParseError) as info:
        parse_domain(
            "(define (domain d) (:predicates (p ?x))\n"
            "  (:action a :parameters (?x ?y)\n"
            "    :precondition (and (= ?x ?y))))"
        )
    assert "not (=" in str(info.value)


# --------------------------------------------------------------- grounding


def test_ground_counts_two_blocks(blocks):
    prob = load_problem_file("mc2.pddl", blocks)
    task = ground(blocks, prob)
    # close 4 + above 4 + holding 2 + handempty = 11 atoms
    assert len(task.atoms) == 11
    # 5 schemas, 2 bindings each after the inequality filter
    assert len(task.actions) == 10
    assert all(a.args[0] != a.args[1] for a in task.actions)
    assert task.actions[0].name == "pick-from-table(red, green)"
    assert task.actions[1].name == "pick-from-table(green, red)"


def test_ground_excludes_schemas(blocks):
    prob = load_problem_file("mc3.pddl", blocks)
    task = ground(blocks, prob, exclude_schemas={"stack-on", "unstack"})
    assert len(task.actions) == 3 * 6
    assert not any(a.schema in ("stack-on", "unstack") for a in task.actions)


def test_ground_transitions(blocks):
    prob = load_problem_file("mc2.pddl", blocks)
    task = ground(blocks, prob)
    state = task.init
    assert task.facts(state) == ("(handempty)",)
    pick = task.action_by_name("pick-from-table(red, green)")
    assert task.applicable(state, pick)
    state = task.apply(state, pick)
    assert set(task.facts(state)) == {"(holding red)"}
    assert not task.applicable(state, pick)  # hand no longer empty
    put = task.action_by_name("put-near(red, green)")
    state = task.apply(state, put)
    assert set(task.facts(state)) == {
        "(close red green)",
        "(close green red)",
        "(handempty)",
    }
    assert task.goal_satisfied(state)


def test_ground_missing_literals(blocks):
    prob = load_problem_file("swap2.pddl", blocks)
    task = ground(blocks, prob)
    pick = task.action_by_name("pick-from-table(red, green)")
    missing = task.missing_literals(task.init, pick)
    assert missing == ["(not (above red green))"]
