from __future__ import annotations

import pytest

from conftest import random_walk
from semagent.errors import ConfigurationError, LayoutMismatchError
from semagent.geometry import BLOCK_HALF
from semagent.profiles import PredicateKind, desk_cleanup, three_blocks, two_blocks
from semagent.semantics import (
    ConfigLayout,
    Goal,
    evaluate,
    full_goal,
    goal_from_atoms,
)
from semagent.world import BlockState, SceneInitializer, WorldState


def make_state(blocks, held=None, has_bin=False):
    return WorldState(
        tick=0,
        gripper=(0.3, 0.3, 0.1),
        grip_closed=held is not None,
        held=held,
        blocks=tuple(blocks),
        has_bin=has_bin,
    )


# ---------------------------------------------------------------- layout


def test_two_blocks_layout_order():
    layout = ConfigLayout(two_blocks())
    assert layout.atom_names() == (
        "close(red, green)",
        "above(red, green)",
        "above(green, red)",
        "holding(red)",
        "holding(green)",
    )
    assert layout.size == 5


def test_three_blocks_layout_order():
    layout = ConfigLayout(three_blocks())
    assert layout.atom_names() == (
        "close(red, green)",
        "close(red, blue)",
        "close(green, blue)",
        "holding(red)",
        "holding(green)",
        "holding(blue)",
    )


def test_desk_layout_order():
    layout = ConfigLayout(desk_cleanup(2))
    assert layout.atom_names() == (
        "in_bin(red)",
        "in_bin(green)",
        "holding(red)",
        "holding(green)",
    )


def test_index_normalizes_close_argument_order():
    layout = ConfigLayout(three_blocks())
    i = layout.index(PredicateKind.CLOSE, "blue", "red")
    assert str(layout.atoms[i]) == "close(red, blue)"


def test_index_rejects_foreign_atoms():
    layout = ConfigLayout(two_blocks())
    with pytest.raises(LayoutMismatchError):
        layout.index(PredicateKind.IN_BIN, "red")
    with pytest.raises(LayoutMismatchError):
        layout.index(PredicateKind.CLOSE, "red", "yellow")


# --------------------------------------------------------------- evaluate


def test_evaluate_far_blocks():
    layout = ConfigLayout(two_blocks())
    s = make_state(
        [BlockState("red", (0.2, 0.2, BLOCK_HALF)), BlockState("green", (0.4, 0.4, BLOCK_HALF))]
    )
    assert evaluate(s, layout) == (0, 0, 0, 0, 0)


def test_evaluate_close_and_stacked():
    layout = ConfigLayout(two_blocks())
    s = make_state(
        [
            BlockState("red", (0.3, 0.3, 0.075), stacked_on="green"),
            BlockState("green", (0.3, 0.3, BLOCK_HALF)),
        ]
    )
    assert evaluate(s, layout) == (1, 1, 0, 0, 0)


def test_evaluate_holding():
    layout = ConfigLayout(two_blocks())
    s = make_state(
        [BlockState("red", (0.3, 0.3, 0.075)), BlockState("green", (0.1, 0.1, BLOCK_HALF))],
        held="red",
    )
    assert evaluate(s, layout) == (0, 0, 0, 1, 0)


def test_evaluate_close_is_xy_distance_at_threshold():
    layout = ConfigLayout(two_blocks())
    near = make_state(
        [BlockState("red", (0.2, 0.2, BLOCK_HALF)), BlockState("green", (0.279, 0.2, BLOCK_HALF))]
    )
    assert evaluate(near, layout)[0] == 1
    apart = make_state(
        [BlockState("red", (0.2, 0.2, BLOCK_HALF)), BlockState("green", (0.281, 0.2, BLOCK_HALF))]
    )
    assert evaluate(apart, layout)[0] == 0
    # height does not matter: a block hovering over another still counts
    hover = make_state(
        [BlockState("red", (0.2, 0.2, 0.075)), BlockState("green", (0.2, 0.2, BLOCK_HALF))],
        held="red",
    )
    assert evaluate(hover, layout)[0] == 1


def test_evaluate_above_is_transitive():
    layout = ConfigLayout(two_blocks())
    # two_blocks only has direct pairs; build a 3-tower on a profile that
    # tracks above via a synthetic two-block check instead
    s = make_state(
        [
            BlockState("red", (0.3, 0.3, 0.125), stacked_on="green"),
            BlockState("green", (0.3, 0.3, 0.075), stacked_on=None),
        ]
    )
    assert evaluate(s, layout) == (1, 1, 0, 0, 0)


def test_evaluate_in_bin():
    layout = ConfigLayout(desk_cleanup(2))
    s = make_state(
        [
            BlockState("red", (0.49, 0.49, BLOCK_HALF), in_bin=True),
            BlockState("green", (0.2, 0.2, BLOCK_HALF)),
        ],
        has_bin=True,
    )
    assert evaluate(s, layout) == (1, 0, 0, 0)


# ------------------------------------------------------------- invariants


WALKS = [
    (two_blocks(), SceneInitializer.STACKED_RANDOM_ORDER),
    (two_blocks(), SceneInitializer.ALL_FAR),
    (three_blocks(), SceneInitializer.ALL_CLOSE),
    (desk_cleanup(3), SceneInitializer.SCATTERED_WITH_BIN),
]


@pytest.mark.parametrize("profile,init", WALKS)
def test_semantic_invariants_on_random_walks(profile, init):
    layout = ConfigLayout(profile)
    objs = profile.objects
    for seed in range(4):
        for s in random_walk(profile, init, seed, 300):
            cfg = evaluate(s, layout)
            by = {str(a): v for a, v in zip(layout.atoms, cfg)}
            if profile.tracks(PredicateKind.HOLDING):
                held = [o for o in objs if by[f"holding({o})"]]
                assert len(held) <= 1
            if profile.tracks(PredicateKind.ABOVE):
                for a in objs:
                    for b in objs:
                        if a == b:
                            continue
                        if by[f"above({a}, {b})"]:
                            assert not by[f"above({b}, {a})"]
                            i, j = sorted((objs.index(a), objs.index(b)))
                            assert by[f"close({objs[i]}, {objs[j]})"]
                            assert not by[f"holding({a})"]
            if profile.tracks(PredicateKind.IN_BIN):
                for o in objs:
                    if by[f"in_bin({o})"]:
                        assert not by[f"holding({o})"]


# ------------------------------------------------------------------ goals


def test_goal_satisfaction_respects_mask():
    g = Goal(target=(1, 0, 0, 0, 0), mask=(1, 0, 0, 0, 1))
    assert g.satisfied((1, 1, 1, 1, 0))
    assert not g.satisfied((0, 0, 0, 0, 0))
    assert not g.satisfied((1, 0, 0, 0, 1))


def test_goal_shape_checks():
    with pytest.raises(LayoutMismatchError):
        Goal(target=(1, 0), mask=(1,))
    with pytest.raises(ConfigurationError):
        Goal(target=(1, 1), mask=(1, 0))  # unmasked target bit must be 0
    g = Goal(target=(1, 0), mask=(1, 1))
    with pytest.raises(LayoutMismatchError):
        g.satisfied((1, 0, 0))


def test_goal_from_atoms():
    layout = ConfigLayout(two_blocks())
    g = goal_from_atoms(layout, {"close(red, green)": True, "holding(red)": False})
    assert g.target == (1, 0, 0, 0, 0)
    assert g.mask == (1, 0, 0, 1, 0)
    with pytest.raises(LayoutMismatchError):
        goal_from_atoms(layout, {"in_bin(red)": True})


def test_full_goal_pins_everything():
    g = full_goal((1, 0, 1))
    assert g.mask == (1, 1, 1)
    assert g.satisfied((1, 0, 1))
    assert not g.satisfied((1, 0, 0))


def test_unmet_atoms_names():
    layout = ConfigLayout(two_blocks())
    g = goal_from_atoms(layout, {"close(red, green)": True, "holding(red)": False})
    unmet = g.unmet_atoms((0, 0, 0, 1, 0), layout)
    assert unmet == ["close(red, green)=1", "holding(red)=0"]
