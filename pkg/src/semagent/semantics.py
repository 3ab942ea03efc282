"""Semantic predicate layer: world states projected to binary vectors.

The layout of the vector is fixed by the profile and shared verbatim by
the planner bridge, the reward function, hindsight relabeling and the
service API. Order: close over unordered pairs (lower index first), then
above over ordered pairs, then in_bin per object, then holding per
object. Partial goals are a target vector plus a mask over the same
layout.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations, permutations

from .errors import ConfigurationError, LayoutMismatchError
from .geometry import CLOSE_THRESHOLD, dist_xy
from .profiles import EnvironmentProfile, PredicateKind
from .world import WorldState

Config = tuple[int, ...]


@dataclass(frozen=True)
class Atom:
    """One named entry of the semantic vector, e.g. close(red, green)."""

    kind: PredicateKind
    args: tuple[str, ...]

    def __str__(self) -> str:
        return f"{self.kind.value}({', '.join(self.args)})"


class ConfigLayout:
    """Index map between named atoms and vector positions for one profile."""

    def __init__(self, profile: EnvironmentProfile):
        self.profile = profile
        atoms: list[Atom] = []
        objs = profile.objects
        if profile.tracks(PredicateKind.CLOSE):
            for a, b in combinations(objs, 2):
                atoms.append(Atom(PredicateKind.CLOSE, (a, b)))
        if profile.tracks(PredicateKind.ABOVE):
            for a, b in permutations(objs, 2):
                atoms.append(Atom(PredicateKind.ABOVE, (a, b)))
        if profile.tracks(PredicateKind.IN_BIN):
            for a in objs:
                atoms.append(Atom(PredicateKind.IN_BIN, (a,)))
        if profile.tracks(PredicateKind.HOLDING):
            for a in objs:
                atoms.append(Atom(PredicateKind.HOLDING, (a,)))
        self.atoms: tuple[Atom, ...] = tuple(atoms)
        self._index: dict[Atom, int] = {atom: i for i, atom in enumerate(atoms)}

    @property
    def size(self) -> int:
        return len(self.atoms)

    def index(self, kind: PredicateKind, *args: str) -> int:
        # close is symmetric and stored once per pair
        objs = self.profile.objects
        if kind is PredicateKind.CLOSE and len(args) == 2 and set(args) <= set(objs):
            a, b = args
            if objs.index(a) > objs.index(b):
                args = (b, a)
        key = Atom(kind, tuple(args))
        try:
            return self._index[key]
        except KeyError:
            raise LayoutMismatchError(
                f"{key} is not part of the {self.profile.name} layout"
            ) from None

    def atom_names(self) -> tuple[str, ...]:
        return tuple(str(a) for a in self.atoms)


def _above_closure(state: WorldState) -> set[tuple[str, str]]:
    pairs: set[tuple[str, str]] = set()
    for b in state.blocks:
        below = b.stacked_on
        while below is not None:
            pairs.add((b.name, below))
            below = state.block(below).stacked_on
    return pairs


def evaluate(state: WorldState, layout: ConfigLayout) -> Config:
    """Project a world state onto the profile's semantic vector."""
    above = _above_closure(state)
    bits: list[int] = []
    for atom in layout.atoms:
        if atom.kind is PredicateKind.CLOSE:
            a, b = atom.args
            v = dist_xy(state.block(a).pos, state.block(b).pos) <= CLOSE_THRESHOLD
        elif atom.kind is PredicateKind.ABOVE:
            v = atom.args in above
        elif atom.kind is PredicateKind.IN_BIN:
            v = state.block(atom.args[0]).in_bin
        elif atom.kind is PredicateKind.HOLDING:
            v = state.held == atom.args[0]
        else:  # pragma: no cover
            raise ConfigurationError(f"unhandled predicate kind {atom.kind}")
        bits.append(int(v))
    return tuple(bits)


@dataclass(frozen=True)
class Goal:
    """Partial semantic configuration: target values under a mask."""

    target: Config
    mask: Config

    def __post_init__(self) -> None:
        if len(self.target) != len(self.mask):
            raise LayoutMismatchError(
                f"target has {len(self.target)} entries, mask has {len(self.mask)}"
            )
        for t, m in zip(self.target, self.mask):
            if m not in (0, 1) or t not in (0, 1):
                raise ConfigurationError("goal entries must be 0 or 1")
            if m == 0 and t != 0:
                raise ConfigurationError("unmasked goal entries must be zero")

    @property
    def size(self) -> int:
        return len(self.target)

    def satisfied(self, config: Config) -> bool:
        if len(config) != len(self.target):
            raise LayoutMismatchError(
                f"config has {len(config)} entries, goal expects {len(self.target)}"
            )
        return all(
            c == t for c, t, m in zip(config, self.target, self.mask) if m
        )

    def unmet_atoms(self, config: Config, layout: ConfigLayout) -> list[str]:
        out = []
        for i, (c, t, m) in enumerate(zip(config, self.target, self.mask)):
            if m and c != t:
                out.append(f"{layout.atoms[i]}={t}")
        return out


def parse_atom_name(name: str) -> tuple[PredicateKind, tuple[str, ...]]:
    """Split "close(red, green)" into its kind and argument tuple."""
    text = name.replace(" ", "")
    head, sep, rest = text.partition("(")
    if not sep or not rest.endswith(")"):
        raise LayoutMismatchError(f"{name!r} is not of the form kind(args)")
    try:
        kind = PredicateKind(head)
    except ValueError:
        raise LayoutMismatchError(f"{name!r} does not name a known relation") from None
    args = tuple(a for a in rest[:-1].split(",") if a)
    return kind, args


def goal_from_atoms(layout: ConfigLayout, assignments: dict[str, bool]) -> Goal:
    """Build a goal from text atoms like {"close(red, green)": True}.

    Unordered relations accept either argument order.
    """
    target = [0] * layout.size
    mask = [0] * layout.size
    for name, value in assignments.items():
        kind, args = parse_atom_name(name)
        idx = layout.index(kind, *args)
        mask[idx] = 1
        target[idx] = int(bool(value))
    return Goal(tuple(target), tuple(mask))


def full_goal(config: Config) -> Goal:
    """Every entry pinned; used when relabeling against an achieved state."""
    return Goal(tuple(config), tuple(1 for _ in config))


def describe_goal(goal: Goal, layout: ConfigLayout) -> str:
    parts = [
        f"{layout.atoms[i]}={t}"
        for i, (t, m) in enumerate(zip(goal.target, goal.mask))
        if m
    ]
    return " & ".join(parts) if parts else "(empty)"
