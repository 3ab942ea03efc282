"""Environment profiles: which objects exist and which predicates are tracked.

A profile is the single source of truth shared by the simulator, the
semantic evaluator, the planner vocabulary and the policy input layout.
Keeping it in one hashable value avoids drift between those layers.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

COLORS: tuple[str, ...] = ("red", "green", "blue", "yellow")


class PredicateKind(str, enum.Enum):
    CLOSE = "close"
    ABOVE = "above"
    IN_BIN = "in_bin"
    HOLDING = "holding"


@dataclass(frozen=True)
class EnvironmentProfile:
    """Immutable description of one tabletop variant."""

    name: str
    objects: tuple[str, ...]
    enabled: frozenset[PredicateKind] = field(compare=True)
    has_bin: bool = False

    def __post_init__(self) -> None:
        if len(set(self.objects)) != len(self.objects):
            raise ValueError(f"duplicate object names: {self.objects}")
        if PredicateKind.IN_BIN in self.enabled and not self.has_bin:
            raise ValueError("in_bin enabled but profile has no bin")

    @property
    def n_objects(self) -> int:
        return len(self.objects)

    def tracks(self, kind: PredicateKind) -> bool:
        return kind in self.enabled


def two_blocks() -> EnvironmentProfile:
    return EnvironmentProfile(
        name="two_blocks",
        objects=COLORS[:2],
        enabled=frozenset(
            {PredicateKind.CLOSE, PredicateKind.ABOVE, PredicateKind.HOLDING}
        ),
    )


def three_blocks() -> EnvironmentProfile:
    return EnvironmentProfile(
        name="three_blocks",
        objects=COLORS[:3],
        enabled=frozenset({PredicateKind.CLOSE, PredicateKind.HOLDING}),
    )


def desk_cleanup(n_objects: int = 2) -> EnvironmentProfile:
    if not 1 <= n_objects <= len(COLORS):
        raise ValueError(f"desk_cleanup supports 1..{len(COLORS)} objects, got {n_objects}")
    return EnvironmentProfile(
        name=f"desk_cleanup_{n_objects}",
        objects=COLORS[:n_objects],
        enabled=frozenset({PredicateKind.HOLDING, PredicateKind.IN_BIN}),
        has_bin=True,
    )


_FACTORIES = {
    "two_blocks": two_blocks,
    "three_blocks": three_blocks,
    "desk_cleanup_2": lambda: desk_cleanup(2),
    "desk_cleanup_3": lambda: desk_cleanup(3),
    "desk_cleanup_4": lambda: desk_cleanup(4),
}


def profile_by_name(name: str) -> EnvironmentProfile:
    try:
        return _FACTORIES[name]()
    except KeyError:
        raise ValueError(f"unknown profile {name!r}; known: {sorted(_FACTORIES)}") from None
