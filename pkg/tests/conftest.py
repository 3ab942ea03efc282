from __future__ import annotations

import numpy as np

from semagent.profiles import EnvironmentProfile
from semagent.world import (
    N_ACTIONS,
    SceneInitializer,
    WorldState,
    reset,
    step,
)


def random_walk(
    profile: EnvironmentProfile,
    initializer: SceneInitializer,
    seed: int,
    n_steps: int,
) -> list[WorldState]:
    """Seeded action-noise rollout; yields every visited state."""
    rng = np.random.default_rng(seed)
    state = reset(profile, initializer, seed)
    states = [state]
    for _ in range(n_steps):
        state = step(state, int(rng.integers(0, N_ACTIONS)))
        states.append(state)
    return states
