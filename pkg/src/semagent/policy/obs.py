"""Feature encoding for the low-level policy.

Observation: gripper pose, grip bit, block positions relative to the
gripper, pairwise XY distances, a one-hot of which block is held (last
slot means none), and the currently achieved semantic configuration.
The achieved bits are the agent's own relation sensor; exposing them
lets the value function compare goal pins against the present state
instead of re-deriving every relation from raw geometry. Goals are
target/mask pairs interleaved per semantic atom so the network sees
which entries are pinned.
"""

from __future__ import annotations

from functools import lru_cache
from itertools import combinations

import numpy as np

from ..geometry import dist_xy
from ..profiles import EnvironmentProfile
from ..semantics import ConfigLayout, Goal, evaluate
from ..world import WorldState


@lru_cache(maxsize=None)
def _layout(profile: EnvironmentProfile) -> ConfigLayout:
    return ConfigLayout(profile)


def obs_dim(profile: EnvironmentProfile) -> int:
    n = profile.n_objects
    return 3 + 1 + 3 * n + n * (n - 1) // 2 + (n + 1) + _layout(profile).size


def goal_dim(layout: ConfigLayout) -> int:
    return 2 * layout.size


def encode_obs(state: WorldState, profile: EnvironmentProfile) -> np.ndarray:
    gx, gy, gz = state.gripper
    feats: list[float] = [gx, gy, gz, 1.0 if state.grip_closed else 0.0]
    for name in profile.objects:
        b = state.block(name)
        feats.extend((b.pos[0] - gx, b.pos[1] - gy, b.pos[2] - gz))
    for a, b in combinations(profile.objects, 2):
        feats.append(dist_xy(state.block(a).pos, state.block(b).pos))
    for name in profile.objects:
        feats.append(1.0 if state.held == name else 0.0)
    feats.append(1.0 if state.held is None else 0.0)
    feats.extend(float(v) for v in evaluate(state, _layout(profile)))
    return np.asarray(feats, dtype=np.float32)


def encode_goal(goal: Goal) -> np.ndarray:
    out = np.empty(2 * len(goal.target), dtype=np.float32)
    out[0::2] = goal.target
    out[1::2] = goal.mask
    return out


def q_input(obs: np.ndarray, goal_enc: np.ndarray) -> np.ndarray:
    return np.concatenate([obs, goal_enc])
