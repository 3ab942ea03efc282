"""Episode traces, hindsight relabeling and the flat replay ring.

Relabeling follows the future/final scheme: every original transition is
kept, and k extra copies are added whose goal is the fully pinned
semantic configuration achieved later in the same episode, with the
reward recomputed against that goal. The buffer stores ready-to-train
(observation ++ goal) rows so sampling is a pure slice.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..semantics import Config, Goal, full_goal
from .obs import encode_goal


def reward_for(achieved: Config, goal: Goal) -> float:
    return 1.0 if goal.satisfied(achieved) else 0.0


@dataclass
class EpisodeTrace:
    """One rollout against a fixed goal."""

    goal: Goal
    observations: np.ndarray  # (T+1, obs_dim) float32
    actions: np.ndarray  # (T,) int64
    achieved: list[Config]  # length T+1
    # which actions came from a trusted controller; None means none did
    demo: np.ndarray | None = None

    def __post_init__(self) -> None:
        t = len(self.actions)
        if self.observations.shape[0] != t + 1 or len(self.achieved) != t + 1:
            raise ValueError(
                f"trace shapes disagree: {self.observations.shape[0]} obs, "
                f"{t} actions, {len(self.achieved)} achieved configs"
            )
        if self.demo is not None and len(self.demo) != t:
            raise ValueError(f"demo flags length {len(self.demo)} != {t} actions")

    def __len__(self) -> int:
        return len(self.actions)


@dataclass(frozen=True)
class LabeledStep:
    obs: np.ndarray
    action: int
    reward: float
    next_obs: np.ndarray
    done: bool
    goal_enc: np.ndarray
    # discount to apply to the bootstrap term; gamma**n for an n-step label
    gamma_pow: float = 1.0
    demo: bool = False


def _label(trace: EpisodeTrace, t: int, goal: Goal, n_step: int, gamma: float) -> LabeledStep:
    # walk the stored trajectory up to n steps, stopping at the first
    # success against this goal; sparse rewards make the return either
    # gamma^(m-1) at a success m steps out or 0
    horizon = len(trace)
    reach = min(n_step, horizon - t)
    ret = 0.0
    m = reach
    done = False
    for i in range(reach):
        if reward_for(trace.achieved[t + i + 1], goal) > 0.0:
            ret = gamma**i
            m = i + 1
            done = True
            break
    return LabeledStep(
        obs=trace.observations[t],
        action=int(trace.actions[t]),
        reward=ret,
        next_obs=trace.observations[t + m],
        done=done,
        goal_enc=encode_goal(goal),
        gamma_pow=gamma**m,
        demo=bool(trace.demo[t]) if trace.demo is not None else False,
    )


def her_relabel(
    trace: EpisodeTrace,
    k: int,
    rng: np.random.Generator,
    strategy: str = "future",
    n_step: int = 1,
    gamma: float = 1.0,
) -> list[LabeledStep]:
    """Original steps plus k relabeled copies each: len(trace) * (1 + k).

    With the default one-step window the reward is exactly the sparse
    success signal for the transition. Larger windows fold the stored
    trajectory's discounted return into the label, which speeds up value
    propagation; gamma only matters there.
    """
    if strategy not in ("future", "final"):
        raise ValueError(f"unknown strategy {strategy!r}")
    out: list[LabeledStep] = []
    horizon = len(trace)
    for t in range(horizon):
        out.append(_label(trace, t, trace.goal, n_step, gamma))
        for _ in range(k):
            if strategy == "final":
                j = horizon
            else:
                j = int(rng.integers(t + 1, horizon + 1))
            out.append(_label(trace, t, full_goal(trace.achieved[j]), n_step, gamma))
    return out


class ReplayBuffer:
    """Fixed-capacity ring over flattened, goal-conditioned transitions."""

    def __init__(self, capacity: int):
        self.capacity = capacity
        self._n = 0
        self._next = 0
        self._q_in: np.ndarray | None = None
        self._q_in_next: np.ndarray | None = None
        self._actions = np.zeros(capacity, dtype=np.int64)
        self._rewards = np.zeros(capacity, dtype=np.float32)
        self._dones = np.zeros(capacity, dtype=np.float32)
        self._gamma_pow = np.ones(capacity, dtype=np.float32)
        self._demo = np.zeros(capacity, dtype=np.float32)

    def __len__(self) -> int:
        return self._n

    def _ensure(self, step: LabeledStep) -> None:
        if self._q_in is None:
            dim = step.obs.shape[0] + step.goal_enc.shape[0]
            self._q_in = np.zeros((self.capacity, dim), dtype=np.float32)
            self._q_in_next = np.zeros((self.capacity, dim), dtype=np.float32)

    def add(self, step: LabeledStep) -> None:
        self._ensure(step)
        i = self._next
        self._q_in[i, : step.obs.shape[0]] = step.obs
        self._q_in[i, step.obs.shape[0] :] = step.goal_enc
        self._q_in_next[i, : step.next_obs.shape[0]] = step.next_obs
        self._q_in_next[i, step.next_obs.shape[0] :] = step.goal_enc
        self._actions[i] = step.action
        self._rewards[i] = step.reward
        self._dones[i] = 1.0 if step.done else 0.0
        self._gamma_pow[i] = step.gamma_pow
        self._demo[i] = 1.0 if step.demo else 0.0
        self._next = (i + 1) % self.capacity
        self._n = min(self._n + 1, self.capacity)

    def add_episode(
        self,
        trace: EpisodeTrace,
        her_k: int,
        rng: np.random.Generator,
        strategy: str = "future",
        n_step: int = 1,
        gamma: float = 1.0,
    ) -> int:
        steps = her_relabel(trace, her_k, rng, strategy, n_step, gamma)
        for s in steps:
            self.add(s)
        return len(steps)

    def sample(self, batch: int, rng: np.random.Generator):
        idx = rng.integers(0, self._n, size=batch)
        return (
            self._q_in[idx],
            self._actions[idx],
            self._rewards[idx],
            self._q_in_next[idx],
            self._dones[idx],
            self._gamma_pow[idx],
            self._demo[idx],
        )
