"""Goal-conditioned Q-learning with hindsight relabeling.

One discrete Q-network over the eight primitives, conditioned on the
semantic goal encoding; a target copy stabilizes the bootstrap. Rewards
are sparse (goal satisfied after the step or not) and episodes end on
success or at the step cap. Exploration is epsilon-greedy with sticky
repeats so random walks travel instead of jittering in place.
"""

from __future__ import annotations

import json
import os
import time
from dataclasses import dataclass, field, replace as dc_replace
from pathlib import Path

import numpy as np

from ..profiles import EnvironmentProfile, PredicateKind, profile_by_name
from ..semantics import Config, ConfigLayout, Goal, describe_goal, evaluate, goal_from_atoms
from ..translate import goal_set
from ..world import (
    N_ACTIONS,
    BlockState,
    SceneInitializer,
    WorldState,
    reset,
    step,
)
from ..errors import ControllerError, LayoutMismatchError
from ..geometry import BIN_SLOTS, BLOCK_HALF, WORKSPACE_MAX, WORKSPACE_MIN
from .nets import MLP, AdamState
from .obs import encode_goal, encode_obs, goal_dim, obs_dim, q_input
from .replay import EpisodeTrace, ReplayBuffer
from .scripted import ScriptedPolicy

CHECKPOINT_FORMAT = 1


_DEFAULT_INITIALIZERS = {
    "two_blocks": ("all_far", "all_close", "stacked_random_order"),
    "three_blocks": ("all_far", "all_close"),
}


def default_initializers(profile: EnvironmentProfile) -> tuple[str, ...]:
    if profile.has_bin:
        return ("scattered_with_bin",)
    return _DEFAULT_INITIALIZERS.get(profile.name, ("all_far",))


@dataclass
class TrainConfig:
    profile_name: str
    total_steps: int = 150_000
    episode_len: int = 120
    gamma: float = 0.95
    lr: float = 1e-3
    batch: int = 128
    warmup_steps: int = 2_500
    target_sync: int = 400
    eps_start: float = 1.0
    eps_end: float = 0.08
    eps_decay_steps: int = 50_000
    sticky: float = 0.85
    hidden: tuple[int, ...] = (128, 128)
    # fraction of episodes rolled out by the scripted controller; random
    # primitives almost never change a semantic relation, so the replay
    # buffer needs some trajectories where relations actually flip
    demo_prob: float = 0.50
    # per-step chance a demo episode takes a random action instead; the
    # controller recovers, and the detours give the value function real
    # outcomes for off-demo actions it would otherwise only imagine
    demo_noise: float = 0.20
    her_k: int = 4
    her_strategy: str = "future"
    # label window for the stored-trajectory return; 1 is the plain
    # sparse transition reward, larger widens the action gap
    n_step: int = 5
    # large-margin supervision on controller actions
    margin: float = 0.1
    margin_weight: float = 1.0
    buffer: int = 400_000
    eval_every: int = 10_000
    eval_episodes: int = 3
    seed: int = 0
    initializers: tuple[str, ...] = ()
    # probability of warm-starting a bin scene with some blocks already
    # binned, so put-on-table goals are not trivially satisfied at reset
    bin_warmstart: float = 0.35
    # probability that a placement-goal episode starts with the object
    # already gripped; the plan executor always hands placement goals
    # over mid-manipulation, so training has to cover those states
    held_warmstart: float = 0.5
    # probability of starting an episode with the gripper teleported to a
    # random workspace point instead of home; chained sub-goals begin
    # wherever the previous one released, never at the home pose
    gripper_scatter: float = 0.5
    # goal sampling bias toward goals the policy still fails, with a
    # floor that keeps mastered goals in rotation against forgetting
    goal_focus_floor: float = 0.25
    # override the per-profile sub-goal pool; flat baselines train on
    # whole task goals here instead of planner-step goals
    goals: tuple[Goal, ...] | None = None

    def resolved_initializers(self, profile: EnvironmentProfile) -> tuple[SceneInitializer, ...]:
        names = self.initializers or default_initializers(profile)
        return tuple(SceneInitializer(n) for n in names)


class QPolicy:
    """Greedy/epsilon action selection over a learned Q function."""

    def __init__(
        self,
        profile: EnvironmentProfile,
        seed: int = 0,
        hidden: tuple[int, ...] = (128, 128),
        lr: float = 1e-3,
    ):
        self.profile = profile
        self.layout = ConfigLayout(profile)
        self.hidden = tuple(hidden)
        in_dim = obs_dim(profile) + goal_dim(self.layout)
        self.online = MLP(in_dim, N_ACTIONS, hidden=self.hidden, seed=seed)
        self.target = MLP(in_dim, N_ACTIONS, hidden=self.hidden, seed=seed)
        self.target.copy_from(self.online)
        self.opt = AdamState(lr=lr)

    # --------------------------------------------------------------- act

    def q_values(self, obs: np.ndarray, goal_enc: np.ndarray) -> np.ndarray:
        return self.online.predict(q_input(obs, goal_enc)[None, :])[0]

    def act(
        self,
        obs: np.ndarray,
        goal_enc: np.ndarray,
        epsilon: float = 0.0,
        rng: np.random.Generator | None = None,
    ) -> int:
        if epsilon > 0.0:
            if rng is None:
                raise ValueError("epsilon-greedy selection needs an rng")
            if rng.random() < epsilon:
                return int(rng.integers(0, N_ACTIONS))
        return int(np.argmax(self.q_values(obs, goal_enc)))

    # ------------------------------------------------------------- learn

    def train_step(
        self, batch, gamma: float, margin: float = 0.1, margin_weight: float = 1.0
    ) -> float:
        q_in, actions, rewards, q_in_next, dones, gamma_pow, demo = batch
        # double estimator: online picks the action, target prices it,
        # otherwise the max operator inflates every bootstrapped value
        best_next = np.argmax(self.online.predict(q_in_next), axis=1)
        q_next = self.target.predict(q_in_next)
        rows_next = np.arange(len(best_next))
        targets = rewards + gamma_pow * (1.0 - dones) * q_next[rows_next, best_next]
        np.clip(targets, 0.0, 1.0 / (1.0 - gamma), out=targets)
        out, acts = self.online.forward(q_in)
        rows = np.arange(len(actions))
        diff = out[rows, actions] - targets
        loss = float(np.mean(diff * diff))
        dout = np.zeros_like(out)
        dout[rows, actions] = 2.0 * diff / len(actions)
        if margin_weight > 0.0 and demo.any():
            # large-margin term on controller actions: the taken action
            # must beat every alternative by the margin, which pins the
            # argmax along demonstrated paths where TD gaps are tiny
            bumped = out + margin
            bumped[rows, actions] = out[rows, actions]
            viol_a = np.argmax(bumped, axis=1)
            violated = (demo > 0.0) & (bumped[rows, viol_a] > out[rows, actions])
            scale = margin_weight / max(1, int((demo > 0.0).sum()))
            vrows = rows[violated]
            dout[vrows, viol_a[violated]] += scale
            dout[vrows, actions[violated]] -= scale
            loss += float(
                scale * np.sum(bumped[vrows, viol_a[violated]] - out[vrows, actions[violated]])
            )
        grads = self.online.backward(acts, dout)
        self.opt.step(self.online, grads)
        return loss

    def sync_target(self) -> None:
        self.target.copy_from(self.online)

    # ---------------------------------------------------------- persist

    def save(self, path: str, extra: dict | None = None) -> None:
        meta = {
            "format": CHECKPOINT_FORMAT,
            "profile": self.profile.name,
            "atoms": list(self.layout.atom_names()),
            "obs_dim": obs_dim(self.profile),
            "n_actions": N_ACTIONS,
            "hidden": list(self.hidden),
        }
        if extra:
            meta["train"] = extra
        arrays = self.online.state_arrays()
        np.savez(path, meta=np.frombuffer(json.dumps(meta).encode(), dtype=np.uint8), **arrays)

    @staticmethod
    def load(path: str, profile: EnvironmentProfile) -> "QPolicy":
        data = np.load(path)
        meta = json.loads(bytes(data["meta"]).decode())
        if meta.get("format") != CHECKPOINT_FORMAT:
            raise LayoutMismatchError(f"unsupported checkpoint format {meta.get('format')}")
        policy = QPolicy(profile, hidden=tuple(meta.get("hidden", (128, 128))))
        expect = list(policy.layout.atom_names())
        if meta.get("profile") != profile.name or meta.get("atoms") != expect:
            raise LayoutMismatchError(
                f"checkpoint is for profile {meta.get('profile')!r} with atoms "
                f"{meta.get('atoms')}, expected {profile.name!r} {expect}"
            )
        policy.online.load_arrays({k: data[k] for k in data.files if k != "meta"})
        policy.sync_target()
        return policy


class LearnedLowLevel:
    """Adapter: learned policy behind the scripted-policy interface.

    A small epsilon breaks the deterministic failure loops a greedy
    policy falls into when a retry starts from the exact state the last
    attempt got stuck in.
    """

    def __init__(self, policy: QPolicy, epsilon: float = 0.0, seed: int = 0):
        self.policy = policy
        self.epsilon = epsilon
        self._rng = np.random.default_rng(seed)

    def reset(self) -> None:
        pass

    def act(self, state: WorldState, goal: Goal):
        if self.epsilon and self._rng.random() < self.epsilon:
            return int(self._rng.integers(0, N_ACTIONS))
        obs = encode_obs(state, self.policy.profile)
        return self.policy.act(obs, encode_goal(goal))


@dataclass
class TrainResult:
    policy: QPolicy
    history: list[dict] = field(default_factory=list)
    env_steps: int = 0
    episodes: int = 0
    wall_seconds: float = 0.0

    def history_csv(self) -> str:
        lines = ["env_step,goal,success_rate,loss"]
        for row in self.history:
            lines.append(
                f"{row['env_step']},{row['goal']},{row['success_rate']:.3f},{row['loss']:.6f}"
            )
        return "\n".join(lines) + "\n"

    def final_success(self) -> float:
        """Mean per-goal success at the last evaluation point."""
        if not self.history:
            return 0.0
        last = max(r["env_step"] for r in self.history)
        rates = [r["success_rate"] for r in self.history if r["env_step"] == last]
        return float(np.mean(rates))

    def stats(self) -> dict:
        return {
            "env_steps": self.env_steps,
            "episodes": self.episodes,
            "wall_seconds": round(self.wall_seconds, 2),
            "final_success": round(self.final_success(), 4),
        }

    def save(self, path: str) -> None:
        self.policy.save(path, extra=self.stats())


def _warmstart_bin(world: WorldState, profile: EnvironmentProfile, rng: np.random.Generator) -> WorldState:
    n_bin = int(rng.integers(1, profile.n_objects))
    names = list(profile.objects)
    rng.shuffle(names)
    blocks = list(world.blocks)
    for slot, name in zip(BIN_SLOTS, names[:n_bin]):
        for i, b in enumerate(blocks):
            if b.name == name:
                blocks[i] = BlockState(name, (slot[0], slot[1], BLOCK_HALF), in_bin=True)
    return dc_replace(world, blocks=tuple(blocks))


def _placement_object(goal: Goal, layout: ConfigLayout) -> str | None:
    """Object a placement goal releases: only holding=0 plus another pin."""
    obj = None
    other_pins = False
    for i, atom in enumerate(layout.atoms):
        if not goal.mask[i]:
            continue
        if atom.kind is PredicateKind.HOLDING:
            if goal.target[i] or obj is not None:
                return None
            obj = atom.args[0]
        else:
            other_pins = True
    return obj if other_pins else None


def _warmstart_held(
    world: WorldState, obj: str, scripted: ScriptedPolicy, layout: ConfigLayout
) -> tuple[WorldState, int]:
    """Grasp obj with the scripted controller so the episode starts held.

    Returns the new state and how many simulator steps the grasp cost;
    on any controller refusal the original state comes back untouched.
    """
    grasp = goal_from_atoms(layout, {f"holding({obj})": True})
    w = world
    try:
        for t in range(80):
            if w.held == obj:
                return w, t
            w = step(w, scripted.act(w, grasp))
    except ControllerError:
        pass
    return world, 0


def _scatter_gripper(world: WorldState, rng: np.random.Generator) -> WorldState:
    margin = 2 * BLOCK_HALF
    pos = (
        float(rng.uniform(WORKSPACE_MIN[0] + margin, WORKSPACE_MAX[0] - margin)),
        float(rng.uniform(WORKSPACE_MIN[1] + margin, WORKSPACE_MAX[1] - margin)),
        float(rng.uniform(0.04, 0.16)),
    )
    return dc_replace(world, gripper=pos)


def _sample_episode_setup(
    cfg: TrainConfig,
    profile: EnvironmentProfile,
    layout: ConfigLayout,
    goals: list[Goal],
    weights: np.ndarray,
    inits: tuple[SceneInitializer, ...],
    scripted: ScriptedPolicy,
    rng: np.random.Generator,
) -> tuple[WorldState, int, int]:
    setup_steps = 0
    probs = weights / weights.sum()
    for _ in range(20):
        init = inits[int(rng.integers(0, len(inits)))]
        world = reset(profile, init, int(rng.integers(0, 2**31)))
        if profile.has_bin and rng.random() < cfg.bin_warmstart:
            world = _warmstart_bin(world, profile, rng)
        if rng.random() < cfg.gripper_scatter:
            world = _scatter_gripper(world, rng)
        gi = int(rng.choice(len(goals), p=probs))
        goal = goals[gi]
        if goal.satisfied(evaluate(world, layout)):
            continue
        obj = _placement_object(goal, layout)
        if obj is not None and rng.random() < cfg.held_warmstart:
            world, cost = _warmstart_held(world, obj, scripted, layout)
            setup_steps += cost
        return world, gi, setup_steps
    return world, gi, setup_steps  # every goal trivially holds; extremely unlikely


def evaluate_policy(
    policy: QPolicy,
    goals: list[Goal],
    episodes: int,
    seed: int,
    episode_len: int = 120,
    initializers: tuple[SceneInitializer, ...] | None = None,
    bin_warmstart: float = 0.0,
    held_warmstart: float = 0.0,
    gripper_scatter: float = 0.0,
) -> dict[str, float]:
    """Greedy success rate per goal over fresh scenes."""
    profile = policy.profile
    layout = policy.layout
    inits = initializers or tuple(
        SceneInitializer(n) for n in default_initializers(profile)
    )
    scripted = ScriptedPolicy(layout)
    rng = np.random.default_rng(seed)
    rates: dict[str, float] = {}
    for goal in goals:
        wins = 0
        runs = 0
        guard = 0
        while runs < episodes and guard < episodes * 30:
            guard += 1
            init = inits[int(rng.integers(0, len(inits)))]
            world = reset(profile, init, int(rng.integers(0, 2**31)))
            if profile.has_bin and rng.random() < bin_warmstart:
                world = _warmstart_bin(world, profile, rng)
            if rng.random() < gripper_scatter:
                world = _scatter_gripper(world, rng)
            if goal.satisfied(evaluate(world, layout)):
                continue  # already done, not a test of the policy
            obj = _placement_object(goal, layout)
            if obj is not None and rng.random() < held_warmstart:
                world, _ = _warmstart_held(world, obj, scripted, layout)
            runs += 1
            genc = encode_goal(goal)
            for _ in range(episode_len):
                obs = encode_obs(world, profile)
                world = step(world, policy.act(obs, genc))
                if goal.satisfied(evaluate(world, layout)):
                    wins += 1
                    break
        rates[describe_goal(goal, layout)] = wins / runs if runs else 1.0
    return rates


def train(cfg: TrainConfig, log=None) -> TrainResult:
    t0 = time.monotonic()
    profile = profile_by_name(cfg.profile_name)
    layout = ConfigLayout(profile)
    goals = list(cfg.goals) if cfg.goals else goal_set(layout)
    inits = cfg.resolved_initializers(profile)
    policy = QPolicy(profile, seed=cfg.seed, hidden=cfg.hidden, lr=cfg.lr)
    scripted = ScriptedPolicy(layout)
    buffer = ReplayBuffer(cfg.buffer)
    rng = np.random.default_rng(cfg.seed * 9973 + 11)

    env_steps = 0
    grad_steps = 0
    episodes = 0
    next_eval = cfg.eval_every
    loss_acc: list[float] = []
    history: list[dict] = []
    # running success estimate per goal, drives the sampling bias
    goal_ema = np.zeros(len(goals))

    def eps_at(t: int) -> float:
        if t >= cfg.eps_decay_steps:
            return cfg.eps_end
        frac = t / cfg.eps_decay_steps
        return cfg.eps_start + frac * (cfg.eps_end - cfg.eps_start)

    while env_steps < cfg.total_steps:
        weights = cfg.goal_focus_floor + (1.0 - goal_ema)
        world, gi, setup_steps = _sample_episode_setup(
            cfg, profile, layout, goals, weights, inits, scripted, rng
        )
        goal = goals[gi]
        env_steps += setup_steps  # warmstart grasps spend real simulator steps
        genc = encode_goal(goal)
        obs_list = [encode_obs(world, profile)]
        achieved: list[Config] = [evaluate(world, layout)]
        actions: list[int] = []
        demo_flags: list[bool] = []
        sticky_action: int | None = None
        use_demo = rng.random() < cfg.demo_prob
        for _ in range(cfg.episode_len):
            a = None
            was_demo = False
            if use_demo:
                if rng.random() < cfg.demo_noise:
                    a = int(rng.integers(0, N_ACTIONS))
                else:
                    try:
                        a = int(scripted.act(world, goal))
                        was_demo = True
                    except ControllerError:
                        use_demo = False  # infeasible for the controller; explore instead
            if a is None:
                eps = eps_at(env_steps)
                if rng.random() < eps:
                    if sticky_action is not None and rng.random() < cfg.sticky:
                        a = sticky_action
                    else:
                        a = int(rng.integers(0, N_ACTIONS))
                        sticky_action = a
                else:
                    a = policy.act(obs_list[-1], genc)
            world = step(world, a)
            env_steps += 1
            actions.append(a)
            demo_flags.append(was_demo)
            obs_list.append(encode_obs(world, profile))
            achieved.append(evaluate(world, layout))
            if goal.satisfied(achieved[-1]) or env_steps >= cfg.total_steps:
                break
        episodes += 1
        goal_ema[gi] = 0.9 * goal_ema[gi] + 0.1 * float(goal.satisfied(achieved[-1]))
        trace = EpisodeTrace(
            goal=goal,
            observations=np.stack(obs_list),
            actions=np.asarray(actions, dtype=np.int64),
            achieved=achieved,
            demo=np.asarray(demo_flags, dtype=bool),
        )
        buffer.add_episode(trace, cfg.her_k, rng, cfg.her_strategy, cfg.n_step, cfg.gamma)

        if env_steps >= cfg.warmup_steps:
            for _ in range(len(actions)):
                loss = policy.train_step(
                    buffer.sample(cfg.batch, rng), cfg.gamma, cfg.margin, cfg.margin_weight
                )
                loss_acc.append(loss)
                grad_steps += 1
                if grad_steps % cfg.target_sync == 0:
                    policy.sync_target()

        if env_steps >= next_eval or env_steps >= cfg.total_steps:
            next_eval += cfg.eval_every
            rates = evaluate_policy(
                policy,
                goals,
                cfg.eval_episodes,
                seed=cfg.seed * 31 + env_steps,
                episode_len=cfg.episode_len,
                initializers=inits,
                bin_warmstart=cfg.bin_warmstart if profile.has_bin else 0.0,
                held_warmstart=cfg.held_warmstart,
                gripper_scatter=cfg.gripper_scatter,
            )
            mean_loss = float(np.mean(loss_acc)) if loss_acc else 0.0
            loss_acc.clear()
            for goal_name, rate in rates.items():
                history.append(
                    {
                        "env_step": env_steps,
                        "goal": goal_name,
                        "success_rate": rate,
                        "loss": mean_loss,
                    }
                )
            if log is not None:
                overall = float(np.mean(list(rates.values())))
                log(
                    f"[{cfg.profile_name}] step {env_steps}/{cfg.total_steps} "
                    f"eps={eps_at(env_steps):.2f} mean_success={overall:.2f} "
                    f"loss={mean_loss:.4f}"
                )

    return TrainResult(
        policy=policy,
        history=history,
        env_steps=env_steps,
        episodes=episodes,
        wall_seconds=time.monotonic() - t0,
    )


def checkpoint_meta(path: str) -> dict:
    data = np.load(path)
    return json.loads(bytes(data["meta"]).decode())


def policy_cache_dir() -> Path:
    return Path(os.environ.get("SEMAGENT_CACHE_DIR", ".cache/policies"))


def checkpoint_path_for(profile_name: str, variant: str = "hier") -> Path:
    return policy_cache_dir() / f"{profile_name}-{variant}.npz"


def cached_checkpoint_path(cfg: TrainConfig) -> Path:
    return checkpoint_path_for(cfg.profile_name, "flat" if cfg.goals else "hier")


def load_or_train(cfg: TrainConfig, path=None, log=None) -> tuple[QPolicy, dict]:
    """Reuse a compatible cached checkpoint, or train one and cache it.

    Returns the policy together with its recorded training stats, so
    callers can verify budget claims whether the weights were fresh or
    loaded. An incompatible or corrupt file is retrained, not trusted.
    """
    target = Path(path) if path is not None else cached_checkpoint_path(cfg)
    profile = profile_by_name(cfg.profile_name)
    if target.exists():
        try:
            policy = QPolicy.load(str(target), profile)
            stats = checkpoint_meta(str(target)).get("train", {})
            if log is not None:
                log(f"[{cfg.profile_name}] loaded cached policy from {target}")
            return policy, stats
        except (LayoutMismatchError, KeyError, ValueError) as err:
            if log is not None:
                log(f"[{cfg.profile_name}] cached policy unusable ({err}); retraining")
    result = train(cfg, log=log)
    target.parent.mkdir(parents=True, exist_ok=True)
    result.save(str(target))
    return result.policy, result.stats()
