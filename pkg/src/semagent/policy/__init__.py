from .obs import encode_goal, encode_obs, goal_dim, obs_dim
from .scripted import ScriptedPolicy
from .nets import MLP, AdamState
from .replay import EpisodeTrace, ReplayBuffer, her_relabel, reward_for
from .train import (
    LearnedLowLevel,
    QPolicy,
    TrainConfig,
    TrainResult,
    cached_checkpoint_path,
    checkpoint_meta,
    checkpoint_path_for,
    evaluate_policy,
    load_or_train,
    train,
)

__all__ = [
    "encode_goal",
    "encode_obs",
    "goal_dim",
    "obs_dim",
    "ScriptedPolicy",
    "MLP",
    "AdamState",
    "EpisodeTrace",
    "ReplayBuffer",
    "her_relabel",
    "reward_for",
    "QPolicy",
    "TrainConfig",
    "TrainResult",
    "train",
    "LearnedLowLevel",
    "evaluate_policy",
    "load_or_train",
    "checkpoint_meta",
    "cached_checkpoint_path",
    "checkpoint_path_for",
]
