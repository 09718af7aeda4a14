"""Allocation policies: the learned network, nearest-pickup greedy, and regret.

A policy is any callable ``policy(obs) -> task index``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .env import Observation
from .network import Batch, PolicyParams, forward


@dataclass(frozen=True)
class ActionDistribution:
    logits: np.ndarray
    probabilities: np.ndarray


def distribution(params: PolicyParams, obs: Observation) -> tuple[ActionDistribution, float]:
    logits, log_probs, values, _ = forward(params, Batch.from_observations([obs]))
    return ActionDistribution(logits[0], np.exp(log_probs[0])), float(values[0])


def select_action(dist: ActionDistribution | np.ndarray, mode: str = "argmax", rng=None) -> int:
    probs = dist.probabilities if isinstance(dist, ActionDistribution) else np.asarray(dist)
    if mode == "argmax":
        return int(np.argmax(probs))  # first maximum on ties
    if mode == "sample":
        rng = rng if rng is not None else np.random.default_rng()
        return int(rng.choice(len(probs), p=probs / probs.sum()))
    raise ValueError(f"mode must be 'argmax' or 'sample', got {mode!r}")


def mpdm(obs: Observation) -> int:
    """Nearest task origin to the selected robot."""
    return int(np.argmin(obs.pickup_costs))


def regrets(obs: Observation) -> np.ndarray:
    """Per task: best pickup cost among the other robots minus the selected
    robot's pickup cost."""
    others = [j for j in range(len(obs.robot_positions)) if j != obs.selected]
    provider = obs.provider
    out = np.empty(obs.n_tasks)
    for i, origin in enumerate(obs.task_origins):
        best_other = min(provider.cost(obs.robot_positions[j], origin) for j in others)
        out[i] = best_other - obs.pickup_costs[i]
    return out


def rbts(obs: Observation) -> int:
    """Task with the largest regret; nearest-pickup when there is one robot."""
    if len(obs.robot_positions) < 2:
        return mpdm(obs)
    return int(np.argmax(regrets(obs)))


class NetworkPolicy:
    def __init__(self, params: PolicyParams, mode: str = "argmax", seed=None):
        self.params = params
        self.mode = mode
        self.rng = np.random.default_rng(seed)

    def __call__(self, obs: Observation) -> int:
        dist, _ = distribution(self.params, obs)
        return select_action(dist, self.mode, self.rng)


class SequencePolicy:
    """Replays a fixed order of task tags, e.g. ``["Task 1", "Task 3"]``."""

    def __init__(self, tags, env):
        self.tags = list(tags)
        self.env = env
        self._i = 0

    def __call__(self, obs: Observation) -> int:
        tag = self.tags[self._i]
        self._i += 1
        queue = [t.tag for t in self.env.state.queue]
        if tag not in queue:
            raise ValueError(f"{tag!r} is not in the queue {queue}")
        return queue.index(tag)
