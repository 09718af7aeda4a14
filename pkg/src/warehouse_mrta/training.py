"""PPO with generalised advantage estimation for the allocation network.

Training is continuing rather than episodic: environments never terminate,
and each rollout bootstraps from the critic at its last observation.
Several environments are stepped in lockstep and their transitions share one
buffer; advantages are computed per environment stream.
"""

from __future__ import annotations

import csv
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from .config import ExperimentConfig, TrainConfig
from .env import WarehouseEnv
from .errors import InvalidConfig, NumericalError
from .network import Batch, PolicyParams, backward, forward

log = logging.getLogger(__name__)

METRIC_COLUMNS = ("update_index", "env_steps", "mean_reward", "entropy", "value_loss", "policy_loss", "entropy_coef")


@dataclass
class Transition:
    robots: np.ndarray
    tasks: np.ndarray
    selected: int
    action: int
    log_prob: float
    reward: float
    value: float
    env_id: int
    done: bool = False


@dataclass
class Rollout:
    transitions: list[Transition]
    bootstrap: dict[int, float]  # env_id -> value of the observation after the last step

    def __len__(self):
        return len(self.transitions)

    def batch(self) -> Batch:
        return Batch(
            np.stack([t.robots for t in self.transitions]),
            np.stack([t.tasks for t in self.transitions]),
            np.array([t.selected for t in self.transitions], dtype=np.int64),
        )


def _sample(probs: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    cdf = np.cumsum(probs, axis=1)
    u = rng.random(len(probs))[:, None] * cdf[:, -1:]
    return np.minimum((cdf <= u).sum(axis=1), probs.shape[1] - 1)


def collect_rollout(
    envs: WarehouseEnv | Sequence[WarehouseEnv],
    params: PolicyParams,
    length: int,
    rng: np.random.Generator,
) -> Rollout:
    """Step the environments round-robin with sampled actions until ``length``
    transitions are recorded."""
    if length < 1:
        raise InvalidConfig("rollout length must be >= 1")
    envs = [envs] if isinstance(envs, WarehouseEnv) else list(envs)
    transitions: list[Transition] = []
    while len(transitions) < length:
        active = envs[: min(len(envs), length - len(transitions))]
        obs = [e.observation for e in active]
        batch = Batch.from_observations(obs)
        _, log_probs, values, _ = forward(params, batch)
        actions = _sample(np.exp(log_probs), rng)
        for i, env in enumerate(active):
            a = int(actions[i])
            _, reward, _ = env.step(a)
            transitions.append(
                Transition(
                    robots=batch.robots[i],
                    tasks=batch.tasks[i],
                    selected=int(batch.selected[i]),
                    action=a,
                    log_prob=float(log_probs[i, a]),
                    reward=float(reward),
                    value=float(values[i]),
                    env_id=i,
                )
            )
    ids = sorted({t.env_id for t in transitions})
    _, _, boot, _ = forward(params, Batch.from_observations([envs[i].observation for i in ids]))
    return Rollout(transitions, {i: float(v) for i, v in zip(ids, boot)})


def compute_gae(rewards, values, bootstrap_value: float, gamma: float, lam: float):
    """Advantages and returns for one continuing trajectory."""
    rewards = np.asarray(rewards, dtype=np.float64)
    values = np.asarray(values, dtype=np.float64)
    if rewards.shape != values.shape:
        raise ValueError("rewards and values must have the same length")
    adv = np.zeros_like(rewards)
    next_value = bootstrap_value
    acc = 0.0
    for t in range(len(rewards) - 1, -1, -1):
        delta = rewards[t] + gamma * next_value - values[t]
        acc = delta + gamma * lam * acc
        adv[t] = acc
        next_value = values[t]
    return adv, adv + values


def rollout_advantages(rollout: Rollout, gamma: float, lam: float):
    n = len(rollout)
    adv = np.empty(n)
    ret = np.empty(n)
    env_ids = np.array([t.env_id for t in rollout.transitions])
    rewards = np.array([t.reward for t in rollout.transitions])
    values = np.array([t.value for t in rollout.transitions])
    for e, boot in rollout.bootstrap.items():
        idx = np.nonzero(env_ids == e)[0]
        a, r = compute_gae(rewards[idx], values[idx], boot, gamma, lam)
        adv[idx] = a
        ret[idx] = r
    return adv, ret


def normalize_advantages(adv: np.ndarray) -> np.ndarray:
    adv = np.asarray(adv, dtype=np.float64)
    std = adv.std()
    centred = adv - adv.mean()
    return centred / std if std > 1e-12 else centred


@dataclass
class LossTerms:
    loss: float
    policy_loss: float
    value_loss: float
    entropy: float
    clip_fraction: float


def _loss_pieces(params, batch, actions, old_log_probs, advantages, returns, entropy_coef, cfg: TrainConfig):
    logits, log_probs, values, cache = forward(params, batch)
    b = len(actions)
    rows = np.arange(b)
    probs = np.exp(log_probs)
    logp_a = log_probs[rows, actions]
    ratio = np.exp(logp_a - old_log_probs)
    lo, hi = 1.0 - cfg.clip_epsilon, 1.0 + cfg.clip_epsilon
    clipped = np.clip(ratio, lo, hi)
    surr1 = ratio * advantages
    surr2 = clipped * advantages
    policy_loss = -np.mean(np.minimum(surr1, surr2))
    value_err = values - returns
    value_loss = np.mean(value_err**2)
    ent_each = -(probs * log_probs).sum(axis=1)
    entropy = ent_each.mean()
    loss = cfg.policy_coef * policy_loss + cfg.value_coef * value_loss - entropy_coef * entropy
    terms = LossTerms(
        float(loss), float(policy_loss), float(value_loss), float(entropy), float(np.mean((ratio < lo) | (ratio > hi)))
    )
    return terms, (cache, probs, log_probs, ratio, surr1, surr2, advantages, value_err, ent_each, lo, hi)


def ppo_loss(params, batch, actions, old_log_probs, advantages, returns, cfg: TrainConfig, entropy_coef=None):
    """Clipped-surrogate PPO objective plus weighted value error and entropy bonus."""
    ec = cfg.entropy_coef_start if entropy_coef is None else entropy_coef
    terms, _ = _loss_pieces(
        params, batch, np.asarray(actions), np.asarray(old_log_probs), np.asarray(advantages), np.asarray(returns), ec, cfg
    )
    return terms.loss, terms


def ppo_loss_and_grad(params, batch, actions, old_log_probs, advantages, returns, cfg: TrainConfig, entropy_coef=None):
    ec = cfg.entropy_coef_start if entropy_coef is None else entropy_coef
    actions = np.asarray(actions)
    terms, saved = _loss_pieces(
        params, batch, actions, np.asarray(old_log_probs), np.asarray(advantages), np.asarray(returns), ec, cfg
    )
    cache, probs, log_probs, ratio, surr1, surr2, adv, value_err, ent_each, lo, hi = saved
    b = len(actions)
    rows = np.arange(b)

    # d(policy_loss)/d(log pi(a)): the unclipped branch carries ratio * A; the
    # clipped branch is flat outside [lo, hi].
    inside = (ratio >= lo) & (ratio <= hi)
    use_unclipped = surr1 <= surr2
    d_logp_a = -np.where(use_unclipped | inside, ratio * adv, 0.0) / b
    onehot = np.zeros_like(probs)
    onehot[rows, actions] = 1.0
    d_logits = cfg.policy_coef * d_logp_a[:, None] * (onehot - probs)
    # d(-ec * mean H)/d logits = ec/B * p * (log p + H)
    d_logits += ec / b * probs * (log_probs + ent_each[:, None])
    d_values = cfg.value_coef * 2.0 * value_err / b
    grads = backward(params, cache, d_logits, d_values)
    return terms.loss, terms, grads


class Adam:
    def __init__(self, params: PolicyParams, lr: float, beta1=0.9, beta2=0.999, eps=1e-8):
        self.lr, self.beta1, self.beta2, self.eps = lr, beta1, beta2, eps
        self.m = {k: np.zeros_like(v) for k, v in params.items()}
        self.v = {k: np.zeros_like(v) for k, v in params.items()}
        self.t = 0

    def step(self, params: PolicyParams, grads: PolicyParams) -> None:
        for k, g in grads.items():
            if not np.all(np.isfinite(g)):
                raise NumericalError(f"non-finite gradient in {k}")
        if self.lr == 0:
            return
        self.t += 1
        c1 = 1.0 - self.beta1**self.t
        c2 = 1.0 - self.beta2**self.t
        for k, g in grads.items():
            self.m[k] = self.beta1 * self.m[k] + (1 - self.beta1) * g
            self.v[k] = self.beta2 * self.v[k] + (1 - self.beta2) * g * g
            params[k] -= self.lr * (self.m[k] / c1) / (np.sqrt(self.v[k] / c2) + self.eps)


def update(
    params: PolicyParams,
    optimizer: Adam,
    rollout: Rollout,
    cfg: TrainConfig,
    iteration: int,
    rng: np.random.Generator,
) -> dict:
    """PPO epochs over one rollout; mutates ``params`` and ``optimizer`` in place."""
    adv, ret = rollout_advantages(rollout, cfg.gamma, cfg.lam)
    adv = normalize_advantages(adv)
    batch = rollout.batch()
    actions = np.array([t.action for t in rollout.transitions])
    old_logp = np.array([t.log_prob for t in rollout.transitions])
    ec = cfg.entropy_coef(iteration)
    n = len(rollout)
    stats = []
    for _ in range(cfg.epochs_per_update):
        order = rng.permutation(n)
        for start in range(0, n, cfg.minibatch_size):
            idx = order[start : start + cfg.minibatch_size]
            _, terms, grads = ppo_loss_and_grad(
                params, batch.take(idx), actions[idx], old_logp[idx], adv[idx], ret[idx], cfg, ec
            )
            if not np.isfinite(terms.loss):
                raise NumericalError("non-finite PPO loss")
            optimizer.step(params, grads)
            stats.append(terms)
    return {
        "mean_reward": float(np.mean([t.reward for t in rollout.transitions])),
        "entropy": float(np.mean([s.entropy for s in stats])),
        "value_loss": float(np.mean([s.value_loss for s in stats])),
        "policy_loss": float(np.mean([s.policy_loss for s in stats])),
        "entropy_coef": ec,
    }


@dataclass
class TrainResult:
    params: PolicyParams
    initial_params: PolicyParams
    metrics: list[dict]


def make_training_envs(experiment: ExperimentConfig, n_envs: int, seed: int) -> list[WarehouseEnv]:
    return [experiment.make_env(seed=seed * 1000 + 17 * i + 1) for i in range(n_envs)]


def train(
    experiment: ExperimentConfig,
    cfg: TrainConfig,
    seed: int = 0,
    metrics_path=None,
    params: PolicyParams | None = None,
    progress_every: int = 0,
) -> TrainResult:
    """Alternate rollout collection and PPO updates for ``cfg.total_iterations``."""
    rng = np.random.default_rng([seed, 7])
    params = PolicyParams.init(np.random.default_rng([seed, 3])) if params is None else params.copy()
    initial = params.copy()
    optimizer = Adam(params, cfg.learning_rate)
    envs = make_training_envs(experiment, cfg.n_envs, seed)
    metrics = []
    writer = handle = None
    if metrics_path is not None:
        Path(metrics_path).parent.mkdir(parents=True, exist_ok=True)
        handle = open(metrics_path, "w", newline="")
        writer = csv.writer(handle)
        writer.writerow(METRIC_COLUMNS)
    try:
        for it in range(cfg.total_iterations):
            rollout = collect_rollout(envs, params, cfg.rollout_length, rng)
            row = {"update_index": it, "env_steps": (it + 1) * cfg.rollout_length}
            row.update(update(params, optimizer, rollout, cfg, it, rng))
            metrics.append(row)
            if writer is not None:
                writer.writerow([repr(row[c]) if isinstance(row[c], float) else row[c] for c in METRIC_COLUMNS])
                handle.flush()
            if progress_every and (it + 1) % progress_every == 0:
                log.info(
                    "update %d steps %d reward %.4f entropy %.3f",
                    it + 1,
                    row["env_steps"],
                    row["mean_reward"],
                    row["entropy"],
                )
    finally:
        if handle is not None:
            handle.close()
    return TrainResult(params, initial, metrics)
