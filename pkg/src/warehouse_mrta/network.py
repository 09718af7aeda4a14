"""Attention-pooled allocation policy with a value head, in plain numpy.

Robot features (x, y, remaining) and task features (ox, oy, dx, dy, k, l)
are embedded to 16 dims by two-layer MLPs. Each embedding gets a sigmoid
weight from a small tanh gate; the weighted sums over robots and tasks plus
the selected robot's embedding form a 48-dim state vector ``V``. Every task
scores ``concat(V, E_task)`` through an 8-unit ReLU layer, and a softmax over
scores gives the action distribution. The critic reads ``V`` through a
16-unit tanh layer.

Weight shapes never depend on how many robots or tasks there are.

Everything is batched over a leading axis ``B`` with fixed robot count ``M``
and task count ``N`` inside a batch. :func:`backward` is the hand-written
reverse pass of :func:`forward`.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

EMBED = 16
HEAD_HIDDEN = 8
VALUE_HIDDEN = 16
ROBOT_FEATURES = 3
TASK_FEATURES = 6
STATE_DIM = 3 * EMBED

# (name, out, in). Each layer also has a bias of length ``out``.
LAYERS: tuple[tuple[str, int, int], ...] = (
    ("robot_embed1", EMBED, ROBOT_FEATURES),
    ("robot_embed2", EMBED, EMBED),
    ("task_embed1", EMBED, TASK_FEATURES),
    ("task_embed2", EMBED, EMBED),
    ("robot_gate1", EMBED, EMBED),
    ("robot_gate2", 1, EMBED),
    ("task_gate1", EMBED, EMBED),
    ("task_gate2", 1, EMBED),
    ("head1", HEAD_HIDDEN, STATE_DIM + EMBED),
    ("head2", 1, HEAD_HIDDEN),
    ("value1", VALUE_HIDDEN, STATE_DIM),
    ("value2", 1, VALUE_HIDDEN),
)


def manifest() -> list[tuple[str, tuple[int, ...]]]:
    """Ordered (tensor name, shape) pairs, the flat-vector layout."""
    out = []
    for name, fan_out, fan_in in LAYERS:
        out.append((f"{name}.W", (fan_out, fan_in)))
        out.append((f"{name}.b", (fan_out,)))
    return out


def parameter_count() -> int:
    return sum(int(np.prod(shape)) for _, shape in manifest())


class PolicyParams(dict):
    """Mapping of tensor name to float64 array, ordered as :func:`manifest`."""

    @classmethod
    def init(cls, rng: np.random.Generator | int | None = None) -> "PolicyParams":
        """Weights uniform in +-1/sqrt(fan_in); biases zero."""
        rng = np.random.default_rng(rng)
        p = cls()
        for name, fan_out, fan_in in LAYERS:
            bound = 1.0 / np.sqrt(fan_in)
            p[f"{name}.W"] = rng.uniform(-bound, bound, size=(fan_out, fan_in))
            p[f"{name}.b"] = np.zeros(fan_out)
        return p

    @classmethod
    def zeros(cls) -> "PolicyParams":
        return cls({name: np.zeros(shape) for name, shape in manifest()})

    @classmethod
    def from_flat(cls, flat: np.ndarray) -> "PolicyParams":
        flat = np.asarray(flat, dtype=np.float64)
        if flat.size != parameter_count():
            raise ValueError(f"expected {parameter_count()} values, got {flat.size}")
        p, i = cls(), 0
        for name, shape in manifest():
            n = int(np.prod(shape))
            p[name] = flat[i : i + n].reshape(shape).copy()
            i += n
        return p

    def flat(self) -> np.ndarray:
        return np.concatenate([self[name].ravel() for name, _ in manifest()])

    def copy(self) -> "PolicyParams":
        return PolicyParams({k: v.copy() for k, v in self.items()})


def _sigmoid(z):
    return 0.5 * (1.0 + np.tanh(0.5 * z))


def _dense(x, p, name):
    return x @ p[f"{name}.W"].T + p[f"{name}.b"]


def robot_embedding(params, features: np.ndarray) -> np.ndarray:
    """Embedding of one or more robot feature rows."""
    return _dense(np.maximum(_dense(features, params, "robot_embed1"), 0.0), params, "robot_embed2")


def task_embedding(params, features: np.ndarray) -> np.ndarray:
    return _dense(np.maximum(_dense(features, params, "task_embed1"), 0.0), params, "task_embed2")


def attention_scalar(params, embedding: np.ndarray, kind: str) -> np.ndarray:
    """Sigmoid gate in (0, 1) weighting an embedding in the pooled sum."""
    if kind not in ("robot", "task"):
        raise ValueError(f"kind must be 'robot' or 'task', got {kind!r}")
    t = np.tanh(_dense(embedding, params, f"{kind}_gate1"))
    return _sigmoid(_dense(t, params, f"{kind}_gate2"))[..., 0]


@dataclass
class Batch:
    """Stacked observations: robots (B, M, 3), tasks (B, N, 6), selected (B,)."""

    robots: np.ndarray
    tasks: np.ndarray
    selected: np.ndarray

    def __len__(self):
        return len(self.selected)

    @classmethod
    def from_observations(cls, observations) -> "Batch":
        return cls(
            np.stack([o.robot_features for o in observations]),
            np.stack([o.task_features for o in observations]),
            np.array([o.selected for o in observations], dtype=np.int64),
        )

    def take(self, idx) -> "Batch":
        return Batch(self.robots[idx], self.tasks[idx], self.selected[idx])


def _set_branch(params, x, prefix):
    """Embed a set and pool it by the gates. Returns pooled vector and cache."""
    z1 = _dense(x, params, f"{prefix}_embed1")
    h1 = np.maximum(z1, 0.0)
    e = _dense(h1, params, f"{prefix}_embed2")
    t = np.tanh(_dense(e, params, f"{prefix}_gate1"))
    a = _sigmoid(_dense(t, params, f"{prefix}_gate2"))  # (B, K, 1)
    pooled = (a * e).sum(axis=1)
    return pooled, (x, z1, h1, e, t, a)


def forward(params, batch: Batch):
    """Return (logits (B, N), log-probs (B, N), values (B,), cache)."""
    v_r, rcache = _set_branch(params, batch.robots, "robot")
    v_p, tcache = _set_branch(params, batch.tasks, "task")
    e_r, e_p = rcache[3], tcache[3]
    bidx = np.arange(len(batch.selected))
    e_sel = e_r[bidx, batch.selected]
    state = np.concatenate([v_r, v_p, e_sel], axis=1)  # (B, 48)

    n = e_p.shape[1]
    out = np.concatenate([np.broadcast_to(state[:, None, :], (len(state), n, STATE_DIM)), e_p], axis=2)
    zh = _dense(out, params, "head1")
    hh = np.maximum(zh, 0.0)
    logits = _dense(hh, params, "head2")[..., 0]
    shifted = logits - logits.max(axis=1, keepdims=True)
    log_probs = shifted - np.log(np.exp(shifted).sum(axis=1, keepdims=True))

    tv = np.tanh(_dense(state, params, "value1"))
    values = _dense(tv, params, "value2")[:, 0]
    cache = (batch, rcache, tcache, state, out, zh, hh, tv)
    return logits, log_probs, values, cache


def _dense_back(grads, params, name, x, dz):
    """Accumulate dW, db for ``z = x W^T + b`` over all leading axes; return dx."""
    w = params[f"{name}.W"]
    dz2 = dz.reshape(-1, dz.shape[-1])
    grads[f"{name}.W"] += dz2.T @ x.reshape(-1, x.shape[-1])
    grads[f"{name}.b"] += dz2.sum(axis=0)
    return dz @ w


def _set_branch_back(grads, params, prefix, cache, d_pooled, d_embed):
    x, z1, h1, e, t, a = cache
    d_e = d_embed + a * d_pooled[:, None, :]
    d_a = (e * d_pooled[:, None, :]).sum(axis=2, keepdims=True)
    d_z4 = d_a * a * (1.0 - a)
    d_t = _dense_back(grads, params, f"{prefix}_gate2", t, d_z4)
    d_z3 = d_t * (1.0 - t * t)
    d_e = d_e + _dense_back(grads, params, f"{prefix}_gate1", e, d_z3)
    d_h1 = _dense_back(grads, params, f"{prefix}_embed2", h1, d_e)
    _dense_back(grads, params, f"{prefix}_embed1", x, d_h1 * (z1 > 0))


def backward(params, cache, d_logits: np.ndarray, d_values: np.ndarray) -> PolicyParams:
    """Gradients of a scalar loss given its derivatives w.r.t. logits and values."""
    batch, rcache, tcache, state, out, zh, hh, tv = cache
    grads = PolicyParams({k: np.zeros_like(v) for k, v in params.items()})

    d_hh = _dense_back(grads, params, "head2", hh, d_logits[..., None])
    d_out = _dense_back(grads, params, "head1", out, d_hh * (zh > 0))
    d_state = d_out[..., :STATE_DIM].sum(axis=1)
    d_ep_direct = d_out[..., STATE_DIM:]

    d_tv = _dense_back(grads, params, "value2", tv, d_values[:, None])
    d_state = d_state + _dense_back(grads, params, "value1", state, d_tv * (1.0 - tv * tv))

    d_vr = d_state[:, :EMBED]
    d_vp = d_state[:, EMBED : 2 * EMBED]
    d_esel = d_state[:, 2 * EMBED :]

    e_r = rcache[3]
    d_er = np.zeros_like(e_r)
    d_er[np.arange(len(batch.selected)), batch.selected] = d_esel
    _set_branch_back(grads, params, "robot", rcache, d_vr, d_er)
    _set_branch_back(grads, params, "task", tcache, d_vp, d_ep_direct)
    return grads


def policy_forward(params, obs):
    """Single-observation convenience: (probabilities (N,), value)."""
    _, log_probs, values, _ = forward(params, Batch.from_observations([obs]))
    return np.exp(log_probs[0]), float(values[0])


def global_state(params, obs):
    """The 48-dim state vector and the per-task embeddings for one observation."""
    batch = Batch.from_observations([obs])
    v_r, rcache = _set_branch(params, batch.robots, "robot")
    v_p, tcache = _set_branch(params, batch.tasks, "task")
    e_sel = rcache[3][0, obs.selected]
    return np.concatenate([v_r[0], v_p[0], e_sel]), tcache[3][0]
