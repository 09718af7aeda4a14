"""Slow, obviously-correct reference computations used as test oracles."""

import math
from collections import deque


def bfs_length(layout, a, b):
    """Shortest 4-connected move count, or None when unreachable."""
    if not (layout.is_free(a) and layout.is_free(b)):
        return None
    dist = {tuple(a): 0}
    todo = deque([tuple(a)])
    while todo:
        cur = todo.popleft()
        if cur == tuple(b):
            return dist[cur]
        x, y = cur
        for nxt in ((x + 1, y), (x - 1, y), (x, y + 1), (x, y - 1)):
            if nxt not in dist and layout.is_free(nxt):
                dist[nxt] = dist[cur] + 1
                todo.append(nxt)
    return None


def shelf_obstacle_count(width, height, shelf_w, shelf_h, aisle):
    """Count anchors by testing every coordinate against the tiling rule."""

    def axis(extent, block):
        return sum(
            1
            for p in range(extent)
            if p >= aisle and (p - aisle) % (block + aisle) == 0 and p + block <= extent - aisle
        )

    return axis(width, shelf_w) * axis(height, shelf_h) * shelf_w * shelf_h


def gae_nested(rewards, values, bootstrap, gamma, lam):
    """A_t = sum_k (gamma*lam)^k delta_{t+k}, evaluated as a double loop."""
    n = len(rewards)
    vals = list(values) + [bootstrap]
    deltas = [rewards[t] + gamma * vals[t + 1] - vals[t] for t in range(n)]
    adv = []
    for t in range(n):
        total = 0.0
        for k in range(n - t):
            total += (gamma * lam) ** k * deltas[t + k]
        adv.append(total)
    return adv


def discounted_return(rewards, bootstrap, gamma):
    out = []
    for t in range(len(rewards)):
        g = sum(gamma**k * rewards[t + k] for k in range(len(rewards) - t))
        g += gamma ** (len(rewards) - t) * bootstrap
        out.append(g)
    return out


# --- scalar reference of the policy network ---------------------------------


def _matvec(w, b, x):
    return [sum(w[i][j] * x[j] for j in range(len(x))) + b[i] for i in range(len(w))]


def _relu(v):
    return [max(0.0, t) for t in v]


def _tanh(v):
    return [math.tanh(t) for t in v]


def _sig(t):
    return 1.0 / (1.0 + math.exp(-t))


def ref_embed(p, prefix, f):
    w1, b1 = p[f"{prefix}_embed1.W"].tolist(), p[f"{prefix}_embed1.b"].tolist()
    w2, b2 = p[f"{prefix}_embed2.W"].tolist(), p[f"{prefix}_embed2.b"].tolist()
    return _matvec(w2, b2, _relu(_matvec(w1, b1, list(f))))


def ref_gate(p, prefix, e):
    t = _tanh(_matvec(p[f"{prefix}_gate1.W"].tolist(), p[f"{prefix}_gate1.b"].tolist(), e))
    return _sig(_matvec(p[f"{prefix}_gate2.W"].tolist(), p[f"{prefix}_gate2.b"].tolist(), t)[0])


def ref_forward(p, robots, tasks, selected):
    """Probabilities and value for one observation, with Python loops only."""
    er = [ref_embed(p, "robot", f) for f in robots]
    ep = [ref_embed(p, "task", f) for f in tasks]
    ar = [ref_gate(p, "robot", e) for e in er]
    ap = [ref_gate(p, "task", e) for e in ep]
    vr = [sum(a * e[k] for a, e in zip(ar, er)) for k in range(16)]
    vp = [sum(a * e[k] for a, e in zip(ap, ep)) for k in range(16)]
    state = vr + vp + er[selected]
    scores = []
    for e in ep:
        h = _relu(_matvec(p["head1.W"].tolist(), p["head1.b"].tolist(), state + e))
        scores.append(_matvec(p["head2.W"].tolist(), p["head2.b"].tolist(), h)[0])
    m = max(scores)
    ex = [math.exp(s - m) for s in scores]
    z = sum(ex)
    probs = [v / z for v in ex]
    hv = _tanh(_matvec(p["value1.W"].tolist(), p["value1.b"].tolist(), state))
    value = _matvec(p["value2.W"].tolist(), p["value2.b"].tolist(), hv)[0]
    return probs, value, state


# --- numerical differentiation ------------------------------------------------


def central_difference(loss_fn, params, key, index, h=1e-5):
    """(f(w + h) - f(w - h)) / 2h for a single scalar weight, restoring it after."""
    w = params[key]
    orig = w[index]
    w[index] = orig + h
    up = loss_fn(params)
    w[index] = orig - h
    down = loss_fn(params)
    w[index] = orig
    return (up - down) / (2 * h)


def relative_error(a, b, floor=1e-8):
    return abs(a - b) / max(abs(a), abs(b), floor)
