"""Travel costs between cells.

Robots move one cell per second, so path lengths double as travel times.
Two schemes share the :class:`CostProvider` interface: straight-line
(``direct``) and 4-connected grid A* (``astar``).
"""

from __future__ import annotations

import heapq
import itertools
import math
from dataclasses import dataclass

from .errors import InvalidEndpoint, InvalidConfig, Unreachable
from .layout import Cell, GridLayout


@dataclass(frozen=True)
class Path:
    cells: tuple[Cell, ...]
    length: float


def direct_distance(a, b) -> float:
    return math.hypot(a[0] - b[0], a[1] - b[1])


def manhattan(a, b) -> int:
    return abs(a[0] - b[0]) + abs(a[1] - b[1])


_MOVES = ((1, 0), (-1, 0), (0, 1), (0, -1))


def astar_shortest_path(layout: GridLayout, a, b) -> Path:
    """Minimal-move path over 4-connected free cells.

    Open-list ties are broken by smaller heuristic, then insertion order, so
    the returned path is deterministic.
    """
    a, b = Cell(*a), Cell(*b)
    for end in (a, b):
        if not layout.is_free(end):
            raise InvalidEndpoint(f"endpoint {tuple(end)} is blocked or out of bounds")
    if a == b:
        return Path((a,), 0.0)

    counter = itertools.count()
    h0 = manhattan(a, b)
    open_heap = [(h0, h0, next(counter), a)]
    g = {a: 0}
    parent: dict[Cell, Cell] = {}
    closed = set()
    obstacles = layout.obstacles
    w, h = layout.width, layout.height
    while open_heap:
        _, _, _, cur = heapq.heappop(open_heap)
        if cur in closed:
            continue
        if cur == b:
            cells = [cur]
            while cur in parent:
                cur = parent[cur]
                cells.append(cur)
            cells.reverse()
            return Path(tuple(cells), float(g[b]))
        closed.add(cur)
        gc = g[cur] + 1
        for dx, dy in _MOVES:
            nx, ny = cur.x + dx, cur.y + dy
            if not (0 <= nx < w and 0 <= ny < h) or obstacles[ny, nx]:
                continue
            nb = Cell(nx, ny)
            if gc < g.get(nb, math.inf):
                g[nb] = gc
                parent[nb] = cur
                hn = abs(nx - b.x) + abs(ny - b.y)
                heapq.heappush(open_heap, (gc + hn, hn, next(counter), nb))
    raise Unreachable(f"no path from {tuple(a)} to {tuple(b)}")


class CostProvider:
    """Travel-time oracle used by rewards, observations and baselines."""

    scheme = ""

    def cost(self, a, b) -> float:
        raise NotImplementedError


class DirectCost(CostProvider):
    scheme = "direct"

    def __init__(self, layout: GridLayout | None = None):
        self.layout = layout

    def cost(self, a, b) -> float:
        return direct_distance(a, b)


class AStarCost(CostProvider):
    """Grid A* lengths, memoised per unordered endpoint pair."""

    scheme = "astar"

    def __init__(self, layout: GridLayout):
        self.layout = layout
        self._cache: dict[tuple, float] = {}

    def cost(self, a, b) -> float:
        a, b = (int(a[0]), int(a[1])), (int(b[0]), int(b[1]))
        key = (a, b) if a <= b else (b, a)
        hit = self._cache.get(key)
        if hit is None:
            hit = astar_shortest_path(self.layout, a, b).length
            self._cache[key] = hit
        return hit


def cost(provider: CostProvider, a, b) -> float:
    return provider.cost(a, b)


def make_provider(scheme: str, layout: GridLayout) -> CostProvider:
    scheme = scheme.lower()
    if scheme == "direct":
        return DirectCost(layout)
    if scheme in ("astar", "a*"):
        return AStarCost(layout)
    raise InvalidConfig(f"unknown navigation scheme {scheme!r}")
