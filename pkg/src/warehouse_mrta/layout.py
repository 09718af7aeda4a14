"""Warehouse grids: loading from text, shelf-block generation, presets.

A layout file is a rectangle of ``.`` (free) and ``#`` (obstacle) characters.
Row 0 is the first line and ``x`` indexes columns. After a blank line, region
lines may follow::

    pickup <x> <y> <std>
    delivery <x> <y> <std>
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, field
from pathlib import Path
from typing import NamedTuple

import numpy as np

from .errors import InvalidLayout, ParseError


class Cell(NamedTuple):
    x: int
    y: int


@dataclass(frozen=True)
class GaussianRegion:
    mean: Cell
    std: float

    def __post_init__(self):
        # std == 0 is allowed: it collapses the region onto its mean cell.
        if not self.std >= 0:
            raise InvalidLayout(f"region std must be non-negative, got {self.std}")
        object.__setattr__(self, "mean", Cell(int(self.mean[0]), int(self.mean[1])))


@dataclass(frozen=True, eq=False)
class GridLayout:
    """Immutable occupancy grid. ``obstacles`` is indexed ``[y, x]``."""

    width: int
    height: int
    obstacles: np.ndarray
    pickup_regions: tuple[GaussianRegion, ...] = ()
    delivery_regions: tuple[GaussianRegion, ...] = ()
    name: str = field(default="", compare=False)

    def __post_init__(self):
        mask = np.array(self.obstacles, dtype=bool)
        if mask.shape != (self.height, self.width):
            raise InvalidLayout(
                f"obstacle mask shape {mask.shape} does not match {self.height}x{self.width}"
            )
        if mask.all():
            raise InvalidLayout("layout has no free cells")
        mask.setflags(write=False)
        object.__setattr__(self, "obstacles", mask)
        object.__setattr__(self, "pickup_regions", tuple(self.pickup_regions))
        object.__setattr__(self, "delivery_regions", tuple(self.delivery_regions))
        for region in self.pickup_regions + self.delivery_regions:
            if not self.in_bounds(region.mean):
                raise InvalidLayout(f"region mean {tuple(region.mean)} lies outside the grid")

    @classmethod
    def empty(cls, width: int, height: int, **kwargs) -> "GridLayout":
        return cls(width, height, np.zeros((height, width), dtype=bool), **kwargs)

    @property
    def diagonal(self) -> float:
        """Normalisation constant for distances and times."""
        return math.hypot(self.width, self.height)

    def in_bounds(self, c) -> bool:
        return 0 <= c[0] < self.width and 0 <= c[1] < self.height

    def is_free(self, c) -> bool:
        return self.in_bounds(c) and not self.obstacles[c[1], c[0]]

    def free_cells(self) -> list[Cell]:
        ys, xs = np.nonzero(~self.obstacles)
        return [Cell(int(x), int(y)) for y, x in zip(ys, xs)]

    def __eq__(self, other):
        if not isinstance(other, GridLayout):
            return NotImplemented
        return (
            self.width == other.width
            and self.height == other.height
            and np.array_equal(self.obstacles, other.obstacles)
            and self.pickup_regions == other.pickup_regions
            and self.delivery_regions == other.delivery_regions
        )

    __hash__ = None


def is_free(layout: GridLayout, c) -> bool:
    return layout.is_free(c)


def load_layout(text: str, name: str = "") -> GridLayout:
    lines = text.splitlines()
    grid_lines: list[str] = []
    i = 0
    while i < len(lines) and lines[i].strip():
        grid_lines.append(lines[i].rstrip("\r"))
        i += 1
    if not grid_lines:
        raise ParseError("layout text contains no grid rows")

    width = len(grid_lines[0])
    rows = []
    for row_no, line in enumerate(grid_lines):
        if len(line) != width:
            raise ParseError(
                f"row {row_no} has length {len(line)}, expected {width} (grid must be rectangular)"
            )
        bad = set(line) - {".", "#"}
        if bad:
            raise ParseError(f"row {row_no}: unknown character(s) {sorted(bad)!r}")
        rows.append([ch == "#" for ch in line])

    pickup, delivery = [], []
    for line_no, line in enumerate(lines[i:], start=i + 1):
        parts = line.split()
        if not parts or parts[0].startswith(";"):
            continue
        if parts[0] not in ("pickup", "delivery") or len(parts) != 4:
            raise ParseError(f"line {line_no}: expected 'pickup|delivery <x> <y> <std>', got {line!r}")
        try:
            region = GaussianRegion(Cell(int(parts[1]), int(parts[2])), float(parts[3]))
        except ValueError as exc:
            raise ParseError(f"line {line_no}: {exc}") from exc
        (pickup if parts[0] == "pickup" else delivery).append(region)

    return GridLayout(
        width,
        len(rows),
        np.array(rows, dtype=bool),
        pickup_regions=tuple(pickup),
        delivery_regions=tuple(delivery),
        name=name,
    )


def read_layout(path) -> GridLayout:
    path = Path(path)
    return load_layout(path.read_text(), name=path.stem)


def dump_layout(layout: GridLayout) -> str:
    rows = ["".join("#" if v else "." for v in row) for row in layout.obstacles]
    regions = [
        f"{kind} {r.mean.x} {r.mean.y} {r.std:g}"
        for kind, group in (("pickup", layout.pickup_regions), ("delivery", layout.delivery_regions))
        for r in group
    ]
    text = "\n".join(rows) + "\n"
    if regions:
        text += "\n" + "\n".join(regions) + "\n"
    return text


def _anchors(extent: int, block: int, aisle: int) -> list[int]:
    out = []
    pos = aisle
    while pos + block <= extent - aisle:
        out.append(pos)
        pos += block + aisle
    return out


def generate_shelf_layout(
    width: int,
    height: int,
    shelf_w: int,
    shelf_h: int,
    aisle: int,
    pickup_regions=(),
    delivery_regions=(),
    name: str = "",
) -> GridLayout:
    """Tile ``shelf_w`` x ``shelf_h`` obstacle blocks separated by ``aisle``-wide corridors.

    Blocks start one aisle in from the top-left corner and are placed while a
    full aisle of free border remains on the far side, so the free region is
    always connected and contains the whole border.
    """
    if min(width, height) < 1:
        raise InvalidLayout("grid dimensions must be positive")
    if aisle < 1 or shelf_w < 1 or shelf_h < 1:
        raise InvalidLayout("aisle and shelf dimensions must be >= 1")
    xs = _anchors(width, shelf_w, aisle)
    ys = _anchors(height, shelf_h, aisle)
    if not xs or not ys:
        raise InvalidLayout(
            f"no {shelf_w}x{shelf_h} shelf fits in a {width}x{height} grid with aisle {aisle}"
        )
    mask = np.zeros((height, width), dtype=bool)
    for y0 in ys:
        for x0 in xs:
            mask[y0 : y0 + shelf_h, x0 : x0 + shelf_w] = True
    return GridLayout(width, height, mask, tuple(pickup_regions), tuple(delivery_regions), name=name)


def connected_free_component(layout: GridLayout, start) -> set[Cell]:
    """Flood fill over 4-connected free cells."""
    if not layout.is_free(start):
        return set()
    seen = {Cell(*start)}
    todo = deque(seen)
    while todo:
        x, y = todo.popleft()
        for nx, ny in ((x + 1, y), (x - 1, y), (x, y + 1), (x, y - 1)):
            c = Cell(nx, ny)
            if c not in seen and layout.is_free(c):
                seen.add(c)
                todo.append(c)
    return seen


# Stand-ins for five 60x60 layouts of differing compactness. Parameters are a
# local choice: (shelf_w, shelf_h, aisle).
PRESETS: dict[str, tuple[int, int, int]] = {
    "A": (2, 4, 4),  # very low compactness
    "B": (4, 10, 1),  # high
    "C": (2, 6, 3),  # low
    "D": (6, 6, 1),  # high
    "E": (3, 3, 3),  # low
}

DEFAULT_REGION_STD = 2.0


def default_regions(width: int, height: int, std: float = DEFAULT_REGION_STD):
    """Two pickup regions on the left border, two delivery regions on the right."""
    q = height // 4
    pickup = (GaussianRegion(Cell(1, q), std), GaussianRegion(Cell(1, 3 * q), std))
    delivery = (
        GaussianRegion(Cell(width - 2, q), std),
        GaussianRegion(Cell(width - 2, 3 * q), std),
    )
    return pickup, delivery


def preset_layout(name: str, size: int = 60, std: float = DEFAULT_REGION_STD) -> GridLayout:
    """Shelf layout preset ``A``..``E`` with pickup regions on the left border and
    delivery regions on the right border."""
    key = name.upper()
    if key not in PRESETS:
        raise InvalidLayout(f"unknown preset {name!r}; choose from {sorted(PRESETS)}")
    shelf_w, shelf_h, aisle = PRESETS[key]
    pickup, delivery = default_regions(size, size, std)
    return generate_shelf_layout(
        size, size, shelf_w, shelf_h, aisle, pickup, delivery, name=f"layout-{key}"
    )


def resolve_layout(source: str) -> GridLayout:
    """Turn a config string into a layout.

    Accepts ``empty:WxH`` (``empty:WxH:regions`` attaches the default
    pickup/delivery regions), ``preset:A`` (or ``preset:A:64`` for a size), or
    a path to a layout file.
    """
    if source.startswith("empty:"):
        parts = source.split(":")
        try:
            w, h = (int(v) for v in parts[1].lower().split("x"))
        except ValueError as exc:
            raise InvalidLayout(f"bad empty layout spec {source!r}") from exc
        if len(parts) > 2 and parts[2] == "regions":
            pickup, delivery = default_regions(w, h)
            return GridLayout.empty(w, h, pickup_regions=pickup, delivery_regions=delivery, name=source)
        return GridLayout.empty(w, h, name=source)
    if source.startswith("preset:"):
        parts = source.split(":")
        size = int(parts[2]) if len(parts) > 2 else 60
        return preset_layout(parts[1], size=size)
    return read_layout(source)
