"""Task generation and the fixed-length task queue."""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Sequence

import numpy as np

from .errors import GenerationError, InvalidConfig, NavigationError, QueueError
from .layout import Cell, GridLayout
from .navigation import CostProvider, DirectCost

MAX_ATTEMPTS = 1000

TWO_TASK_ORIGIN = Cell(0, 0)
TWO_TASK_SHORT = Cell(3, 3)
TWO_TASK_LONG = Cell(9, 9)


@dataclass(frozen=True)
class Task:
    origin: Cell
    destination: Cell
    length: float
    tag: str = ""


class GenerationMode(str, Enum):
    RANDOM = "random"
    DESIGNATED = "designated"
    TWO_TASK = "two_task"
    SEQUENCE = "sequence"


def make_task(origin, destination, provider: CostProvider, tag: str = "") -> Task:
    origin, destination = Cell(*origin), Cell(*destination)
    return Task(origin, destination, float(provider.cost(origin, destination)), tag)


def sample_task_random(
    layout: GridLayout,
    rng: np.random.Generator,
    provider: CostProvider | None = None,
    max_attempts: int = MAX_ATTEMPTS,
    free: Sequence[Cell] | None = None,
) -> Task:
    """Uniform origin and destination over distinct free cells, resampled until
    the pair is reachable."""
    provider = provider or DirectCost(layout)
    free = layout.free_cells() if free is None else free
    if len(free) < 2:
        raise GenerationError("random generation needs at least two free cells")
    for _ in range(max_attempts):
        i, j = rng.integers(len(free), size=2)
        if i == j:
            continue
        try:
            return make_task(free[i], free[j], provider)
        except NavigationError:
            continue
    raise GenerationError(f"no reachable task found in {max_attempts} attempts")


def _sample_region_cell(layout: GridLayout, regions, rng: np.random.Generator) -> Cell | None:
    region = regions[rng.integers(len(regions))]
    x, y = rng.normal(region.mean, region.std, size=2) if region.std > 0 else region.mean
    c = Cell(int(np.rint(x)), int(np.rint(y)))
    return c if layout.is_free(c) else None


def sample_task_designated(
    layout: GridLayout,
    rng: np.random.Generator,
    provider: CostProvider | None = None,
    max_attempts: int = MAX_ATTEMPTS,
) -> Task:
    """Origin drawn from a pickup region, destination from a delivery region.

    Each region is an isotropic Gaussian rounded to the nearest cell; blocked,
    out-of-bounds and unreachable draws are rejected.
    """
    provider = provider or DirectCost(layout)
    if not layout.pickup_regions or not layout.delivery_regions:
        raise GenerationError("designated generation needs pickup and delivery regions")
    for _ in range(max_attempts):
        origin = _sample_region_cell(layout, layout.pickup_regions, rng)
        if origin is None:
            continue
        dest = _sample_region_cell(layout, layout.delivery_regions, rng)
        if dest is None:
            continue
        try:
            return make_task(origin, dest, provider)
        except NavigationError:
            continue
    raise GenerationError(f"rejection budget of {max_attempts} attempts exhausted")


def two_task_pair(provider: CostProvider) -> tuple[Task, Task]:
    return (
        make_task(TWO_TASK_ORIGIN, TWO_TASK_SHORT, provider, tag="A"),
        make_task(TWO_TASK_ORIGIN, TWO_TASK_LONG, provider, tag="B"),
    )


@dataclass
class TaskQueue:
    capacity: int
    tasks: list[Task] = field(default_factory=list)

    def __post_init__(self):
        if self.capacity < 1:
            raise InvalidConfig("queue capacity must be >= 1")

    def __len__(self):
        return len(self.tasks)

    def __getitem__(self, i):
        return self.tasks[i]

    def __iter__(self):
        return iter(self.tasks)

    def pop(self, index: int) -> Task:
        return self.tasks.pop(index)

    @property
    def full(self) -> bool:
        return len(self.tasks) == self.capacity


class TaskGenerator:
    """Stateful source of new tasks, deterministic given its seed.

    ``sequence`` mode replays a fixed task list and returns ``None`` once it
    runs out; all other modes are unbounded.
    """

    def __init__(
        self,
        mode: GenerationMode | str,
        layout: GridLayout,
        provider: CostProvider | None = None,
        seed: int | np.random.Generator | None = None,
        sequence: Sequence[Task] = (),
    ):
        self.mode = GenerationMode(mode)
        self.layout = layout
        self.provider = provider or DirectCost(layout)
        self.rng = np.random.default_rng(seed)
        self._sequence = list(sequence)
        self._cursor = 0
        self._free = layout.free_cells()
        if self.mode is GenerationMode.TWO_TASK:
            self.pair = two_task_pair(self.provider)

    def next_task(self) -> Task | None:
        if self.mode is GenerationMode.RANDOM:
            return sample_task_random(self.layout, self.rng, self.provider, free=self._free)
        if self.mode is GenerationMode.DESIGNATED:
            return sample_task_designated(self.layout, self.rng, self.provider)
        if self.mode is GenerationMode.SEQUENCE:
            if self._cursor >= len(self._sequence):
                return None
            self._cursor += 1
            return self._sequence[self._cursor - 1]
        raise GenerationError("two-task mode is replenished by type, not drawn")


def two_task_refill(queue: TaskQueue, pair: tuple[Task, Task]) -> TaskQueue:
    """Top the queue up so it holds exactly one short task and one long task."""
    if queue.capacity != 2:
        raise QueueError("two-task setting requires queue capacity 2")
    present = {t.tag for t in queue}
    for task in pair:
        if task.tag not in present:
            queue.tasks.append(task)
    return queue


def fill_queue(queue: TaskQueue, gen: TaskGenerator) -> TaskQueue:
    if gen.mode is GenerationMode.TWO_TASK:
        return two_task_refill(queue, gen.pair)
    while len(queue) < queue.capacity:
        task = gen.next_task()
        if task is None:
            break
        queue.tasks.append(task)
    return queue


def refill_queue(queue: TaskQueue, gen: TaskGenerator) -> TaskQueue:
    """Append one new task after a consumption."""
    if len(queue) != queue.capacity - 1:
        raise QueueError(
            f"refill expects exactly one consumed slot (size {len(queue)}, capacity {queue.capacity})"
        )
    return fill_queue(queue, gen)
