"""Event-driven allocation simulator.

Time jumps from one decision point to the next: whenever a robot finishes
its task it becomes the selected robot and the policy picks a task for it
from the queue. A busy robot is reported at the destination of its current
task, with ``remaining`` seconds left until it is free again.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Callable, Sequence

import numpy as np

from .errors import InvalidAction, InvalidConfig, ParseError, Unreachable
from .layout import Cell, GridLayout
from .navigation import CostProvider, DirectCost
from .tasking import GenerationMode, Task, TaskGenerator, TaskQueue, fill_queue, make_task, refill_queue

NOISE_MEAN = 0.25
NOISE_STD = 0.5
MIN_COMPLETION = 1e-6
STAGGER = 5.0


class RewardScheme(str, Enum):
    TTD = "ttd"
    TASK_LENGTH = "task_length"
    TTD_PLUS_TASK_LENGTH = "ttd_plus_task_length"


def compute_reward(scheme: RewardScheme | str, pickup_cost: float, task_length: float, scale: float = 1.0) -> float:
    scheme = RewardScheme(scheme)
    if scheme is RewardScheme.TTD:
        cost = pickup_cost
    elif scheme is RewardScheme.TASK_LENGTH:
        cost = task_length
    else:
        cost = pickup_cost + task_length
    return -cost / scale


@dataclass(frozen=True)
class RobotState:
    position: Cell
    remaining: float


@dataclass
class WorldState:
    positions: np.ndarray  # (M, 2) int
    remaining: np.ndarray  # (M,) float
    queue: TaskQueue
    selected: int = 0
    clock: float = 0.0
    cumulative_ttd: float = 0.0
    tasks_allocated: int = 0

    @property
    def robots(self) -> list[RobotState]:
        return [RobotState(Cell(int(x), int(y)), float(r)) for (x, y), r in zip(self.positions, self.remaining)]

    @property
    def n_robots(self) -> int:
        return len(self.remaining)


@dataclass
class Observation:
    """Policy input at a decision point.

    Raw quantities are kept next to the normalised feature matrices so the
    rule-based baselines can work in seconds.
    """

    robot_features: np.ndarray  # (M, 3): x/W, y/H, remaining/diag
    task_features: np.ndarray  # (N, 6): ox/W, oy/H, dx/W, dy/H, k/diag, l/diag
    selected: int
    robot_positions: np.ndarray
    task_origins: np.ndarray
    pickup_costs: np.ndarray  # k, seconds
    task_lengths: np.ndarray  # l, seconds
    provider: CostProvider = field(repr=False)

    @property
    def selected_features(self) -> np.ndarray:
        return self.robot_features[self.selected]

    @property
    def n_tasks(self) -> int:
        return len(self.task_features)


def next_available_robot(state: WorldState) -> tuple[int, float]:
    """Advance the clock to the next robot that finishes; lowest index wins ties."""
    j = int(np.argmin(state.remaining))
    elapsed = float(state.remaining[j])
    if elapsed > 0:
        state.remaining -= elapsed
        state.clock += elapsed
    state.remaining[j] = 0.0
    state.selected = j
    return j, elapsed


def assemble_observation(state: WorldState, provider: CostProvider, layout: GridLayout) -> Observation:
    w, h, diag = layout.width, layout.height, layout.diagonal
    sel = tuple(state.positions[state.selected])
    n = len(state.queue)
    origins = np.empty((n, 2), dtype=np.int64)
    dests = np.empty((n, 2), dtype=np.int64)
    k = np.empty(n)
    lengths = np.empty(n)
    for i, task in enumerate(state.queue):
        origins[i] = task.origin
        dests[i] = task.destination
        try:
            k[i] = provider.cost(sel, task.origin)
        except Unreachable:
            k[i] = diag
        lengths[i] = task.length

    robot_f = np.empty((state.n_robots, 3))
    robot_f[:, 0] = state.positions[:, 0] / w
    robot_f[:, 1] = state.positions[:, 1] / h
    robot_f[:, 2] = state.remaining / diag
    task_f = np.empty((n, 6))
    task_f[:, 0] = origins[:, 0] / w
    task_f[:, 1] = origins[:, 1] / h
    task_f[:, 2] = dests[:, 0] / w
    task_f[:, 3] = dests[:, 1] / h
    task_f[:, 4] = k / diag
    task_f[:, 5] = lengths / diag
    return Observation(
        robot_features=robot_f,
        task_features=task_f,
        selected=state.selected,
        robot_positions=state.positions.copy(),
        task_origins=origins,
        pickup_costs=k,
        task_lengths=lengths,
        provider=provider,
    )


@dataclass
class StepRecord:
    step: int
    clock: float
    selected: int
    robots: list[tuple[int, int, float]]
    queue: list[str]
    action: int
    task: str
    pickup_cost: float
    reward: float


@dataclass
class EpisodeReport:
    total_ttd: float
    makespan: float
    steps: list[StepRecord]

    @property
    def chosen(self) -> list[str]:
        return [s.task for s in self.steps]


class WarehouseEnv:
    """Single-writer simulator instance owning its RNG and task generator."""

    def __init__(
        self,
        layout: GridLayout,
        n_robots: int,
        generator: TaskGenerator,
        provider: CostProvider | None = None,
        scheme: RewardScheme | str = RewardScheme.TTD,
        noise: bool = True,
        capacity: int = 10,
        seed: int | None = None,
    ):
        if n_robots < 1:
            raise InvalidConfig("need at least one robot")
        self.layout = layout
        self.n_robots = n_robots
        self.generator = generator
        self.provider = provider or generator.provider
        self.scheme = RewardScheme(scheme)
        self.noise = noise
        self.capacity = capacity
        self.rng = np.random.default_rng(seed)
        self.state: WorldState | None = None
        self._obs: Observation | None = None

    def reset(self, starts: Sequence[tuple[int, int, float]] | None = None) -> Observation:
        """Place robots and fill the queue.

        Without ``starts`` robots go to distinct random free cells; one robot
        is free immediately and the rest become free uniformly within the
        first few seconds.
        """
        if starts is None:
            free = self.layout.free_cells()
            if self.n_robots > len(free):
                raise InvalidConfig(f"{self.n_robots} robots do not fit on {len(free)} free cells")
            idx = self.rng.choice(len(free), size=self.n_robots, replace=False)
            positions = np.array([free[i] for i in idx], dtype=np.int64)
            remaining = self.rng.uniform(0.0, STAGGER, size=self.n_robots)
            remaining[self.rng.integers(self.n_robots)] = 0.0
        else:
            if len(starts) != self.n_robots:
                raise InvalidConfig(f"expected {self.n_robots} robot starts, got {len(starts)}")
            positions = np.array([(int(x), int(y)) for x, y, _ in starts], dtype=np.int64)
            remaining = np.array([float(r) for _, _, r in starts])
            for p in positions:
                if not self.layout.is_free(p):
                    raise InvalidConfig(f"robot start {tuple(p)} is not a free cell")
        queue = fill_queue(TaskQueue(self.capacity), self.generator)
        self.state = WorldState(positions=positions, remaining=remaining, queue=queue)
        next_available_robot(self.state)
        self._obs = assemble_observation(self.state, self.provider, self.layout)
        return self._obs

    @property
    def observation(self) -> Observation:
        return self._obs

    @property
    def done(self) -> bool:
        return self.state is not None and len(self.state.queue) == 0

    def step(self, action: int) -> tuple[Observation, float, dict]:
        state = self.state
        if not 0 <= action < len(state.queue):
            raise InvalidAction(f"action {action} outside queue of length {len(state.queue)}")
        j = state.selected
        pickup = float(self._obs.pickup_costs[action])
        task = state.queue.pop(action)
        noise = self.rng.normal(NOISE_MEAN, NOISE_STD) if self.noise else 0.0
        state.remaining[j] = max(pickup + task.length + noise, MIN_COMPLETION)
        state.positions[j] = task.destination
        state.cumulative_ttd += pickup
        state.tasks_allocated += 1
        if self.generator.mode is GenerationMode.SEQUENCE:
            fill_queue(state.queue, self.generator)
        else:
            refill_queue(state.queue, self.generator)
        reward = compute_reward(self.scheme, pickup, task.length, self.layout.diagonal)
        _, elapsed = next_available_robot(state)
        self._obs = assemble_observation(state, self.provider, self.layout)
        return self._obs, reward, {"pickup_cost": pickup, "task": task, "robot": j, "elapsed": elapsed}

    @property
    def makespan(self) -> float:
        return self.state.clock + float(self.state.remaining.max())


Policy = Callable[[Observation], int]


def run_episode(env: WarehouseEnv, policy: Policy, n_allocations: int) -> EpisodeReport:
    """Allocate ``n_allocations`` tasks (or until the queue empties) from the
    environment's current state."""
    if n_allocations < 1:
        raise InvalidConfig("n_allocations must be >= 1")
    if env.state is None:
        env.reset()
    start_ttd = env.state.cumulative_ttd
    steps = []
    for t in range(n_allocations):
        if env.done:
            break
        state = env.state
        obs = env.observation
        robots = [(int(x), int(y), float(r)) for (x, y), r in zip(state.positions, state.remaining)]
        queue_tags = [task.tag for task in state.queue]
        clock = state.clock
        action = int(policy(obs))
        _, reward, info = env.step(action)
        steps.append(
            StepRecord(
                step=t,
                clock=clock,
                selected=info["robot"],
                robots=robots,
                queue=queue_tags,
                action=action,
                task=info["task"].tag,
                pickup_cost=info["pickup_cost"],
                reward=reward,
            )
        )
    return EpisodeReport(env.state.cumulative_ttd - start_ttd, env.makespan, steps)


@dataclass
class Scenario:
    """Hand-written starting state with a fixed, finite task list."""

    width: int
    height: int
    robots: list[tuple[int, int, float]]
    tasks: list[tuple[int, int, int, int]]
    capacity: int

    def build_env(self, provider_factory=DirectCost, scheme=RewardScheme.TTD) -> WarehouseEnv:
        layout = GridLayout.empty(self.width, self.height, name="scenario")
        provider = provider_factory(layout)
        tasks = [
            make_task((ox, oy), (dx, dy), provider, tag=f"Task {i + 1}")
            for i, (ox, oy, dx, dy) in enumerate(self.tasks)
        ]
        gen = TaskGenerator(GenerationMode.SEQUENCE, layout, provider, sequence=tasks)
        env = WarehouseEnv(
            layout,
            len(self.robots),
            gen,
            provider=provider,
            scheme=scheme,
            noise=False,
            capacity=self.capacity,
        )
        env.reset(starts=self.robots)
        return env


def parse_scenario(text: str) -> Scenario:
    """Parse a scenario fixture.

    Lines (``#`` starts a comment)::

        grid <width> <height>
        capacity <n>
        robot <x> <y> <remaining>
        task <ox> <oy> <dx> <dy>

    Tasks are tagged ``Task 1``, ``Task 2``, ... in file order and enter the
    queue in that order.
    """
    width = height = None
    capacity = None
    robots, tasks = [], []
    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, *vals = line.split()
        try:
            if key == "grid" and len(vals) == 2:
                width, height = int(vals[0]), int(vals[1])
            elif key == "capacity" and len(vals) == 1:
                capacity = int(vals[0])
            elif key == "robot" and len(vals) == 3:
                robots.append((int(vals[0]), int(vals[1]), float(vals[2])))
            elif key == "task" and len(vals) == 4:
                tasks.append(tuple(int(v) for v in vals))
            else:
                raise ParseError(f"line {line_no}: cannot parse {raw!r}")
        except ValueError as exc:
            raise ParseError(f"line {line_no}: {exc}") from exc
    if width is None or not robots or not tasks:
        raise ParseError("scenario needs a grid line, at least one robot and one task")
    return Scenario(width, height, robots, tasks, capacity if capacity is not None else len(tasks))


def read_scenario(path) -> Scenario:
    return parse_scenario(Path(path).read_text())


def builtin_scenario_path(name: str = "two_robot_five_task") -> Path:
    return Path(__file__).parent / "data" / f"{name}.scenario"

