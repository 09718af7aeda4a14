import math

import numpy as np
import pytest

from warehouse_mrta.errors import GenerationError, QueueError
from warehouse_mrta.layout import Cell, GaussianRegion, GridLayout, load_layout
from warehouse_mrta.navigation import AStarCost, DirectCost
from warehouse_mrta.tasking import (
    GenerationMode,
    TaskGenerator,
    TaskQueue,
    fill_queue,
    refill_queue,
    sample_task_designated,
    sample_task_random,
    two_task_pair,
    two_task_refill,
)


def test_random_two_cells(rng):
    layout = GridLayout.empty(2, 1)
    for _ in range(20):
        task = sample_task_random(layout, rng)
        assert {task.origin, task.destination} == {Cell(0, 0), Cell(1, 0)}
        assert task.length == 1.0


def test_random_single_free_cell(rng):
    with pytest.raises(GenerationError):
        sample_task_random(load_layout(".#"), rng)


def test_random_origin_uniform():
    layout = GridLayout.empty(10, 10)
    gen = np.random.default_rng(0)
    n = 10_000
    counts = np.zeros((10, 10))
    for _ in range(n):
        t = sample_task_random(layout, gen)
        assert t.origin != t.destination
        counts[t.origin.y, t.origin.x] += 1
    p = 1 / 100
    sigma = math.sqrt(n * p * (1 - p))
    assert np.all(np.abs(counts - n * p) <= 3 * sigma)


def test_random_respects_reachability(rng):
    layout = load_layout("..#..\n..#..")
    provider = AStarCost(layout)
    for _ in range(50):
        t = sample_task_random(layout, rng, provider)
        assert (t.origin.x < 2) == (t.destination.x < 2)


def test_designated_zero_std(rng):
    layout = GridLayout.empty(
        20,
        20,
        pickup_regions=(GaussianRegion(Cell(10, 10), 0.0),),
        delivery_regions=(GaussianRegion(Cell(2, 3), 0.0),),
    )
    task = sample_task_designated(layout, rng)
    assert task.origin == (10, 10) and task.destination == (2, 3)


def test_designated_mean():
    layout = GridLayout.empty(
        40,
        40,
        pickup_regions=(GaussianRegion(Cell(10, 10), 2.0),),
        delivery_regions=(GaussianRegion(Cell(30, 30), 2.0),),
    )
    gen = np.random.default_rng(1)
    origins = np.array([sample_task_designated(layout, gen).origin for _ in range(10_000)])
    assert np.all(np.abs(origins.mean(axis=0) - 10) < 0.2)


def test_designated_blocked_region(rng):
    mask = np.zeros((5, 5), dtype=bool)
    mask[2, 2] = True
    layout = GridLayout(
        5,
        5,
        mask,
        pickup_regions=(GaussianRegion(Cell(2, 2), 0.0),),
        delivery_regions=(GaussianRegion(Cell(0, 0), 0.0),),
    )
    with pytest.raises(GenerationError):
        sample_task_designated(layout, rng)


def test_designated_needs_regions(rng):
    with pytest.raises(GenerationError):
        sample_task_designated(GridLayout.empty(5, 5), rng)


def test_two_task_refill():
    a, b = two_task_pair(DirectCost())
    assert a.length == pytest.approx(4.243, abs=5e-4)
    assert b.length == pytest.approx(12.728, abs=5e-4)
    q = two_task_refill(TaskQueue(2), (a, b))
    assert [t.tag for t in q] == ["A", "B"]
    q.pop(0)
    assert sorted(t.tag for t in two_task_refill(q, (a, b))) == ["A", "B"]
    q.pop(1)
    assert sorted(t.tag for t in two_task_refill(q, (a, b))) == ["A", "B"]
    with pytest.raises(QueueError):
        two_task_refill(TaskQueue(3), (a, b))


def test_refill_queue_sizes():
    layout = GridLayout.empty(10, 10)
    gen = TaskGenerator("random", layout, seed=0)
    q = fill_queue(TaskQueue(10), gen)
    assert len(q) == 10
    with pytest.raises(QueueError):
        refill_queue(q, gen)
    q.pop(3)
    refill_queue(q, gen)
    assert len(q) == 10


def test_refill_two_task_mode():
    gen = TaskGenerator(GenerationMode.TWO_TASK, GridLayout.empty(10, 10))
    q = fill_queue(TaskQueue(2), gen)
    q.pop(0)
    refill_queue(q, gen)
    assert sorted(t.tag for t in q) == ["A", "B"]


def test_generator_determinism():
    layout = load_layout("....#.....\n..........\n.#........\n")
    for mode in ("random",):
        g1 = TaskGenerator(mode, layout, seed=42)
        g2 = TaskGenerator(mode, layout, seed=42)
        s1 = [g1.next_task() for _ in range(100)]
        s2 = [g2.next_task() for _ in range(100)]
        assert s1 == s2


def test_queue_stays_full_for_1000_steps():
    layout = GridLayout.empty(12, 12)
    gen = TaskGenerator("random", layout, seed=3)
    q = fill_queue(TaskQueue(10), gen)
    r = np.random.default_rng(0)
    for _ in range(1000):
        q.pop(int(r.integers(len(q))))
        refill_queue(q, gen)
        assert len(q) == q.capacity


def test_designated_tasks_reachable_under_astar():
    from warehouse_mrta.layout import preset_layout

    layout = preset_layout("D")
    provider = AStarCost(layout)
    gen = TaskGenerator("designated", layout, provider, seed=5)
    for _ in range(50):
        t = gen.next_task()
        assert layout.is_free(t.origin) and layout.is_free(t.destination)
        assert t.length == provider.cost(t.origin, t.destination)


def test_sequence_generator_exhausts():
    layout = GridLayout.empty(4, 4)
    a, b = two_task_pair(DirectCost())
    gen = TaskGenerator("sequence", layout, sequence=[a, b])
    assert gen.next_task() == a
    assert gen.next_task() == b
    assert gen.next_task() is None
