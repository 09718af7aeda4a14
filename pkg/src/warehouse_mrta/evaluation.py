"""Policy evaluation across seeds, fixture replay, and forward-pass timing."""

from __future__ import annotations

import csv
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .checkpoint import load_checkpoint
from .config import ExperimentConfig
from .env import EpisodeReport, Scenario, run_episode
from .network import Batch, PolicyParams, forward, parameter_count
from .policies import NetworkPolicy, SequencePolicy, mpdm, rbts

BASELINES = {"mpdm": mpdm, "rbts": rbts}


def make_policy(spec, env=None):
    """``mpdm``, ``rbts``, a checkpoint path, or an already-loaded :class:`PolicyParams`."""
    if isinstance(spec, PolicyParams):
        return NetworkPolicy(spec)
    if isinstance(spec, str) and spec.lower() in BASELINES:
        return BASELINES[spec.lower()]
    if isinstance(spec, (list, tuple)):
        return SequencePolicy(spec, env)
    params, _ = load_checkpoint(spec)
    return NetworkPolicy(params)


def policy_label(spec) -> str:
    if isinstance(spec, PolicyParams):
        return "network"
    if isinstance(spec, str) and spec.lower() in BASELINES:
        return spec.lower()
    return Path(str(spec)).stem


@dataclass
class SeedResult:
    seed: int
    total_ttd: float
    makespan: float


@dataclass
class EvalReport:
    policy: str
    results: list[SeedResult]

    @property
    def ttd(self) -> np.ndarray:
        return np.array([r.total_ttd for r in self.results])

    @property
    def makespan(self) -> np.ndarray:
        return np.array([r.makespan for r in self.results])

    def summary(self) -> dict:
        return {
            "policy": self.policy,
            "ttd_mean": float(self.ttd.mean()),
            "ttd_std": float(self.ttd.std()),
            "makespan_mean": float(self.makespan.mean()),
            "makespan_std": float(self.makespan.std()),
        }


def evaluate(experiment: ExperimentConfig, policy_spec, seeds=None) -> EvalReport:
    """Run ``experiment.n_tasks`` allocations per seed with a deterministic policy."""
    seeds = list(range(experiment.seed, experiment.seed + experiment.seeds)) if seeds is None else list(seeds)
    policy = make_policy(policy_spec)
    results = []
    for s in seeds:
        env = experiment.make_env(seed=s)
        rep = run_episode(env, policy, experiment.n_tasks)
        results.append(SeedResult(s, rep.total_ttd, rep.makespan))
    return EvalReport(policy_label(policy_spec), results)


def improvement(candidate: EvalReport, baseline: EvalReport) -> np.ndarray:
    """Per-seed percent TTD reduction of ``candidate`` relative to ``baseline``."""
    return 100.0 * (baseline.ttd - candidate.ttd) / baseline.ttd


def format_evaluation(reports: list[EvalReport]) -> str:
    lines = [f"{'policy':<16}{'seed':>6}{'total TTD':>14}{'makespan':>14}"]
    for rep in reports:
        for r in rep.results:
            lines.append(f"{rep.policy:<16}{r.seed:>6}{r.total_ttd:>14.2f}{r.makespan:>14.2f}")
    lines.append("")
    for rep in reports:
        s = rep.summary()
        lines.append(
            f"{rep.policy:<16} TTD {s['ttd_mean']:.2f} +- {s['ttd_std']:.2f}   "
            f"makespan {s['makespan_mean']:.2f} +- {s['makespan_std']:.2f}"
        )
    if len(reports) == 2:
        imp = improvement(reports[0], reports[1])
        lines.append(
            f"improvement of {reports[0].policy} over {reports[1].policy}: "
            f"{imp.mean():.2f} +- {imp.std():.2f} %"
        )
    return "\n".join(lines)


def write_evaluation_csv(reports: list[EvalReport], path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["policy", "seed", "total_ttd", "makespan"])
        for rep in reports:
            for r in rep.results:
                w.writerow([rep.policy, r.seed, repr(r.total_ttd), repr(r.makespan)])


def replay(scenario: Scenario, policy_spec) -> EpisodeReport:
    """Run a scenario fixture to exhaustion with noise off."""
    env = scenario.build_env()
    policy = make_policy(policy_spec, env)
    return run_episode(env, policy, len(scenario.tasks))


def format_replay(report: EpisodeReport) -> str:
    lines = [f"{'state':<7}{'robots (x, y, r)':<44}{'queue':<22}{'chosen':<10}{'TTD':>8}"]
    for s in report.steps:
        robots = ", ".join(
            ("*" if j == s.selected else "") + f"({x}, {y}, {r:.2f})" for j, (x, y, r) in enumerate(s.robots)
        )
        queue = ",".join(t.replace("Task ", "T") for t in s.queue)
        lines.append(f"S{s.step:<6}{robots:<44}{queue:<22}{s.task:<10}{s.pickup_cost:>8.3f}")
    lines.append(f"total TTD {report.total_ttd:.3f}   makespan {report.makespan:.3f}")
    return "\n".join(lines)


def write_replay_csv(report: EpisodeReport, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["step", "clock", "selected", "robots", "queue", "task", "pickup_cost"])
        for s in report.steps:
            w.writerow([s.step, repr(s.clock), s.selected, s.robots, "|".join(s.queue), s.task, repr(s.pickup_cost)])


@dataclass
class BenchRow:
    robots: int
    tasks: int
    seconds_per_call: float
    parameters: int = field(default_factory=parameter_count)


def time_forward(params: PolicyParams, n_robots: int, n_tasks: int, calls: int = 1000, seed: int = 0) -> float:
    """Mean wall time of one single-observation forward pass."""
    rng = np.random.default_rng(seed)
    batch = Batch(rng.random((1, n_robots, 3)), rng.random((1, n_tasks, 6)), np.array([0]))
    forward(params, batch)  # warm-up
    start = time.perf_counter()
    for _ in range(calls):
        forward(params, batch)
    return (time.perf_counter() - start) / calls


def bench(params: PolicyParams, robot_counts, task_counts, calls: int = 1000) -> list[BenchRow]:
    """Time every (robots, tasks) combination."""
    return [
        BenchRow(m, n, time_forward(params, m, n, calls))
        for m in robot_counts
        for n in task_counts
    ]


def format_bench(rows: list[BenchRow]) -> str:
    lines = [f"{'robots':>8}{'tasks':>8}{'us/call':>12}{'params':>10}"]
    for r in rows:
        lines.append(f"{r.robots:>8}{r.tasks:>8}{r.seconds_per_call * 1e6:>12.1f}{r.parameters:>10}")
    return "\n".join(lines)


def write_bench_csv(rows: list[BenchRow], path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["robots", "tasks", "seconds_per_call", "parameters"])
        for r in rows:
            w.writerow([r.robots, r.tasks, repr(r.seconds_per_call), r.parameters])
