"""Command-line entry point: ``mrta train|evaluate|replay|bench``."""

from __future__ import annotations

import argparse
import logging
import sys

from .checkpoint import load_checkpoint, save_checkpoint
from .config import config_to_dict, load_config
from .env import builtin_scenario_path, read_scenario
from .errors import MRTAError
from .evaluation import (
    bench,
    evaluate,
    format_bench,
    format_evaluation,
    format_replay,
    replay,
    write_bench_csv,
    write_evaluation_csv,
    write_replay_csv,
)
from .network import PolicyParams
from .training import train


def _int_list(text: str) -> list[int]:
    try:
        values = [int(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None
    if not values or min(values) < 1:
        raise argparse.ArgumentTypeError("counts must be >= 1")
    return values


def _overrides(pairs) -> dict[str, str]:
    out = {}
    for pair in pairs or ():
        if "=" not in pair:
            raise MRTAError(f"--set expects key=value, got {pair!r}")
        k, v = pair.split("=", 1)
        out[k.strip()] = v.strip()
    return out


def cmd_train(args) -> int:
    overrides = _overrides(args.set)
    if args.iterations is not None:
        overrides["total_iterations"] = str(args.iterations)
    experiment, cfg = load_config(args.config, overrides)
    seed = experiment.seed if args.seed is None else args.seed
    result = train(experiment, cfg, seed=seed, metrics_path=args.metrics, progress_every=args.log_every)
    save_checkpoint(result.params, args.out, config=config_to_dict(experiment, cfg), seed=seed)
    last = result.metrics[-1] if result.metrics else None
    print(f"saved {args.out} after {cfg.total_iterations} updates ({cfg.total_iterations * cfg.rollout_length} steps)")
    if last:
        print(f"final mean reward {last['mean_reward']:.4f}, entropy {last['entropy']:.4f}")
    return 0


def cmd_evaluate(args) -> int:
    experiment, _ = load_config(args.config, _overrides(args.set))
    reports = [evaluate(experiment, args.policy)]
    if args.baseline:
        reports.append(evaluate(experiment, args.baseline))
    print(format_evaluation(reports))
    if args.csv:
        write_evaluation_csv(reports, args.csv)
    return 0


def cmd_replay(args) -> int:
    scenario = read_scenario(args.fixture or builtin_scenario_path())
    if args.sequence:
        spec = [f"Task {int(v)}" for v in args.sequence.split(",")]
    else:
        spec = args.policy
    report = replay(scenario, spec)
    print(format_replay(report))
    if args.csv:
        write_replay_csv(report, args.csv)
    return 0


def cmd_bench(args) -> int:
    params = load_checkpoint(args.policy)[0] if args.policy else PolicyParams.init(0)
    rows = bench(params, args.robots, args.tasks, calls=args.calls)
    print(format_bench(rows))
    if args.csv:
        write_bench_csv(rows, args.csv)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="mrta", description="Warehouse task-allocation simulator and trainer.")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("train", help="train the attention policy with PPO")
    p.add_argument("--config", help="flat key = value config file")
    p.add_argument("--out", required=True, help="checkpoint path to write")
    p.add_argument("--metrics", help="CSV file for per-update metrics")
    p.add_argument("--seed", type=int)
    p.add_argument("--iterations", type=int, help="override total_iterations")
    p.add_argument("--log-every", type=int, default=10)
    p.add_argument("--set", action="append", metavar="KEY=VALUE", help="override a config value")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("evaluate", help="evaluate a policy over several seeds")
    p.add_argument("--config")
    p.add_argument("--policy", required=True, help="mpdm, rbts, or a checkpoint path")
    p.add_argument("--baseline", help="second policy to compare against")
    p.add_argument("--csv")
    p.add_argument("--set", action="append", metavar="KEY=VALUE")
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("replay", help="replay a scenario fixture step by step (noise off)")
    p.add_argument("--fixture", help="scenario file; defaults to the bundled two-robot fixture")
    group = p.add_mutually_exclusive_group(required=True)
    group.add_argument("--policy", help="mpdm, rbts, or a checkpoint path")
    group.add_argument("--sequence", help="comma-separated task numbers, e.g. 1,3,4,2,5")
    p.add_argument("--csv")
    p.set_defaults(func=cmd_replay)

    p = sub.add_parser("bench", help="time the policy forward pass")
    p.add_argument("--robots", type=_int_list, default=[100, 1000])
    p.add_argument("--tasks", type=_int_list, default=[10])
    p.add_argument("--policy", help="checkpoint path; random weights if omitted")
    p.add_argument("--calls", type=int, default=1000)
    p.add_argument("--csv")
    p.set_defaults(func=cmd_bench)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose or args.command == "train" else logging.WARNING,
                        format="%(message)s")
    try:
        return args.func(args)
    except MRTAError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
