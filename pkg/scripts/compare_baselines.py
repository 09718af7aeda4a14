"""MPDM vs RBTS on every shelf preset with designated task regions.

Writes one CSV row per (layout, policy, seed) if --csv is given.
"""

import argparse
import csv

from warehouse_mrta.config import ExperimentConfig
from warehouse_mrta.evaluation import evaluate, improvement
from warehouse_mrta.layout import PRESETS


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--robots", type=int, default=20)
    ap.add_argument("--tasks", type=int, default=500)
    ap.add_argument("--seeds", type=int, default=3)
    ap.add_argument("--navigation", choices=("direct", "astar"), default="astar")
    ap.add_argument("--csv")
    args = ap.parse_args()

    rows = []
    print(f"{'layout':<10}{'MPDM TTD':>12}{'RBTS TTD':>12}{'RBTS gain %':>14}")
    for name in sorted(PRESETS):
        exp = ExperimentConfig(layout=f"preset:{name}", robots=args.robots, tasks="designated",
                               navigation=args.navigation, n_tasks=args.tasks, seeds=args.seeds)
        greedy, regret = evaluate(exp, "mpdm"), evaluate(exp, "rbts")
        gain = improvement(regret, greedy).mean()
        print(f"{name:<10}{greedy.ttd.mean():>12.1f}{regret.ttd.mean():>12.1f}{gain:>14.2f}")
        for rep in (greedy, regret):
            rows += [(name, rep.policy, r.seed, r.total_ttd, r.makespan) for r in rep.results]
    if args.csv:
        with open(args.csv, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["layout", "policy", "seed", "total_ttd", "makespan"])
            w.writerows(rows)


if __name__ == "__main__":
    main()
