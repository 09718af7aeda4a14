"""Forward-pass time as robot and task counts grow; the weight count stays fixed."""

import argparse

from warehouse_mrta.checkpoint import load_checkpoint
from warehouse_mrta.evaluation import bench, format_bench, write_bench_csv
from warehouse_mrta.network import PolicyParams


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--policy", help="checkpoint; random weights otherwise")
    ap.add_argument("--calls", type=int, default=500)
    ap.add_argument("--csv")
    args = ap.parse_args()
    params = load_checkpoint(args.policy)[0] if args.policy else PolicyParams.init(0)

    rows = bench(params, [10, 100, 1000], [10], args.calls) + bench(params, [100], [100, 1000], args.calls)
    print(format_bench(rows))
    by_key = {(r.robots, r.tasks): r.seconds_per_call for r in rows}
    print(f"\nrobots 100 -> 1000: x{by_key[1000, 10] / by_key[100, 10]:.2f}")
    print(f"tasks  10 -> 100:   x{by_key[100, 100] / by_key[100, 10]:.2f}")
    if args.csv:
        write_bench_csv(rows, args.csv)


if __name__ == "__main__":
    main()
