"""Train on the two-task setting and compare the greedy argmax policy with MPDM.

    python scripts/two_task_experiment.py --iterations 100 --out runs/two_task
"""

import argparse
import logging
from pathlib import Path

from warehouse_mrta.checkpoint import save_checkpoint
from warehouse_mrta.config import config_to_dict, load_config
from warehouse_mrta.env import run_episode
from warehouse_mrta.evaluation import evaluate, format_evaluation, improvement
from warehouse_mrta.policies import NetworkPolicy

CONFIG = Path(__file__).resolve().parent.parent / "configs" / "two_task.cfg"


def main():
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--config", default=str(CONFIG))
    ap.add_argument("--iterations", type=int)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--out", default="runs/two_task")
    args = ap.parse_args()
    logging.basicConfig(level=logging.INFO, format="%(message)s")

    from warehouse_mrta.training import train

    overrides = {"total_iterations": str(args.iterations)} if args.iterations is not None else {}
    experiment, cfg = load_config(args.config, overrides)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    result = train(experiment, cfg, seed=args.seed, metrics_path=out / "metrics.csv", progress_every=10)
    save_checkpoint(result.params, out / "policy.ckpt", config=config_to_dict(experiment, cfg), seed=args.seed)

    chosen = run_episode(experiment.make_env(), NetworkPolicy(result.params), experiment.n_tasks).chosen
    print(f"share of Task A choices: {chosen.count('A') / len(chosen):.3f}")
    learned = evaluate(experiment, result.params)
    baseline = evaluate(experiment, "mpdm")
    print(format_evaluation([learned, baseline]))
    print(f"mean TTD improvement over MPDM: {improvement(learned, baseline).mean():.2f}%")


if __name__ == "__main__":
    main()
