"""Print the step-by-step replay of the bundled two-robot, five-task fixture
for MPDM, RBTS and the hand-picked lookahead sequence."""

import argparse

from warehouse_mrta.env import builtin_scenario_path, read_scenario
from warehouse_mrta.evaluation import format_replay, replay

SEQUENCE = [f"Task {i}" for i in (1, 3, 4, 2, 5)]


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--fixture", default=str(builtin_scenario_path()))
    args = ap.parse_args()
    scenario = read_scenario(args.fixture)
    for label, spec in (("MPDM", "mpdm"), ("RBTS", "rbts"), ("sequence 1,3,4,2,5", SEQUENCE)):
        print(f"== {label}")
        print(format_replay(replay(scenario, spec)))
        print()


if __name__ == "__main__":
    main()
