#!/usr/bin/env python3
"""Reproduce the backoff/cost sweep over the four-sensor replica field.

Runs paired trials for every (backoff interval, uplink cost) grid point and
writes the aggregate CSV plus one MSE-vs-power SVG per cost ratio.
"""

import argparse
from pathlib import Path

from gathersim import experiments
from gathersim.cli import main as cli_main


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--trials", type=int, default=500)
    parser.add_argument("--jobs", type=int, default=experiments.default_jobs())
    parser.add_argument("--out", default="out/setting1")
    args = parser.parse_args()

    spec = Path(__file__).resolve().parent.parent / "scenarios" / "setting1_sweep.yaml"
    return cli_main(
        [
            "sweep",
            str(spec),
            "--trials",
            str(args.trials),
            "--jobs",
            str(args.jobs),
            "--out",
            args.out,
            "--plot",
        ]
    )


if __name__ == "__main__":
    raise SystemExit(main())
