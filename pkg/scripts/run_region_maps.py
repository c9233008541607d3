#!/usr/bin/env python3
"""Theoretical vs empirical advantage-region maps for symmetric layouts.

For each collaborative-set size, runs paired trials over a (delay ratio,
cost ratio) grid with a uniform propagation delay of 9, then writes the
region CSV and an overlay SVG, printing the agreement percentage.
"""

import argparse
from pathlib import Path

from gathersim import experiments, svgplot


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--set-sizes", type=int, nargs="+", default=[2, 3])
    parser.add_argument("--trials", type=int, default=500)
    parser.add_argument("--jobs", type=int, default=experiments.default_jobs())
    parser.add_argument("--out", default="out/regions")
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args()

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    xs = [0.05 + 0.1 * i for i in range(10)]
    ys = [0.25 + i * (10.0 - 0.25) / 9 for i in range(10)]
    for size in args.set_sizes:
        points = experiments.region_experiment(
            size, xs, ys, args.trials, jobs=args.jobs, seed=args.seed
        )
        csv_path = out / f"region_j{size}.csv"
        experiments.region_to_csv(points, csv_path)
        svg_path = out / f"region_j{size}.svg"
        svg_path.write_text(
            svgplot.region_map(points, title=f"advantage region, set size {size}"),
            encoding="utf-8",
        )
        frac, agree, considered = experiments.region_agreement(points)
        print(
            f"set size {size}: wrote {csv_path} and {svg_path}; "
            f"agreement {100.0 * frac:.1f}% ({agree}/{considered} non-boundary cells)"
        )
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
