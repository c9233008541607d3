"""Command-line front end.

Subcommands: validate, simulate, sweep, region, analyze. Exit codes: 0 on
success, 1 for validation or parameter errors, 2 for I/O failures.
"""

from __future__ import annotations

import argparse
import os
import sys
from dataclasses import replace
from pathlib import Path

import yaml

from . import analytics, experiments, geometry, svgplot
from .protocol import run_trial, trace_to_csv
from .scenario import (
    Architecture,
    Scenario,
    ScenarioError,
    load_scenario,
    scenario_from_dict,
    validate as validate_scenario,
)


def _out_dir(args) -> Path:
    raw = args.out or os.environ.get("GATHERSIM_OUTDIR") or "out"
    return Path(raw)


def _apply_overrides(data: dict, overrides: list[str]) -> dict:
    for ov in overrides:
        if "=" not in ov:
            raise ScenarioError(f"override {ov!r} is not of the form path=value")
        path, raw_value = ov.split("=", 1)
        value = yaml.safe_load(raw_value)
        keys = path.split(".")
        node = data
        for key in keys[:-1]:
            if not isinstance(node.get(key), dict):
                raise ScenarioError(f"override path {path!r} does not exist")
            node = node[key]
        if keys[-1] not in node:
            raise ScenarioError(f"override path {path!r} does not exist")
        node[keys[-1]] = value
    return data


def _load_with_overrides(path: str, overrides: list[str], seed=None) -> Scenario:
    with open(path, "r", encoding="utf-8") as fh:
        data = yaml.safe_load(fh.read())
    if not isinstance(data, dict):
        raise ScenarioError("top level of a scenario file must be a mapping")
    _apply_overrides(data, overrides or [])
    if seed is not None:
        data["seed"] = seed
    scenario = scenario_from_dict(data)
    violations = validate_scenario(scenario)
    if violations:
        raise ScenarioError("; ".join(violations))
    return scenario


def _parse_grid(spec: str, name: str) -> list[float]:
    """Parse 'lo:hi:n' into n evenly spaced values, or a comma list."""
    if ":" in spec:
        parts = spec.split(":")
        if len(parts) != 3:
            raise ValueError(f"{name}: expected lo:hi:count (got {spec!r})")
        lo, hi, n = float(parts[0]), float(parts[1]), int(parts[2])
        if n < 1:
            raise ValueError(f"{name}: count must be >= 1")
        if n == 1:
            return [lo]
        return [lo + i * (hi - lo) / (n - 1) for i in range(n)]
    return [float(v) for v in spec.split(",") if v.strip()]


def cmd_validate(args) -> int:
    scenario = load_scenario(args.scenario)
    print(f"valid: {len(scenario.sensors)} sensors, {len(scenario.targets)} targets, "
          f"architecture {scenario.architecture.value}")
    return 0


def cmd_simulate(args) -> int:
    scenario = _load_with_overrides(args.scenario, args.override, args.seed)
    out = _out_dir(args)
    out.mkdir(parents=True, exist_ok=True)
    trajectory = [] if args.dump_trajectory else None
    result = run_trial(scenario, trajectory_out=trajectory)
    result.events.to_csv(out / "events.csv")
    result.power.to_csv(out / "power.csv")
    trace_to_csv(result.trace, out / "mse.csv")
    if trajectory is not None:
        with open(out / "trajectory.csv", "w", encoding="utf-8", newline="") as fh:
            fh.write("# gathersim-csv v1 trajectory\n")
            fh.write("time,target_id,x,y\n")
            for t, tid, x, y in trajectory:
                fh.write(f"{t!r},{tid},{x!r},{y!r}\n")
    if args.dump_structure:
        sets = geometry.collaborative_sets(scenario)
        members = geometry.membership(
            scenario, [t.position for t in sorted(scenario.targets, key=lambda t: t.id)]
        )
        structure = geometry.component_counts(members, sets)
        with open(out / "structure.csv", "w", encoding="utf-8", newline="") as fh:
            fh.write("# gathersim-csv v1 structure\n")
            fh.write("kind,members,count\n")
            for cs in structure.sets:
                fh.write(f"collaborative,{';'.join(map(str, sorted(cs.members)))},{cs.collaborative_count}\n")
            for sensor in sorted(structure.unique_counts):
                fh.write(f"unique,{sensor},{structure.unique_counts[sensor]}\n")
    print(
        f"architecture={scenario.architecture.value} "
        f"total_power_norm={result.power.normalized_total_power()!r} "
        f"time_avg_mse={result.trace.time_average(scenario.protocol.horizon)!r} "
        f"cancels={result.events.count('CANCEL')} "
        f"drops={result.events.count('DROP')} "
        f"events={len(result.events.records)}"
    )
    return 0


def _load_sweep_spec(path: str, trials_override, seed) -> experiments.SweepSpec:
    with open(path, "r", encoding="utf-8") as fh:
        data = yaml.safe_load(fh.read())
    if not isinstance(data, dict):
        raise ScenarioError("sweep spec must be a mapping")
    scenario_ref = data.get("scenario")
    base_dir = Path(path).parent
    if isinstance(scenario_ref, str):
        base = load_scenario(base_dir / scenario_ref)
    elif isinstance(scenario_ref, dict):
        base = scenario_from_dict(scenario_ref)
        violations = validate_scenario(base)
        if violations:
            raise ScenarioError("; ".join(violations))
    else:
        raise ScenarioError("sweep spec needs 'scenario': a path or an inline mapping")
    if seed is not None:
        base = replace(base, seed=seed)
    tb = data.get("backoff_intervals")
    dpu = data.get("uplink_powers")
    trials = trials_override if trials_override is not None else data.get("trials", 1)
    if not isinstance(tb, list) or not tb:
        raise ScenarioError("sweep spec needs a nonempty 'backoff_intervals' list")
    if not isinstance(dpu, list) or not dpu:
        raise ScenarioError("sweep spec needs a nonempty 'uplink_powers' list")
    return experiments.SweepSpec(
        base=base,
        backoff_intervals=tuple(float(v) for v in tb),
        uplink_powers=tuple(float(v) for v in dpu),
        trials=int(trials),
        paired_seeds=bool(data.get("paired_seeds", True)),
    )


def cmd_sweep(args) -> int:
    spec = _load_sweep_spec(args.spec, args.trials, args.seed)
    try:
        spec.check()
    except ValueError as e:
        raise ScenarioError(str(e)) from e
    out = _out_dir(args)
    out.mkdir(parents=True, exist_ok=True)
    result = experiments.run_sweep(spec, jobs=args.jobs)
    result.to_csv(out / "sweep.csv")
    print(f"wrote {out / 'sweep.csv'} ({len(result.rows)} rows)")
    if args.plot:
        down = spec.base.costs.downlink_power
        for dpu in spec.uplink_powers:
            series = []
            for arch, color in (("FB", "#c0392b"), ("NF", "#7f8c8d")):
                pts = [
                    (r.mean_power_norm, r.mean_mse)
                    for r in result.rows
                    if r.architecture == arch and r.uplink_power == dpu
                ]
                series.append((arch, color, pts))
            svg = svgplot.line_chart(
                series,
                xlabel="total power (normalized by uplink cost)",
                ylabel="time-averaged MSE",
                title=f"uplink/downlink cost ratio y={dpu / down:.3g}",
            )
            path = out / f"sweep_y{dpu / down:.3g}.svg"
            path.write_text(svg, encoding="utf-8")
            print(f"wrote {path}")
    return 0


def cmd_region(args) -> int:
    if args.setsize < 2:
        raise ScenarioError("--setsize must be >= 2")
    try:
        xs = _parse_grid(args.x_grid, "--x-grid")
        ys = _parse_grid(args.y_grid, "--y-grid")
    except ValueError as e:
        raise ScenarioError(str(e)) from e
    out = _out_dir(args)
    out.mkdir(parents=True, exist_ok=True)
    if args.theory_only:
        points = analytics.raster_region(args.setsize, xs, ys)
    else:
        if args.trials < 1:
            raise ScenarioError("--trials must be >= 1")
        points = experiments.region_experiment(
            args.setsize, xs, ys, args.trials, jobs=args.jobs, seed=args.seed or 0
        )
    experiments.region_to_csv(points, out / "region.csv")
    print(f"wrote {out / 'region.csv'} ({len(points)} cells)")
    if not args.theory_only:
        frac, agree, considered = experiments.region_agreement(points)
        print(
            f"theory/empirical agreement: {100.0 * frac:.1f}% "
            f"({agree}/{considered} non-boundary cells)"
        )
    if args.plot:
        path = out / "region.svg"
        path.write_text(
            svgplot.region_map(points, title=f"advantage region, set size {args.setsize}"),
            encoding="utf-8",
        )
        print(f"wrote {path}")
    return 0


def cmd_analyze(args) -> int:
    printed = False
    if args.scenario:
        scenario = load_scenario(args.scenario)
        estimates = analytics.approx_params(scenario)
        if not estimates:
            raise ScenarioError("no sensor belongs to any collaborative set")
        y = scenario.costs.cost_ratio
        print(f"cost ratio y = {y:.6g} (uplink/downlink)")
        print("sensor  delay_est  delay_ratio  set_size_est  g  advantage")
        for est in estimates:
            g = analytics.advantage_poly(
                analytics.AdvantageParams(
                    x=min(est.delay_ratio, 1.0), y=y, set_size=max(2.0, est.set_size_estimate)
                )
            )
            print(
                f"{est.sensor_id}  {est.delay_estimate:.6g}  {est.delay_ratio:.6g}  "
                f"{est.set_size_estimate:.6g}  {g:.6g}  {'yes' if g > 0 else 'no'}"
            )
        frac, verdict = analytics.approx_network_advantage(estimates, y)
        print(f"network advantage vote: {frac:.6g} -> {'advantageous' if verdict else 'not-advantageous'}")
        proto = scenario.protocol
        params = analytics.MseAdvantageParams(
            trigger_threshold=proto.trigger_threshold,
            noise_std=proto.noise_std if proto.noise_std > 0 else 1e-12,
            sampling_period=proto.sampling_period,
            uplink_delay=proto.uplink_delay,
            min_unique=args.numin or 1,
        )
        threshold, ok = analytics.mse_advantage(params)
        ratio = params.trigger_threshold / params.noise_std
        print(
            f"mse_ratio_threshold = {threshold:.6g} "
            f"(threshold/noise = {ratio:.6g}: {'satisfied' if ok else 'not satisfied'})"
        )
        return 0

    if args.setsize is not None:
        if args.setsize < 2:
            raise ScenarioError("--setsize must be >= 2")
        thr = analytics.feasibility(args.setsize)
        print(f"feasibility_threshold(set_size={args.setsize}) = {thr:.6g}")
        printed = True
        if args.x is not None and args.y is not None:
            if not (0.0 <= args.x <= 1.0):
                raise ScenarioError("--x must be within [0, 1]")
            if args.y <= 0:
                raise ScenarioError("--y must be > 0")
            g = analytics.advantage_poly(
                analytics.AdvantageParams(x=args.x, y=args.y, set_size=args.setsize)
            )
            print(f"g(x={args.x:.6g}, y={args.y:.6g}, set_size={args.setsize}) = {g:.6g}")
            print(f"verdict: {'advantageous' if g > 0 else 'not advantageous'}")

    if args.eps is not None or args.sigma is not None:
        for name in ("ts", "dtu", "numin", "eps", "sigma"):
            if getattr(args, name) is None:
                raise ScenarioError(f"--{name} is required for the accuracy condition")
        params = analytics.MseAdvantageParams(
            trigger_threshold=args.eps,
            noise_std=args.sigma,
            sampling_period=args.ts,
            uplink_delay=args.dtu,
            min_unique=args.numin,
        )
        try:
            threshold, ok = analytics.mse_advantage(params)
        except ValueError as e:
            raise ScenarioError(str(e)) from e
        ratio = args.eps / args.sigma
        print(
            f"mse_ratio_threshold = {threshold:.6g} "
            f"(threshold/noise = {ratio:.6g}: {'satisfied' if ok else 'not satisfied'})"
        )
        printed = True

    if not printed:
        raise ScenarioError("analyze needs --setsize, accuracy parameters, or --scenario")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="gathersim",
        description="Simulate and analyze feedback vs no-feedback data-gathering architectures.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="check a scenario file")
    p.add_argument("scenario")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("simulate", help="run one trial, emit event/power/mse CSVs")
    p.add_argument("scenario")
    p.add_argument("--out", default=None, help="output directory (env GATHERSIM_OUTDIR, default ./out)")
    p.add_argument("--seed", type=int, default=None, help="override the scenario seed")
    p.add_argument("--override", action="append", default=[], metavar="PATH=VALUE",
                   help="override a config value, e.g. architecture=NF or protocol.backoff_interval=40")
    p.add_argument("--dump-trajectory", action="store_true")
    p.add_argument("--dump-structure", action="store_true")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("sweep", help="run a backoff/cost sweep from a sweep spec file")
    p.add_argument("spec")
    p.add_argument("--out", default=None)
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--trials", type=int, default=None, help="override the spec's trial count")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--plot", action="store_true", help="emit one SVG per cost ratio")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("region", help="advantage-region experiment over (x, y) grids")
    p.add_argument("--setsize", type=int, required=True)
    p.add_argument("--x-grid", default="0.05:0.95:10", help="lo:hi:count or comma list")
    p.add_argument("--y-grid", default="0.25:10:10")
    p.add_argument("--trials", type=int, default=500)
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--out", default=None)
    p.add_argument("--theory-only", action="store_true")
    p.add_argument("--plot", action="store_true")
    p.set_defaults(func=cmd_region)

    p = sub.add_parser("analyze", help="evaluate the closed-form conditions")
    p.add_argument("--x", type=float, default=None, help="delay ratio")
    p.add_argument("--y", type=float, default=None, help="uplink/downlink cost ratio")
    p.add_argument("--setsize", type=int, default=None)
    p.add_argument("--ts", type=float, default=None, help="sampling period")
    p.add_argument("--dtu", type=float, default=None, help="per-component uplink delay")
    p.add_argument("--numin", type=int, default=None, help="minimum unique components")
    p.add_argument("--eps", type=float, default=None, help="trigger threshold")
    p.add_argument("--sigma", type=float, default=None, help="measurement noise std")
    p.add_argument("--scenario", default=None)
    p.set_defaults(func=cmd_analyze)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ScenarioError as e:
        print(f"error: {e}", file=sys.stderr)
        return 1
    except OSError as e:
        print(f"i/o error: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
