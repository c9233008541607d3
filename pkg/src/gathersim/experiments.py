"""Monte Carlo harness: paired-architecture trials, parameter sweeps and
advantage-region experiments.

Paired trials run both architectures from the same per-trial seed so target
trajectories, measurement noise and backoff draws coincide (common random
numbers). Power charges are pure bookkeeping over component counts, so one
simulated trial serves every cost grid point.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Optional, Sequence

from . import geometry
from .analytics import AdvantageParams, AdvantagePoint, advantage_poly
from .protocol import run_trial
from .scenario import (
    Architecture,
    CostParams,
    DynamicsParams,
    Environment,
    ProtocolParams,
    Scenario,
    SensorSpec,
    TargetSpec,
    validate,
)


class RunningStats:
    """Mergeable mean/standard-error accumulator."""

    __slots__ = ("n", "total", "total_sq")

    def __init__(self):
        self.n = 0
        self.total = 0.0
        self.total_sq = 0.0

    def add(self, value: float) -> None:
        self.n += 1
        self.total += value
        self.total_sq += value * value

    def merge(self, other: "RunningStats") -> "RunningStats":
        out = RunningStats()
        out.n = self.n + other.n
        out.total = self.total + other.total
        out.total_sq = self.total_sq + other.total_sq
        return out

    @property
    def mean(self) -> float:
        return self.total / self.n

    @property
    def stderr(self) -> float:
        if self.n < 2:
            return 0.0
        var = (self.total_sq - self.total * self.total / self.n) / (self.n - 1)
        return math.sqrt(max(0.0, var) / self.n)


def trial_seed(base_seed: int, trial_index: int) -> int:
    return base_seed ^ trial_index


_UNPAIRED_SALT = 0x9E3779B97F4A7C15


@dataclass(frozen=True)
class PairedOutcome:
    """Component counts and time-averaged error from one paired trial."""

    fb_uplink: int
    fb_downlink: int
    fb_mse: float
    nf_uplink: int
    nf_mse: float

    def power_difference(self, uplink_power: float, downlink_power: float) -> float:
        """No-feedback total power minus feedback total power."""
        return (
            self.nf_uplink - self.fb_uplink
        ) * uplink_power - self.fb_downlink * downlink_power


def run_paired_trial(scenario: Scenario, trial_index: int, paired_seeds: bool = True) -> PairedOutcome:
    seed = trial_seed(scenario.seed, trial_index)
    nf_seed = seed if paired_seeds else seed ^ _UNPAIRED_SALT
    horizon = scenario.protocol.horizon
    fb = run_trial(replace(scenario, architecture=Architecture.FB, seed=seed))
    nf = run_trial(replace(scenario, architecture=Architecture.NF, seed=nf_seed))
    return PairedOutcome(
        fb_uplink=fb.power.uplink_components(),
        fb_downlink=fb.power.downlink_components(),
        fb_mse=fb.trace.time_average(horizon),
        nf_uplink=nf.power.uplink_components(),
        nf_mse=nf.trace.time_average(horizon),
    )


@dataclass(frozen=True)
class SweepSpec:
    """Grid of backoff intervals and uplink costs over one base scenario."""

    base: Scenario
    backoff_intervals: tuple[float, ...]
    uplink_powers: tuple[float, ...]
    trials: int
    paired_seeds: bool = True

    def check(self) -> None:
        if self.trials < 1:
            raise ValueError("trials must be >= 1")
        if not self.backoff_intervals:
            raise ValueError("backoff_intervals must be nonempty")
        if not self.uplink_powers:
            raise ValueError("uplink_powers must be nonempty")
        violations = validate(self.base)
        if violations:
            raise ValueError("; ".join(violations))


@dataclass(frozen=True)
class SweepRow:
    backoff_interval: float
    uplink_power: float
    downlink_power: float
    architecture: str
    mean_power_norm: float
    se_power: float
    mean_mse: float
    se_mse: float
    trials: int


@dataclass
class SweepResult:
    rows: list[SweepRow] = field(default_factory=list)

    def row(self, backoff_interval: float, uplink_power: float, architecture: str) -> SweepRow:
        for r in self.rows:
            if (
                r.backoff_interval == backoff_interval
                and r.uplink_power == uplink_power
                and r.architecture == architecture
            ):
                return r
        raise KeyError((backoff_interval, uplink_power, architecture))

    def to_csv(self, path) -> None:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write("# gathersim-csv v1 sweep\n")
            fh.write("T_b,dp_u,dp_d,arch,mean_power_norm,se_power,mean_mse,se_mse,trials\n")
            for r in self.rows:
                fh.write(
                    f"{r.backoff_interval!r},{r.uplink_power!r},{r.downlink_power!r},"
                    f"{r.architecture},{r.mean_power_norm!r},{r.se_power!r},"
                    f"{r.mean_mse!r},{r.se_mse!r},{r.trials}\n"
                )


def _sweep_task(args) -> tuple[int, int, PairedOutcome]:
    scenario, tb_index, trial_index, paired = args
    return tb_index, trial_index, run_paired_trial(scenario, trial_index, paired)


def default_jobs() -> int:
    return max(1, min(8, os.cpu_count() or 1))


def _run_tasks(tasks, worker, jobs: int):
    if jobs <= 1:
        return [worker(t) for t in tasks]
    chunk = max(1, len(tasks) // (jobs * 4))
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(worker, tasks, chunksize=chunk))


def run_sweep(spec: SweepSpec, jobs: int = 1) -> SweepResult:
    """Run paired trials over the grid and aggregate power and error.

    Power is reported normalized by the uplink cost. Results are aggregated in
    (backoff, trial) order, so they are independent of worker count.
    """
    spec.check()
    tasks = []
    for tb_index, tb in enumerate(spec.backoff_intervals):
        scenario = replace(
            spec.base, protocol=replace(spec.base.protocol, backoff_interval=float(tb))
        )
        for trial_index in range(spec.trials):
            tasks.append((scenario, tb_index, trial_index, spec.paired_seeds))
    outcomes = _run_tasks(tasks, _sweep_task, jobs)
    by_tb: dict[int, list[PairedOutcome]] = {i: [] for i in range(len(spec.backoff_intervals))}
    for tb_index, trial_index, outcome in sorted(outcomes, key=lambda r: (r[0], r[1])):
        by_tb[tb_index].append(outcome)

    down = spec.base.costs.downlink_power
    result = SweepResult()
    for tb_index, tb in enumerate(spec.backoff_intervals):
        outs = by_tb[tb_index]
        for up_power in spec.uplink_powers:
            for arch in ("FB", "NF"):
                power = RunningStats()
                mse = RunningStats()
                for o in outs:
                    if arch == "FB":
                        power.add(o.fb_uplink + o.fb_downlink * down / up_power)
                        mse.add(o.fb_mse)
                    else:
                        power.add(float(o.nf_uplink))
                        mse.add(o.nf_mse)
                result.rows.append(
                    SweepRow(
                        backoff_interval=float(tb),
                        uplink_power=float(up_power),
                        downlink_power=float(down),
                        architecture=arch,
                        mean_power_norm=power.mean,
                        se_power=power.stderr,
                        mean_mse=mse.mean,
                        se_mse=mse.stderr,
                        trials=power.n,
                    )
                )
    return result


def assumption1_scenario(
    set_size: int,
    collaborative_targets: int,
    unique_targets: int,
    lead_delay: float,
    uplink_delay: Optional[float] = None,
    downlink_delay: Optional[float] = None,
    *,
    backoff_interval: float = 30.0,
    sampling_period: float = 200.0,
    horizon: float = 900.0,
    noise_std: float = 0.1,
    trigger_threshold: float = 2.0,
    move_step: float = 3.0,
    move_probability: float = 1.0,
    uplink_power: float = 1.0,
    downlink_power: float = 1.0,
    architecture: Architecture = Architecture.FB,
    seed: int = 0,
) -> Scenario:
    """Symmetric layout where every set member schedules identical packets.

    `set_size` sensors sit on a ring around the field center; their disks share
    a common overlap holding the collaborative targets, and each sensor owns an
    exclusive pocket holding its unique targets. Targets are confined so the
    structure persists while they move, every sensor always observes
    collaborative_targets + unique_targets components, and the propagation
    delay equals `lead_delay` uniformly.

    When the per-component delays are omitted they are derived at a 2:1
    uplink:downlink ratio from lead_delay; when given they must reproduce it.
    Geometrically infeasible requests (pockets that cannot fit or hold a
    moving target) are rejected.
    """
    if set_size < 2:
        raise ValueError(f"set size must be >= 2 (got {set_size})")
    if collaborative_targets < 1:
        raise ValueError("at least one collaborative target is required")
    if unique_targets < 0:
        raise ValueError("unique_targets must be >= 0")
    if lead_delay <= 0:
        raise ValueError("lead_delay must be > 0")

    n_packet = collaborative_targets + unique_targets
    if uplink_delay is None and downlink_delay is None:
        base = 2.0 * n_packet + 1.0 * collaborative_targets
        scale = lead_delay / base
        uplink_delay = 2.0 * scale
        downlink_delay = 1.0 * scale
    elif uplink_delay is None or downlink_delay is None:
        raise ValueError("give both per-component delays or neither")
    implied = n_packet * uplink_delay + collaborative_targets * downlink_delay
    if abs(implied - lead_delay) > 1e-9:
        raise ValueError(
            f"per-component delays give propagation delay {implied}, not {lead_delay}"
        )

    center = (25.0, 25.0)
    env = Environment(50.0, 50.0)
    if unique_targets == 0:
        disk_radius, ring_radius = 22.0, 4.0
    else:
        disk_radius, ring_radius = 14.0, 6.0
    sensors = []
    centers = []
    for j in range(set_size):
        theta = 2.0 * math.pi * j / set_size
        cx = center[0] + ring_radius * math.cos(theta)
        cy = center[1] + ring_radius * math.sin(theta)
        centers.append((cx, cy))
        sensors.append(SensorSpec(id=j, center=(cx, cy), radius=disk_radius))

    overlap_radius = disk_radius - ring_radius - 1.0
    if move_probability > 0 and overlap_radius < move_step + 0.2:
        raise ValueError("shared overlap too small for the requested move step")

    targets: list[TargetSpec] = []
    spread = min(1.5, overlap_radius / 3.0)
    for i in range(collaborative_targets):
        theta = 2.0 * math.pi * i / collaborative_targets
        targets.append(
            TargetSpec(
                id=i,
                position=(center[0] + spread * math.cos(theta), center[1] + spread * math.sin(theta)),
                confine_center=center,
                confine_radius=overlap_radius,
            )
        )

    if unique_targets > 0:
        pocket_dist = disk_radius - 5.0
        tid = collaborative_targets
        for j in range(set_size):
            theta = 2.0 * math.pi * j / set_size
            px = centers[j][0] + pocket_dist * math.cos(theta)
            py = centers[j][1] + pocket_dist * math.sin(theta)
            own_margin = disk_radius - math.hypot(px - centers[j][0], py - centers[j][1])
            other_margin = min(
                math.hypot(px - centers[i][0], py - centers[i][1]) - disk_radius
                for i in range(set_size)
                if i != j
            )
            pocket_radius = min(own_margin, other_margin) - 0.5
            needed = move_step + 0.2 if move_probability > 0 else 0.3
            if pocket_radius < needed:
                raise ValueError(
                    f"exclusive pocket for sensor {j} infeasible "
                    f"(radius {pocket_radius:.2f}, need {needed:.2f})"
                )
            for i in range(unique_targets):
                phi = 2.0 * math.pi * i / unique_targets
                offset = min(1.0, pocket_radius / 2.0)
                targets.append(
                    TargetSpec(
                        id=tid,
                        position=(px + offset * math.cos(phi), py + offset * math.sin(phi)),
                        confine_center=(px, py),
                        confine_radius=pocket_radius,
                    )
                )
                tid += 1

    scenario = Scenario(
        environment=env,
        sensors=tuple(sensors),
        targets=tuple(targets),
        protocol=ProtocolParams(
            sampling_period=sampling_period,
            backoff_interval=backoff_interval,
            uplink_delay=uplink_delay,
            downlink_delay=downlink_delay,
            trigger_threshold=trigger_threshold,
            noise_std=noise_std,
            horizon=horizon,
        ),
        dynamics=DynamicsParams(
            move_step=move_step, move_period=sampling_period, move_probability=move_probability
        ),
        costs=CostParams(uplink_power=uplink_power, downlink_power=downlink_power),
        architecture=architecture,
        seed=seed,
    )

    # the construction must produce exactly the promised membership structure
    members = geometry.membership(scenario, [t.position for t in targets])
    full = frozenset(range(set_size))
    for t in targets:
        got = members[t.id]
        want_full = t.id < collaborative_targets
        if want_full and got != full:
            raise ValueError(f"collaborative target {t.id} observed by {sorted(got)}")
        if not want_full and len(got) != 1:
            raise ValueError(f"unique target {t.id} observed by {sorted(got)}")
    return scenario


def _region_task(args) -> tuple[int, int, PairedOutcome]:
    scenario, x_index, trial_index = args
    return x_index, trial_index, run_paired_trial(scenario, trial_index, True)


def region_experiment(
    set_size: int,
    x_values: Sequence[float],
    y_values: Sequence[float],
    trials: int,
    jobs: int = 1,
    *,
    collaborative_targets: int = 3,
    lead_delay: float = 9.0,
    uplink_delay: float = 2.0,
    downlink_delay: float = 1.0,
    seed: int = 0,
) -> list[AdvantagePoint]:
    """Empirical advantage map over (delay ratio, cost ratio) grid cells.

    Each x value pins the backoff interval to lead_delay / x; each cell's
    power difference is recomputed from the same trials' component counts with
    uplink power y and downlink power 1. Cells whose mean difference is within
    two standard errors of zero should be treated as boundary cells.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    xs = [float(x) for x in x_values]
    ys = [float(y) for y in y_values]
    for x in xs:
        if x <= 0:
            raise ValueError("delay ratio grid must be strictly positive (backoff would be infinite)")
    sampling = max(200.0, lead_delay / min(xs) + lead_delay + 10.0)
    tasks = []
    for xi, x in enumerate(xs):
        scenario = assumption1_scenario(
            set_size,
            collaborative_targets,
            0,
            lead_delay,
            uplink_delay,
            downlink_delay,
            backoff_interval=lead_delay / x,
            sampling_period=sampling,
            horizon=5.0 * sampling,
            seed=seed,
        )
        for trial_index in range(trials):
            tasks.append((scenario, xi, trial_index))
    outcomes = _run_tasks(tasks, _region_task, jobs)
    by_x: dict[int, list[PairedOutcome]] = {i: [] for i in range(len(xs))}
    for xi, trial_index, outcome in sorted(outcomes, key=lambda r: (r[0], r[1])):
        by_x[xi].append(outcome)

    points = []
    for xi, x in enumerate(xs):
        outs = by_x[xi]
        for y in ys:
            stats = RunningStats()
            for o in outs:
                stats.add(o.power_difference(uplink_power=y, downlink_power=1.0))
            g = advantage_poly(AdvantageParams(x=min(x, 1.0), y=y, set_size=set_size))
            points.append(
                AdvantagePoint(
                    x=x, y=y, set_size=set_size, g=g, theory_advantage=g > 0,
                    empirical_mean=stats.mean, empirical_se=stats.stderr,
                )
            )
    return points


def region_agreement(points: Sequence[AdvantagePoint]) -> tuple[float, int, int]:
    """(agreement fraction, agreeing cells, non-boundary cells)."""
    agree = 0
    considered = 0
    for p in points:
        if p.empirical_mean is None or p.boundary:
            continue
        considered += 1
        if p.empirical_advantage == p.theory_advantage:
            agree += 1
    frac = agree / considered if considered else float("nan")
    return frac, agree, considered


def region_to_csv(points: Sequence[AdvantagePoint], path) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write("# gathersim-csv v1 region\n")
        fh.write("x,y,set_size,g,theoretical,empirical_mean,empirical_se\n")
        for p in points:
            theo = "advantageous" if p.theory_advantage else "not-advantageous"
            mean = "" if p.empirical_mean is None else repr(p.empirical_mean)
            se = "" if p.empirical_se is None else repr(p.empirical_se)
            fh.write(f"{p.x!r},{p.y!r},{p.set_size},{p.g!r},{theo},{mean},{se}\n")
