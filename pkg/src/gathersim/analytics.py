"""Closed-form power and accuracy comparisons between the two architectures.

Conventions used throughout:

* ``x`` (delay ratio): the lead sensor's propagation delay divided by the
  backoff interval. Small x means feedback lands early enough to cancel most
  redundant transmissions.
* ``y`` (cost ratio): per-component uplink power divided by per-component
  downlink power. Large y means feedback broadcasts are comparatively cheap.

With backoffs uniform on the interval and identical packet sizes inside a
collaborative set of size M, the expected number of informed (cancelling)
sensors is x**M - M*x + (M - 1). The per-step power difference (no-feedback
minus feedback) for one set with c collaborative components and i informed
sensors is c*(i*(up + down) - M*down); substituting the expected informed
count and normalizing by the downlink cost gives the advantage polynomial
g(x, y, M) = (1+y)*x**M - M*(1+y)*x + (M-1)*y - 1, positive exactly when the
feedback architecture is cheaper on average. A positive g is attainable for
some x only when y exceeds 1/(M-1), the feasibility threshold.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from . import geometry
from .scenario import Scenario


@dataclass(frozen=True)
class AdvantageParams:
    """One point of the (delay ratio, cost ratio, set size) space."""

    x: float  # lead propagation delay / backoff interval, >= 0
    y: float  # uplink power / downlink power, > 0
    set_size: int  # sensors in the collaborative set, >= 2


@dataclass(frozen=True)
class MseAdvantageParams:
    trigger_threshold: float
    noise_std: float
    sampling_period: float
    uplink_delay: float
    min_unique: int  # smallest unique-component count among informed sensors


@dataclass(frozen=True)
class AdvantagePoint:
    """Theoretical and (optionally) empirical verdict at one grid cell."""

    x: float
    y: float
    set_size: int
    g: float
    theory_advantage: bool
    empirical_mean: Optional[float] = None
    empirical_se: Optional[float] = None

    @property
    def empirical_advantage(self) -> Optional[bool]:
        if self.empirical_mean is None:
            return None
        return self.empirical_mean > 0

    @property
    def boundary(self) -> Optional[bool]:
        """Statistically indistinguishable from zero (|mean| < 2 SE)."""
        if self.empirical_mean is None or self.empirical_se is None:
            return None
        return abs(self.empirical_mean) < 2.0 * self.empirical_se


def power_diff(
    collaborative_counts: Sequence,
    informed_counts: Sequence,
    set_sizes: Sequence,
    uplink_power,
    downlink_power,
):
    """Per-step power saved by feedback, summed over collaborative sets.

    For each set: c * (i*(up + down) - M*down). Exact for integer inputs
    (plain Python arithmetic, no float conversion).
    """
    if not (len(collaborative_counts) == len(informed_counts) == len(set_sizes)):
        raise ValueError("per-set sequences must have equal length")
    total = 0
    for c, i, m in zip(collaborative_counts, informed_counts, set_sizes):
        if m < 2:
            raise ValueError(f"set size must be >= 2 (got {m})")
        if i >= m:
            raise ValueError(f"informed count {i} must be below set size {m}")
        if i < 0 or c < 0:
            raise ValueError("counts must be nonnegative")
        total += c * (i * (uplink_power + downlink_power) - m * downlink_power)
    return total


def expected_informed(x: float, set_size: int) -> float:
    """Expected informed-sensor count for uniform backoffs, given delay ratio x.

    Equals set_size - 1 at x = 0 (everyone but the lead hears the feedback in
    time) and falls to 0 at x = 1; ratios above 1 clamp to 0.
    """
    if set_size < 2:
        raise ValueError(f"set size must be >= 2 (got {set_size})")
    if x < 0:
        raise ValueError(f"delay ratio must be >= 0 (got {x})")
    if x > 1.0:
        return 0.0
    return x**set_size - set_size * x + (set_size - 1)


def oracle_informed(x: float, set_size: int, samples: int, rng) -> tuple[float, float]:
    """Monte Carlo estimate of the expected informed count, with standard error.

    Draws unit-uniform backoffs, takes the lowest-index minimum as lead, and
    counts sensors whose backoff exceeds the lead's by more than x. This is
    the independent check for `expected_informed`.
    """
    if set_size < 2:
        raise ValueError(f"set size must be >= 2 (got {set_size})")
    if samples < 1:
        raise ValueError("samples must be >= 1")
    b = rng.random((samples, set_size))
    lead_vals = b.min(axis=1)
    informed = (b > (lead_vals + x)[:, None]).sum(axis=1)
    mean = float(informed.mean())
    if samples == 1:
        return mean, 0.0
    se = float(informed.std(ddof=1) / math.sqrt(samples))
    return mean, se


def feasibility(set_size: int) -> float:
    """Cost-ratio threshold above which feedback can be cheaper at all."""
    if set_size < 2:
        raise ValueError(f"set size must be >= 2 (got {set_size})")
    return 1.0 / (set_size - 1)


def advantage_poly(params: AdvantageParams) -> float:
    """Evaluate g(x, y, M); feedback is power-advantageous on average iff g > 0.

    Grouped as g = y*(x**M - M*x + M - 1) + (x**M - M*x - 1) so the value is
    exactly -M at x = 1 for every y.
    """
    m = params.set_size
    if m < 2:
        raise ValueError(f"set size must be >= 2 (got {m})")
    x = params.x
    if not (0.0 <= x <= 1.0):
        raise ValueError(f"delay ratio must be within [0, 1] (got {x})")
    xm = x**m
    base = xm - m * x
    return params.y * (base + m - 1) + base - 1


def mse_advantage(params: MseAdvantageParams) -> tuple[float, bool]:
    """Threshold on trigger-threshold-to-noise ratio for an accuracy advantage.

    Returns (threshold, satisfied): feedback is accuracy-advantageous when
    trigger_threshold / noise_std exceeds
    sqrt(max(0, 2*sampling_period / (uplink_delay * min_unique) - 1)).
    """
    for name in ("trigger_threshold", "noise_std", "sampling_period", "uplink_delay"):
        if getattr(params, name) <= 0:
            raise ValueError(f"{name} must be > 0")
    if params.min_unique < 1:
        raise ValueError("min_unique must be >= 1")
    ratio = 2.0 * params.sampling_period / (params.uplink_delay * params.min_unique)
    threshold = math.sqrt(max(0.0, ratio - 1.0))
    satisfied = params.trigger_threshold / params.noise_std > threshold
    return threshold, satisfied


def mse_bounds(
    collaborative_counts: Sequence,
    informed_counts: Sequence,
    set_sizes: Sequence,
    trigger_threshold: float,
    noise_std: float,
    uplink_delay: float,
    sampling_period: float,
    min_unique: int,
) -> tuple[float, float]:
    """Lower bound on the accuracy gain and upper bound on the accuracy loss.

    Gain: faster delivery of fresh unique components, at least
    (eps^2 + sigma^2) * min_unique * uplink_delay * sum_i informed*collab.
    Loss: fewer redundant fusions, at most
    2*sampling_period * sigma^2 * sum_i (1/(M-i) - 1/M) * collab.
    """
    if not (len(collaborative_counts) == len(informed_counts) == len(set_sizes)):
        raise ValueError("per-set sequences must have equal length")
    eps2 = trigger_threshold**2 + noise_std**2
    cancelled = 0.0
    variance_term = 0.0
    for c, i, m in zip(collaborative_counts, informed_counts, set_sizes):
        if m < 2:
            raise ValueError(f"set size must be >= 2 (got {m})")
        if i >= m:
            raise ValueError(f"informed count {i} must be below set size {m}")
        cancelled += i * c
        variance_term += (1.0 / (m - i) - 1.0 / m) * c
    gain_lower = eps2 * min_unique * uplink_delay * cancelled
    loss_upper = 2.0 * sampling_period * variance_term * noise_std**2
    return gain_lower, loss_upper


def raster_region(set_size: int, x_values: Sequence[float], y_values: Sequence[float]) -> list[AdvantagePoint]:
    """Theoretical verdict over a grid. Delay ratios above 1 clamp to the
    x = 1 value, which is never advantageous."""
    out = []
    for x in x_values:
        gx = min(float(x), 1.0)
        for y in y_values:
            g = advantage_poly(AdvantageParams(x=gx, y=float(y), set_size=set_size))
            out.append(
                AdvantagePoint(
                    x=float(x), y=float(y), set_size=set_size, g=g, theory_advantage=g > 0,
                )
            )
    return out


@dataclass(frozen=True)
class SensorAdvantageEstimate:
    """Heuristic per-sensor parameters for layouts with uneven packet sizes."""

    sensor_id: int
    delay_estimate: float  # expected propagation delay, time units
    delay_ratio: float  # delay_estimate / backoff interval
    set_size_estimate: float  # mean size of collaborative sets containing the sensor


def approx_params(scenario: Scenario, resolution: float = 0.05) -> list[SensorAdvantageEstimate]:
    """Estimate each sensor's delay ratio and effective set size.

    The expected packet size is the number of targets the sensor observes at
    the scenario's initial layout; the expected feedback size is the
    collaborative subset of those, so the delay estimate is exact for
    symmetric layouts. The set-size estimate is the mean size of the
    collaborative sets containing the sensor, weighted by how many targets
    each set currently holds (unweighted when none holds any). Sensors
    belonging to no collaborative set are excluded.
    """
    sets = geometry.collaborative_sets(scenario, resolution=resolution)
    members = geometry.membership(
        scenario, [t.position for t in sorted(scenario.targets, key=lambda t: t.id)]
    )
    occupancy: dict[frozenset[int], int] = {fs: 0 for fs in sets}
    for group in members.values():
        if len(group) >= 2 and group in occupancy:
            occupancy[group] += 1
    proto = scenario.protocol
    out = []
    for s in sorted(scenario.sensors, key=lambda s: s.id):
        containing = [fs for fs in sets if s.id in fs]
        if not containing:
            continue
        n_total = sum(1 for group in members.values() if s.id in group)
        n_collab = sum(1 for group in members.values() if s.id in group and len(group) >= 2)
        delay = n_total * proto.uplink_delay + n_collab * proto.downlink_delay
        weight = sum(occupancy[fs] for fs in containing)
        if weight > 0:
            size_est = sum(len(fs) * occupancy[fs] for fs in containing) / weight
        else:
            size_est = sum(len(fs) for fs in containing) / len(containing)
        out.append(
            SensorAdvantageEstimate(
                sensor_id=s.id,
                delay_estimate=delay,
                delay_ratio=delay / proto.backoff_interval,
                set_size_estimate=size_est,
            )
        )
    return out


def approx_network_advantage(
    estimates: Sequence[SensorAdvantageEstimate],
    y: float,
    delay_scale: float = 1.0,
) -> tuple[float, bool]:
    """Fraction of sensors whose estimated cell is advantageous, and the
    majority verdict (fraction >= 0.5). `delay_scale` rescales every sensor's
    delay ratio, which maps a common-axis x value onto per-sensor ratios."""
    if not estimates:
        raise ValueError("no sensors with collaborative membership")
    votes = 0
    for est in estimates:
        x = min(est.delay_ratio * delay_scale, 1.0)
        # fractional set sizes are meaningful here: the polynomial extends smoothly
        g = advantage_poly(AdvantageParams(x=x, y=y, set_size=max(2.0, est.set_size_estimate)))
        if g > 0:
            votes += 1
    frac = votes / len(estimates)
    return frac, frac >= 0.5
