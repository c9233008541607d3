"""Central-unit fusion and mean-squared-error accounting.

The central unit keeps one estimate per target. Measurements carried by
packets are tagged with the sampling step they were taken at; measurements of
the same target from the same step are averaged, a newer step replaces the
estimate outright, and stale steps are discarded. The error metric is the
time integral of the mean squared estimation error, extended piecewise
constantly between events.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .scenario import Point


class EstimatorState:
    """Per-target fused value, fusion count and epoch bookkeeping.

    Targets never seen are scored against `default_point` (normally the
    environment centroid) so the metric is defined from time zero.
    """

    def __init__(self, target_ids, default_point: Point):
        self.target_ids = tuple(target_ids)
        self._row = {tid: i for i, tid in enumerate(self.target_ids)}
        n = len(self.target_ids)
        self.default_point = (float(default_point[0]), float(default_point[1]))
        self._sums = np.zeros((n, 2))
        self._counts = np.zeros(n, dtype=np.int64)
        self._epochs = np.full(n, -1, dtype=np.int64)
        self._valid = np.zeros(n, dtype=bool)
        self.last_update_time = np.full(n, np.nan)

    def estimate(self, target_id: int) -> Point | None:
        row = self._row[target_id]
        if not self._valid[row]:
            return None
        c = self._counts[row]
        return (self._sums[row, 0] / c, self._sums[row, 1] / c)

    def fusion_count(self, target_id: int) -> int:
        return int(self._counts[self._row[target_id]])

    def epoch(self, target_id: int) -> int:
        return int(self._epochs[self._row[target_id]])

    def absorb(self, target_id: int, value: Point, step: int, now: float) -> None:
        """Fold one measurement into the estimate under the epoch rules."""
        row = self._row[target_id]
        if self._valid[row] and self._epochs[row] == step:
            self._sums[row, 0] += value[0]
            self._sums[row, 1] += value[1]
            self._counts[row] += 1
        elif not self._valid[row] or step > self._epochs[row]:
            self._sums[row, 0] = value[0]
            self._sums[row, 1] = value[1]
            self._counts[row] = 1
            self._epochs[row] = step
            self._valid[row] = True
        else:
            return  # older epoch than the current estimate: stale, drop
        self.last_update_time[row] = now

    def mean_squared_error(self, positions: np.ndarray) -> float:
        c = np.maximum(self._counts, 1)
        est = self._sums / c[:, None]
        est = np.where(self._valid[:, None], est, np.array(self.default_point))
        diff = est - positions
        return float(np.mean(diff[:, 0] ** 2 + diff[:, 1] ** 2))


def fuse(state: EstimatorState, packet, now: float) -> EstimatorState:
    """Fuse a fully received uplink packet into the central estimate."""
    for tid, value in packet.components:
        state.absorb(tid, value, packet.step, now)
    return state


@dataclass
class EstimatorTrace:
    """Time series of instantaneous MSE and its running integral."""

    rows: list[tuple[float, float, float]] = field(default_factory=list)
    integral: float = 0.0
    last_time: float = 0.0

    def time_average(self, horizon: float) -> float:
        return self.integral / horizon

    def final_integral(self) -> float:
        return self.integral


def accumulate_mse(trace: EstimatorTrace, state: EstimatorState, world, dt: float) -> EstimatorTrace:
    """Extend the error integral by dt using the current estimate and truth."""
    if dt < 0:
        raise ValueError("dt must be nonnegative")
    now = trace.last_time + dt
    inst = state.mean_squared_error(world.positions)
    if dt > 0:
        trace.integral += dt * inst
        trace.rows.append((now, inst, trace.integral))
    trace.last_time = now
    return trace
