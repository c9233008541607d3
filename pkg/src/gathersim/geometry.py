"""Observation geometry: per-target sensor membership, collaborative sets,
and collaborative/unique component counts.

A collaborative set is any group of >= 2 sensors whose observation disks share
a nonempty common intersection with the environment. A target seen by exactly
one sensor is a unique component of that sensor; a target seen by several is a
collaborative component of the set that equals its observer group exactly.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .scenario import Scenario

MembershipMap = dict[int, frozenset[int]]


class GeometryError(RuntimeError):
    """Internal inconsistency between memberships and enumerated sets."""


@dataclass(frozen=True)
class CollaborativeSet:
    members: frozenset[int]
    collaborative_count: int  # targets whose observer group equals `members`


@dataclass(frozen=True)
class CollaborativeStructure:
    sets: tuple[CollaborativeSet, ...]
    unique_counts: dict[int, int]  # sensor id -> uniquely observed targets

    def total_components(self) -> int:
        return sum(self.unique_counts.values()) + sum(s.collaborative_count for s in self.sets)


def membership(scenario: Scenario, positions) -> MembershipMap:
    """Map each target id to the set of sensor ids currently observing it."""
    pos = np.asarray(positions, dtype=float)
    tids = [t.id for t in scenario.targets]
    out: MembershipMap = {}
    obs: dict[int, set[int]] = {tid: set() for tid in tids}
    for s in scenario.sensors:
        d2 = (pos[:, 0] - s.center[0]) ** 2 + (pos[:, 1] - s.center[1]) ** 2
        for row in np.nonzero(d2 <= s.radius * s.radius)[0]:
            obs[tids[row]].add(s.id)
    for tid in tids:
        out[tid] = frozenset(obs[tid])
    return out


def _set_key(members: frozenset[int]) -> tuple:
    return (len(members), tuple(sorted(members)))


def collaborative_sets(scenario: Scenario, resolution: float = 0.05) -> list[frozenset[int]]:
    """Enumerate every sensor group of size >= 2 with a nonempty common region.

    Nonemptiness is decided by sampling cell centers of a dense grid over the
    group's bounding box, clipped to the environment. The result lists all
    such groups (maximal or not), ordered by size then member ids.

    The necessary condition "every (k-1)-subset intersects" prunes the subset
    lattice before any grid work.
    """
    if resolution <= 0:
        raise ValueError("resolution must be positive")
    env = scenario.environment
    sensors = sorted(scenario.sensors, key=lambda s: s.id)
    by_id = {s.id: s for s in sensors}
    ids = [s.id for s in sensors]

    def nonempty(group: tuple[int, ...]) -> bool:
        lo_x = max(max(by_id[j].center[0] - by_id[j].radius for j in group), 0.0)
        hi_x = min(min(by_id[j].center[0] + by_id[j].radius for j in group), env.width)
        lo_y = max(max(by_id[j].center[1] - by_id[j].radius for j in group), 0.0)
        hi_y = min(min(by_id[j].center[1] + by_id[j].radius for j in group), env.height)
        if lo_x >= hi_x or lo_y >= hi_y:
            return False
        i0 = max(0, math.ceil(lo_x / resolution - 0.5))
        i1 = math.floor(hi_x / resolution - 0.5)
        k0 = max(0, math.ceil(lo_y / resolution - 0.5))
        k1 = math.floor(hi_y / resolution - 0.5)
        if i1 < i0 or k1 < k0:
            return False
        xs = (np.arange(i0, i1 + 1) + 0.5) * resolution
        ys = (np.arange(k0, k1 + 1) + 0.5) * resolution
        gx, gy = np.meshgrid(xs, ys, indexing="ij")
        mask = np.ones(gx.shape, dtype=bool)
        for j in group:
            s = by_id[j]
            mask &= (gx - s.center[0]) ** 2 + (gy - s.center[1]) ** 2 <= s.radius * s.radius
            if not mask.any():
                return False
        return bool(mask.any())

    alive: set[frozenset[int]] = set()
    result: list[frozenset[int]] = []
    for size in range(2, len(ids) + 1):
        found_any = False
        for group in itertools.combinations(ids, size):
            if size > 2:
                fs = frozenset(group)
                if any(fs - {j} not in alive for j in group):
                    continue
            if nonempty(group):
                fs = frozenset(group)
                alive.add(fs)
                result.append(fs)
                found_any = True
        if size > 2 and not found_any:
            break
    result.sort(key=_set_key)
    return result


def component_counts(members_map: MembershipMap, sets: list[frozenset[int]]) -> CollaborativeStructure:
    """Attribute each observed target to a unique count or to the collaborative
    set equal to its observer group.

    Raises GeometryError when a multi-observed target's group is missing from
    `sets` (the target itself witnesses a nonempty intersection, so the
    enumeration must have missed it, e.g. a too-coarse grid).
    """
    unique: dict[int, int] = {}
    collab: dict[frozenset[int], int] = {fs: 0 for fs in sets}
    for tid in sorted(members_map):
        group = members_map[tid]
        if len(group) == 0:
            continue
        if len(group) == 1:
            (j,) = group
            unique[j] = unique.get(j, 0) + 1
        else:
            if group not in collab:
                raise GeometryError(
                    f"target {tid} is observed by {sorted(group)} but that group "
                    "was not enumerated as a collaborative set"
                )
            collab[group] += 1
    ordered = sorted(collab, key=_set_key)
    return CollaborativeStructure(
        sets=tuple(CollaborativeSet(fs, collab[fs]) for fs in ordered),
        unique_counts=unique,
    )
