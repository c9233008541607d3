"""Shared scripted-backoff machinery for exact power-difference checks.

Builds symmetric scenarios where every sensor schedules identical packets at
step 0, forces the backoff draws, and evaluates both architectures with the
same script. The informed set is computed independently from the forced
values and the known propagation delay, never from the simulator.
"""

from dataclasses import replace

from gathersim.experiments import assumption1_scenario
from gathersim.protocol import run_trial
from gathersim.scenario import Architecture

UPLINK_POWER = 2
DOWNLINK_POWER = 1


def scripted_scenario(set_size, collab, unique=0, seed=77):
    tau = (collab + unique) * 2.0 + collab * 1.0
    return assumption1_scenario(
        set_size,
        collab,
        unique,
        tau,
        2.0,
        1.0,
        backoff_interval=50.0,
        sampling_period=100.0,
        horizon=100.0,
        noise_std=1e-9,
        move_probability=0.0,
        uplink_power=UPLINK_POWER,
        downlink_power=DOWNLINK_POWER,
        seed=seed,
    )


def backoff_tables(set_size, tau):
    """Forced-draw tables covering lead/informed/uninformed permutations,
    including lead ties and the exact-cutoff edge (uninformed by strictness)."""
    if set_size == 2:
        return [
            (0.0, 5.0),
            (1.0, 30.0),
            (2.0, 2.0),
            (1.0, 1.0 + tau),
            (40.0, 2.0),
            (45.0, 1.0),
        ]
    if set_size == 3:
        return [
            (1.0, 5.0, 40.0),
            (1.0, 2.0, 3.0),
            (10.0, 1.0, 30.0),
            (5.0, 5.0, 20.0),
            (1.0, 1.0 + tau, 40.0),
            (1.0, 45.0, 46.0),
            (3.0, 20.0, 10.0),
        ]
    raise ValueError(set_size)


def informed_from_table(table, tau):
    """Apply the definition directly: lead has the minimal draw (lowest index
    on ties); informed sensors have draws beyond lead's draw plus delay."""
    lead = min(range(len(table)), key=lambda j: (table[j], j))
    cutoff = table[lead] + tau
    informed = frozenset(j for j in range(len(table)) if j != lead and table[j] > cutoff)
    return lead, informed


def run_scripted_pair(scenario, table):
    schedule = lambda step, sid: table[sid] if step == 0 else None
    fb = run_trial(replace(scenario, architecture=Architecture.FB), backoff_schedule=schedule)
    nf = run_trial(replace(scenario, architecture=Architecture.NF), backoff_schedule=schedule)
    return fb, nf
