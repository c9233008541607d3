import math
from dataclasses import replace

import pytest
from scripted_cases import (
    DOWNLINK_POWER,
    UPLINK_POWER,
    backoff_tables,
    informed_from_table,
    run_scripted_pair,
    scripted_scenario,
)

from gathersim import geometry
from gathersim.analytics import power_diff
from gathersim.experiments import assumption1_scenario
from gathersim.protocol import classify_step, power_at_step, run_trial
from gathersim.scenario import (
    Architecture,
    CostParams,
    DynamicsParams,
    Environment,
    ProtocolParams,
    Scenario,
    ScenarioError,
    SensorSpec,
    TargetSpec,
)


def single_sensor_scenario(n_targets=1, architecture=Architecture.NF, uplink_power=1.0):
    targets = tuple(
        TargetSpec(i, (5.0 + 0.3 * i, 5.0)) for i in range(n_targets)
    )
    return Scenario(
        environment=Environment(10.0, 10.0),
        sensors=(SensorSpec(0, (5.0, 5.0), 3.0),),
        targets=targets,
        protocol=ProtocolParams(10.0, 4.0, 0.5, 0.25, 1.0, 0.0, 20.0),
        dynamics=DynamicsParams(1.0, 10.0, 0.0),
        costs=CostParams(uplink_power, 1.0),
        architecture=architecture,
        seed=5,
    )


def test_static_target_triggers_only_once():
    res = run_trial(single_sensor_scenario())
    triggers = res.events.of_kind("TRIGGER")
    assert [r.step for r in triggers] == [0]
    assert res.events.count("TX_START") == 1
    assert len(res.events.at_step(1, "SAMPLE")) == 1


def test_scripted_classification_matches_hand_evaluation():
    scn = scripted_scenario(3, 3)  # delay 9 with per-component delays 2/1
    fb, _ = run_scripted_pair(scn, (1.0, 5.0, 40.0))
    cls = classify_step(fb.events, [frozenset({0, 1, 2})], 0)
    assert len(cls) == 1
    c = cls[0]
    assert c.lead == 0
    assert c.informed == frozenset({2})
    assert c.uninformed == frozenset({1})
    assert c.lead_delay == 9.0
    # the informed sensor cancelled every collaborative component
    cancels = fb.events.of_kind("CANCEL")
    assert {r.sensor for r in cancels} == {2}
    assert len(cancels) == 3


def test_scripted_nf_everyone_transmits():
    scn = scripted_scenario(3, 3)
    _, nf = run_scripted_pair(scn, (1.0, 5.0, 40.0))
    assert nf.events.count("TX_START") == 3
    assert nf.events.count("CANCEL") == 0
    assert nf.events.count("FEEDBACK_START") == 0
    assert nf.power.downlink_components() == 0


def test_lead_tie_breaks_to_lowest_id():
    scn = scripted_scenario(3, 2)
    fb, _ = run_scripted_pair(scn, (5.0, 5.0, 20.0))
    cls = classify_step(fb.events, [frozenset({0, 1, 2})], 0)
    assert cls[0].lead == 0


def test_idle_step_classifies_empty():
    scn = scripted_scenario(2, 1)
    fb, _ = run_scripted_pair(scn, (1.0, 5.0))
    # static targets: nothing triggers at later steps; classify a fresh run
    # with a longer horizon instead
    scn2 = replace(scn, protocol=replace(scn.protocol, horizon=200.0))
    fb2 = run_trial(replace(scn2, architecture=Architecture.FB),
                    backoff_schedule=lambda k, s: (1.0, 5.0)[s] if k == 0 else None)
    assert classify_step(fb2.events, [frozenset({0, 1})], 1) == []


def test_classify_requires_feedback_log():
    scn = scripted_scenario(2, 1)
    _, nf = run_scripted_pair(scn, (1.0, 5.0))
    with pytest.raises(ValueError):
        classify_step(nf.events, [frozenset({0, 1})], 0)


def test_classify_step_out_of_range():
    scn = scripted_scenario(2, 1)
    fb, _ = run_scripted_pair(scn, (1.0, 5.0))
    with pytest.raises(IndexError):
        classify_step(fb.events, [frozenset({0, 1})], 99)


def test_power_single_sensor_four_components():
    res = run_trial(single_sensor_scenario(n_targets=4, uplink_power=2.0))
    assert power_at_step(res.power, 0) == 8.0
    assert power_at_step(res.power, 1) == 0.0
    with pytest.raises(IndexError):
        power_at_step(res.power, 99)


def test_power_fb_vs_nf_worked_example():
    # two of three sensors informed, two collaborative components
    scn = scripted_scenario(3, 2)  # delay = 6
    table = (1.0, 20.0, 40.0)
    lead, informed = informed_from_table(table, 6.0)
    assert lead == 0 and informed == frozenset({1, 2})
    fb, nf = run_scripted_pair(scn, table)
    assert power_at_step(fb.power, 0) == 6.0   # 2 components * 1 sender * (2+1)
    assert power_at_step(nf.power, 0) == 12.0  # 2 components * 3 senders * 2
    diff = power_at_step(nf.power, 0) - power_at_step(fb.power, 0)
    assert diff == power_diff([2], [2], [3], UPLINK_POWER, DOWNLINK_POWER) == 6


@pytest.mark.parametrize("set_size", [2, 3])
@pytest.mark.parametrize("collab", [1, 2, 3])
def test_power_difference_exact_over_scripts(set_size, collab):
    scn = scripted_scenario(set_size, collab)
    tau = 3.0 * collab
    for table in backoff_tables(set_size, tau):
        lead, informed = informed_from_table(table, tau)
        fb, nf = run_scripted_pair(scn, table)
        simulated = nf.power.total_power() - fb.power.total_power()
        expected = power_diff([collab], [len(informed)], [set_size], UPLINK_POWER, DOWNLINK_POWER)
        assert simulated == expected
        # feedback is charged per fed-back component to each actual sender
        senders = set_size - len(informed)
        assert fb.power.downlink_components() == senders * collab


def test_unique_components_cost_identically():
    # adding unique components must not change the power difference
    scn = scripted_scenario(2, 2, unique=1)
    tau = (2 + 1) * 2.0 + 2 * 1.0  # 8
    table = (1.0, 20.0)
    lead, informed = informed_from_table(table, tau)
    assert informed == frozenset({1})
    fb, nf = run_scripted_pair(scn, table)
    diff = nf.power.total_power() - fb.power.total_power()
    assert diff == power_diff([2], [1], [2], UPLINK_POWER, DOWNLINK_POWER)
    # the informed sensor still uplinks its unique component
    tx_sizes = sorted(r.size for r in fb.events.of_kind("TX_START"))
    assert tx_sizes == [1, 3]


def test_cancel_events_imply_informed_membership():
    # uniform-delay scenario, random draws: every cancelling sensor must be
    # classified informed at its step
    scn = assumption1_scenario(3, 3, 0, 9.0, 2.0, 1.0, backoff_interval=30.0, seed=31)
    full = frozenset({0, 1, 2})
    for trial in range(10):
        res = run_trial(replace(scn, seed=scn.seed ^ trial))
        by_step = {}
        for rec in res.events.of_kind("CANCEL"):
            by_step.setdefault(rec.step, set()).add(rec.sensor)
        for step, cancellers in by_step.items():
            cls = classify_step(res.events, [full], step)
            assert cls, f"cancel at step {step} without classification"
            assert cancellers <= set(cls[0].informed)


def test_no_overlapping_uplinks_and_monotone_times():
    scn = assumption1_scenario(3, 2, 1, 8.0, 2.0, 1.0, backoff_interval=25.0, seed=13)
    res = run_trial(scn)
    last = -math.inf
    for rec in res.events.records:
        assert rec.time >= last - 1e-12
        last = max(last, rec.time)
    for sensor in range(3):
        intervals = []
        starts = [r for r in res.events.of_kind("TX_START") if r.sensor == sensor]
        ends = [r for r in res.events.of_kind("TX_END") if r.sensor == sensor]
        assert len(starts) == len(ends)
        for s, e in zip(starts, ends):
            intervals.append((s.time, e.time))
        intervals.sort()
        for (s1, e1), (s2, e2) in zip(intervals, intervals[1:]):
            assert e1 <= s2 + 1e-12


def test_trial_determinism():
    scn = assumption1_scenario(3, 2, 1, 8.0, 2.0, 1.0, backoff_interval=25.0, seed=99)
    a = run_trial(scn)
    b = run_trial(scn)
    assert a.events.records == b.events.records
    assert a.power.counts == b.power.counts
    assert a.trace.rows == b.trace.rows


def test_drop_when_backoff_crosses_next_sample():
    scn = scripted_scenario(2, 1)
    scn = replace(
        scn,
        protocol=replace(scn.protocol, backoff_interval=400.0, horizon=300.0),
    )
    schedule = lambda step, sid: 200.0 if step == 0 else 10.0
    res = run_trial(replace(scn, architecture=Architecture.NF), backoff_schedule=schedule)
    step0_drops = res.events.at_step(0, "DROP")
    assert {r.sensor for r in step0_drops} == {0, 1}
    assert not res.events.at_step(0, "TX_START")
    # the superseding step transmits normally
    assert res.events.at_step(1, "TX_START")


def test_invalid_scenario_rejected():
    scn = single_sensor_scenario()
    bad = replace(scn, protocol=replace(scn.protocol, sampling_period=-1.0))
    with pytest.raises(ScenarioError):
        run_trial(bad)


def test_forced_backoff_outside_interval_rejected():
    scn = scripted_scenario(2, 1)
    with pytest.raises(ValueError):
        run_trial(scn, backoff_schedule=lambda k, s: 500.0)


def test_feedback_arriving_exactly_at_tx_start_does_not_cancel():
    # cutoff edge: second sensor starts exactly when feedback lands
    scn = scripted_scenario(2, 1)  # delay = 3
    fb, _ = run_scripted_pair(scn, (1.0, 4.0))
    assert fb.events.count("CANCEL") == 0
    assert fb.events.count("TX_START") == 2
    cls = classify_step(fb.events, [frozenset({0, 1})], 0)
    assert cls[0].informed == frozenset()
