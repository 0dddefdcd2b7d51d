import json

import pytest

from myogaze.hand import GraspType
from myogaze.runner import (
    AgentConfig,
    Mode,
    ProtocolConfig,
    SchedulingError,
    ScriptedAgent,
    SessionCore,
    TrialPlan,
    load_config,
    run_session,
    schedule_block,
)
from myogaze.signals import MyoConfig
from myogaze.wire import records_to_lines
from myogaze.world import default_catalog


def trial_events(records):
    """Split the event stream into one list per trial."""
    trials = []
    cur = None
    for r in records:
        if r.kind == "TrialStart":
            cur = []
        cur.append(r)
        if r.kind == "TrialEnd":
            trials.append(cur)
            cur = None
    return trials


def test_schedule_block_composition():
    catalog = default_catalog()
    plan = schedule_block(catalog, seed=0)
    assert len(plan.object_ids) == 24
    assert plan.object_ids.count(21) == 4  # the hook handle repeats
    plan.validate(catalog)


def test_schedule_deterministic_per_seed():
    catalog = default_catalog()
    assert schedule_block(catalog, seed=123) == schedule_block(catalog, seed=123)
    assert schedule_block(catalog, seed=123) != schedule_block(catalog, seed=124)


def test_schedules_never_repeat_adjacent_types():
    catalog = default_catalog()
    by_id = {o.id: o for o in catalog}
    for seed in range(300):
        plan = schedule_block(catalog, seed=seed)
        types = [by_id[i].optimal_type for i in plan.object_ids]
        assert all(a is not b for a, b in zip(types, types[1:]))


def test_unsatisfiable_catalog_raises():
    # two objects of the same optimal type always sit adjacent
    catalog = default_catalog()[:2]
    with pytest.raises(SchedulingError):
        schedule_block(catalog, seed=0, max_attempts=50)


def test_plan_validation_rejects_missing_object():
    catalog = default_catalog()
    plan = schedule_block(catalog, seed=1)
    broken = TrialPlan(object_ids=plan.object_ids[:-1] + (plan.object_ids[0],))
    with pytest.raises(ValueError):
        broken.validate(catalog)


def test_degenerate_agent_first_trigger_is_always_optimal():
    proto = ProtocolConfig(blocks=1, seed=7)
    _, records = run_session(proto, AgentConfig(seed=7))
    for events in trial_events(records):
        optimal = events[0].attrs["optimal_type"]
        triggers = [e for e in events if e.kind == "GazeTrigger"]
        assert triggers and triggers[0].attrs["grasp"] == optimal


def test_trigger_latency_is_reaction_plus_dwell():
    # reaction 300 ms + dwell 200 ms, quantized by the 60 Hz gaze cadence
    proto = ProtocolConfig(blocks=1, seed=2)
    _, records = run_session(proto, AgentConfig(seed=2, reaction_latency_ms=300.0))
    for events in trial_events(records):
        t0 = events[0].t
        trig = next(e for e in events if e.kind == "GazeTrigger")
        assert 500.0 - 17.0 <= trig.t - t0 <= 500.0 + 17.0


def test_wrong_button_then_correction():
    proto = ProtocolConfig(blocks=1, seed=5)
    _, records = run_session(proto, AgentConfig(seed=5, wrong_button_prob=1.0))
    for events in trial_events(records):
        triggers = [e for e in events if e.kind == "GazeTrigger"]
        assert len(triggers) >= 2
        assert triggers[-1].attrs["grasp"] == events[0].attrs["optimal_type"]
        end = events[-1]
        assert end.attrs["correct_type"] is True


def test_one_block_degenerate_all_placed_optimal():
    proto = ProtocolConfig(blocks=1, seed=42)
    _, records = run_session(proto, AgentConfig(seed=42))
    ends = [r for r in records if r.kind == "TrialEnd"]
    assert len(ends) == 24
    assert all(e.attrs["outcome"] == "placed" for e in ends)
    assert all(e.attrs["correct_type"] for e in ends)


def test_pinch_miss_fails_exactly_the_pinch_singles():
    proto = ProtocolConfig(blocks=1, seed=3)
    _, records = run_session(proto, AgentConfig(seed=3, pinch_miss_prob=1.0))
    ends = [r for r in records if r.kind == "TrialEnd"]
    pinch = [e for e in ends if e.attrs["optimal_type"] == "pinch"]
    rest = [e for e in ends if e.attrs["optimal_type"] != "pinch"]
    assert len(pinch) == 4
    assert all(e.attrs["outcome"] == "closed_on_air" for e in pinch)
    assert all(e.attrs["outcome"] == "placed" for e in rest)


def test_timeout_agent_times_out_every_trial():
    proto = ProtocolConfig(blocks=1, seed=1, trial_timeout_ms=2000)
    _, records = run_session(proto, AgentConfig(seed=1, reaction_latency_ms=1e9))
    ends = [r for r in records if r.kind == "TrialEnd"]
    assert len(ends) == 24
    assert all(e.attrs["outcome"] == "timeout" for e in ends)
    assert all(e.attrs["duration_ms"] <= 2000 for e in ends)


def test_hold_only_ends_at_held():
    proto = ProtocolConfig.patient_profile(blocks=1, seed=6)
    assert proto.mode is Mode.HOLD_ONLY
    _, records = run_session(proto, AgentConfig(seed=6))
    ends = [r for r in records if r.kind == "TrialEnd"]
    assert all(e.attrs["outcome"] == "held" for e in ends)
    held = [r for r in records if r.kind == "Held"]
    assert len(held) == len(ends) == 24


def test_early_release_drops():
    # an agent that gives up squeezing before the 100 ms hold criterion;
    # a near-instant envelope keeps muscle relaxation lag out of the way
    proto = ProtocolConfig(blocks=1, seed=8, myo=MyoConfig(tau_ms=1e-3))
    _, records = run_session(
        proto, AgentConfig(seed=8, squeeze_hold_ms=40.0, emg_rise_ms=0.0)
    )
    ends = [r for r in records if r.kind == "TrialEnd"]
    assert all(e.attrs["outcome"] == "dropped_early_release" for e in ends)


def test_switch_accepted_precedes_preshape_crossing():
    for agent_cfg in (AgentConfig(seed=4), AgentConfig(seed=4, wrong_button_prob=0.5)):
        proto = ProtocolConfig(blocks=1, seed=4)
        _, records = run_session(proto, agent_cfg)
        for events in trial_events(records):
            crossings = [
                e.t for e in events
                if e.kind == "EmgCommand" and e.attrs.get("crossed_preshape")
            ]
            switches = [e.t for e in events if e.kind == "SwitchAccepted"]
            if crossings and switches:
                assert max(switches) < crossings[0]


def test_every_trial_terminates_within_timeout():
    proto = ProtocolConfig(blocks=2, seed=12, trial_timeout_ms=30000)
    _, records = run_session(
        proto, AgentConfig(seed=12, wrong_button_prob=0.5, pinch_miss_prob=0.5)
    )
    ends = [r for r in records if r.kind == "TrialEnd"]
    assert len(ends) == 48
    assert all(e.attrs["duration_ms"] <= 30000 for e in ends)


def test_identical_seeds_identical_logs():
    proto = ProtocolConfig(blocks=1, seed=9)
    agent = AgentConfig(seed=9, gaze_noise_sigma=0.01, wrong_button_prob=0.3)
    meta1, rec1 = run_session(proto, agent)
    meta2, rec2 = run_session(proto, agent)
    assert records_to_lines(rec1, meta1) == records_to_lines(rec2, meta2)


def test_different_seed_changes_the_log():
    proto = ProtocolConfig(blocks=1, seed=9)
    _, rec1 = run_session(proto, AgentConfig(seed=9))
    _, rec2 = run_session(
        ProtocolConfig(blocks=1, seed=10), AgentConfig(seed=10)
    )
    assert records_to_lines(rec1) != records_to_lines(rec2)


def test_reaction_schedule_speeds_up_later_blocks():
    proto = ProtocolConfig(blocks=2, seed=15)
    agent = AgentConfig(seed=15, reaction_latency_ms=400.0,
                        reaction_schedule=(1.0, 0.5))
    _, records = run_session(proto, agent)
    per_block = {0: [], 1: []}
    for events in trial_events(records):
        block = events[0].attrs["block"]
        trig = next(e for e in events if e.kind == "GazeTrigger")
        per_block[block].append(trig.t - events[0].t)
    mean0 = sum(per_block[0]) / len(per_block[0])
    mean1 = sum(per_block[1]) / len(per_block[1])
    assert mean0 - mean1 == pytest.approx(200.0, abs=25.0)


def test_session_core_rejects_mismatched_trials_per_block():
    with pytest.raises(ValueError, match="expects"):
        SessionCore(ProtocolConfig(trials_per_block=20, blocks=1))


def test_config_json_roundtrip(tmp_path):
    proto = ProtocolConfig(
        blocks=3, mode=Mode.HOLD_ONLY, seed=11, trial_timeout_ms=5000,
        myo=MyoConfig(threshold_flexor=0.2, tau_ms=30.0),
    )
    agent = AgentConfig(seed=4, wrong_button_prob=0.25, reaction_schedule=(1.0, 0.8))
    p = tmp_path / "protocol.json"
    a = tmp_path / "agent.json"
    p.write_text(json.dumps(proto.to_json()))
    a.write_text(json.dumps(agent.to_json()))
    assert load_config(p, ProtocolConfig) == proto
    assert load_config(a, AgentConfig) == agent


def test_agent_config_validation():
    with pytest.raises(ValueError):
        AgentConfig(wrong_button_prob=1.5)
    with pytest.raises(ValueError):
        AgentConfig(reach_ms=-1.0)


def test_gaze_cadence_is_60hz_on_ticks():
    proto = ProtocolConfig(blocks=1, seed=0)
    core = SessionCore(proto)
    agent = ScriptedAgent(AgentConfig(seed=0), core.layout, core.space)
    times = []
    for t in range(0, 1000, 10):
        out = agent.step(core.observe(t), t)
        if out.gaze is not None:
            times.append(t)
    assert len(times) == 60  # 60 samples in the first second
    assert all(b - a in (10, 20) for a, b in zip(times, times[1:]))
