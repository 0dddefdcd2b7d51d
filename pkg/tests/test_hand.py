import random
from dataclasses import replace

import pytest

from myogaze.hand import (
    DEFAULT_GRASP_PARAMS,
    GraspParams,
    GraspType,
    Phase,
    aperture,
    load_params_table,
    make_hand,
    params_table_from_json,
    params_table_to_json,
    phase_of,
    request_grasp_type,
    save_params_table,
    step,
    validate_params_table,
)
from myogaze.signals import MotionCommand


def hand_at(s, grasp=GraspType.CYLINDRICAL, contact=False):
    return replace(make_hand(active_type=grasp), s=s, contact=contact)


def test_wire_index_bijective():
    assert [g.wire_index for g in GraspType] == [0, 1, 2, 3, 4, 5]
    for g in GraspType:
        assert GraspType.from_wire(g.wire_index) is g
    with pytest.raises(ValueError):
        GraspType.from_wire(6)


def test_full_open_always_accepts():
    state, accepted = request_grasp_type(hand_at(0.0), GraspType.PINCH.wire_index)
    assert accepted and state.active_type is GraspType.PINCH


def test_beyond_preshape_rejects_and_drops():
    before = hand_at(0.8)
    state, accepted = request_grasp_type(before, GraspType.LATERAL.wire_index)
    assert not accepted
    assert state == before  # dropped, not queued


def test_preshape_boundary_accepts():
    state, accepted = request_grasp_type(hand_at(0.5), GraspType.HOOK.wire_index)
    assert accepted and state.active_type is GraspType.HOOK


def test_accept_iff_at_or_before_preshape_sweep():
    for i in range(991):
        s = i / 1000.0
        _, accepted = request_grasp_type(hand_at(s), 3)
        assert accepted == (s <= 0.5), s


def test_invalid_index_is_an_error_not_a_rejection():
    with pytest.raises(ValueError, match="out of range"):
        request_grasp_type(hand_at(0.0), 6)


def test_hold_freezes():
    state = hand_at(0.37)
    assert step(state, MotionCommand.hold(), 1000.0).s == 0.37


def test_full_speed_close_is_unit_path_per_second():
    # fastest motor excursion 90 deg at 90 deg/s: full close in one second
    state = hand_at(0.0)
    assert step(state, MotionCommand.close(90.0), 1000.0).s == 1.0


def test_open_clamps_at_zero():
    state = hand_at(0.0)
    assert step(state, MotionCommand.open(45.0), 500.0).s == 0.0


def test_contact_makes_close_isometric():
    state = hand_at(0.6, contact=True)
    closed = step(state, MotionCommand.close(90.0), 100.0)
    assert closed.s == 0.6 and closed.contact
    opened = step(state, MotionCommand.open(90.0), 100.0)
    assert opened.s < 0.6 and not opened.contact


def test_phase_classification():
    assert phase_of(hand_at(0.0)) is Phase.FULL_OPEN
    assert phase_of(hand_at(0.3)) is Phase.PRESHAPE_ZONE
    assert phase_of(hand_at(0.5)) is Phase.PRESHAPE_ZONE
    assert phase_of(hand_at(0.75)) is Phase.BEYOND_PRESHAPE
    assert phase_of(hand_at(1.0)) is Phase.FULLY_CLOSED
    assert phase_of(hand_at(1.0 - 1e-9)) is Phase.FULLY_CLOSED


def test_aperture_endpoints_and_midpoint():
    params = {
        g: replace(p, open_aperture_cm=8.0) if g is GraspType.CYLINDRICAL else p
        for g, p in DEFAULT_GRASP_PARAMS.items()
    }
    hand = make_hand(params=params)
    assert aperture(replace(hand, s=0.0)) == 8.0
    assert aperture(replace(hand, s=0.5)) == 4.0
    assert aperture(replace(hand, s=1.0)) == 0.0


def test_theta_continuous_and_monotone():
    for grasp in GraspType:
        prev = None
        for i in range(1001):
            state = hand_at(i / 1000.0, grasp=grasp)
            theta = state.theta_deg()
            if prev is not None:
                for a, b in zip(prev, theta):
                    assert b >= a - 1e-12
                    assert abs(b - a) < 0.5  # no jumps on a 1e-3 grid
            prev = theta
        assert hand_at(0.0, grasp=grasp).theta_deg() == (0.0,) * 6
        closed = hand_at(1.0, grasp=grasp).theta_deg()
        assert closed == DEFAULT_GRASP_PARAMS[grasp].closed_deg


def test_preshape_waypoint_hit_exactly():
    for grasp in GraspType:
        state = hand_at(0.5, grasp=grasp)
        assert state.theta_deg() == pytest.approx(
            DEFAULT_GRASP_PARAMS[grasp].preshape_deg, abs=1e-12
        )


def test_close_then_open_returns_within_tolerance():
    rng = random.Random(4)
    for _ in range(200):
        s0 = rng.uniform(0.05, 0.9)
        speed = rng.uniform(1.0, 90.0)
        dt = rng.uniform(1.0, 50.0)
        state = hand_at(s0)
        fwd = step(state, MotionCommand.close(speed), dt)
        back = step(fwd, MotionCommand.open(speed), dt)
        if 0.0 < fwd.s < 1.0:  # no clamp hit
            assert abs(back.s - s0) < 1e-9


def test_per_motor_rate_never_exceeds_commanded_speed():
    rng = random.Random(11)
    for grasp in GraspType:
        state = hand_at(0.0, grasp=grasp)
        t = 0.0
        for _ in range(500):
            speed = rng.uniform(0.0, 90.0)
            cmd = (
                MotionCommand.hold()
                if speed == 0.0
                else (MotionCommand.close(speed) if rng.random() < 0.6 else MotionCommand.open(speed))
            )
            dt = 10.0
            before = state.theta_deg()
            state = step(state, cmd, dt)
            after = state.theta_deg()
            rate = max(abs(b - a) for a, b in zip(before, after)) / (dt / 1000.0)
            commanded = 0.0 if cmd.kind.value == "hold" else cmd.speed_deg_s
            assert rate <= commanded + 1e-9
            assert rate <= 90.0 + 1e-9
            t += dt


def test_params_validation():
    with pytest.raises(ValueError):
        GraspParams(preshape_deg=(0,) * 6, closed_deg=(0,) * 5, open_aperture_cm=5.0)
    with pytest.raises(ValueError):
        GraspParams(preshape_deg=(50,) * 6, closed_deg=(40,) * 6, open_aperture_cm=5.0)
    with pytest.raises(ValueError):
        GraspParams(preshape_deg=(0,) * 6, closed_deg=(91,) * 6, open_aperture_cm=5.0)
    with pytest.raises(ValueError):
        GraspParams(preshape_deg=(0,) * 6, closed_deg=(90,) * 6, open_aperture_cm=0.0)


def test_table_slope_bound_enforced():
    # one motor sweeping 0->90 after preshape moves at twice the commanded
    # speed with s_pre=0.5; such a table must be rejected
    bad = dict(DEFAULT_GRASP_PARAMS)
    bad[GraspType.HOOK] = GraspParams(
        preshape_deg=(0.0,) * 6, closed_deg=(0.0, 0.0, 0.0, 0.0, 0.0, 90.0),
        open_aperture_cm=6.0,
    )
    with pytest.raises(ValueError, match="outrun"):
        validate_params_table(bad)


def test_params_file_roundtrip(tmp_path):
    path = tmp_path / "params.json"
    save_params_table(path, DEFAULT_GRASP_PARAMS)
    assert load_params_table(path) == DEFAULT_GRASP_PARAMS


def test_params_json_mapping():
    doc = params_table_to_json(DEFAULT_GRASP_PARAMS)
    assert set(doc) == {g.label for g in GraspType}
    assert params_table_from_json(doc) == DEFAULT_GRASP_PARAMS
