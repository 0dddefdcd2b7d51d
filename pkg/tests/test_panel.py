import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from myogaze.hand import GraspType
from myogaze.panel import (
    DwellState,
    GazeSample,
    PanelLayout,
    default_layout,
    dwell_update,
    hit_test,
    load_layout,
    read_gaze_stream,
    save_layout,
    write_gaze_stream,
)


def dwell_oracle(hits, threshold_ms):
    """Brute-force stream scan: one trigger per maximal same-hit run whose

    on-button span reaches the threshold."""
    triggers = []
    run_hit, run_start, fired = object(), None, False
    for t, h in hits:
        if h != run_hit:
            run_hit, run_start, fired = h, t, False
        elif h is not None and not fired and t - run_start >= threshold_ms:
            triggers.append((t, h))
            fired = True
    return triggers


def run_dwell(layout, samples, threshold_ms=200.0):
    state = DwellState(threshold_ms=threshold_ms)
    triggers = []
    for s in samples:
        state, trig = dwell_update(state, hit_test(layout, s), s.t_ms)
        if trig is not None:
            triggers.append(trig)
    return triggers


def test_hit_at_center():
    layout = default_layout()
    for b in layout.buttons:
        assert hit_test(layout, GazeSample(0, b.cx, b.cy)) == b.id


def test_out_of_view_misses():
    layout = default_layout()
    assert hit_test(layout, GazeSample(0, -0.1, 0.5)) is None
    assert hit_test(layout, GazeSample(0, 0.5, 0.99)) is None


def test_invalid_sample_misses():
    layout = default_layout()
    b = layout.buttons[0]
    assert hit_test(layout, GazeSample(0, b.cx, b.cy, valid=False)) is None


def test_half_open_edges():
    layout = default_layout()
    b = layout.button("cylindrical")
    left, right = b.cx - b.w / 2, b.cx + b.w / 2
    assert hit_test(layout, GazeSample(0, left, b.cy)) == b.id
    assert hit_test(layout, GazeSample(0, right, b.cy)) is None


def test_every_point_maps_to_at_most_one_button():
    layout = default_layout()
    for ix in range(101):
        for iy in range(45):
            x, y = ix / 100.0, iy / 100.0
            containing = [b.id for b in layout.buttons if b.contains(x, y)]
            assert len(containing) <= 1, (x, y, containing)


def test_continuous_fixation_triggers_once_at_threshold():
    layout = default_layout()
    b = layout.button("pinch")
    samples = [GazeSample(t, b.cx, b.cy) for t in range(0, 201, 10)]
    triggers = run_dwell(layout, samples)
    assert len(triggers) == 1
    assert triggers[0].t_ms == 200
    assert triggers[0].button_id == "pinch"


def test_leaving_resets_the_accumulator():
    layout = default_layout()
    b = layout.button("pinch")
    off = GazeSample  # a point outside every button
    samples = [GazeSample(t, b.cx, b.cy) for t in range(0, 151, 10)]
    samples += [off(160, 0.5, 0.9)]
    samples += [GazeSample(t, b.cx, b.cy) for t in range(170, 321, 10)]
    assert run_dwell(layout, samples) == []


def test_long_stare_fires_exactly_once():
    layout = default_layout()
    b = layout.button("hook")
    samples = [GazeSample(t, b.cx, b.cy) for t in range(0, 601, 10)]
    assert len(run_dwell(layout, samples)) == 1


def test_tracking_loss_resets():
    layout = default_layout()
    b = layout.button("lateral")
    samples = [GazeSample(t, b.cx, b.cy, valid=(t != 100)) for t in range(0, 321, 10)]
    triggers = run_dwell(layout, samples)
    assert len(triggers) == 1
    assert triggers[0].t_ms == 310  # re-entry at 110, threshold 200 later


def test_non_monotonic_time_rejected():
    state = DwellState()
    state, _ = dwell_update(state, None, 50.0)
    with pytest.raises(ValueError, match="rejected input"):
        dwell_update(state, None, 49.0)


def test_threshold_floor_enforced():
    with pytest.raises(ValueError, match="floor"):
        DwellState(threshold_ms=119.0)
    DwellState(threshold_ms=120.0)  # the floor itself is allowed


def _random_hit_stream(rng, n):
    # random walk over {None, buttons} with random sample spacing
    layout = default_layout()
    ids = [b.id for b in layout.buttons] + [None, None]
    hits = []
    t = 0.0
    cur = rng.choice(ids)
    for _ in range(n):
        t += rng.choice([5.0, 10.0, 16.0, 30.0])
        if rng.random() < 0.25:
            cur = rng.choice(ids)
        hits.append((t, cur))
    return hits


@pytest.mark.parametrize("seed", range(20))
def test_dwell_matches_stream_scan_oracle(seed):
    rng = random.Random(seed)
    hits = _random_hit_stream(rng, 400)
    threshold = rng.choice([120.0, 160.0, 200.0, 350.0])
    state = DwellState(threshold_ms=threshold)
    got = []
    for t, h in hits:
        state, trig = dwell_update(state, h, t)
        if trig:
            got.append((t, trig.button_id))
    assert got == dwell_oracle(hits, threshold)


@settings(max_examples=150, deadline=None)
@given(
    steps=st.lists(
        st.tuples(st.sampled_from([5.0, 10.0, 20.0]), st.integers(min_value=0, max_value=3)),
        min_size=1, max_size=120,
    )
)
def test_no_trigger_below_threshold_property(steps):
    # hit 0..2 map to button ids, 3 means off-panel
    names = ["pinch", "hook", "tripod", None]
    t = 0.0
    hits = []
    for dt, which in steps:
        t += dt
        hits.append((t, names[which]))
    state = DwellState(threshold_ms=200.0)
    on_since = None
    cur = object()
    for tt, h in hits:
        state, trig = dwell_update(state, h, tt)
        if h != cur:
            cur, on_since = h, tt
        if trig is not None:
            assert tt - on_since >= 200.0


def test_lowering_threshold_never_loses_triggers():
    rng = random.Random(99)
    for _ in range(20):
        hits = _random_hit_stream(rng, 300)
        counts = []
        for threshold in (350.0, 200.0, 120.0):
            state = DwellState(threshold_ms=threshold)
            n = 0
            for t, h in hits:
                state, trig = dwell_update(state, h, t)
                n += trig is not None
            counts.append(n)
        assert counts[0] <= counts[1] <= counts[2]


def test_default_layout_satisfies_invariants():
    layout = default_layout()  # constructor validates
    grasps = [b.grasp for b in layout.buttons if b.grasp is not None]
    assert sorted(g.value for g in grasps) == list(range(6))
    assert len(layout.buttons) == 9


def test_layout_file_roundtrip(tmp_path):
    layout = default_layout()
    path = tmp_path / "layout.json"
    save_layout(path, layout)
    assert load_layout(path) == layout


def test_layout_rejects_duplicate_grasp():
    layout = default_layout().to_json()
    layout["buttons"][0]["grasp"] = "pinch"
    layout["buttons"][0]["id"] = "pinch-2"
    with pytest.raises(ValueError, match="exactly once"):
        PanelLayout.from_json(layout)


def test_layout_rejects_overlap():
    doc = default_layout().to_json()
    doc["buttons"][1]["cx"] = doc["buttons"][0]["cx"] + 0.01
    doc["buttons"][1]["cy"] = doc["buttons"][0]["cy"]
    with pytest.raises(ValueError, match="overlap"):
        PanelLayout.from_json(doc)


def test_gaze_stream_roundtrip(tmp_path):
    samples = [
        GazeSample(0.0, 0.5, 0.25),
        GazeSample(16.0, -0.1, 0.5, valid=False),
        GazeSample(33.0, 0.75, 0.08),
    ]
    path = tmp_path / "gaze.txt"
    write_gaze_stream(path, samples)
    assert read_gaze_stream(path) == samples


def test_grasp_lookup():
    layout = default_layout()
    assert layout.grasp_of("pinch") is GraspType.PINCH
    assert layout.grasp_of("reserved-1") is None
