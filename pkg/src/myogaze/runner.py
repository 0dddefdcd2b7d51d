"""Experiment harness: block/trial scheduling, a scripted virtual subject,
and the deterministic session loop that wires panel, signals, hand, wire,
and world together.

The loop runs on a fixed 10 ms tick. Gaze samples land on ticks at 60 Hz
cadence and EMG frames on every tick (100 Hz); all events carry the tick
timestamp, so identical configs and seeds reproduce logs byte for byte.
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass, field, replace
from enum import Enum
from pathlib import Path

from . import hand as hand_mod
from . import panel as panel_mod
from . import signals as signals_mod
from . import wire
from . import world as world_mod
from .hand import GraspType, HandState, Phase
from .panel import GazeSample, PanelLayout
from .signals import CommandKind, EmgFrame, EnvelopeState, MotionCommand, MyoConfig
from .world import CompatibilityMatrix, ObjectSpec, OutcomeKind, ReleaseOutcome, TrialSpace

TICK_MS = 10
GAZE_PERIOD_MS = 1000.0 / 60.0
SCENE_POINT = (0.5, 0.75)
MISS_OFFSET = 0.15


class Mode(Enum):
    TRANSPORT = "transport"  # reach, grasp, carry to the zone, release
    HOLD_ONLY = "hold_only"  # trial ends once the object is held


class SchedulingError(ValueError):
    pass


@dataclass(frozen=True)
class ProtocolConfig:
    """Session-level settings; system parameters (thresholds, dwell time,
    pre-shape point) are adjustable per user."""

    trials_per_block: int = 24
    blocks: int = 8
    mode: Mode = Mode.TRANSPORT
    trial_timeout_ms: int = 30_000
    seed: int = 0
    dwell_threshold_ms: float = panel_mod.DEFAULT_DWELL_MS
    s_pre: float = hand_mod.DEFAULT_S_PRE
    myo: MyoConfig = field(default_factory=MyoConfig)

    def __post_init__(self) -> None:
        if self.trials_per_block <= 0 or self.blocks <= 0:
            raise ValueError("trials_per_block and blocks must be positive")
        if self.trial_timeout_ms <= 0:
            raise ValueError("trial_timeout_ms must be positive")

    @classmethod
    def healthy_profile(cls, **overrides) -> "ProtocolConfig":
        return cls(**{"blocks": 8, "mode": Mode.TRANSPORT, **overrides})

    @classmethod
    def patient_profile(cls, **overrides) -> "ProtocolConfig":
        return cls(**{"blocks": 20, "mode": Mode.HOLD_ONLY, **overrides})

    def to_json(self) -> dict:
        return {
            "trials_per_block": self.trials_per_block,
            "blocks": self.blocks,
            "mode": self.mode.value,
            "trial_timeout_ms": self.trial_timeout_ms,
            "seed": self.seed,
            "dwell_threshold_ms": self.dwell_threshold_ms,
            "s_pre": self.s_pre,
            "myo": self.myo.to_json(),
        }

    @classmethod
    def from_json(cls, d: dict) -> "ProtocolConfig":
        d = dict(d)
        if "mode" in d:
            d["mode"] = Mode(d["mode"])
        if "myo" in d:
            d["myo"] = MyoConfig.from_json(d["myo"])
        return cls(**d)


@dataclass(frozen=True)
class AgentConfig:
    """Scripted virtual subject standing in for a human operator."""

    reaction_latency_ms: float = 300.0
    gaze_noise_sigma: float = 0.0
    wrong_button_prob: float = 0.0
    emg_rise_ms: float = 100.0
    squeeze_hold_ms: float = 150.0
    pinch_miss_prob: float = 0.0
    reach_ms: float = 800.0
    transport_ms: float = 1000.0
    seed: int = 0
    # Optional per-block multipliers on reaction latency, to mimic practice.
    reaction_schedule: tuple[float, ...] | None = None

    def __post_init__(self) -> None:
        for name in ("wrong_button_prob", "pinch_miss_prob"):
            p = getattr(self, name)
            if not 0.0 <= p <= 1.0:
                raise ValueError(f"{name} must lie in [0, 1]")
        for name in ("reaction_latency_ms", "gaze_noise_sigma", "emg_rise_ms",
                     "squeeze_hold_ms", "reach_ms", "transport_ms"):
            if getattr(self, name) < 0.0:
                raise ValueError(f"{name} must be non-negative")

    def reaction_for_block(self, block: int) -> float:
        if not self.reaction_schedule:
            return self.reaction_latency_ms
        idx = min(block, len(self.reaction_schedule) - 1)
        return self.reaction_latency_ms * self.reaction_schedule[idx]

    def to_json(self) -> dict:
        d = {
            "reaction_latency_ms": self.reaction_latency_ms,
            "gaze_noise_sigma": self.gaze_noise_sigma,
            "wrong_button_prob": self.wrong_button_prob,
            "emg_rise_ms": self.emg_rise_ms,
            "squeeze_hold_ms": self.squeeze_hold_ms,
            "pinch_miss_prob": self.pinch_miss_prob,
            "reach_ms": self.reach_ms,
            "transport_ms": self.transport_ms,
            "seed": self.seed,
        }
        if self.reaction_schedule is not None:
            d["reaction_schedule"] = list(self.reaction_schedule)
        return d

    @classmethod
    def from_json(cls, d: dict) -> "AgentConfig":
        d = dict(d)
        if d.get("reaction_schedule") is not None:
            d["reaction_schedule"] = tuple(d["reaction_schedule"])
        return cls(**d)


def load_config(path: str | Path, cls):
    return cls.from_json(json.loads(Path(path).read_text()))


@dataclass(frozen=True)
class TrialPlan:
    object_ids: tuple[int, ...]

    def validate(self, catalog: tuple[ObjectSpec, ...]) -> None:
        by_id = {o.id: o for o in catalog}
        counts: dict[int, int] = {}
        for oid in self.object_ids:
            counts[oid] = counts.get(oid, 0) + 1
        for obj in catalog:
            want = 4 if obj.optimal_type is GraspType.HOOK else 1
            if counts.get(obj.id, 0) != want:
                raise ValueError(
                    f"object {obj.id} appears {counts.get(obj.id, 0)}x, expected {want}"
                )
        types = [by_id[oid].optimal_type for oid in self.object_ids]
        for a, b in zip(types, types[1:]):
            if a is b:
                raise ValueError(f"adjacent trials share optimal type {a.label}")


def schedule_block(
    catalog: tuple[ObjectSpec, ...], seed: int | None = None,
    rng: random.Random | None = None, max_attempts: int = 100_000,
) -> TrialPlan:
    """Uniform random block order by rejection sampling: every non-hook
    object once, the hook object four times, no two consecutive trials with
    the same optimal grasp type."""
    if rng is None:
        rng = random.Random(seed)
    by_id = {o.id: o for o in catalog}
    pool: list[int] = []
    for obj in catalog:
        pool.extend([obj.id] * (4 if obj.optimal_type is GraspType.HOOK else 1))
    for _ in range(max_attempts):
        order = pool[:]
        rng.shuffle(order)
        types = [by_id[oid].optimal_type for oid in order]
        if all(a is not b for a, b in zip(types, types[1:])):
            return TrialPlan(object_ids=tuple(order))
    raise SchedulingError(
        f"no valid block order found in {max_attempts} attempts; "
        "catalog may be unsatisfiable"
    )


@dataclass(frozen=True)
class Obs:
    """What an operator (human or scripted) can see of the running session."""

    t_ms: int
    trial_index: int | None = None
    block: int = 0
    trial_in_block: int = 0
    obj: ObjectSpec | None = None
    optimal: GraspType | None = None
    trial_t_ms: int = 0
    active_type: GraspType = GraspType.CYLINDRICAL
    hand_s: float = 0.0
    hand_phase: Phase = Phase.FULL_OPEN
    contact: bool = False
    held: bool = False
    switch_count: int = 0
    arm_pos: float = 0.0
    in_zone: bool = False


@dataclass(frozen=True)
class AgentOutput:
    gaze: GazeSample | None
    emg: EmgFrame | None
    arm_pos: float


class _AgentPhase(Enum):
    REACT = "react"
    GAZE = "gaze"
    REACH = "reach"
    CLOSE = "close"
    TRANSPORT = "transport"
    RELEASE = "release"
    DONE = "done"


class ScriptedAgent:
    """Phase-scripted operator: wait, gaze-switch, reach, close, squeeze,
    transport, release. Deterministic given its seed."""

    def __init__(
        self,
        cfg: AgentConfig,
        layout: PanelLayout,
        space: TrialSpace,
        mode: Mode = Mode.TRANSPORT,
    ) -> None:
        self.cfg = cfg
        self.layout = layout
        self.space = space
        self.mode = mode
        self.rng = random.Random(cfg.seed)
        self._trial_index: int | None = None
        self._phase = _AgentPhase.REACT
        self._phase_start = 0
        self._gaze_n = 0  # gaze samples emitted so far (60 Hz cadence)
        self._arm = space.home_pos
        self._arm_from = space.home_pos
        self._reach_target = space.object_pos
        self._wrong_target: GraspType | None = None
        self._contact_since: int | None = None

    def _begin_trial(self, obs: Obs) -> None:
        self._trial_index = obs.trial_index
        self._phase = _AgentPhase.REACT
        self._phase_start = 0
        self._contact_since = None
        self._wrong_target = None
        self._reach_target = self.space.object_pos
        # the arm rests at home while the next object is placed
        self._arm = self.space.home_pos
        if self.rng.random() < self.cfg.wrong_button_prob:
            others = [g for g in GraspType if g is not obs.optimal]
            self._wrong_target = self.rng.choice(others)
        if obs.optimal is GraspType.PINCH and self.cfg.pinch_miss_prob > 0.0:
            if self.rng.random() < self.cfg.pinch_miss_prob:
                self._reach_target = self.space.object_pos + MISS_OFFSET

    def _gaze_point(self, obs: Obs) -> tuple[float, float]:
        if self._phase is _AgentPhase.GAZE and obs.optimal is not None:
            target = self._wrong_target or obs.optimal
            btn = self.layout.button(target.label)
            x, y = btn.cx, btn.cy
        else:
            x, y = SCENE_POINT
        if self.cfg.gaze_noise_sigma > 0.0:
            x += self.rng.gauss(0.0, self.cfg.gaze_noise_sigma)
            y += self.rng.gauss(0.0, self.cfg.gaze_noise_sigma)
        return x, y

    def _ramp(self, elapsed_ms: float) -> float:
        if self.cfg.emg_rise_ms <= 0.0:
            return 1.0
        return min(1.0, elapsed_ms / self.cfg.emg_rise_ms)

    def step(self, obs: Obs, t_ms: int) -> AgentOutput:
        flexor = 0.0
        extensor = 0.0
        if obs.trial_index is None:
            # between trials: rest at home while the next object is placed
            self._trial_index = None
            self._arm = self.space.home_pos
        else:
            if obs.trial_index != self._trial_index:
                self._begin_trial(obs)
            tt = obs.trial_t_ms

            if self._phase is _AgentPhase.REACT:
                if tt >= self.cfg.reaction_for_block(obs.block):
                    self._phase = _AgentPhase.GAZE

            if self._phase is _AgentPhase.GAZE:
                if self._wrong_target is not None:
                    if obs.switch_count >= 1 and obs.active_type is self._wrong_target:
                        self._wrong_target = None  # noticed the mistake; correct it
                elif obs.switch_count >= 1 and obs.active_type is obs.optimal:
                    self._phase = _AgentPhase.REACH
                    self._phase_start = tt
                    self._arm_from = self._arm

            if self._phase is _AgentPhase.REACH:
                el = tt - self._phase_start
                f = 1.0 if self.cfg.reach_ms <= 0 else min(1.0, el / self.cfg.reach_ms)
                self._arm = self._arm_from + (self._reach_target - self._arm_from) * f
                if el >= self.cfg.reach_ms:
                    self._phase = _AgentPhase.CLOSE
                    self._phase_start = tt

            if self._phase is _AgentPhase.CLOSE:
                if obs.held:
                    if self.mode is Mode.TRANSPORT:
                        self._phase = _AgentPhase.TRANSPORT
                        self._phase_start = tt
                        self._arm_from = self._arm
                    else:
                        self._phase = _AgentPhase.DONE
                else:
                    if obs.contact and self._contact_since is None:
                        self._contact_since = tt
                    if (
                        self._contact_since is not None
                        and tt - self._contact_since >= self.cfg.squeeze_hold_ms
                    ):
                        # gave up waiting for a stable hold; let go
                        self._phase = _AgentPhase.RELEASE
                        self._phase_start = tt
                    else:
                        flexor = self._ramp(tt - self._phase_start)

            if self._phase is _AgentPhase.TRANSPORT:
                el = tt - self._phase_start
                f = 1.0 if self.cfg.transport_ms <= 0 else min(1.0, el / self.cfg.transport_ms)
                self._arm = self._arm_from + (self.space.zone_center - self._arm_from) * f
                if el >= self.cfg.transport_ms:
                    self._phase = _AgentPhase.RELEASE
                    self._phase_start = tt

            if self._phase is _AgentPhase.RELEASE:
                extensor = self._ramp(tt - self._phase_start)

        gaze: GazeSample | None = None
        if t_ms >= self._gaze_n * GAZE_PERIOD_MS:
            x, y = self._gaze_point(obs)
            gaze = GazeSample(t_ms=t_ms, x=x, y=y, valid=True)
            self._gaze_n += 1
        emg = EmgFrame(t_ms=t_ms, flexor_raw=flexor, extensor_raw=extensor)
        return AgentOutput(gaze=gaze, emg=emg, arm_pos=self._arm)


@dataclass
class _TrialState:
    index: int
    block: int
    in_block: int
    obj: ObjectSpec
    t0: int
    switch_count: int = 0
    contact_t: int | None = None
    squeeze_ms: float = 0.0
    held: bool = False
    held_t: int | None = None
    held_optimal: bool = False


class SessionCore:
    """Owns one session's full state and advances it one tick at a time.

    Both the scripted-agent loop and the live gateway drive this same core,
    so a transport layer can add no semantics of its own.
    """

    def __init__(
        self,
        protocol: ProtocolConfig,
        catalog: tuple[ObjectSpec, ...] | None = None,
        layout: PanelLayout | None = None,
        params: hand_mod.ParamsTable | None = None,
        matrix: CompatibilityMatrix | None = None,
        space: TrialSpace | None = None,
    ) -> None:
        self.protocol = protocol
        self.catalog = catalog if catalog is not None else world_mod.default_catalog()
        self.layout = layout if layout is not None else panel_mod.default_layout()
        self.matrix = matrix if matrix is not None else CompatibilityMatrix()
        self.space = space if space is not None else TrialSpace()
        world_mod.validate_catalog(self.catalog, params or hand_mod.DEFAULT_GRASP_PARAMS)
        self.hand = hand_mod.make_hand(params=params, s_pre=protocol.s_pre)
        self.dwell = panel_mod.DwellState(threshold_ms=protocol.dwell_threshold_ms)
        self.env = EnvelopeState.from_config(protocol.myo)
        self.cmd: MotionCommand = signals_mod.HOLD
        self.plans = [
            schedule_block(self.catalog, seed=protocol.seed * 1_000_003 + b)
            for b in range(protocol.blocks)
        ]
        for plan in self.plans:
            if len(plan.object_ids) != protocol.trials_per_block:
                raise ValueError(
                    f"catalog yields {len(plan.object_ids)}-trial blocks but "
                    f"protocol expects {protocol.trials_per_block}"
                )
        self.events: list[wire.EventRecord] = []
        self.done = False
        self._trial: _TrialState | None = None
        self._trial_counter = 0
        self._arm = self.space.home_pos
        self._by_id = {o.id: o for o in self.catalog}

    # -- observation ------------------------------------------------------

    def observe(self, t_ms: int) -> Obs:
        tr = self._trial
        if tr is None:
            return Obs(t_ms=t_ms, arm_pos=self._arm,
                       active_type=self.hand.active_type)
        return Obs(
            t_ms=t_ms,
            trial_index=tr.index,
            block=tr.block,
            trial_in_block=tr.in_block,
            obj=tr.obj,
            optimal=tr.obj.optimal_type,
            trial_t_ms=t_ms - tr.t0,
            active_type=self.hand.active_type,
            hand_s=self.hand.s,
            hand_phase=self.hand.phase,
            contact=self.hand.contact,
            held=tr.held,
            switch_count=tr.switch_count,
            arm_pos=self._arm,
            in_zone=self.space.in_zone(self._arm),
        )

    def meta(self, agent: AgentConfig | None = None) -> dict:
        return {
            "protocol": self.protocol.to_json(),
            "agent": agent.to_json() if agent is not None else None,
        }

    # -- internals ---------------------------------------------------------

    def _emit(self, out: list[wire.EventRecord], t: int, kind: str, **attrs) -> None:
        rec = wire.EventRecord(t=t, kind=kind, attrs=attrs)
        self.events.append(rec)
        out.append(rec)

    def _start_trial(self, t: int, out: list[wire.EventRecord]) -> None:
        total = self.protocol.blocks * self.protocol.trials_per_block
        if self._trial_counter >= total:
            self.done = True
            return
        idx = self._trial_counter
        block = idx // self.protocol.trials_per_block
        in_block = idx % self.protocol.trials_per_block
        obj = self._by_id[self.plans[block].object_ids[in_block]]
        self._trial = _TrialState(
            index=idx, block=block, in_block=in_block, obj=obj, t0=t
        )
        self._trial_counter += 1
        self.hand = replace(self.hand, s=0.0, contact=False)
        self._emit(
            out, t, "TrialStart",
            trial=idx, block=block, trial_in_block=in_block,
            object_id=obj.id, object=obj.name,
            optimal_type=obj.optimal_type.label,
        )

    def _end_trial(
        self, t: int, out: list[wire.EventRecord], outcome: str, success: bool,
        **extra,
    ) -> None:
        tr = self._trial
        assert tr is not None
        final_type = self.hand.active_type
        self._emit(
            out, t, "TrialEnd",
            trial=tr.index, block=tr.block, outcome=outcome, success=success,
            final_type=final_type.label, optimal_type=tr.obj.optimal_type.label,
            correct_type=final_type is tr.obj.optimal_type,
            object_id=tr.obj.id, duration_ms=t - tr.t0, **extra,
        )
        self._trial = None

    def _process_gaze(self, t: int, gaze: GazeSample, out: list[wire.EventRecord]) -> None:
        tr = self._trial
        hit = panel_mod.hit_test(self.layout, gaze)
        self.dwell, trig = panel_mod.dwell_update(self.dwell, hit, gaze.t_ms)
        if trig is None:
            return
        grasp = self.layout.grasp_of(trig.button_id)
        self._emit(
            out, t, "GazeTrigger",
            button=trig.button_id, grasp=grasp.label if grasp else None,
        )
        if grasp is None:
            return
        # Trigger rides the byte link to the hand controller and back.
        frame = wire.encode(wire.SetGraspType(grasp.wire_index))
        msg, _ = wire.decode(frame)
        assert isinstance(msg, wire.SetGraspType)
        prev = self.hand.active_type
        self.hand, accepted = hand_mod.request_grasp_type(self.hand, msg.index)
        ack = wire.encode(wire.Ack(accepted, self.hand.active_type.wire_index))
        if accepted:
            if tr is not None:
                tr.switch_count += 1
            self._emit(
                out, t, "SwitchAccepted",
                from_type=prev.label, to_type=self.hand.active_type.label,
                frame=frame.hex(), ack=ack.hex(),
            )
        else:
            self._emit(
                out, t, "SwitchRejected",
                requested=grasp.label, phase=self.hand.phase.label,
                frame=frame.hex(), ack=ack.hex(),
            )

    def _process_emg(self, t: int, emg: EmgFrame, out: list[wire.EventRecord]) -> None:
        self.env = signals_mod.envelope_update(self.env, emg)
        cmd = signals_mod.resolve_command(self.env, self.protocol.myo)
        if cmd.kind is not self.cmd.kind:
            self._emit(
                out, t, "EmgCommand",
                command=cmd.kind.value, speed_deg_s=cmd.speed_deg_s, s=self.hand.s,
            )
        self.cmd = cmd

    def _world_tick(self, t: int, pre_step: HandState, out: list[wire.EventRecord]) -> None:
        tr = self._trial
        if tr is None:
            return
        obj = tr.obj
        if (
            not self.hand.contact
            and self.space.within_reach(self._arm)
            and world_mod.contact_check(self.hand, obj)
        ):
            self.hand = replace(self.hand, contact=True)
            tr.contact_t = t
            self._emit(
                out, t, "Contact",
                object_id=obj.id, s=self.hand.s, aperture_cm=self.hand.aperture_cm(),
            )

        if pre_step.contact and not tr.held and self.cmd.kind is CommandKind.OPEN:
            # let go before the hold criterion; the object falls where it was
            outcome = world_mod.grasp_evaluate(
                pre_step, obj, tr.squeeze_ms, self.matrix, tr.contact_t
            )
            assert outcome.kind is OutcomeKind.DROPPED
            self._emit(out, t, "Released", in_zone=self.space.in_zone(self._arm))
            self._end_trial(t, out, "dropped_early_release", False)
            return

        if self.hand.contact and not tr.held and tr.contact_t != t:
            if self.cmd.kind is CommandKind.CLOSE:
                tr.squeeze_ms += TICK_MS
            if tr.squeeze_ms >= world_mod.HOLD_REQUIREMENT_MS:
                outcome = world_mod.grasp_evaluate(
                    self.hand, obj, tr.squeeze_ms, self.matrix, tr.contact_t
                )
                if outcome.kind is OutcomeKind.HELD:
                    tr.held = True
                    tr.held_t = t
                    tr.held_optimal = outcome.optimal
                    self._emit(
                        out, t, "Held",
                        used_type=outcome.used_type.label, optimal=outcome.optimal,
                        squeeze_ms=tr.squeeze_ms,
                    )
                    if self.protocol.mode is Mode.HOLD_ONLY:
                        self._end_trial(t, out, "held", True)
                        return
                else:
                    # grasp type cannot keep this object; it slips out
                    self._emit(out, t, "Released", in_zone=self.space.in_zone(self._arm))
                    self._end_trial(t, out, "dropped_incompatible", False)
                    return

        if tr.held and self.hand.aperture_cm() > obj.grip_size_cm:
            # held object leaves the hand once the fingers open past it
            in_zone = self.space.in_zone(self._arm)
            result = world_mod.release_check(self.hand, obj, in_zone)
            self._emit(out, t, "Released", in_zone=in_zone)
            if result is ReleaseOutcome.PLACED:
                self._emit(out, t, "Placed")
                self._end_trial(t, out, "placed", True)
            else:
                self._end_trial(t, out, "dropped_outside", False)
            return

        if (
            not self.hand.contact
            and not tr.held
            and self.hand.phase is Phase.FULLY_CLOSED
            and self.space.near_object(self._arm)
        ):
            # fingers met empty air next to the object: a missed grasp
            self._end_trial(t, out, "closed_on_air", False)
            return

        if t - tr.t0 >= self.protocol.trial_timeout_ms:
            if tr.held:
                result = world_mod.release_check(self.hand, obj, False, timed_out=True)
                assert result is ReleaseOutcome.DROPPED_OUTSIDE
                self._end_trial(t, out, "dropped_outside", False, timed_out=True)
            else:
                self._end_trial(t, out, "timeout", False, timed_out=True)

    # -- the tick ----------------------------------------------------------

    def advance(
        self,
        t_ms: int,
        gaze: GazeSample | list[GazeSample] | None = None,
        emg: EmgFrame | list[EmgFrame] | None = None,
        arm_pos: float | None = None,
    ) -> list[wire.EventRecord]:
        """Run one 10 ms tick: apply inputs, step the hand, evaluate the world.

        Several samples may land on one tick (live sessions under network
        jitter); they are applied in arrival order at this tick's time.
        """
        out: list[wire.EventRecord] = []
        if self.done:
            return out
        if self._trial is None:
            self._start_trial(t_ms, out)
            if self.done:
                return out
        if arm_pos is not None:
            self._arm = max(-0.5, min(1.5, arm_pos))
        gaze_list = [] if gaze is None else (gaze if isinstance(gaze, list) else [gaze])
        emg_list = [] if emg is None else (emg if isinstance(emg, list) else [emg])
        for sample in gaze_list:
            self._process_gaze(t_ms, sample, out)
        for frame in emg_list:
            self._process_emg(t_ms, frame, out)
        pre_step = self.hand
        self.hand = hand_mod.step(self.hand, self.cmd, TICK_MS)
        if pre_step.s <= self.hand.s_pre < self.hand.s:
            self._emit(
                out, t_ms, "EmgCommand",
                command=self.cmd.kind.value, speed_deg_s=self.cmd.speed_deg_s,
                s=self.hand.s, crossed_preshape=True,
            )
        self._world_tick(t_ms, pre_step, out)
        return out


def run_session(
    protocol: ProtocolConfig,
    agent_cfg: AgentConfig,
    catalog: tuple[ObjectSpec, ...] | None = None,
    layout: PanelLayout | None = None,
    params: hand_mod.ParamsTable | None = None,
    matrix: CompatibilityMatrix | None = None,
    space: TrialSpace | None = None,
) -> tuple[dict, list[wire.EventRecord]]:
    """Run a whole scripted session headlessly on simulated time.

    Returns (log meta, event records); write them with wire.write_log.
    """
    core = SessionCore(
        protocol, catalog=catalog, layout=layout, params=params,
        matrix=matrix, space=space,
    )
    agent = ScriptedAgent(agent_cfg, layout=core.layout, space=core.space,
                          mode=protocol.mode)
    total = protocol.blocks * protocol.trials_per_block
    hard_cap_ms = total * (protocol.trial_timeout_ms + 1000) + 10_000
    t = 0
    while not core.done:
        obs = core.observe(t)
        out = agent.step(obs, t)
        core.advance(t, out.gaze, out.emg, out.arm_pos)
        t += TICK_MS
        if t > hard_cap_ms:
            raise RuntimeError("session exceeded its hard time cap; loop stuck")
    return core.meta(agent_cfg), core.events
