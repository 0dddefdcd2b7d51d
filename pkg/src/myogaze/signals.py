"""Two-site EMG front end.

Models the preprocessed output of a flexor/extensor electrode pair as
rectified first-order envelopes, then turns the envelopes into a single
proportional open/close motion command: each channel is thresholded, the
excess is normalized to [0, 1], and the stronger channel drives the hand
at a speed scaled up to ``omega_max_deg_s``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from enum import Enum
from pathlib import Path

DEFAULT_TAU_MS = 50.0
DEFAULT_THRESHOLD = 0.1
DEFAULT_OMEGA_MAX_DEG_S = 90.0


def _clamp01(x: float) -> float:
    return 0.0 if x < 0.0 else (1.0 if x > 1.0 else x)


class CommandKind(Enum):
    CLOSE = "close"
    OPEN = "open"
    HOLD = "hold"


@dataclass(frozen=True)
class EmgFrame:
    """One raw two-channel sample; values are dimensionless in [-1, 1]."""

    t_ms: float
    flexor_raw: float
    extensor_raw: float

    def __post_init__(self) -> None:
        for name in ("flexor_raw", "extensor_raw"):
            v = getattr(self, name)
            if not math.isfinite(v):
                raise ValueError(f"{name} must be finite, got {v!r}")
            if not -1.0 <= v <= 1.0:
                raise ValueError(f"{name} out of [-1, 1]: {v!r}")
        if not math.isfinite(self.t_ms):
            raise ValueError("t_ms must be finite")


@dataclass(frozen=True)
class MyoConfig:
    """Per-user signal chain settings (thresholds are calibrated per wearer)."""

    threshold_flexor: float = DEFAULT_THRESHOLD
    threshold_extensor: float = DEFAULT_THRESHOLD
    omega_max_deg_s: float = DEFAULT_OMEGA_MAX_DEG_S
    gain_flexor: float = 1.0
    gain_extensor: float = 1.0
    tau_ms: float = DEFAULT_TAU_MS

    def __post_init__(self) -> None:
        for name in ("threshold_flexor", "threshold_extensor"):
            t = getattr(self, name)
            if not 0.0 < t < 1.0:
                raise ValueError(f"{name} must lie in (0, 1), got {t!r}")
        if self.omega_max_deg_s <= 0.0:
            raise ValueError("omega_max_deg_s must be positive")
        if self.gain_flexor <= 0.0 or self.gain_extensor <= 0.0:
            raise ValueError("channel gains must be positive")
        if self.tau_ms <= 0.0:
            raise ValueError("tau_ms must be positive")

    def to_json(self) -> dict:
        return {
            "threshold_flexor": self.threshold_flexor,
            "threshold_extensor": self.threshold_extensor,
            "omega_max_deg_s": self.omega_max_deg_s,
            "gain_flexor": self.gain_flexor,
            "gain_extensor": self.gain_extensor,
            "tau_ms": self.tau_ms,
        }

    @classmethod
    def from_json(cls, d: dict) -> "MyoConfig":
        return cls(**d)


@dataclass(frozen=True)
class EnvelopeState:
    """Rectified low-pass envelopes for both channels, each kept in [0, 1]."""

    flexor: float = 0.0
    extensor: float = 0.0
    gain_flexor: float = 1.0
    gain_extensor: float = 1.0
    tau_ms: float = DEFAULT_TAU_MS
    t_ms: float | None = None  # last update time; None before the first frame

    @classmethod
    def from_config(cls, cfg: MyoConfig) -> "EnvelopeState":
        return cls(
            gain_flexor=cfg.gain_flexor,
            gain_extensor=cfg.gain_extensor,
            tau_ms=cfg.tau_ms,
        )


@dataclass(frozen=True)
class MotionCommand:
    """Proportional hand command: Close/Open at speed_deg_s, or Hold."""

    kind: CommandKind
    speed_deg_s: float = 0.0

    def __post_init__(self) -> None:
        if self.kind is CommandKind.HOLD:
            if self.speed_deg_s != 0.0:
                raise ValueError("Hold carries no speed")
        elif self.speed_deg_s <= 0.0:
            raise ValueError("Close/Open speed must be positive")

    @classmethod
    def close(cls, speed_deg_s: float) -> "MotionCommand":
        return cls(CommandKind.CLOSE, speed_deg_s)

    @classmethod
    def open(cls, speed_deg_s: float) -> "MotionCommand":
        return cls(CommandKind.OPEN, speed_deg_s)

    @classmethod
    def hold(cls) -> "MotionCommand":
        return cls(CommandKind.HOLD, 0.0)


HOLD = MotionCommand.hold()


def envelope_update(state: EnvelopeState, frame: EmgFrame) -> EnvelopeState:
    """Advance both channel envelopes to the frame's timestamp.

    First-order step toward the rectified, gain-scaled, clamped input:
    e' = e + (1 - exp(-dt/tau)) * (clamp(|raw| * gain, 0, 1) - e).
    A zero-dt frame leaves the envelopes unchanged.
    """
    if state.t_ms is not None and frame.t_ms < state.t_ms:
        raise ValueError(
            f"rejected input: frame at t={frame.t_ms} precedes envelope time {state.t_ms}"
        )
    dt = 0.0 if state.t_ms is None else frame.t_ms - state.t_ms
    alpha = 1.0 - math.exp(-dt / state.tau_ms)
    target_f = _clamp01(abs(frame.flexor_raw) * state.gain_flexor)
    target_e = _clamp01(abs(frame.extensor_raw) * state.gain_extensor)
    return replace(
        state,
        flexor=_clamp01(state.flexor + alpha * (target_f - state.flexor)),
        extensor=_clamp01(state.extensor + alpha * (target_e - state.extensor)),
        t_ms=frame.t_ms,
    )


def resolve_command(env: EnvelopeState, cfg: MyoConfig) -> MotionCommand:
    """Threshold both envelopes and pick the winning channel.

    Activation per channel is max(0, (e - threshold) / (1 - threshold)), so
    speed starts at zero right at the threshold and saturates at
    omega_max_deg_s. Flexor wins -> Close, extensor wins -> Open; an exact
    tie between two active channels holds still.
    """
    a_f = max(0.0, (env.flexor - cfg.threshold_flexor) / (1.0 - cfg.threshold_flexor))
    a_e = max(0.0, (env.extensor - cfg.threshold_extensor) / (1.0 - cfg.threshold_extensor))
    if a_f == 0.0 and a_e == 0.0:
        return HOLD
    if a_f == a_e:
        return HOLD
    if a_f > a_e:
        return MotionCommand.close(cfg.omega_max_deg_s * a_f)
    return MotionCommand.open(cfg.omega_max_deg_s * a_e)


def read_emg_stream(path: str | Path) -> list[EmgFrame]:
    """Read a raw stream file: one `t_ms flexor extensor` record per line."""
    frames: list[EmgFrame] = []
    last_t: float | None = None
    for line_no, line in enumerate(Path(path).read_text().splitlines(), start=1):
        if not line.strip():
            continue
        parts = line.split()
        if len(parts) != 3:
            raise ValueError(f"{path}:{line_no}: expected 't_ms flexor extensor'")
        try:
            t, f, e = (float(p) for p in parts)
        except ValueError as exc:
            raise ValueError(f"{path}:{line_no}: non-numeric field") from exc
        if last_t is not None and t <= last_t:
            raise ValueError(f"{path}:{line_no}: timestamps must strictly increase")
        last_t = t
        frames.append(EmgFrame(t_ms=t, flexor_raw=f, extensor_raw=e))
    return frames


def write_emg_stream(path: str | Path, frames: list[EmgFrame]) -> None:
    lines = [f"{fr.t_ms:g} {fr.flexor_raw:g} {fr.extensor_raw:g}" for fr in frames]
    Path(path).write_text("\n".join(lines) + ("\n" if lines else ""))
