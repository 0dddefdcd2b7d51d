"""Six-motor hand model.

The hand moves along a per-grasp-type synergy path parameterized by
s in [0, 1]: s=0 is full open, s=s_pre (default 0.5) is the pre-shape
posture, s=1 is fully closed. Motor angles are piecewise-linear in s.
The grasp type may only be switched while the hand is at or before the
pre-shape point; later requests are dropped.

Motor order: [thumb rotation, thumb flex, index, middle, ring, little].
"""

from __future__ import annotations

import json
from dataclasses import dataclass, replace
from enum import Enum
from pathlib import Path
from typing import Mapping

from .signals import CommandKind, MotionCommand

PHASE_EPS = 1e-6
DEFAULT_S_PRE = 0.5
MAX_MOTOR_DEG = 90.0


class GraspType(Enum):
    """The six grasp types, in wire-index order."""

    CYLINDRICAL = 0
    SPHERICAL = 1
    TRIPOD = 2
    PINCH = 3
    LATERAL = 4
    HOOK = 5

    @property
    def wire_index(self) -> int:
        return self.value

    @classmethod
    def from_wire(cls, index: int) -> "GraspType":
        if not 0 <= index <= 5:
            raise ValueError(f"grasp wire index out of range 0..5: {index}")
        return cls(index)

    @classmethod
    def from_name(cls, name: str) -> "GraspType":
        try:
            return cls[name.upper()]
        except KeyError:
            raise ValueError(f"unknown grasp type {name!r}") from None

    @property
    def label(self) -> str:
        return self.name.lower()


class Phase(Enum):
    FULL_OPEN = 0
    PRESHAPE_ZONE = 1
    BEYOND_PRESHAPE = 2
    FULLY_CLOSED = 3

    @property
    def label(self) -> str:
        return self.name.lower()


@dataclass(frozen=True)
class GraspParams:
    """Motion parameters for one grasp type.

    preshape_deg and closed_deg are per-motor waypoints on the close path;
    open_aperture_cm is the thumb-finger gap at full open.
    """

    preshape_deg: tuple[float, ...]
    closed_deg: tuple[float, ...]
    open_aperture_cm: float

    def __post_init__(self) -> None:
        if len(self.preshape_deg) != 6 or len(self.closed_deg) != 6:
            raise ValueError("motor vectors must have six entries")
        for pre, closed in zip(self.preshape_deg, self.closed_deg):
            if not (0.0 <= pre <= closed <= MAX_MOTOR_DEG):
                raise ValueError(
                    f"need 0 <= preshape <= closed <= {MAX_MOTOR_DEG}, "
                    f"got preshape={pre}, closed={closed}"
                )
        if self.open_aperture_cm <= 0.0:
            raise ValueError("open_aperture_cm must be positive")

    @property
    def theta_max_deg(self) -> float:
        """Full-close excursion of the fastest motor; normalizes path speed."""
        return max(self.closed_deg)


# Default mapping table. The real postures on a physical hand are tuned by
# trial; these defaults are chosen so that on both path segments no motor
# moves faster than the commanded speed (see validate_params_table).
DEFAULT_GRASP_PARAMS: dict[GraspType, GraspParams] = {
    GraspType.CYLINDRICAL: GraspParams(
        preshape_deg=(40.0, 20.0, 45.0, 45.0, 45.0, 45.0),
        closed_deg=(40.0, 65.0, 90.0, 90.0, 90.0, 90.0),
        open_aperture_cm=9.0,
    ),
    GraspType.SPHERICAL: GraspParams(
        preshape_deg=(45.0, 25.0, 45.0, 45.0, 45.0, 45.0),
        closed_deg=(45.0, 70.0, 90.0, 90.0, 90.0, 90.0),
        open_aperture_cm=9.0,
    ),
    GraspType.TRIPOD: GraspParams(
        preshape_deg=(30.0, 25.0, 45.0, 45.0, 5.0, 5.0),
        closed_deg=(30.0, 70.0, 90.0, 90.0, 5.0, 5.0),
        open_aperture_cm=7.0,
    ),
    GraspType.PINCH: GraspParams(
        # Thumb and index only; the other fingers stay out of the way.
        preshape_deg=(20.0, 30.0, 45.0, 0.0, 0.0, 0.0),
        closed_deg=(20.0, 75.0, 90.0, 0.0, 0.0, 0.0),
        open_aperture_cm=5.0,
    ),
    GraspType.LATERAL: GraspParams(
        preshape_deg=(0.0, 10.0, 45.0, 45.0, 45.0, 45.0),
        closed_deg=(0.0, 55.0, 90.0, 90.0, 90.0, 90.0),
        open_aperture_cm=3.0,
    ),
    GraspType.HOOK: GraspParams(
        preshape_deg=(0.0, 0.0, 45.0, 45.0, 45.0, 45.0),
        closed_deg=(0.0, 0.0, 90.0, 90.0, 90.0, 90.0),
        open_aperture_cm=6.0,
    ),
}

ParamsTable = Mapping[GraspType, GraspParams]


def validate_params_table(table: ParamsTable, s_pre: float = DEFAULT_S_PRE) -> None:
    """Check a mapping table covers all six types and respects the speed bound.

    The per-motor rate is the commanded speed times segment_slope/theta_max,
    so each motor's path slope must not exceed the fastest motor's full
    excursion or the advertised speed cap would be broken.
    """
    missing = [g.label for g in GraspType if g not in table]
    if missing:
        raise ValueError(f"params table missing grasp types: {missing}")
    if not 0.0 < s_pre < 1.0:
        raise ValueError("s_pre must lie in (0, 1)")
    for grasp, params in table.items():
        theta_max = params.theta_max_deg
        if theta_max <= 0.0:
            raise ValueError(f"{grasp.label}: at least one motor must move")
        for i, (pre, closed) in enumerate(zip(params.preshape_deg, params.closed_deg)):
            slope = max(pre / s_pre, (closed - pre) / (1.0 - s_pre))
            if slope > theta_max + 1e-9:
                raise ValueError(
                    f"{grasp.label}: motor {i} path slope {slope:.2f} deg "
                    f"exceeds theta_max {theta_max:.2f}; would outrun the "
                    "commanded speed"
                )


validate_params_table(DEFAULT_GRASP_PARAMS)


@dataclass(frozen=True)
class HandState:
    """Immutable snapshot of the hand on its current grasp path."""

    params: ParamsTable
    active_type: GraspType = GraspType.CYLINDRICAL
    s: float = 0.0
    contact: bool = False
    s_pre: float = DEFAULT_S_PRE

    @property
    def grasp_params(self) -> GraspParams:
        return self.params[self.active_type]

    def theta_deg(self) -> tuple[float, ...]:
        """Motor angles derived from s: 0 -> preshape -> closed, per motor."""
        p = self.grasp_params
        if self.s <= self.s_pre:
            f = self.s / self.s_pre
            return tuple(pre * f for pre in p.preshape_deg)
        f = (self.s - self.s_pre) / (1.0 - self.s_pre)
        return tuple(
            pre + (closed - pre) * f
            for pre, closed in zip(p.preshape_deg, p.closed_deg)
        )

    def aperture_cm(self) -> float:
        return aperture(self)

    @property
    def phase(self) -> Phase:
        return phase_of(self)


def make_hand(
    params: ParamsTable | None = None,
    active_type: GraspType = GraspType.CYLINDRICAL,
    s_pre: float = DEFAULT_S_PRE,
) -> HandState:
    table = dict(params) if params is not None else DEFAULT_GRASP_PARAMS
    validate_params_table(table, s_pre)
    return HandState(params=table, active_type=active_type, s_pre=s_pre)


def phase_of(state: HandState) -> Phase:
    if state.s >= 1.0 - PHASE_EPS:
        return Phase.FULLY_CLOSED
    if state.s <= PHASE_EPS:
        return Phase.FULL_OPEN
    if state.s <= state.s_pre:
        return Phase.PRESHAPE_ZONE
    return Phase.BEYOND_PRESHAPE


def request_grasp_type(state: HandState, index: int) -> tuple[HandState, bool]:
    """Try to switch the active grasp type by wire index.

    Allowed only between full open and pre-shape; later requests are
    dropped (never queued) and reported as not accepted. An out-of-range
    index is an error, distinct from a gate rejection.
    """
    grasp = GraspType.from_wire(index)
    if phase_of(state) in (Phase.BEYOND_PRESHAPE, Phase.FULLY_CLOSED):
        return state, False
    return replace(state, active_type=grasp), True


def step(state: HandState, cmd: MotionCommand, dt_ms: float) -> HandState:
    """Advance the hand by dt_ms under a motion command.

    The path rate is speed/theta_max so the fastest motor moves at the
    commanded speed. While in contact, Close no longer advances s (the
    squeeze is isometric); Open breaks contact and retracts.
    """
    if dt_ms <= 0.0:
        raise ValueError("dt_ms must be positive")
    if cmd.kind is CommandKind.HOLD:
        return state
    ds = (cmd.speed_deg_s / state.grasp_params.theta_max_deg) * (dt_ms / 1000.0)
    if cmd.kind is CommandKind.CLOSE:
        if state.contact:
            return state
        return replace(state, s=min(1.0, state.s + ds))
    return replace(state, s=max(0.0, state.s - ds), contact=False)


def aperture(state: HandState) -> float:
    """Thumb-finger gap in cm; closes linearly from open_aperture to 0."""
    return state.grasp_params.open_aperture_cm * (1.0 - state.s)


def params_table_to_json(table: ParamsTable) -> dict:
    return {
        grasp.label: {
            "preshape_deg": list(p.preshape_deg),
            "closed_deg": list(p.closed_deg),
            "open_aperture_cm": p.open_aperture_cm,
        }
        for grasp, p in table.items()
    }


def params_table_from_json(doc: dict) -> dict[GraspType, GraspParams]:
    table: dict[GraspType, GraspParams] = {}
    for name, entry in doc.items():
        table[GraspType.from_name(name)] = GraspParams(
            preshape_deg=tuple(float(v) for v in entry["preshape_deg"]),
            closed_deg=tuple(float(v) for v in entry["closed_deg"]),
            open_aperture_cm=float(entry["open_aperture_cm"]),
        )
    return table


def load_params_table(path: str | Path, s_pre: float = DEFAULT_S_PRE) -> dict[GraspType, GraspParams]:
    table = params_table_from_json(json.loads(Path(path).read_text()))
    validate_params_table(table, s_pre)
    return table


def save_params_table(path: str | Path, table: ParamsTable) -> None:
    Path(path).write_text(json.dumps(params_table_to_json(table), indent=2) + "\n")
