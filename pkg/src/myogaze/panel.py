"""Gaze-button panel: layout geometry, hit testing, and dwell triggering.

Nine buttons in a band at the top of the normalized view: six select a
grasp type, three are reserved. A button fires once the gaze has stayed
on it continuously for the dwell threshold (default 200 ms, never below
the 120 ms fixation floor), then stays quiet until the gaze leaves it.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, replace
from enum import Enum
from pathlib import Path

from .hand import GraspType

DWELL_FLOOR_MS = 120.0
DEFAULT_DWELL_MS = 200.0


class ButtonRole(Enum):
    GRASP = "grasp"
    RESERVED = "reserved"


@dataclass(frozen=True)
class GazeButton:
    id: str
    cx: float
    cy: float
    w: float
    h: float
    role: ButtonRole
    grasp: GraspType | None = None

    def __post_init__(self) -> None:
        if self.w <= 0.0 or self.h <= 0.0:
            raise ValueError(f"button {self.id!r}: non-positive size")
        if (self.role is ButtonRole.GRASP) != (self.grasp is not None):
            raise ValueError(f"button {self.id!r}: grasp set iff role is grasp")

    def contains(self, x: float, y: float) -> bool:
        # Half-open on both axes so shared edges belong to exactly one button.
        return (
            self.cx - self.w / 2.0 <= x < self.cx + self.w / 2.0
            and self.cy - self.h / 2.0 <= y < self.cy + self.h / 2.0
        )


def _intervals_disjoint(lo_a: float, hi_a: float, lo_b: float, hi_b: float) -> bool:
    # Half-open intervals: touching edges do not overlap.
    return hi_a <= lo_b or hi_b <= lo_a


@dataclass(frozen=True)
class PanelLayout:
    buttons: tuple[GazeButton, ...]

    def __post_init__(self) -> None:
        if len(self.buttons) != 9:
            raise ValueError(f"panel needs exactly 9 buttons, got {len(self.buttons)}")
        ids = [b.id for b in self.buttons]
        if len(set(ids)) != len(ids):
            raise ValueError("button ids must be unique")
        grasps = [b.grasp for b in self.buttons if b.role is ButtonRole.GRASP]
        if sorted(g.value for g in grasps) != list(range(6)):
            raise ValueError("panel needs each of the six grasp types exactly once")
        if sum(1 for b in self.buttons if b.role is ButtonRole.RESERVED) != 3:
            raise ValueError("panel needs exactly 3 reserved buttons")
        for i, a in enumerate(self.buttons):
            for b in self.buttons[i + 1:]:
                if not (
                    _intervals_disjoint(
                        a.cx - a.w / 2, a.cx + a.w / 2, b.cx - b.w / 2, b.cx + b.w / 2
                    )
                    or _intervals_disjoint(
                        a.cy - a.h / 2, a.cy + a.h / 2, b.cy - b.h / 2, b.cy + b.h / 2
                    )
                ):
                    raise ValueError(f"buttons {a.id!r} and {b.id!r} overlap")

    def button(self, button_id: str) -> GazeButton:
        for b in self.buttons:
            if b.id == button_id:
                return b
        raise KeyError(button_id)

    def grasp_of(self, button_id: str) -> GraspType | None:
        return self.button(button_id).grasp

    def to_json(self) -> dict:
        return {
            "buttons": [
                {
                    "id": b.id,
                    "role": b.role.value,
                    "grasp": b.grasp.label if b.grasp else None,
                    "cx": b.cx,
                    "cy": b.cy,
                    "w": b.w,
                    "h": b.h,
                }
                for b in self.buttons
            ]
        }

    @classmethod
    def from_json(cls, doc: dict) -> "PanelLayout":
        buttons = []
        for entry in doc["buttons"]:
            role = ButtonRole(entry["role"])
            grasp = GraspType.from_name(entry["grasp"]) if entry.get("grasp") else None
            buttons.append(
                GazeButton(
                    id=entry["id"],
                    cx=float(entry["cx"]),
                    cy=float(entry["cy"]),
                    w=float(entry["w"]),
                    h=float(entry["h"]),
                    role=role,
                    grasp=grasp,
                )
            )
        return cls(buttons=tuple(buttons))


def default_layout(band_top: float = 0.02, band_height: float = 0.36) -> PanelLayout:
    """3x3 grid in the upper view band: grasp buttons in reading order on the
    first two rows, reserved buttons along the bottom row.

    The band is configurable so the panel can be made to overlap the scene
    region, reproducing accidental triggers from a narrow field of view.
    """
    row_h = band_height / 3.0
    cols = (0.25, 0.50, 0.75)
    grasp_order = list(GraspType)
    buttons: list[GazeButton] = []
    for row in range(3):
        cy = band_top + (row + 0.5) * row_h
        for col in range(3):
            k = row * 3 + col
            if k < 6:
                g = grasp_order[k]
                buttons.append(
                    GazeButton(
                        id=g.label, cx=cols[col], cy=cy, w=0.18, h=0.10,
                        role=ButtonRole.GRASP, grasp=g,
                    )
                )
            else:
                buttons.append(
                    GazeButton(
                        id=f"reserved-{k - 5}", cx=cols[col], cy=cy, w=0.18, h=0.10,
                        role=ButtonRole.RESERVED,
                    )
                )
    return PanelLayout(buttons=tuple(buttons))


def load_layout(path: str | Path) -> PanelLayout:
    return PanelLayout.from_json(json.loads(Path(path).read_text()))


def save_layout(path: str | Path, layout: PanelLayout) -> None:
    Path(path).write_text(json.dumps(layout.to_json(), indent=2) + "\n")


@dataclass(frozen=True)
class GazeSample:
    """One gaze point; valid=False marks tracking loss. Coordinates may fall
    outside [0, 1]^2 when the gaze leaves the view."""

    t_ms: float
    x: float
    y: float
    valid: bool = True

    def __post_init__(self) -> None:
        if not (math.isfinite(self.t_ms) and math.isfinite(self.x) and math.isfinite(self.y)):
            raise ValueError("gaze sample fields must be finite")


@dataclass(frozen=True)
class TriggerEvent:
    t_ms: float
    button_id: str
    grasp: GraspType | None = None


@dataclass(frozen=True)
class DwellState:
    """Dwell accumulator over one ordered gaze stream.

    armed=False after a trigger until the gaze leaves the button, so a long
    stare fires exactly once.
    """

    threshold_ms: float = DEFAULT_DWELL_MS
    button_id: str | None = None
    accum_ms: float = 0.0
    armed: bool = True
    t_ms: float | None = None

    def __post_init__(self) -> None:
        if self.threshold_ms < DWELL_FLOOR_MS:
            raise ValueError(
                f"dwell threshold {self.threshold_ms} ms below the "
                f"{DWELL_FLOOR_MS:.0f} ms fixation floor"
            )

    @property
    def progress_ms(self) -> float:
        """Accumulated on-button time, clipped to the threshold for display."""
        return min(self.accum_ms, self.threshold_ms) if self.armed else self.threshold_ms


def hit_test(layout: PanelLayout, sample: GazeSample) -> str | None:
    """Id of the button containing the sample, or None (including invalid
    samples and points outside every button)."""
    if not sample.valid:
        return None
    for b in layout.buttons:
        if b.contains(sample.x, sample.y):
            return b.id
    return None


def dwell_update(
    state: DwellState, hit: str | None, t_ms: float
) -> tuple[DwellState, TriggerEvent | None]:
    """Advance the dwell machine with the hit result of one gaze sample.

    Time on the same button accumulates; any change of hit (including to
    None) resets the accumulator and re-arms. The trigger fires on the
    first update where the accumulated time reaches the threshold.
    """
    if state.t_ms is not None and t_ms < state.t_ms:
        raise ValueError(
            f"rejected input: gaze sample at t={t_ms} precedes dwell time {state.t_ms}"
        )
    dt = 0.0 if state.t_ms is None else t_ms - state.t_ms
    if hit != state.button_id:
        return replace(state, button_id=hit, accum_ms=0.0, armed=True, t_ms=t_ms), None
    if hit is None or not state.armed:
        return replace(state, t_ms=t_ms), None
    accum = state.accum_ms + dt
    if accum >= state.threshold_ms:
        return (
            replace(state, accum_ms=accum, armed=False, t_ms=t_ms),
            TriggerEvent(t_ms=t_ms, button_id=hit),
        )
    return replace(state, accum_ms=accum, t_ms=t_ms), None


def read_gaze_stream(path: str | Path) -> list[GazeSample]:
    """Read a gaze stream file: one `t_ms x y valid` record per line."""
    samples: list[GazeSample] = []
    last_t: float | None = None
    for line_no, line in enumerate(Path(path).read_text().splitlines(), start=1):
        if not line.strip():
            continue
        parts = line.split()
        if len(parts) != 4:
            raise ValueError(f"{path}:{line_no}: expected 't_ms x y valid'")
        try:
            t, x, y = float(parts[0]), float(parts[1]), float(parts[2])
            valid = bool(int(parts[3]))
        except ValueError as exc:
            raise ValueError(f"{path}:{line_no}: non-numeric field") from exc
        if last_t is not None and t <= last_t:
            raise ValueError(f"{path}:{line_no}: timestamps must strictly increase")
        last_t = t
        samples.append(GazeSample(t_ms=t, x=x, y=y, valid=valid))
    return samples


def write_gaze_stream(path: str | Path, samples: list[GazeSample]) -> None:
    lines = [f"{s.t_ms:g} {s.x:g} {s.y:g} {int(s.valid)}" for s in samples]
    Path(path).write_text("\n".join(lines) + ("\n" if lines else ""))
