"""Virtual objects and grasp outcome rules.

The 21-object household catalog, contact detection against the hand
aperture, squeeze-hold grasp evaluation with a grasp-type compatibility
matrix, and placement classification. Space is one-dimensional along the
reach axis: home -> object -> target zone.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path

from .hand import GraspType, HandState, ParamsTable, aperture

# Minimum time a Close command must be maintained after contact before the
# grasp counts as held. Stands in for force stability.
HOLD_REQUIREMENT_MS = 100.0


@dataclass(frozen=True)
class ObjectSpec:
    """One target object.

    grip_size_cm is the characteristic graspable dimension: diameter for
    cylinders and spheres, the smallest edge for cuboids, the handle
    diameter for the hook handle.
    """

    id: int
    name: str
    optimal_type: GraspType
    grip_size_cm: float
    dims_cm: tuple[float, ...]
    shape: str = "cuboid"

    def __post_init__(self) -> None:
        if self.grip_size_cm <= 0.0:
            raise ValueError(f"object {self.id}: grip_size_cm must be positive")

    def to_json(self) -> dict:
        return {
            "id": self.id,
            "name": self.name,
            "optimal_type": self.optimal_type.label,
            "grip_size_cm": self.grip_size_cm,
            "dims_cm": list(self.dims_cm),
            "shape": self.shape,
        }

    @classmethod
    def from_json(cls, d: dict) -> "ObjectSpec":
        return cls(
            id=int(d["id"]),
            name=d["name"],
            optimal_type=GraspType.from_name(d["optimal_type"]),
            grip_size_cm=float(d["grip_size_cm"]),
            dims_cm=tuple(float(v) for v in d["dims_cm"]),
            shape=d.get("shape", "cuboid"),
        )


def _cyl(oid: int, name: str, h: float, d: float) -> ObjectSpec:
    return ObjectSpec(oid, name, GraspType.CYLINDRICAL, d, (h, d), "cylinder")


def _sph(oid: int, name: str, grasp: GraspType, d: float) -> ObjectSpec:
    return ObjectSpec(oid, name, grasp, d, (d,), "sphere")


def _box(oid: int, name: str, grasp: GraspType, a: float, b: float, c: float) -> ObjectSpec:
    return ObjectSpec(oid, name, grasp, min(a, b, c), (a, b, c), "cuboid")


def default_catalog() -> tuple[ObjectSpec, ...]:
    """The built-in 21-object household catalog (ids 1..21)."""
    g = GraspType
    return (
        _cyl(1, "powder bottle", 15.0, 6.3),
        _cyl(2, "plastic bottle 1", 18.0, 5.2),
        _cyl(3, "plastic bottle 2", 17.8, 5.8),
        _cyl(4, "sauce bottle", 13.5, 6.0),
        _sph(5, "toy ball 1", g.SPHERICAL, 6.3),
        _sph(6, "toy ball 2", g.SPHERICAL, 6.3),
        _sph(7, "toy ball 3", g.SPHERICAL, 6.3),
        _sph(8, "toy ball 4", g.SPHERICAL, 6.3),
        _box(9, "toy brick", g.TRIPOD, 5.9, 2.8, 1.4),
        _box(10, "plug", g.TRIPOD, 3.7, 3.2, 2.0),
        _box(11, "medicine pack box", g.TRIPOD, 5.5, 3.3, 3.3),
        _sph(12, "small yarn ball", g.TRIPOD, 4.4),
        _box(13, "small wooden cube", g.PINCH, 1.8, 1.8, 1.8),
        _box(14, "mini eraser", g.PINCH, 2.8, 1.7, 0.9),
        _box(15, "mini padlock", g.PINCH, 5.0, 3.0, 1.9),
        _sph(16, "bead", g.PINCH, 1.5),
        _box(17, "transdermal patch", g.LATERAL, 13.0, 11.0, 0.05),
        _box(18, "plastic card", g.LATERAL, 8.5, 5.3, 0.1),
        _box(19, "tea bag", g.LATERAL, 10.0, 4.7, 0.1),
        _box(20, "ruler", g.LATERAL, 16.0, 4.0, 0.2),
        ObjectSpec(21, "plastic handle", GraspType.HOOK, 3.0, (9.5, 12.5, 3.0), "handle"),
    )


EXPECTED_TYPE_COUNTS = {
    GraspType.CYLINDRICAL: 4,
    GraspType.SPHERICAL: 4,
    GraspType.TRIPOD: 4,
    GraspType.PINCH: 4,
    GraspType.LATERAL: 4,
    GraspType.HOOK: 1,
}


def validate_catalog(
    catalog: tuple[ObjectSpec, ...], params: ParamsTable | None = None
) -> None:
    """Enforce catalog composition and, given a params table, that every
    object fits inside its optimal grasp's open aperture."""
    if len(catalog) != 21:
        raise ValueError(f"catalog must hold 21 objects, got {len(catalog)}")
    if sorted(o.id for o in catalog) != list(range(1, 22)):
        raise ValueError("catalog ids must be exactly 1..21")
    counts: dict[GraspType, int] = {g: 0 for g in GraspType}
    for obj in catalog:
        counts[obj.optimal_type] += 1
    if counts != EXPECTED_TYPE_COUNTS:
        raise ValueError(f"catalog type distribution wrong: {counts}")
    if params is not None:
        for obj in catalog:
            open_ap = params[obj.optimal_type].open_aperture_cm
            if obj.grip_size_cm >= open_ap:
                raise ValueError(
                    f"object {obj.id} ({obj.name}): grip {obj.grip_size_cm} cm "
                    f"does not fit the {obj.optimal_type.label} aperture {open_ap} cm"
                )


def load_catalog(path: str | Path) -> tuple[ObjectSpec, ...]:
    doc = json.loads(Path(path).read_text())
    catalog = tuple(ObjectSpec.from_json(entry) for entry in doc)
    validate_catalog(catalog)
    return catalog


def save_catalog(path: str | Path, catalog: tuple[ObjectSpec, ...]) -> None:
    Path(path).write_text(
        json.dumps([o.to_json() for o in catalog], indent=2) + "\n"
    )


@dataclass(frozen=True)
class CompatibilityMatrix:
    """Which (used, optimal) grasp-type pairs can still hold the object.

    The diagonal always succeeds. By default the only off-diagonal success
    is Tripod<->Pinch: a three-finger tip grasp can pick up small pinch
    objects and vice versa, just not optimally.
    """

    extra_pairs: frozenset[tuple[GraspType, GraspType]] = field(
        default_factory=lambda: frozenset(
            {
                (GraspType.TRIPOD, GraspType.PINCH),
                (GraspType.PINCH, GraspType.TRIPOD),
            }
        )
    )

    def succeeds(self, used: GraspType, optimal: GraspType) -> bool:
        return used == optimal or (used, optimal) in self.extra_pairs


class OutcomeKind(Enum):
    NO_CONTACT = "no_contact"
    HELD = "held"
    DROPPED = "dropped"


@dataclass(frozen=True)
class GraspOutcome:
    kind: OutcomeKind
    used_type: GraspType | None = None
    optimal: bool = False
    contact_time_ms: float | None = None


class ReleaseOutcome(Enum):
    PLACED = "placed"
    DROPPED_OUTSIDE = "dropped_outside"


def contact_check(hand: HandState, obj: ObjectSpec) -> bool:
    """Contact once the closing aperture is down to the object's grip size.

    The caller must only ask while the hand is actually positioned at the
    object; position is tracked by the trial loop, not here.
    """
    return aperture(hand) <= obj.grip_size_cm


def grasp_evaluate(
    hand: HandState,
    obj: ObjectSpec,
    squeeze_ms: float,
    matrix: CompatibilityMatrix,
    contact_time_ms: float | None = None,
) -> GraspOutcome:
    """Classify a grasp attempt after the squeeze.

    Held requires contact, a Close maintained for HOLD_REQUIREMENT_MS, and
    a compatible grasp type; early release or an incompatible type drops
    the object.
    """
    if not hand.contact:
        return GraspOutcome(OutcomeKind.NO_CONTACT)
    if squeeze_ms < HOLD_REQUIREMENT_MS:
        return GraspOutcome(
            OutcomeKind.DROPPED, used_type=hand.active_type,
            contact_time_ms=contact_time_ms,
        )
    if not matrix.succeeds(hand.active_type, obj.optimal_type):
        return GraspOutcome(
            OutcomeKind.DROPPED, used_type=hand.active_type,
            contact_time_ms=contact_time_ms,
        )
    return GraspOutcome(
        OutcomeKind.HELD,
        used_type=hand.active_type,
        optimal=hand.active_type == obj.optimal_type,
        contact_time_ms=contact_time_ms,
    )


def release_check(
    hand: HandState, obj: ObjectSpec, in_zone: bool, timed_out: bool = False
) -> ReleaseOutcome:
    """Placed iff the hand opened past the grip size inside the target zone;
    a trial that times out still holding counts as dropped outside."""
    if timed_out:
        return ReleaseOutcome.DROPPED_OUTSIDE
    if in_zone and aperture(hand) > obj.grip_size_cm:
        return ReleaseOutcome.PLACED
    return ReleaseOutcome.DROPPED_OUTSIDE


@dataclass(frozen=True)
class TrialSpace:
    """1-D reach axis: the hand carrier starts at home, the object sits at
    object_pos, and the target zone is an interval further out."""

    home_pos: float = 0.0
    object_pos: float = 0.5
    zone: tuple[float, float] = (0.8, 1.0)
    reach_window: float = 0.05
    air_close_window: float = 0.3

    @property
    def zone_center(self) -> float:
        return (self.zone[0] + self.zone[1]) / 2.0

    def in_zone(self, pos: float) -> bool:
        return self.zone[0] <= pos <= self.zone[1]

    def within_reach(self, pos: float) -> bool:
        return abs(pos - self.object_pos) <= self.reach_window

    def near_object(self, pos: float) -> bool:
        return abs(pos - self.object_pos) <= self.air_close_window
