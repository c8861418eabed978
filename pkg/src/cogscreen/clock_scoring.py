"""Geometric scoring of a touch-entered clock set to 10 past 11.

Coordinates are canonical: circle center at the origin, circle radius 1,
y growing upward, angles in degrees counter-clockwise from the positive
x axis.  The clock position of hour ``h`` is at ``(90 - 30*h) mod 360``,
so 12 sits at 90 (top), 3 at 0, 6 at 270 and 9 at 180.

Scoring targets:
  * 12, 3, 6, 9 each have a 30-degree sector (1 point inside it);
  * the remaining numbers score inside the full 90-degree quadrant
    between their adjacent cardinal positions;
  * numbers are accepted slightly outside the circle (radius <= 1.25);
  * duplicated numbers and numbers greater than 12 cost 1 point each,
    other misplaced numbers are ignored;
  * a hand is correct when its outer endpoint falls in the 30-degree
    sector at position 11 or 2, one hand per sector;
  * one bonus point when exactly two hands exist and both inner
    endpoints lie within the small inner circle (radius <= 0.15).

If the subject rotated the device, the whole target template is rotated
to line up with the placed 12 (falling back to 3, 6, 9) and the better
of the upright and rotated totals is kept.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

RADIAL_MAX_DEFAULT = 1.25
INNER_CIRCLE_RADIUS_DEFAULT = 0.15
SECTOR_HALF_WIDTH = 15.0
QUADRANT_HALF_WIDTH = 45.0
HAND_POINTS_EACH_DEFAULT = 1

CARDINAL_VALUES = (12, 3, 6, 9)
HAND_TARGET_VALUES = (11, 2)  # hour hand at 11, minute hand at 2 for "10 past 11"

VERDICT_CORRECT = "correct"
VERDICT_DUPLICATE = "duplicate_penalty"
VERDICT_OVER_TWELVE = "over_twelve_penalty"
VERDICT_IGNORED = "ignored"


class ClockGeometryError(Exception):
    """Degenerate canvas geometry (non-positive radius)."""


@dataclass(frozen=True)
class Point:
    x: float
    y: float

    def radius(self) -> float:
        return math.hypot(self.x, self.y)

    def angle_deg(self) -> float:
        """Angle in [0, 360); 0 for the origin by convention."""
        if self.x == 0.0 and self.y == 0.0:
            return 0.0
        return math.degrees(math.atan2(self.y, self.x)) % 360.0

    def rotated(self, angle_deg: float) -> "Point":
        rad = math.radians(angle_deg)
        c, s = math.cos(rad), math.sin(rad)
        return Point(self.x * c - self.y * s, self.x * s + self.y * c)


@dataclass(frozen=True)
class NumberPlacement:
    value: int
    position: Point
    id: str = ""


@dataclass(frozen=True)
class HandStroke:
    start: Point
    end: Point
    id: str = ""

    def outer_inner(self) -> tuple[Point, Point]:
        """Endpoints ordered by distance from the center; ties keep end as outer."""
        if self.start.radius() > self.end.radius():
            return self.start, self.end
        return self.end, self.start


@dataclass(frozen=True)
class ClockInput:
    numbers: tuple[NumberPlacement, ...] = ()
    hands: tuple[HandStroke, ...] = ()

    def rotated(self, angle_deg: float) -> "ClockInput":
        return ClockInput(
            numbers=tuple(
                NumberPlacement(n.value, n.position.rotated(angle_deg), n.id) for n in self.numbers
            ),
            hands=tuple(
                HandStroke(h.start.rotated(angle_deg), h.end.rotated(angle_deg), h.id)
                for h in self.hands
            ),
        )

    def to_json_dict(self) -> dict:
        return {
            "numbers": [{"value": n.value, "x": n.position.x, "y": n.position.y} for n in self.numbers],
            "hands": [
                {"x1": h.start.x, "y1": h.start.y, "x2": h.end.x, "y2": h.end.y} for h in self.hands
            ],
        }

    @classmethod
    def from_json_dict(cls, doc: dict) -> "ClockInput":
        numbers = tuple(
            NumberPlacement(int(n["value"]), Point(float(n["x"]), float(n["y"])), str(n.get("id", "")))
            for n in doc.get("numbers", [])
        )
        hands = tuple(
            HandStroke(
                Point(float(h["x1"]), float(h["y1"])),
                Point(float(h["x2"]), float(h["y2"])),
                str(h.get("id", "")),
            )
            for h in doc.get("hands", [])
        )
        return cls(numbers=numbers, hands=hands)


def hour_angle(value: int) -> float:
    """Nominal clock-face angle of an hour position."""
    return (90.0 - 30.0 * value) % 360.0


def angular_offset(angle: float, center: float) -> float:
    """Signed smallest rotation from center to angle, in (-180, 180]."""
    delta = (angle - center) % 360.0
    if delta > 180.0:
        delta -= 360.0
    return delta


# Quadrant group centers: the 90-degree arc between the two adjacent cardinal
# positions, e.g. numbers 1 and 2 live between 3 o'clock (0) and 12 o'clock (90).
_QUADRANT_CENTER = {
    1: 45.0, 2: 45.0,
    4: 315.0, 5: 315.0,
    7: 225.0, 8: 225.0,
    10: 135.0, 11: 135.0,
}


@dataclass(frozen=True)
class ClockTemplate:
    """Rotatable target areas for numbers and hands."""

    rotation: float = 0.0
    radial_min: float = 0.0
    radial_max: float = RADIAL_MAX_DEFAULT
    inner_circle_radius: float = INNER_CIRCLE_RADIUS_DEFAULT
    sector_half_width: float = SECTOR_HALF_WIDTH

    def number_center(self, value: int) -> float:
        """Center angle of the target area for a 1..12 value, rotated."""
        if value in _QUADRANT_CENTER:
            return (_QUADRANT_CENTER[value] + self.rotation) % 360.0
        return (hour_angle(value) + self.rotation) % 360.0

    def number_half_width(self, value: int) -> float:
        return self.sector_half_width if value in CARDINAL_VALUES else QUADRANT_HALF_WIDTH

    def radius_acceptable(self, r: float) -> bool:
        return self.radial_min <= r <= self.radial_max

    def angle_in_number_area(self, value: int, angle: float) -> bool:
        # Closed at both boundaries so the sector/quadrant edges count as inside.
        return abs(angular_offset(angle, self.number_center(value))) <= self.number_half_width(value)

    def hand_sector_center(self, value: int) -> float:
        return (hour_angle(value) + self.rotation) % 360.0

    def angle_in_hand_sector(self, value: int, angle: float) -> bool:
        return abs(angular_offset(angle, self.hand_sector_center(value))) <= self.sector_half_width


def build_template(rotation: float = 0.0, *, radial_max: float = RADIAL_MAX_DEFAULT,
                   inner_circle_radius: float = INNER_CIRCLE_RADIUS_DEFAULT) -> ClockTemplate:
    return ClockTemplate(
        rotation=rotation % 360.0,
        radial_max=radial_max,
        inner_circle_radius=inner_circle_radius,
    )


@dataclass(frozen=True)
class ElementVerdict:
    element: str  # "number[i]" / "hand[i]" with the element id when present
    value: int | None
    verdict: str
    points: int


@dataclass(frozen=True)
class ClockScore:
    number_points: int
    hand_points: int
    inner_circle_bonus: int
    per_element_verdicts: tuple[ElementVerdict, ...]
    alignment_used: str  # "upright" or "rotated"
    rotation_degrees: float
    total: int = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "total", self.number_points + self.hand_points + self.inner_circle_bonus)

    def to_json_dict(self) -> dict:
        return {
            "number_points": self.number_points,
            "hand_points": self.hand_points,
            "inner_circle_bonus": self.inner_circle_bonus,
            "total": self.total,
            "alignment_used": self.alignment_used,
            "rotation_degrees": round(self.rotation_degrees, 6),
            "per_element_verdicts": [
                {
                    "element": v.element,
                    "value": v.value,
                    "verdict": v.verdict,
                    "points": v.points,
                }
                for v in self.per_element_verdicts
            ],
        }


def normalize_point(px: float, py: float, center_x: float, center_y: float, radius_px: float) -> Point:
    """Device pixels (y down) to canonical coordinates (y up)."""
    if radius_px <= 0:
        raise ClockGeometryError(f"canvas radius must be positive, got {radius_px}")
    return Point((px - center_x) / radius_px, (center_y - py) / radius_px)


def denormalize_point(p: Point, center_x: float, center_y: float, radius_px: float) -> tuple[float, float]:
    if radius_px <= 0:
        raise ClockGeometryError(f"canvas radius must be positive, got {radius_px}")
    return (center_x + p.x * radius_px, center_y - p.y * radius_px)


def normalize_input(
    raw_numbers: list[tuple[int, float, float]],
    raw_hands: list[tuple[float, float, float, float]],
    center_x: float,
    center_y: float,
    radius_px: float,
) -> ClockInput:
    """Map raw device-pixel input to a canonical ClockInput."""
    numbers = tuple(
        NumberPlacement(value, normalize_point(px, py, center_x, center_y, radius_px))
        for value, px, py in raw_numbers
    )
    hands = tuple(
        HandStroke(
            normalize_point(x1, y1, center_x, center_y, radius_px),
            normalize_point(x2, y2, center_x, center_y, radius_px),
        )
        for x1, y1, x2, y2 in raw_hands
    )
    return ClockInput(numbers=numbers, hands=hands)


def judge_number(placement: NumberPlacement, template: ClockTemplate) -> str:
    """'correct_location' or 'wrong_location' for a 1..12 placement."""
    if not 1 <= placement.value <= 12:
        raise ValueError("judge_number expects values 1..12; route others to penalties")
    r = placement.position.radius()
    if not template.radius_acceptable(r):
        return "wrong_location"
    if template.angle_in_number_area(placement.value, placement.position.angle_deg()):
        return "correct_location"
    return "wrong_location"


def score_numbers(clock: ClockInput, template: ClockTemplate) -> tuple[int, list[ElementVerdict]]:
    """Entry-order scoring: +1 correct, -1 duplicate or >12, 0 otherwise.

    A value's first occurrence is the one judged for placement; later
    occurrences are duplicates no matter where they sit.  Zeros are ignored
    entirely (the pad allows them, the protocol has no rule for them).
    """
    points = 0
    verdicts: list[ElementVerdict] = []
    seen: set[int] = set()
    for i, placement in enumerate(clock.numbers):
        label = placement.id or f"number[{i}]"
        if placement.value == 0:
            verdict, delta = VERDICT_IGNORED, 0
        elif placement.value in seen:
            verdict, delta = VERDICT_DUPLICATE, -1
        elif placement.value > 12:
            verdict, delta = VERDICT_OVER_TWELVE, -1
        elif judge_number(placement, template) == "correct_location":
            verdict, delta = VERDICT_CORRECT, 1
        else:
            verdict, delta = VERDICT_IGNORED, 0
        if placement.value > 0:
            seen.add(placement.value)
        points += delta
        verdicts.append(ElementVerdict(element=label, value=placement.value, verdict=verdict, points=delta))
    return points, verdicts


def score_hands(
    clock: ClockInput,
    template: ClockTemplate,
    hand_points_each: int = HAND_POINTS_EACH_DEFAULT,
) -> tuple[int, int, list[ElementVerdict]]:
    """Sector-claim scoring plus the inner-circle bonus.

    Each of the two hand sectors can be claimed by at most one stroke; the
    sectors are disjoint, so first-come claiming already maximizes points.
    """
    points = 0
    claimed: set[int] = set()
    verdicts: list[ElementVerdict] = []
    for i, stroke in enumerate(clock.hands):
        label = stroke.id or f"hand[{i}]"
        outer, _ = stroke.outer_inner()
        r = outer.radius()
        verdict, delta = VERDICT_IGNORED, 0
        if template.inner_circle_radius < r <= template.radial_max:
            angle = outer.angle_deg()
            for target in HAND_TARGET_VALUES:
                if target not in claimed and template.angle_in_hand_sector(target, angle):
                    claimed.add(target)
                    verdict, delta = VERDICT_CORRECT, hand_points_each
                    break
        points += delta
        verdicts.append(ElementVerdict(element=label, value=None, verdict=verdict, points=delta))

    bonus = 0
    if len(clock.hands) == 2:
        inner_radii = [stroke.outer_inner()[1].radius() for stroke in clock.hands]
        if all(r <= template.inner_circle_radius for r in inner_radii):
            bonus = 1
    return points, bonus, verdicts


def align_rotation(clock: ClockInput) -> float | None:
    """Rotation lining the template up with the placed 12 (else 3, 6, 9).

    Uses the first-entered placement of the anchor value; None when no
    anchor value was placed at all.
    """
    for anchor in CARDINAL_VALUES:
        for placement in clock.numbers:
            if placement.value == anchor:
                return angular_offset(placement.position.angle_deg(), hour_angle(anchor))
    return None


def _score_under(clock: ClockInput, template: ClockTemplate, alignment: str,
                 hand_points_each: int) -> ClockScore:
    number_points, number_verdicts = score_numbers(clock, template)
    hand_points, bonus, hand_verdicts = score_hands(clock, template, hand_points_each)
    return ClockScore(
        number_points=number_points,
        hand_points=hand_points,
        inner_circle_bonus=bonus,
        per_element_verdicts=tuple(number_verdicts + hand_verdicts),
        alignment_used=alignment,
        rotation_degrees=template.rotation if alignment == "rotated" else 0.0,
    )


def score_clock(
    clock: ClockInput,
    *,
    hand_points_each: int = HAND_POINTS_EACH_DEFAULT,
    radial_max: float = RADIAL_MAX_DEFAULT,
    inner_circle_radius: float = INNER_CIRCLE_RADIUS_DEFAULT,
) -> ClockScore:
    """Best of the upright and anchor-aligned scores; ties prefer upright."""
    upright = _score_under(
        clock,
        build_template(0.0, radial_max=radial_max, inner_circle_radius=inner_circle_radius),
        "upright",
        hand_points_each,
    )
    rotation = align_rotation(clock)
    if rotation is None:
        return upright
    aligned = _score_under(
        clock,
        build_template(rotation, radial_max=radial_max, inner_circle_radius=inner_circle_radius),
        "rotated",
        hand_points_each,
    )
    if aligned.total > upright.total:
        # Report the signed alignment angle rather than the mod-360 template value.
        return ClockScore(
            number_points=aligned.number_points,
            hand_points=aligned.hand_points,
            inner_circle_bonus=aligned.inner_circle_bonus,
            per_element_verdicts=aligned.per_element_verdicts,
            alignment_used="rotated",
            rotation_degrees=rotation,
        )
    return upright


def max_clock_points(hand_points_each: int = HAND_POINTS_EACH_DEFAULT) -> int:
    return 12 + 2 * hand_points_each + 1


def perfect_clock_input(number_radius: float = 0.85, hand_outer_radius: float = 0.7) -> ClockInput:
    """A flawless upright entry: all 12 numbers plus hands at 10 past 11."""
    numbers = []
    for value in range(1, 13):
        rad = math.radians(hour_angle(value))
        numbers.append(
            NumberPlacement(value, Point(number_radius * math.cos(rad), number_radius * math.sin(rad)))
        )
    hands = []
    for value in HAND_TARGET_VALUES:
        rad = math.radians(hour_angle(value))
        hands.append(
            HandStroke(Point(0.0, 0.0), Point(hand_outer_radius * math.cos(rad), hand_outer_radius * math.sin(rad)))
        )
    return ClockInput(numbers=tuple(numbers), hands=tuple(hands))
