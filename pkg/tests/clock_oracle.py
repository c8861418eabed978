"""Independent brute-force judge for clock-scoring geometry.

Written separately from the production code on purpose: membership is
decided by explicit [start, end] angular intervals (split at the 0/360
wrap) rather than signed offsets from a sector center, so agreement
between the two implementations is a meaningful check.
"""

import math

RADIAL_MAX = 1.25
INNER_RADIUS = 0.15

# Upright interval tables, degrees CCW from +x. Position of hour h is
# 90 - 30h (mod 360); cardinal sectors are +/-15 degrees around it, the
# other numbers use the whole 90-degree arc between adjacent cardinals.
NUMBER_INTERVALS = {
    12: [(75.0, 105.0)],
    3: [(345.0, 360.0), (0.0, 15.0)],
    6: [(255.0, 285.0)],
    9: [(165.0, 195.0)],
    1: [(0.0, 90.0)],
    2: [(0.0, 90.0)],
    4: [(270.0, 360.0)],
    5: [(270.0, 360.0)],
    7: [(180.0, 270.0)],
    8: [(180.0, 270.0)],
    10: [(90.0, 180.0)],
    11: [(90.0, 180.0)],
}

HAND_INTERVALS = {
    11: [(105.0, 135.0)],
    2: [(15.0, 45.0)],
}


def _angle_of(x, y):
    if x == 0.0 and y == 0.0:
        return 0.0
    a = math.degrees(math.atan2(y, x))
    while a < 0.0:
        a += 360.0
    while a >= 360.0:
        a -= 360.0
    return a


def _shift_intervals(intervals, rotation):
    """Rotate and re-split intervals at the 0/360 boundary."""
    out = []
    for lo, hi in intervals:
        lo = (lo + rotation) % 360.0
        hi = (hi + rotation) % 360.0
        if lo <= hi:
            out.append((lo, hi))
        else:
            out.append((lo, 360.0))
            out.append((0.0, hi))
    return out


def _in_intervals(angle, intervals):
    for lo, hi in intervals:
        if lo <= angle <= hi:
            return True
        # closed boundary at the wrap: 360 == 0
        if hi == 360.0 and angle == 0.0:
            return True
        if lo == 0.0 and angle == 360.0:
            return True
    return False


def oracle_number_correct(value, x, y, rotation=0.0):
    """correct-location verdict for a 1..12 number placement."""
    r = math.sqrt(x * x + y * y)
    if r > RADIAL_MAX:
        return False
    return _in_intervals(_angle_of(x, y), _shift_intervals(NUMBER_INTERVALS[value], rotation))


def oracle_hand_sector(x, y, rotation=0.0):
    """Which hand target (11 or 2) the outer endpoint falls in, if any."""
    r = math.sqrt(x * x + y * y)
    if not (INNER_RADIUS < r <= RADIAL_MAX):
        return None
    angle = _angle_of(x, y)
    for value, intervals in HAND_INTERVALS.items():
        if _in_intervals(angle, _shift_intervals(intervals, rotation)):
            return value
    return None


def oracle_score_hands(strokes, rotation=0.0, points_each=1):
    """(points, bonus) for a list of ((x1,y1),(x2,y2)) strokes.

    Tries every assignment of strokes to the two sectors and keeps the best,
    which is what the one-claim-per-sector rule is meant to achieve.
    """
    eligible = []
    inner_radii = []
    for (x1, y1), (x2, y2) in strokes:
        r1 = math.sqrt(x1 * x1 + y1 * y1)
        r2 = math.sqrt(x2 * x2 + y2 * y2)
        if r1 > r2:
            outer, inner_r = (x1, y1), r2
        else:
            outer, inner_r = (x2, y2), r1
        eligible.append(oracle_hand_sector(outer[0], outer[1], rotation))
        inner_radii.append(inner_r)

    best = 0
    n = len(strokes)
    for mask in range(3 ** n if n else 1):
        claims = set()
        points = 0
        ok = True
        m = mask
        for sector in eligible:
            choice = m % 3
            m //= 3
            if choice == 0:
                continue
            target = 11 if choice == 1 else 2
            if sector != target or target in claims:
                ok = False
                break
            claims.add(target)
            points += points_each
        if ok:
            best = max(best, points)

    bonus = 1 if n == 2 and all(r <= INNER_RADIUS for r in inner_radii) else 0
    return best, bonus


def near_boundary(value, x, y, rotation=0.0, eps=1e-6):
    """True when the placement sits within eps of any decision boundary."""
    r = math.sqrt(x * x + y * y)
    if abs(r - RADIAL_MAX) < eps or abs(r - INNER_RADIUS) < eps:
        return True
    angle = _angle_of(x, y)
    intervals = NUMBER_INTERVALS.get(value, []) + HAND_INTERVALS.get(value, [])
    for lo, hi in _shift_intervals(intervals, rotation):
        for edge in (lo, hi):
            delta = abs(angle - edge)
            delta = min(delta, 360.0 - delta)
            if delta < eps:
                return True
    return False
