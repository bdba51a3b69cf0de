"""Edge-cost models for aerial grid inspection.

Multirotors fly straight legs with a wind-projected ground speed; fixed-wing
and VTOL aircraft fly Dubins paths at airspeed between oriented waypoints.
Energy is a per-worker constant-power surrogate (fraction of the normalized
budget per second); it stands in for a full aerodynamic model and is only
meant to preserve the budget-constraint structure the planner exercises.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

TWO_PI = 2.0 * math.pi

#: canonical word order; earlier wins length ties
DUBINS_WORDS = ("LSL", "RSR", "LSR", "RSL", "RLR", "LRL")


class WindError(ValueError):
    pass


def norm_angle(a: float) -> float:
    """Wrap an angle into [0, 2*pi)."""
    a = math.fmod(a, TWO_PI)
    return a + TWO_PI if a < 0 else a


@dataclass(frozen=True)
class Pose2D:
    x: float
    y: float
    heading: float

    def __post_init__(self):
        object.__setattr__(self, "heading", norm_angle(self.heading))

    @property
    def position(self) -> tuple[float, float]:
        return (self.x, self.y)


@dataclass(frozen=True)
class DubinsPath:
    """One admissible Dubins path.

    ``params`` is (first arc, middle, last arc): arcs in radians, the middle
    entry in meters for CSC words and radians for CCC words.  ``length`` is
    the total path length in meters.
    """

    word: str
    params: tuple[float, float, float]
    length: float
    radius: float


def _left(theta: float) -> tuple[float, float]:
    return (-math.sin(theta), math.cos(theta))


def _right(theta: float) -> tuple[float, float]:
    return (math.sin(theta), -math.cos(theta))


def _circle(pose: Pose2D, r: float, side: str) -> tuple[float, float]:
    ox, oy = _left(pose.heading) if side == "L" else _right(pose.heading)
    return (pose.x + r * ox, pose.y + r * oy)


def _csc(start: Pose2D, end: Pose2D, r: float, word: str) -> DubinsPath | None:
    s0, s1 = word[0], word[2]
    c0 = _circle(start, r, s0)
    c1 = _circle(end, r, s1)
    dx, dy = c1[0] - c0[0], c1[1] - c0[1]
    D = math.hypot(dx, dy)
    phic = math.atan2(dy, dx)
    if s0 == s1:
        if D < 1e-12 * max(r, 1.0):
            # both poses on one circle: a single arc
            arc = norm_angle(end.heading - start.heading) if s0 == "L" \
                else norm_angle(start.heading - end.heading)
            return DubinsPath(word, (arc, 0.0, 0.0), r * arc, r)
        phi = phic
        p = D
    else:
        if D < 2.0 * r:
            return None
        p = math.sqrt(D * D - 4.0 * r * r)
        nu = math.atan2(2.0 * r, p)
        phi = phic + nu if s0 == "L" else phic - nu
    if s0 == "L":
        t = norm_angle(phi - start.heading)
    else:
        t = norm_angle(start.heading - phi)
    if s1 == "L":
        q = norm_angle(end.heading - phi)
    else:
        q = norm_angle(phi - end.heading)
    return DubinsPath(word, (t, p, q), r * t + p + r * q, r)


def _ccc(start: Pose2D, end: Pose2D, r: float, word: str) -> DubinsPath | None:
    outer = word[0]  # L for LRL, R for RLR
    c0 = _circle(start, r, outer)
    c1 = _circle(end, r, outer)
    dx, dy = c1[0] - c0[0], c1[1] - c0[1]
    D = math.hypot(dx, dy)
    if D > 4.0 * r:
        return None
    phic = math.atan2(dy, dx)
    half = 0.5 * D
    h = math.sqrt(max(0.0, 4.0 * r * r - half * half))
    best: DubinsPath | None = None
    # the middle circle sits on either side of the center line
    for sign in (1.0, -1.0):
        mx = c0[0] + half * math.cos(phic) - sign * h * math.sin(phic)
        my = c0[1] + half * math.sin(phic) + sign * h * math.cos(phic)
        a_in = math.atan2(my - c0[1], mx - c0[0])  # tangency seen from c0
        a_out = math.atan2(my - c1[1], mx - c1[0])
        b_in = math.atan2(c0[1] - my, c0[0] - mx)
        b_out = math.atan2(c1[1] - my, c1[0] - mx)
        if outer == "R":
            a0 = start.heading + math.pi / 2.0
            a1 = end.heading + math.pi / 2.0
            t = norm_angle(a0 - a_in)
            p = norm_angle(b_out - b_in)  # middle circle turns left
            q = norm_angle(a_out - a1)
        else:
            a0 = start.heading - math.pi / 2.0
            a1 = end.heading - math.pi / 2.0
            t = norm_angle(a_in - a0)
            p = norm_angle(b_in - b_out)
            q = norm_angle(a1 - a_out)
        cand = DubinsPath(word, (t, p, q), r * (t + p + q), r)
        if best is None or cand.length < best.length:
            best = cand
    return best


def dubins_candidates(start: Pose2D, end: Pose2D, r: float) -> list[DubinsPath]:
    """All admissible word instances in canonical word order."""
    if r <= 0:
        raise ValueError("turning radius must be positive")
    if (abs(start.x - end.x) < 1e-12 and abs(start.y - end.y) < 1e-12
            and abs(norm_angle(start.heading - end.heading)) < 1e-12):
        return [DubinsPath("LSL", (0.0, 0.0, 0.0), 0.0, r)]
    out: list[DubinsPath] = []
    for word in DUBINS_WORDS:
        path = _csc(start, end, r, word) if word[1] == "S" else _ccc(start, end, r, word)
        if path is not None:
            out.append(path)
    return out


def dubins_shortest(start: Pose2D, end: Pose2D, r: float) -> DubinsPath:
    """Shortest Dubins path; ties resolved by canonical word order."""
    best: DubinsPath | None = None
    for path in dubins_candidates(start, end, r):
        if best is None or path.length < best.length:
            best = path
    assert best is not None  # every pose pair admits a path
    return best


# -- worker cost surrogates ----------------------------------------------------

@dataclass(frozen=True)
class UavSpec:
    """Physical parameters of one aircraft.

    ``endurance`` is the flight time (seconds) that exhausts the normalized
    energy budget of 1; infinite endurance disables energy accounting.
    """

    kind: str  # multirotor | vtol
    nav_speed: float
    insp_speed: float
    turn_radius: float = 0.0
    endurance: float = math.inf

    def __post_init__(self):
        if self.nav_speed <= 0 or self.insp_speed <= 0:
            raise ValueError("speeds must be positive")
        if self.kind == "vtol" and self.turn_radius <= 0:
            raise ValueError("a vtol needs a positive turning radius")

    @property
    def power_coeff(self) -> float:
        return 0.0 if math.isinf(self.endurance) else 1.0 / self.endurance


def ground_speed(airspeed: float, direction: tuple[float, float],
                 wind: tuple[float, float]) -> float:
    """Speed over ground along a unit direction under constant wind."""
    w = math.hypot(*wind)
    if w >= airspeed:
        raise WindError(f"wind {w:.3f} m/s exceeds airspeed {airspeed:.3f} m/s")
    return airspeed + wind[0] * direction[0] + wind[1] * direction[1]


def transit_cost(spec: UavSpec, start: Pose2D, end: Pose2D,
                 wind: tuple[float, float] = (0.0, 0.0)) -> tuple[float, float]:
    """Transition (time, energy) between two oriented waypoints.

    Multirotors fly the straight line at navigation airspeed with the wind
    projected on the leg; VTOLs fly the Dubins path at navigation airspeed
    (their wind handling lives in the takeoff/landing headings chosen by the
    caller).
    """
    if spec.kind == "vtol":
        if math.hypot(*wind) >= spec.nav_speed:
            raise WindError("wind exceeds airspeed")
        length = dubins_shortest(start, end, spec.turn_radius).length
        dt = length / spec.nav_speed
    else:
        d = math.hypot(end.x - start.x, end.y - start.y)
        if d == 0.0:
            ground_speed(spec.nav_speed, (1.0, 0.0), wind)  # still reject stormy input
            dt = 0.0
        else:
            u = ((end.x - start.x) / d, (end.y - start.y) / d)
            dt = d / ground_speed(spec.nav_speed, u, wind)
    return dt, spec.power_coeff * dt


@dataclass(frozen=True)
class TowerOrbit:
    radius: float  # orbit radius around the tower, meters


@dataclass(frozen=True)
class SegmentRun:
    length: float  # cable segment length, meters


def inspection_cost(element: TowerOrbit | SegmentRun, spec: UavSpec
                    ) -> tuple[float, float]:
    """Execution (time, energy) of one inspection element."""
    if isinstance(element, TowerOrbit):
        if element.radius <= 0:
            raise ValueError("orbit radius must be positive")
        dt = TWO_PI * element.radius / spec.insp_speed
    else:
        dt = element.length / spec.insp_speed
    return dt, spec.power_coeff * dt


def heading_against(wind: tuple[float, float], fallback: float = 0.0) -> float:
    """Heading facing into the wind; ``fallback`` when the air is calm."""
    w = math.hypot(*wind)
    if w < 1e-12:
        return norm_angle(fallback)
    return norm_angle(math.atan2(-wind[1], -wind[0]))
