"""Independent Dubins length oracle: discretized search with bisection
refinement over each word's first-arc parameterization.

Used by the tests to check the closed-form construction; shares no code with
hmwtpp.costmodels beyond the Pose2D container.
"""

import math

TWO_PI = 2.0 * math.pi
WORDS = ("LSL", "RSR", "LSR", "RSL", "RLR", "LRL")


def _mod2pi(a):
    a = math.fmod(a, TWO_PI)
    return a + TWO_PI if a < 0 else a


def _first_circle(pose, r, side):
    if side == "L":
        cx = pose.x + r * math.cos(pose.heading + math.pi / 2)
        cy = pose.y + r * math.sin(pose.heading + math.pi / 2)
    else:
        cx = pose.x + r * math.cos(pose.heading - math.pi / 2)
        cy = pose.y + r * math.sin(pose.heading - math.pi / 2)
    return cx, cy


def _state_after_arc(pose, r, side, t):
    cx, cy = _first_circle(pose, r, side)
    if side == "L":
        a = pose.heading - math.pi / 2 + t
        h = pose.heading + t
    else:
        a = pose.heading + math.pi / 2 - t
        h = pose.heading - t
    return cx + r * math.cos(a), cy + r * math.sin(a), h


def _word_length(word, start, end, r, t):
    """Path length for first-arc angle t, or None when t is inadmissible.
    Second return value is the tangency residual whose root marks
    admissibility."""
    s0, s1, s2 = word
    px, py, h = _state_after_arc(start, r, s0, t)
    hx, hy = math.cos(h), math.sin(h)
    c_last = _first_circle(end, r, s2)
    if s1 == "S":
        vx, vy = c_last[0] - px, c_last[1] - py
        want = r if s2 == "L" else -r
        g = hx * vy - hy * vx - want
        s_fwd = hx * vx + hy * vy
        if s_fwd < -1e-9:
            return None, g
        if s2 == "L":
            q = _mod2pi(end.heading - h)
        else:
            q = _mod2pi(h - end.heading)
        return r * t + max(s_fwd, 0.0) + r * q, g
    # CCC: middle circle tangent to the final circle
    if s1 == "L":
        mx, my = px + r * -hy * 1.0 + 0.0, py + r * hx
        mx = px - r * hy
        my = py + r * hx
    else:
        mx = px + r * hy
        my = py - r * hx
    dist = math.hypot(c_last[0] - mx, c_last[1] - my)
    g = dist - 2.0 * r
    if dist < 1e-12:
        return None, g
    bm_out = math.atan2(c_last[1] - my, c_last[0] - mx)
    bm_in = math.atan2(py - my, px - mx)
    if s1 == "L":
        p = _mod2pi(bm_out - bm_in)
    else:
        p = _mod2pi(bm_in - bm_out)
    c_in = bm_out + math.pi
    if s2 == "L":
        a1 = end.heading - math.pi / 2
        q = _mod2pi(a1 - c_in)
    else:
        a1 = end.heading + math.pi / 2
        q = _mod2pi(c_in - a1)
    return r * (t + p + q), g


def oracle_shortest_length(start, end, r, samples=4096):
    """Minimal length over all words found by dense search + bisection."""
    if (abs(start.x - end.x) < 1e-12 and abs(start.y - end.y) < 1e-12
            and abs(_mod2pi(start.heading - end.heading)) < 1e-12):
        return 0.0
    best = math.inf
    for word in WORDS:
        ts = [i * TWO_PI / samples for i in range(samples + 1)]
        gs = []
        for t in ts:
            _, g = _word_length(word, start, end, r, t)
            gs.append(g)
        roots = []
        for i in range(samples):
            g0, g1 = gs[i], gs[i + 1]
            if g0 == 0.0:
                roots.append(ts[i])
            if g0 * g1 < 0.0:
                lo, hi = ts[i], ts[i + 1]
                glo = g0
                for _ in range(90):
                    mid = 0.5 * (lo + hi)
                    _, gm = _word_length(word, start, end, r, mid)
                    if glo * gm <= 0.0:
                        hi = mid
                    else:
                        lo, glo = mid, gm
                roots.append(0.5 * (lo + hi))
        if gs[samples] == 0.0:
            roots.append(ts[samples])
        for t in roots:
            length, g = _word_length(word, start, end, r, t)
            if length is not None and abs(g) < 1e-6:
                best = min(best, length)
    return best
