"""Independent reference implementations used only to check the library.

Everything here is deliberately naive (loops, flood fill, brute force) and
shares no code with the implementations under test.
"""

from __future__ import annotations

from collections import deque
from fractions import Fraction

import numpy as np


def flood_fill_components(bits: np.ndarray) -> list[np.ndarray]:
    """8-connected components by BFS; each returned as a full-size bool grid."""
    h, w = bits.shape
    seen = np.zeros_like(bits, dtype=bool)
    out = []
    for r in range(h):
        for c in range(w):
            if not bits[r, c] or seen[r, c]:
                continue
            comp = np.zeros_like(bits, dtype=bool)
            q = deque([(r, c)])
            seen[r, c] = True
            while q:
                cr, cc = q.popleft()
                comp[cr, cc] = True
                for dr in (-1, 0, 1):
                    for dc in (-1, 0, 1):
                        nr, nc = cr + dr, cc + dc
                        if 0 <= nr < h and 0 <= nc < w and bits[nr, nc] and not seen[nr, nc]:
                            seen[nr, nc] = True
                            q.append((nr, nc))
            out.append(comp)
    return out


def gift_wrap_hull(points: np.ndarray) -> np.ndarray:
    """Jarvis march; returns hull vertices CCW (y up)."""
    pts = np.unique(np.asarray(points, dtype=float), axis=0)
    if len(pts) <= 2:
        return pts
    start = min(range(len(pts)), key=lambda i: (pts[i][0], pts[i][1]))
    hull = [start]
    while True:
        cur = hull[-1]
        cand = 0 if cur != 0 else 1
        for i in range(len(pts)):
            if i == cur:
                continue
            cr = np.float64(
                (pts[cand][0] - pts[cur][0]) * (pts[i][1] - pts[cur][1])
                - (pts[cand][1] - pts[cur][1]) * (pts[i][0] - pts[cur][0])
            )
            d_cand = np.hypot(*(pts[cand] - pts[cur]))
            d_i = np.hypot(*(pts[i] - pts[cur]))
            if cr > 1e-12 or (abs(cr) <= 1e-12 and d_i > d_cand):
                cand = i
        if cand == start:
            break
        hull.append(cand)
        cur = cand
    return pts[hull]


def disk_offsets(radius: float) -> list[tuple[int, int]]:
    r = int(np.floor(radius))
    return [
        (dr, dc)
        for dr in range(-r, r + 1)
        for dc in range(-r, r + 1)
        if dr * dr + dc * dc <= radius * radius + 1e-9
    ]


def brute_dilate(bits: np.ndarray, radius: float, pad: int) -> np.ndarray:
    """Literal Minkowski dilation on a padded copy."""
    work = np.pad(bits, pad)
    out = np.zeros_like(work)
    offs = disk_offsets(radius)
    h, w = work.shape
    for r, c in np.argwhere(work):
        for dr, dc in offs:
            rr, cc = r + dr, c + dc
            if 0 <= rr < h and 0 <= cc < w:
                out[rr, cc] = True
    return out


def brute_erode(bits: np.ndarray, radius: float) -> np.ndarray:
    """Literal erosion; cells beyond the grid count as background."""
    out = np.zeros_like(bits)
    offs = disk_offsets(radius)
    h, w = bits.shape
    for r in range(h):
        for c in range(w):
            ok = True
            for dr, dc in offs:
                rr, cc = r + dr, c + dc
                if not (0 <= rr < h and 0 <= cc < w) or not bits[rr, cc]:
                    ok = False
                    break
            out[r, c] = ok
    return out


def brute_closing(bits: np.ndarray, radius: float) -> np.ndarray:
    pad = int(np.ceil(radius)) + 1
    return brute_erode(brute_dilate(bits, radius, pad), radius)


def rect_first_overlap(rect1, v1, rect2, v2, horizon: int):
    """Closed-form first overlap frame for axis-aligned integer-velocity rects.

    rect = (row, col, h, w); velocities (vx, vy) integers. Returns the minimal
    n in [0, horizon] with overlapping boxes, or None. Exact via Fractions.
    """

    def axis_window(a0, alen, va, b0, blen, vb):
        # overlap iff b0 + n*vb <= a0 + n*va + alen - 1 and symmetric
        lo, hi = Fraction(0), Fraction(horizon)
        for (p, q) in (((b0 - a0 - alen + 1), (va - vb)), ((a0 - b0 - blen + 1), (vb - va))):
            # need p + n*(-q) <= 0 i.e. n*q >= p
            if q == 0:
                if p > 0:
                    return None
            elif q > 0:
                lo = max(lo, Fraction(p, q))
            else:
                hi = min(hi, Fraction(p, q))
        return lo, hi

    wr = axis_window(rect1[0], rect1[2], v1[1], rect2[0], rect2[2], v2[1])
    wc = axis_window(rect1[1], rect1[3], v1[0], rect2[1], rect2[3], v2[0])
    if wr is None or wc is None:
        return None
    lo = max(wr[0], wc[0])
    hi = min(wr[1], wc[1])
    n = -((-lo.numerator) // lo.denominator)  # exact ceiling
    if Fraction(n) > hi or n > horizon:
        return None
    return n


def polygons_overlap_naive(va: np.ndarray, vb: np.ndarray) -> bool:
    """Segment-pair + containment polygon intersection test."""

    def seg(p1, p2, q1, q2):
        d1 = p2 - p1
        d2 = q2 - q1
        den = d1[0] * d2[1] - d1[1] * d2[0]
        r = q1 - p1
        if abs(den) < 1e-12:
            if abs(r[0] * d1[1] - r[1] * d1[0]) > 1e-12:
                return False
            L2 = d1 @ d1
            if L2 == 0:
                return False
            ta = (q1 - p1) @ d1 / L2
            tb = (q2 - p1) @ d1 / L2
            return min(ta, tb) <= 1 and max(ta, tb) >= 0
        t = (r[0] * d2[1] - r[1] * d2[0]) / den
        s = (r[0] * d1[1] - r[1] * d1[0]) / den
        return 0 <= t <= 1 and 0 <= s <= 1

    def inside(pt, poly):
        x, y = pt
        flag = False
        n = len(poly)
        for i in range(n):
            x1, y1 = poly[i]
            x2, y2 = poly[(i + 1) % n]
            if (y1 <= y) != (y2 <= y):
                if x1 + (y - y1) * (x2 - x1) / (y2 - y1) > x:
                    flag = not flag
        return flag

    na, nb = len(va), len(vb)
    for i in range(na):
        for j in range(nb):
            if seg(va[i], va[(i + 1) % na], vb[j], vb[(j + 1) % nb]):
                return True
    return inside(va[0], vb) or inside(vb[0], va)


def dense_sweep_contact(va, vel_a, vb, vel_b, t_max: float, coarse: float = 0.25, fine: float = 1e-4):
    """First-contact time by time-stepped overlap testing.

    Coarse steps bracket the first overlap, then the bracket is walked at the
    fine step. Returns time in frames, or None if never overlapping.
    """
    w = np.asarray(vel_a, float) - np.asarray(vel_b, float)
    va = np.asarray(va, float)
    vb = np.asarray(vb, float)

    def hit(t):
        return polygons_overlap_naive(va + t * w, vb)

    t = 0.0
    prev = 0.0
    found = None
    while t <= t_max:
        if hit(t):
            found = t
            break
        prev = t
        t += coarse
    if found is None:
        return None
    t = prev
    while t <= found + fine:
        if hit(t):
            return t
        t += fine
    return found
