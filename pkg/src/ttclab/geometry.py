"""Exact 2D polygon geometry.

Polygons are stored as counter-clockwise vertex arrays in continuous world
units (1 unit = 1 pixel). This module owns the simple-polygon and convexity
predicates and the continuous-time first-contact sweep used as the
ground-truth collision oracle; everything raster lives in :mod:`ttclab.masks`.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import NoCollision

_EPS = 1e-9


@dataclass
class Polygon:
    """Simple CCW polygon with annotated concavity spans.

    vertices:        (n, 2) float array of (x, y) points, counter-clockwise.
    concavity_spans: half-open index ranges [start, stop) marking the vertex
                     runs inserted by notch carving; every vertex outside all
                     spans is convex, every span holds >= 1 reflex vertex.
    color_index:     palette id in [0, 23]; render-time only.
    """

    vertices: np.ndarray
    concavity_spans: list[tuple[int, int]] = field(default_factory=list)
    color_index: int = 0

    def __post_init__(self):
        self.vertices = np.asarray(self.vertices, dtype=np.float64)
        if self.vertices.ndim != 2 or self.vertices.shape[1] != 2:
            raise ValueError("vertices must be an (n, 2) array")

    @property
    def n(self) -> int:
        return len(self.vertices)

    def to_dict(self) -> dict:
        return {
            "vertices": [[float(x), float(y)] for x, y in self.vertices],
            "concavity_spans": [[int(a), int(b)] for a, b in self.concavity_spans],
            "color_index": int(self.color_index),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "Polygon":
        return cls(
            vertices=np.asarray(d["vertices"], dtype=np.float64),
            concavity_spans=[(int(a), int(b)) for a, b in d["concavity_spans"]],
            color_index=int(d["color_index"]),
        )


def signed_area(vertices: np.ndarray) -> float:
    """Shoelace area; positive for counter-clockwise orientation."""
    v = np.asarray(vertices, dtype=np.float64)
    x, y = v[:, 0], v[:, 1]
    return 0.5 * float(np.sum(x * np.roll(y, -1) - np.roll(x, -1) * y))


def perimeter(vertices: np.ndarray) -> float:
    v = np.asarray(vertices, dtype=np.float64)
    return float(np.sum(np.hypot(*(np.roll(v, -1, axis=0) - v).T)))


def vertex_cross(vertices: np.ndarray) -> np.ndarray:
    """Cross product of incoming x outgoing edge at each vertex (CCW: convex > 0)."""
    v = np.asarray(vertices, dtype=np.float64)
    prev = v - np.roll(v, 1, axis=0)
    nxt = np.roll(v, -1, axis=0) - v
    return prev[:, 0] * nxt[:, 1] - prev[:, 1] * nxt[:, 0]


def is_convex(vertices: np.ndarray, eps: float = _EPS) -> bool:
    """Strictly convex and CCW: every vertex turns left."""
    return bool(np.all(vertex_cross(vertices) > eps)) and signed_area(vertices) > 0


def _segments_intersect(p1, p2, q1, q2, eps: float = _EPS) -> bool:
    """True if closed segments [p1,p2] and [q1,q2] share any point."""
    d1 = p2 - p1
    d2 = q2 - q1
    denom = d1[0] * d2[1] - d1[1] * d2[0]
    r = q1 - p1
    if abs(denom) > eps:
        t = (r[0] * d2[1] - r[1] * d2[0]) / denom
        s = (r[0] * d1[1] - r[1] * d1[0]) / denom
        return -eps <= t <= 1 + eps and -eps <= s <= 1 + eps
    # Parallel: intersect only if collinear with overlapping extents.
    if abs(r[0] * d1[1] - r[1] * d1[0]) > eps:
        return False
    L2 = d1 @ d1
    if L2 < eps:
        return False
    ta = (q1 - p1) @ d1 / L2
    tb = (q2 - p1) @ d1 / L2
    return min(ta, tb) <= 1 + eps and max(ta, tb) >= -eps


def is_simple(vertices: np.ndarray, eps: float = _EPS) -> bool:
    """O(n^2) pairwise segment test; adjacent edges may only meet at the shared vertex."""
    v = np.asarray(vertices, dtype=np.float64)
    n = len(v)
    if n < 3:
        return False
    edges = [(v[i], v[(i + 1) % n]) for i in range(n)]
    for a, b in edges:
        if np.hypot(*(b - a)) < eps:
            return False
    for i in range(n):
        p1, p2 = edges[i]
        for j in range(i + 1, n):
            adjacent = j == i + 1 or (i == 0 and j == n - 1)
            q1, q2 = edges[j]
            if adjacent:
                # Shared-endpoint contact is fine; any further overlap is not.
                shared = p2 if j == i + 1 else p1
                other_p = p1 if j == i + 1 else p2
                other_q = q2 if j == i + 1 else q1
                d = q2 - q1
                if abs((other_p - q1)[0] * d[1] - (other_p - q1)[1] * d[0]) < eps:
                    # Collinear neighbours: reject if they fold back onto each other.
                    if (other_p - shared) @ (other_q - shared) > eps:
                        return False
                continue
            if _segments_intersect(p1, p2, q1, q2, eps):
                return False
    return True


def validate_polygon(poly: Polygon) -> None:
    """Raise ValueError unless all structural polygon invariants hold."""
    v = poly.vertices
    if signed_area(v) <= 0:
        raise ValueError("polygon must be counter-clockwise with positive area")
    if not is_simple(v):
        raise ValueError("polygon is not simple")
    cross = vertex_cross(v)
    in_span = np.zeros(len(v), dtype=bool)
    for a, b in poly.concavity_spans:
        if not (0 <= a < b <= len(v)):
            raise ValueError(f"span [{a}, {b}) out of range")
        in_span[a:b] = True
        if not np.any(cross[a:b] < -_EPS):
            raise ValueError(f"span [{a}, {b}) has no reflex vertex")
    if np.any(cross[~in_span] <= _EPS):
        raise ValueError("vertex outside all spans is not convex")
    if not (0 <= poly.color_index <= 23):
        raise ValueError("color_index out of range")


def point_in_polygon(point: np.ndarray, vertices: np.ndarray, eps: float = _EPS) -> bool:
    """Even-odd test; points on the boundary count as inside."""
    x, y = float(point[0]), float(point[1])
    v = np.asarray(vertices, dtype=np.float64)
    n = len(v)
    inside = False
    for i in range(n):
        x1, y1 = v[i]
        x2, y2 = v[(i + 1) % n]
        # On-segment check.
        dx, dy = x2 - x1, y2 - y1
        cr = (x - x1) * dy - (y - y1) * dx
        if abs(cr) < eps * max(1.0, abs(dx) + abs(dy)):
            dot = (x - x1) * dx + (y - y1) * dy
            if -eps <= dot <= dx * dx + dy * dy + eps:
                return True
        if (y1 <= y) != (y2 <= y):
            xc = x1 + (y - y1) * dx / dy
            if xc > x:
                inside = not inside
    return inside


def polygons_touch(va: np.ndarray, vb: np.ndarray, eps: float = _EPS) -> bool:
    """True if the closed polygon regions share at least one point."""
    na, nb = len(va), len(vb)
    for i in range(na):
        for j in range(nb):
            if _segments_intersect(va[i], va[(i + 1) % na], vb[j], vb[(j + 1) % nb], eps):
                return True
    # No boundary contact: containment is the only remaining possibility.
    if point_in_polygon(va[0], vb, eps) or point_in_polygon(vb[0], va, eps):
        return True
    return False


def first_contact_time(
    verts_a: np.ndarray,
    vel_a: np.ndarray,
    verts_b: np.ndarray,
    vel_b: np.ndarray,
    return_point: bool = False,
):
    """Earliest t >= 0 (in frames) at which the two translating polygons touch.

    Vertices are world positions at t = 0; velocities are per-frame (vx, vy).
    The sweep reduces to vertex-versus-edge crossing times under the relative
    velocity, taking the minimum over both orderings. Raises NoCollision if no
    contact ever occurs.
    """
    va = np.asarray(verts_a, dtype=np.float64)
    vb = np.asarray(verts_b, dtype=np.float64)
    w = np.asarray(vel_a, dtype=np.float64) - np.asarray(vel_b, dtype=np.float64)

    if polygons_touch(va, vb):
        if return_point:
            return 0.0, _touch_point(va, vb)
        return 0.0

    best_t = np.inf
    best_vertex = None
    best_vel = None

    for pts, edges, rel, own_vel in (
        (va, vb, w, np.asarray(vel_a, dtype=np.float64)),
        (vb, va, -w, np.asarray(vel_b, dtype=np.float64)),
    ):
        n = len(edges)
        for j in range(n):
            q1 = edges[j]
            e = edges[(j + 1) % n] - q1
            L2 = float(e @ e)
            denom = e[0] * rel[1] - e[1] * rel[0]
            for p in pts:
                r = q1 - p
                cr0 = e[0] * r[1] - e[1] * r[0]
                if abs(denom) > _EPS:
                    t = cr0 / denom
                    if -_EPS < t < best_t:
                        t = max(t, 0.0)
                        s = float((p + t * rel - q1) @ e) / L2
                        if -_EPS <= s <= 1 + _EPS:
                            best_t = t
                            best_vertex, best_vel = p, own_vel
                else:
                    # Vertex slides parallel to the edge line.
                    if abs(cr0) > _EPS * max(1.0, np.hypot(*e)):
                        continue
                    sw = float(rel @ e) / L2
                    s0 = float((p - q1) @ e) / L2
                    if abs(sw) < _EPS:
                        continue  # static along the line; covered by t=0 touch test
                    t_in = min((0.0 - s0) / sw, (1.0 - s0) / sw)
                    if -_EPS < t_in < best_t:
                        best_t = max(t_in, 0.0)
                        best_vertex, best_vel = p, own_vel

    if not np.isfinite(best_t):
        raise NoCollision("polygons never intersect under the given velocities")
    if return_point:
        # World position of the contacting vertex at contact time.
        return best_t, best_vertex + best_t * best_vel
    return best_t


def _touch_point(va: np.ndarray, vb: np.ndarray):
    for p in va:
        if point_in_polygon(p, vb):
            return p.copy()
    for p in vb:
        if point_in_polygon(p, va):
            return p.copy()
    return va[0].copy()
