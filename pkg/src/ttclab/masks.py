"""Binary-mask algebra on an unbounded integer lattice.

A mask is a bit grid plus an integer world offset, so translation never loses
pixels and overlap tests are canvas-independent. Pixel (r, c) of a mask sits
at world lattice cell ``origin + (r, c)``; rasterization maps continuous
world coordinates (x, y) to cells via the pixel-center rule (center of cell
(r, c) is the point ``(x, y) = (c + 0.5, r + 0.5)``).

Disk morphology (dilation, erosion, closing) uses the exact kernel rule
``(dr, dc) in disk(r) iff dr^2 + dc^2 <= r^2``, implemented with exact
Euclidean distance transforms.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy import ndimage as ndi

from .errors import EmptyMask, TooFewObjects
from .geometry import Polygon

_EIGHT = np.ones((3, 3), dtype=bool)
_ON_BOUNDARY_EPS = 1e-7

COARSEN_KINDS = ("identity", "closing", "hull_blend", "alpha_smooth", "blur_threshold")


@dataclass
class BinaryMask:
    """Occupancy grid with a world offset; treat instances as immutable."""

    origin: tuple[int, int]  # (row, col) world offset of bit (0, 0)
    bits: np.ndarray  # (H, W) bool

    def __post_init__(self):
        self.bits = np.asarray(self.bits, dtype=bool)
        if self.bits.ndim != 2 or self.bits.shape[0] < 1 or self.bits.shape[1] < 1:
            raise ValueError("mask extent must be positive in both dimensions")
        self.origin = (int(self.origin[0]), int(self.origin[1]))

    @property
    def extent(self) -> tuple[int, int]:
        return self.bits.shape

    @property
    def popcount(self) -> int:
        return int(np.count_nonzero(self.bits))

    def world_box(self) -> tuple[int, int, int, int]:
        """(r0, c0, r1, c1), half-open, of the full grid in world cells."""
        h, w = self.bits.shape
        return (self.origin[0], self.origin[1], self.origin[0] + h, self.origin[1] + w)

    def cropped(self) -> "BinaryMask":
        """Tight copy around set pixels (unchanged if empty)."""
        if not self.bits.any():
            return BinaryMask(self.origin, self.bits.copy())
        rows = np.any(self.bits, axis=1)
        cols = np.any(self.bits, axis=0)
        r0, r1 = np.flatnonzero(rows)[[0, -1]]
        c0, c1 = np.flatnonzero(cols)[[0, -1]]
        return BinaryMask(
            (self.origin[0] + int(r0), self.origin[1] + int(c0)),
            self.bits[r0 : r1 + 1, c0 : c1 + 1].copy(),
        )

    def set_cells(self) -> np.ndarray:
        """(n, 2) world (row, col) coordinates of set pixels, scanline order."""
        rc = np.argwhere(self.bits)
        return rc + np.asarray(self.origin, dtype=np.int64)


def masks_equal(a: BinaryMask, b: BinaryMask) -> bool:
    """Equality of the world point sets (grid framing ignored)."""
    ca, cb = a.cropped(), b.cropped()
    if ca.popcount == 0 and cb.popcount == 0:
        return True
    return ca.origin == cb.origin and ca.bits.shape == cb.bits.shape and bool(
        np.array_equal(ca.bits, cb.bits)
    )


@dataclass
class ProbabilityMap:
    """Per-pixel class probabilities, channel 0 = background, 1 = object."""

    values: np.ndarray  # (H, W, 2) float32

    def __post_init__(self):
        v = np.asarray(self.values, dtype=np.float32)
        if v.ndim != 3 or v.shape[2] != 2:
            raise ValueError("probability map must have shape (H, W, 2)")
        if np.any(v < -1e-6) or np.any(v > 1 + 1e-6):
            raise ValueError("probabilities must lie in [0, 1]")
        if np.any(np.abs(v.sum(axis=2) - 1.0) > 1e-5):
            raise ValueError("per-pixel channel values must sum to 1")
        self.values = v

    @property
    def extent(self) -> tuple[int, int]:
        return self.values.shape[:2]

    @classmethod
    def from_logits(cls, logits: np.ndarray) -> "ProbabilityMap":
        """Softmax over the trailing class dimension."""
        z = np.asarray(logits, dtype=np.float64)
        z = z - z.max(axis=2, keepdims=True)
        e = np.exp(z)
        return cls((e / e.sum(axis=2, keepdims=True)).astype(np.float32))


@dataclass
class CoarseningOp:
    """Parametric transform along the exact-outline-to-convex-hull continuum.

    strength is a pixel radius for closing / alpha_smooth, a Gaussian std for
    blur_threshold, and a blend weight in [0, 1] for hull_blend.
    """

    kind: str
    strength: float = 0.0

    def __post_init__(self):
        if self.kind not in COARSEN_KINDS:
            raise ValueError(f"unknown coarsening kind {self.kind!r}")
        s = float(self.strength)
        if self.kind == "identity" and s != 0.0:
            raise ValueError("identity requires strength 0")
        if self.kind == "hull_blend" and not (0.0 <= s <= 1.0):
            raise ValueError("hull_blend strength must lie in [0, 1]")
        if s < 0.0:
            raise ValueError("strength must be >= 0")
        self.strength = s

    @classmethod
    def parse(cls, text: str) -> "CoarseningOp":
        """Parse 'kind:strength' (e.g. 'closing:8')."""
        kind, _, raw = text.partition(":")
        return cls(kind.strip(), float(raw) if raw else 0.0)

    def label(self) -> str:
        return f"{self.kind}:{self.strength:g}"


# ---------------------------------------------------------------- rasterize


def _rasterize_vertices(verts: np.ndarray, canvas: tuple[int, int]) -> np.ndarray:
    """Even-odd scanline fill on pixel centers; boundary centers count inside."""
    h, w = canvas
    bits = np.zeros((h, w), dtype=bool)
    if len(verts) < 3:
        return bits
    ys = np.arange(h, dtype=np.float64) + 0.5
    xs = np.arange(w, dtype=np.float64) + 0.5
    n = len(verts)
    for i in range(n):
        x1, y1 = verts[i]
        x2, y2 = verts[(i + 1) % n]
        if y1 == y2:
            continue
        rows = (y1 <= ys) != (y2 <= ys)
        if not rows.any():
            continue
        xc = x1 + (ys[rows] - y1) * (x2 - x1) / (y2 - y1)
        bits[rows] ^= xc[:, None] > xs[None, :]

    # Boundary pass: a center exactly on any edge is inside regardless of parity.
    for i in range(n):
        a = verts[i]
        b = verts[(i + 1) % n]
        d = b - a
        length = float(np.hypot(*d))
        if length == 0.0:
            continue
        r0 = max(0, int(np.floor(min(a[1], b[1]) - 1.0)))
        r1 = min(h, int(np.ceil(max(a[1], b[1]) + 1.0)))
        c0 = max(0, int(np.floor(min(a[0], b[0]) - 1.0)))
        c1 = min(w, int(np.ceil(max(a[0], b[0]) + 1.0)))
        if r0 >= r1 or c0 >= c1:
            continue
        cx = xs[c0:c1][None, :] - a[0]
        cy = ys[r0:r1][:, None] - a[1]
        cross = cx * d[1] - cy * d[0]
        dot = cx * d[0] + cy * d[1]
        on_edge = (np.abs(cross) <= _ON_BOUNDARY_EPS * max(1.0, length)) & (
            dot >= -_ON_BOUNDARY_EPS
        ) & (dot <= length * length + _ON_BOUNDARY_EPS)
        bits[r0:r1, c0:c1] |= on_edge
    return bits


def rasterize(polygon: Polygon, position, canvas: tuple[int, int]) -> BinaryMask:
    """Occupancy of the polygon translated to `position` on an (H, W) canvas.

    Pixel (r, c) is set iff its center (c + 0.5, r + 0.5) lies inside the
    polygon under the even-odd rule; centers exactly on the boundary are
    inside. Off-canvas geometry simply yields unset pixels.
    """
    verts = polygon.vertices + np.asarray(position, dtype=np.float64)
    return BinaryMask((0, 0), _rasterize_vertices(verts, canvas))


# ------------------------------------------------------- probability ingest


def mask_from_probability(pmap: ProbabilityMap) -> BinaryMask:
    """Argmax over classes; exact ties resolve to background."""
    v = pmap.values
    return BinaryMask((0, 0), v[:, :, 1] > v[:, :, 0])


# ------------------------------------------------------ connected components


def connected_components(mask: BinaryMask) -> list[BinaryMask]:
    """8-connected components, largest first.

    Size ties break on the smallest (row, col) of each component's first set
    pixel in scanline order. Components keep the parent's world frame.
    """
    if not mask.bits.any():
        return []
    labels, count = ndi.label(mask.bits, structure=_EIGHT)
    flat = labels.ravel()
    sizes = np.bincount(flat, minlength=count + 1)
    values, first_idx = np.unique(flat, return_index=True)
    first = dict(zip(values.tolist(), first_idx.tolist()))
    order = sorted(range(1, count + 1), key=lambda k: (-int(sizes[k]), first[k]))
    slices = ndi.find_objects(labels)
    out = []
    for k in order:
        sl = slices[k - 1]
        out.append(
            BinaryMask(
                (mask.origin[0] + sl[0].start, mask.origin[1] + sl[1].start),
                labels[sl] == k,
            )
        )
    return out


def two_largest(mask: BinaryMask) -> tuple[BinaryMask, BinaryMask]:
    """The two largest components; raises TooFewObjects below two."""
    comps = connected_components(mask)
    if len(comps) < 2:
        raise TooFewObjects(f"expected >= 2 components, found {len(comps)}")
    return comps[0], comps[1]


# ------------------------------------------------------------------ algebra


def translate(mask: BinaryMask, displacement: tuple[int, int]) -> BinaryMask:
    """Shift by integer (drow, dcol); lossless for any displacement."""
    return BinaryMask(
        (mask.origin[0] + int(displacement[0]), mask.origin[1] + int(displacement[1])),
        mask.bits,
    )


def overlap(a: BinaryMask, b: BinaryMask) -> bool:
    """True iff some world cell is set in both masks."""
    ar0, ac0, ar1, ac1 = a.world_box()
    br0, bc0, br1, bc1 = b.world_box()
    r0, c0 = max(ar0, br0), max(ac0, bc0)
    r1, c1 = min(ar1, br1), min(ac1, bc1)
    if r0 >= r1 or c0 >= c1:
        return False
    sa = a.bits[r0 - ar0 : r1 - ar0, c0 - ac0 : c1 - ac0]
    sb = b.bits[r0 - br0 : r1 - br0, c0 - bc0 : c1 - bc0]
    return bool(np.any(sa & sb))


# --------------------------------------------------------------- morphology


def _dist2_to_set(bits: np.ndarray) -> np.ndarray:
    """Squared Euclidean distance from every cell to the nearest set cell."""
    if not bits.any():
        return np.full(bits.shape, np.inf)
    d = ndi.distance_transform_edt(~bits)
    return np.rint(d * d)


def _dist2_to_unset(bits: np.ndarray) -> np.ndarray:
    if bits.all():
        return np.full(bits.shape, np.inf)
    d = ndi.distance_transform_edt(bits)
    return np.rint(d * d)


def dilate_disk(mask: BinaryMask, radius: float) -> BinaryMask:
    """Minkowski dilation with the exact disk {(dr, dc): dr^2 + dc^2 <= r^2}."""
    if radius < 0:
        raise ValueError("radius must be >= 0")
    pad = int(np.ceil(radius)) + 1
    work = mask.cropped()
    bits = np.pad(work.bits, pad)
    out = _dist2_to_set(bits) <= radius * radius + 1e-9
    return BinaryMask((work.origin[0] - pad, work.origin[1] - pad), out)


def erode_disk(mask: BinaryMask, radius: float) -> BinaryMask:
    """Erosion with the same exact disk; cells beyond the grid are background."""
    if radius < 0:
        raise ValueError("radius must be >= 0")
    bits = np.pad(mask.bits, 1)  # guarantee a background ring
    out = _dist2_to_unset(bits) > radius * radius + 1e-9
    return BinaryMask((mask.origin[0] - 1, mask.origin[1] - 1), out)


def close_disk(mask: BinaryMask, radius: float) -> BinaryMask:
    """Granulometric closing: union of exact-disk closings at integer radii <= r.

    A single dilate-then-erode with a lattice disk is not monotone in the
    radius (the discrete big disk is not open w.r.t. the small one), which
    would break the coarse-to-fine nesting the sweep relies on. The union
    over the integer radius chain restores ``r2 >= r1 => output(r2) superset
    of output(r1)`` by construction while keeping each element's kernel the
    exact ``dr^2 + dc^2 <= k^2`` disk. On clean shapes (solid notched
    polygons) it coincides with the literal closing at floor(r).
    """
    if radius < 0:
        raise ValueError("radius must be >= 0")
    r_int = int(np.floor(radius + 1e-9))
    work = mask.cropped()
    pad = r_int + 1
    bits = np.pad(work.bits, pad)
    origin = (work.origin[0] - pad, work.origin[1] - pad)
    if r_int == 0 or not bits.any():
        return BinaryMask(origin, bits)
    d2_set = _dist2_to_set(bits)
    acc = bits.copy()
    for k in range(1, r_int + 1):
        dilated = d2_set <= k * k + 1e-9
        acc |= _dist2_to_unset(dilated) > k * k + 1e-9
    return BinaryMask(origin, acc)


def _signed_dist(bits: np.ndarray) -> np.ndarray:
    """Exact-EDT signed distance, negative inside the set."""
    inside = np.where(bits, ndi.distance_transform_edt(bits), 0.0)
    outside = np.where(bits, 0.0, ndi.distance_transform_edt(~bits) if (~bits).any() else 0.0)
    return outside - inside


def convex_hull_mask(mask: BinaryMask) -> BinaryMask:
    """Pixel-center rasterization of the convex hull of the set-cell centers."""
    work = mask.cropped()
    if work.popcount == 0:
        raise EmptyMask("convex hull of an empty mask")
    rc = np.argwhere(work.bits)
    pts = np.stack([rc[:, 1] + 0.5, rc[:, 0] + 0.5], axis=1)  # (x, y) local
    hull = _hull_points(pts)
    h, w = work.bits.shape
    if len(hull) >= 3:
        bits = _rasterize_vertices(hull, (h, w))
    else:
        bits = _centers_on_segment(hull, (h, w))
    return BinaryMask(work.origin, bits | work.bits)


def _hull_points(pts: np.ndarray) -> np.ndarray:
    """Andrew monotone chain; returns CCW hull, possibly degenerate (1-2 pts)."""
    uniq = np.unique(pts, axis=0)
    if len(uniq) <= 2:
        return uniq
    order = np.lexsort((uniq[:, 1], uniq[:, 0]))
    p = uniq[order]

    def turn(o, a, b):
        return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])

    def half(seq):
        out = []
        for q in seq:
            while len(out) >= 2 and turn(out[-2], out[-1], q) <= 0:
                out.pop()
            out.append(q)
        return out

    lower = half(p)
    upper = half(p[::-1])
    hull = np.asarray(lower[:-1] + upper[:-1])
    if len(hull) < 3:
        return np.unique(hull, axis=0)
    return hull


def _centers_on_segment(endpoints: np.ndarray, canvas: tuple[int, int]) -> np.ndarray:
    h, w = canvas
    bits = np.zeros((h, w), dtype=bool)
    a = endpoints[0]
    b = endpoints[-1]
    d = b - a
    xs = np.arange(w) + 0.5
    ys = np.arange(h) + 0.5
    cx = xs[None, :] - a[0]
    cy = ys[:, None] - a[1]
    cross = cx * d[1] - cy * d[0]
    dot = cx * d[0] + cy * d[1]
    l2 = float(d @ d)
    if l2 == 0.0:
        bits[int(a[1] - 0.5), int(a[0] - 0.5)] = True
        return bits
    on = (np.abs(cross) <= _ON_BOUNDARY_EPS * max(1.0, np.sqrt(l2))) & (
        dot >= -_ON_BOUNDARY_EPS
    ) & (dot <= l2 + _ON_BOUNDARY_EPS)
    return bits | on


def coarsen(mask: BinaryMask, op: CoarseningOp) -> BinaryMask:
    """Apply one coarsening operator; see CoarseningOp for the parameter scale.

    closing(r):        dilation then erosion with the exact disk of radius r.
    hull_blend(l):     threshold at 0 of (1-l)*sdf(mask) + l*sdf(hull).
    alpha_smooth(r):   closing(r) restricted to the convex hull.
    blur_threshold(s): Gaussian blur of the indicator, then > 0.5.
    """
    if op.kind == "identity":
        return mask
    if mask.popcount == 0:
        return mask
    if op.kind == "closing":
        return close_disk(mask, op.strength)
    if op.kind == "alpha_smooth":
        # closing and hull are both supersets of the mask, so the restriction
        # stays extensive by construction.
        return _intersect(close_disk(mask, op.strength), convex_hull_mask(mask))
    if op.kind == "hull_blend":
        return _hull_blend(mask, op.strength)
    if op.kind == "blur_threshold":
        return _blur_threshold(mask, op.strength)
    raise ValueError(f"unhandled kind {op.kind!r}")


def _intersect(a: BinaryMask, b: BinaryMask) -> BinaryMask:
    """World-set intersection of two masks."""
    r0 = min(a.origin[0], b.origin[0])
    c0 = min(a.origin[1], b.origin[1])
    r1 = max(a.world_box()[2], b.world_box()[2])
    c1 = max(a.world_box()[3], b.world_box()[3])

    def paste(m: BinaryMask) -> np.ndarray:
        out = np.zeros((r1 - r0, c1 - c0), dtype=bool)
        out[
            m.origin[0] - r0 : m.origin[0] - r0 + m.bits.shape[0],
            m.origin[1] - c0 : m.origin[1] - c0 + m.bits.shape[1],
        ] = m.bits
        return out

    return BinaryMask((r0, c0), paste(a) & paste(b))


def _hull_blend(mask: BinaryMask, lam: float) -> BinaryMask:
    work = mask.cropped()
    hull = convex_hull_mask(work)
    pad = 2
    h, w = hull.bits.shape
    grid_mask = np.zeros((h + 2 * pad, w + 2 * pad), dtype=bool)
    grid_hull = np.zeros_like(grid_mask)
    dr = work.origin[0] - hull.origin[0] + pad
    dc = work.origin[1] - hull.origin[1] + pad
    grid_mask[dr : dr + work.bits.shape[0], dc : dc + work.bits.shape[1]] = work.bits
    grid_hull[pad : pad + h, pad : pad + w] = hull.bits
    blend = (1.0 - lam) * _signed_dist(grid_mask) + lam * _signed_dist(grid_hull)
    return BinaryMask((hull.origin[0] - pad, hull.origin[1] - pad), blend < 0.0)


def _blur_threshold(mask: BinaryMask, sigma: float) -> BinaryMask:
    if sigma == 0.0:
        return mask
    work = mask.cropped()
    pad = int(np.ceil(4 * sigma)) + 1
    field_ = np.pad(work.bits.astype(np.float64), pad)
    blurred = ndi.gaussian_filter(field_, sigma, mode="constant")
    return BinaryMask((work.origin[0] - pad, work.origin[1] - pad), blurred > 0.5)
