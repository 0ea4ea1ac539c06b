"""Procedural stimuli: random polygons and matched concave/convex scenarios.

Polygons come from a radial sampler (angles jittered by `irregularity`, radii
by `spikiness`) rejected until the base shape is strictly convex, after which
rectangular notches are carved into chosen edges; carved vertex runs are the
polygon's concavity spans. Matched pairs share kinematics and an identical
exact-geometry collision time: the concave member takes the notch on its
leading face, the convex member uses the uncarved silhouette shifted along
the motion axis until the continuous-sweep oracle reports the same contact
time.
"""

from __future__ import annotations

import colorsys
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import GenerationExhausted, NoCollision, PairConstructionFailed
from .geometry import (
    Polygon,
    first_contact_time,
    is_convex,
    signed_area,
    validate_polygon,
)
from .rng import SplitMix64

_ATTEMPTS = 1000
_PAIR_ATTEMPTS = 80


def default_palette() -> list[tuple[int, int, int]]:
    """24 evenly spaced bright hues at fixed saturation/value."""
    out = []
    for i in range(24):
        r, g, b = colorsys.hsv_to_rgb(i / 24.0, 0.82, 0.96)
        out.append((int(round(r * 255)), int(round(g * 255)), int(round(b * 255))))
    return out


@dataclass
class GeneratorConfig:
    seed: int = 0
    vertex_range: tuple[int, int] = (5, 12)
    concavity_range: tuple[int, int] = (0, 3)
    irregularity: float = 0.35
    spikiness: float = 0.12
    palette: list[tuple[int, int, int]] = field(default_factory=default_palette)
    canvas: tuple[int, int] = (512, 512)  # (H, W)

    def __post_init__(self):
        if self.vertex_range[0] > self.vertex_range[1] or self.vertex_range[0] < 3:
            raise ValueError("vertex_range must be a nonempty range with min >= 3")
        if self.concavity_range[0] > self.concavity_range[1] or self.concavity_range[0] < 0:
            raise ValueError("concavity_range must be a nonempty range with min >= 0")
        if not (0.0 <= self.irregularity <= 1.0):
            raise ValueError("irregularity must lie in [0, 1]")
        if not (0.0 <= self.spikiness <= 1.0):
            raise ValueError("spikiness must lie in [0, 1]")
        if len(self.palette) != 24:
            raise ValueError("palette must hold exactly 24 colors")
        if self.canvas[0] < 1 or self.canvas[1] < 1:
            raise ValueError("canvas must be positive")

    @property
    def base_radius(self) -> float:
        return 0.17 * min(self.canvas)

    def to_dict(self) -> dict:
        return {
            "seed": int(self.seed),
            "vertex_range": list(self.vertex_range),
            "concavity_range": list(self.concavity_range),
            "irregularity": self.irregularity,
            "spikiness": self.spikiness,
            "palette": [list(c) for c in self.palette],
            "canvas": list(self.canvas),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "GeneratorConfig":
        return cls(
            seed=int(d["seed"]),
            vertex_range=tuple(d["vertex_range"]),
            concavity_range=tuple(d["concavity_range"]),
            irregularity=float(d["irregularity"]),
            spikiness=float(d["spikiness"]),
            palette=[tuple(c) for c in d["palette"]],
            canvas=tuple(d["canvas"]),
        )


@dataclass
class Kinematics:
    """Shared motion parameters of a matched pair; velocities in px/frame."""

    v_agent: tuple[float, float]
    v_patient: tuple[float, float]
    frame_rate: float
    tau_gt: float  # seconds


@dataclass
class Scenario:
    """One 'video': two positioned polygons with known kinematics and TTC."""

    id: str
    agent: Polygon
    patient: Polygon
    agent_position: tuple[float, float]
    patient_position: tuple[float, float]
    v_agent: tuple[float, float]
    v_patient: tuple[float, float]
    frame_rate: float
    tau_gt: float
    condition: str  # "concave" | "convex"
    pair_id: str

    def to_dict(self) -> dict:
        return {
            "id": self.id,
            "agent": self.agent.to_dict(),
            "patient": self.patient.to_dict(),
            "agent_position": [float(v) for v in self.agent_position],
            "patient_position": [float(v) for v in self.patient_position],
            "v_agent": [float(v) for v in self.v_agent],
            "v_patient": [float(v) for v in self.v_patient],
            "frame_rate": float(self.frame_rate),
            "tau_gt": float(self.tau_gt),
            "condition": self.condition,
            "pair_id": self.pair_id,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "Scenario":
        return cls(
            id=d["id"],
            agent=Polygon.from_dict(d["agent"]),
            patient=Polygon.from_dict(d["patient"]),
            agent_position=tuple(d["agent_position"]),
            patient_position=tuple(d["patient_position"]),
            v_agent=tuple(d["v_agent"]),
            v_patient=tuple(d["v_patient"]),
            frame_rate=float(d["frame_rate"]),
            tau_gt=float(d["tau_gt"]),
            condition=d["condition"],
            pair_id=d["pair_id"],
        )


def ground_truth_ttc(scenario: Scenario) -> float:
    """Continuous-time first contact of the exact polygons, in seconds.

    Independent of any rasterization; raises NoCollision for diverging motion.
    """
    t_frames = first_contact_time(
        scenario.agent.vertices + np.asarray(scenario.agent_position),
        np.asarray(scenario.v_agent, dtype=np.float64),
        scenario.patient.vertices + np.asarray(scenario.patient_position),
        np.asarray(scenario.v_patient, dtype=np.float64),
    )
    return t_frames / scenario.frame_rate


# ------------------------------------------------------------ base sampler


def _area_centroid(verts: np.ndarray) -> np.ndarray:
    x, y = verts[:, 0], verts[:, 1]
    xn, yn = np.roll(x, -1), np.roll(y, -1)
    cr = x * yn - xn * y
    a = cr.sum() / 2.0
    cx = float(np.sum((x + xn) * cr) / (6.0 * a))
    cy = float(np.sum((y + yn) * cr) / (6.0 * a))
    return np.array([cx, cy])


def _convex_base(n: int, irregularity: float, spikiness: float, radius: float, rng: SplitMix64):
    """One radial draw, centroid-centered; None unless strictly convex."""
    mean_step = 2.0 * math.pi / n
    steps = np.array([rng.uniform(mean_step * (1 - irregularity), mean_step * (1 + irregularity)) for _ in range(n)])
    steps *= 2.0 * math.pi / steps.sum()
    theta = rng.uniform(0.0, 2.0 * math.pi) + np.concatenate([[0.0], np.cumsum(steps[:-1])])
    radii = np.array([min(max(rng.gauss(radius, spikiness * radius), 0.2 * radius), 1.8 * radius) for _ in range(n)])
    verts = np.stack([radii * np.cos(theta), radii * np.sin(theta)], axis=1)
    if not is_convex(verts):
        return None
    return verts - _area_centroid(verts)


def _carve_edge_notch(verts: np.ndarray, edge: int, center_frac: float, mouth: float, depth: float):
    """Rectangular notch into edge (edge, edge+1), walls along the inward normal.

    Returns (new_vertices, span) where span is the half-open index range of
    the four inserted vertices; geometric validity is the caller's problem.
    """
    n = len(verts)
    a = verts[edge]
    b = verts[(edge + 1) % n]
    e = b - a
    length = float(np.hypot(*e))
    ehat = e / length
    inward = np.array([-ehat[1], ehat[0]])  # CCW interior on the left
    s0 = center_frac * length - mouth / 2.0
    s1 = center_frac * length + mouth / 2.0
    if s0 < 0.04 * length or s1 > 0.96 * length:
        return None
    m1 = a + ehat * s0
    m2 = a + ehat * s1
    f1 = m1 + inward * depth
    f2 = m2 + inward * depth
    new = np.concatenate([verts[: edge + 1], [m1, f1, f2, m2], verts[edge + 1 :]])
    return new, (edge + 1, edge + 5)


def generate_polygon(config: GeneratorConfig, rng: SplitMix64, radius: float | None = None) -> Polygon:
    """Sample one polygon satisfying every structural invariant.

    Vertex count and concavity count are uniform over their configured
    ranges; rejection attempts are capped, so pathological settings (e.g.
    spikiness near 1 with many vertices, where a convex base is vanishingly
    rare) raise GenerationExhausted instead of spinning forever.
    """
    R = config.base_radius if radius is None else radius
    # Counts are drawn once so rejection cannot skew their distributions.
    n = rng.randint(config.vertex_range[0], config.vertex_range[1])
    k = rng.randint(config.concavity_range[0], config.concavity_range[1])
    for _ in range(_ATTEMPTS):
        verts = _convex_base(n, config.irregularity, config.spikiness, R, rng)
        if verts is None:
            continue
        lengths = np.hypot(*(np.roll(verts, -1, axis=0) - verts).T)
        eligible = [i for i in range(n) if lengths[i] >= 0.45 * R]
        if len(eligible) < k:
            continue
        rng.shuffle(eligible)
        chosen = sorted(eligible[:k], reverse=True)
        spans: list[tuple[int, int]] = []
        ok = True
        centroid = np.zeros(2)
        for edge in chosen:
            length = float(lengths[edge])
            mouth = rng.uniform(0.28, 0.5) * length
            d_mid = float(np.hypot(*((verts[edge] + verts[(edge + 1) % len(verts)]) / 2.0 - centroid)))
            depth = rng.uniform(0.3, 0.6) * d_mid
            carved = _carve_edge_notch(verts, edge, rng.uniform(0.35, 0.65), mouth, depth)
            if carved is None:
                ok = False
                break
            verts, span = carved
            spans = [(a + 4, b + 4) if a >= span[0] else (a, b) for a, b in spans]
            spans.append(span)
        if not ok:
            continue
        poly = Polygon(verts, sorted(spans), color_index=rng.randint(0, 23))
        try:
            validate_polygon(poly)
        except ValueError:
            continue
        return poly
    raise GenerationExhausted(
        f"no valid polygon after {_ATTEMPTS} attempts (irregularity={config.irregularity}, "
        f"spikiness={config.spikiness}, vertex_range={config.vertex_range})"
    )


# -------------------------------------------------------------- matched pairs


def _extent_along(verts: np.ndarray, direction: np.ndarray) -> tuple[float, float]:
    proj = verts @ direction
    return float(proj.min()), float(proj.max())


def _carve_motion_notch(verts: np.ndarray, u: np.ndarray, mouth: float, depth: float, margin: float = 2.0):
    """Notch with walls parallel to the motion axis u, floor perpendicular to it.

    The band of half-width mouth/2 is centered on the centroid line y'=0 (in
    motion coordinates x' = v.u, y' = v.u_perp). Returns (vertices, span,
    floor_lo, floor_hi) or None when the leading edge does not span the band.
    """
    up = np.array([-u[1], u[0]])
    x = verts @ u
    y = verts @ up
    n = len(verts)
    h = mouth / 2.0
    edge = None
    for i in range(n):
        j = (i + 1) % n
        if y[i] <= -h - margin and y[j] >= h + margin and (x[i] + x[j]) > 0:
            edge = i
            break
    if edge is None:
        return None
    i, j = edge, (edge + 1) % n
    a, b = verts[i], verts[j]

    def cross_at(yv: float) -> np.ndarray:
        t = (yv - y[i]) / (y[j] - y[i])
        return a + t * (b - a)

    m_lo = cross_at(-h)
    m_hi = cross_at(h)
    x_floor = min(float(m_lo @ u), float(m_hi @ u)) - depth
    if x_floor < 0.12 * max(abs(x).max(), 1.0):
        return None
    f_lo = x_floor * u + (-h) * up
    f_hi = x_floor * u + h * up
    new = np.concatenate([verts[: i + 1], [m_lo, f_lo, f_hi, m_hi], verts[i + 1 :]])
    return new, (i + 1, i + 5), f_lo, f_hi


def _fit_canvas_shift(all_pts: np.ndarray, canvas: tuple[int, int], margin: float):
    """Common translation putting every point inside the canvas, or None."""
    h, w = canvas
    lo = all_pts.min(axis=0)
    hi = all_pts.max(axis=0)
    if hi[0] - lo[0] > w - 2 * margin or hi[1] - lo[1] > h - 2 * margin:
        return None
    # Center the layout.
    target_lo = np.array([(w - (hi[0] - lo[0])) / 2.0, (h - (hi[1] - lo[1])) / 2.0])
    return target_lo - lo


def make_matched_pair(
    config: GeneratorConfig,
    kinematics: Kinematics,
    rng: SplitMix64,
    pair_id: str = "pair0000",
    notch_width: float = 14.0,
    notch_depth: float = 16.0,
    patient_width_frac: float = 0.55,
) -> tuple[Scenario, Scenario]:
    """Build one concave/convex scenario pair with identical exact TTC.

    The concave member carries a motion-aligned notch on the agent's leading
    face and first contact lands on the notch floor; the convex member reuses
    the uncarved silhouette translated along the motion axis so both members'
    continuous-geometry contact times equal tau_gt (verified against the
    sweep oracle to < 1e-6 s). The patient is scaled so its extent
    perpendicular to the relative velocity stays strictly inside the mouth.
    """
    v_a = np.asarray(kinematics.v_agent, dtype=np.float64)
    v_p = np.asarray(kinematics.v_patient, dtype=np.float64)
    v_rel = v_a - v_p
    speed = float(np.hypot(*v_rel))
    if speed <= 0:
        raise PairConstructionFailed("relative velocity must be nonzero")
    if kinematics.tau_gt <= 0 or kinematics.frame_rate <= 0:
        raise PairConstructionFailed("tau_gt and frame_rate must be positive")
    u = v_rel / speed
    up = np.array([-u[1], u[0]])
    n_target = kinematics.tau_gt * kinematics.frame_rate  # frames

    last_reason = "no attempt succeeded"
    for _ in range(_PAIR_ATTEMPTS):
        n = rng.randint(config.vertex_range[0], config.vertex_range[1])
        base = _convex_base(n, config.irregularity, config.spikiness, config.base_radius, rng)
        if base is None:
            last_reason = "convex base rejection"
            continue
        carved = _carve_motion_notch(base, u, notch_width, notch_depth)
        if carved is None:
            last_reason = "leading edge cannot host the notch"
            continue
        cc_verts, span, f_lo, f_hi = carved
        agent_cc = Polygon(cc_verts, [span], color_index=rng.randint(0, 23))
        try:
            validate_polygon(agent_cc)
        except ValueError:
            last_reason = "carved agent failed validation"
            continue

        n_p = rng.randint(config.vertex_range[0], config.vertex_range[1])
        p_base = _convex_base(n_p, config.irregularity, config.spikiness, config.base_radius / 3.0, rng)
        if p_base is None:
            last_reason = "patient base rejection"
            continue
        lo_y, hi_y = _extent_along(p_base, up)
        target_w = patient_width_frac * notch_width
        p_verts = p_base * (target_w / (hi_y - lo_y))
        p_verts = p_verts - _area_centroid(p_verts)
        patient = Polygon(p_verts, [], color_index=rng.randint(0, 23))

        # Rough placement: patient centered on the notch axis, ahead of the floor.
        agent_pos = np.zeros(2)
        gap0 = n_target * speed
        x_floor = float(f_lo @ u)
        patient_pos = (x_floor + gap0 + config.base_radius) * u

        # Axial shifts change every crossing time by exactly shift/speed, so
        # this converges after one step from any non-overlapping state (two
        # when the start pose overlaps and contact time clamps to zero).
        tol = 1e-7 * max(1.0, n_target)
        try:
            for _ in range(4):
                t_now = first_contact_time(cc_verts + agent_pos, v_a, p_verts + patient_pos, v_p)
                if abs(t_now - n_target) <= tol:
                    break
                patient_pos = patient_pos + (n_target - t_now) * speed * u
        except NoCollision:
            last_reason = "initial placement does not collide"
            continue
        t_cc, contact = first_contact_time(
            cc_verts + agent_pos, v_a, p_verts + patient_pos, v_p, return_point=True
        )
        if abs(t_cc - n_target) > tol:
            last_reason = f"equalization residual {abs(t_cc - n_target):.3g} frames"
            continue

        # The contact must land on the notch floor (in the agent frame at t_cc).
        floor_lo_t = f_lo + agent_pos + t_cc * v_a
        s_along = float((contact - floor_lo_t) @ up)
        off_axis = float((contact - floor_lo_t) @ u)
        if not (-1e-6 <= s_along <= notch_width + 1e-6) or abs(off_axis) > 1e-6:
            last_reason = "first contact missed the notch floor"
            continue

        # Convex twin: uncarved silhouette, pushed back along the motion axis.
        agent_pos_cx = agent_pos
        try:
            for _ in range(4):
                t_cx = first_contact_time(base + agent_pos_cx, v_a, p_verts + patient_pos, v_p)
                if abs(t_cx - n_target) <= tol:
                    break
                agent_pos_cx = agent_pos_cx - (n_target - t_cx) * speed * u
        except NoCollision:
            last_reason = "convex twin does not collide"
            continue
        t_cx2 = first_contact_time(base + agent_pos_cx, v_a, p_verts + patient_pos, v_p)
        if abs(t_cx2 - n_target) > tol:
            last_reason = f"convex equalization residual {abs(t_cx2 - n_target):.3g} frames"
            continue
        agent_cx = Polygon(base.copy(), [], color_index=agent_cc.color_index)

        # Fit everything on the canvas with one common shift (TTC-invariant).
        pts = np.concatenate(
            [
                cc_verts + agent_pos,
                base + agent_pos_cx,
                p_verts + patient_pos,
            ]
        )
        shift = _fit_canvas_shift(pts, config.canvas, margin=4.0)
        if shift is None:
            last_reason = "layout exceeds canvas"
            continue

        concave = Scenario(
            id=f"{pair_id}-concave",
            agent=agent_cc,
            patient=patient,
            agent_position=tuple(agent_pos + shift),
            patient_position=tuple(patient_pos + shift),
            v_agent=tuple(v_a),
            v_patient=tuple(v_p),
            frame_rate=kinematics.frame_rate,
            tau_gt=kinematics.tau_gt,
            condition="concave",
            pair_id=pair_id,
        )
        convex = Scenario(
            id=f"{pair_id}-convex",
            agent=agent_cx,
            patient=patient,
            agent_position=tuple(agent_pos_cx + shift),
            patient_position=tuple(patient_pos + shift),
            v_agent=tuple(v_a),
            v_patient=tuple(v_p),
            frame_rate=kinematics.frame_rate,
            tau_gt=kinematics.tau_gt,
            condition="convex",
            pair_id=pair_id,
        )
        return concave, convex

    raise PairConstructionFailed(f"gave up after {_PAIR_ATTEMPTS} attempts: {last_reason}")


def render_frame(scenario: Scenario, config: GeneratorConfig) -> "np.ndarray":
    """Initial RGB frame: both polygons flat-colored on black."""
    from .masks import rasterize

    h, w = config.canvas
    img = np.zeros((h, w, 3), dtype=np.uint8)
    for poly, pos in ((scenario.agent, scenario.agent_position), (scenario.patient, scenario.patient_position)):
        bits = rasterize(poly, pos, config.canvas).bits
        img[bits] = config.palette[poly.color_index]
    return img


def render_dataset(config: GeneratorConfig, n_train: int, n_val: int, out_dir) -> dict:
    """Write single-polygon training images with paired ground-truth masks.

    Every draw runs on its own child RNG stream, so the dataset is
    reproducible per-image and safe to regenerate in parallel. No vertex
    list is shared across splits (enforced, not just unlikely).
    """
    from pathlib import Path

    from . import formats
    from .masks import rasterize
    from .rng import derive_seed

    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    h, w = config.canvas
    items = []
    seen_split: dict[bytes, str] = {}
    for i in range(n_train + n_val):
        split = "train" if i < n_train else "val"
        child_seed = derive_seed(config.seed, i)
        rng = SplitMix64(child_seed)
        poly = pos = None
        for _ in range(50):
            poly = generate_polygon(config, rng)
            key = poly.vertices.tobytes()
            if seen_split.get(key, split) != split:
                continue  # same shape surfaced in the other split: redraw
            lo = poly.vertices.min(axis=0)
            hi = poly.vertices.max(axis=0)
            placed = False
            for _ in range(20):
                jitter = np.array(
                    [rng.uniform(-0.12, 0.12) * w, rng.uniform(-0.12, 0.12) * h]
                )
                pos = np.array([w / 2.0, h / 2.0]) + jitter
                if (lo + pos >= 2.0).all() and (hi + pos <= np.array([w, h]) - 2.0).all():
                    placed = True
                    break
            if placed:
                break
        else:
            raise GenerationExhausted(f"draw {i}: could not place a unique polygon")
        seen_split[poly.vertices.tobytes()] = split
        mask = rasterize(poly, pos, config.canvas)
        img = np.zeros((h, w, 3), dtype=np.uint8)
        img[mask.bits] = config.palette[poly.color_index]
        image_path = f"images/{split}_{i:05d}.png"
        mask_path = f"masks/{split}_{i:05d}.png"
        provenance = {"seed": child_seed, "draw_index": i}
        formats.write_image_png(out / image_path, img, provenance)
        formats.write_image_png(out / mask_path, mask.bits.astype(np.uint8) * 255, provenance)
        items.append(
            {
                "image_path": image_path,
                "mask_path": mask_path,
                "split": split,
                "seed": child_seed,
                "draw_index": i,
                "vertex_count": len(poly.vertices) - 4 * len(poly.concavity_spans),
                "concavity_count": len(poly.concavity_spans),
            }
        )
    manifest = {"seed": config.seed, "config": config.to_dict(), "items": items}
    formats.write_json(out / "manifest.json", manifest)
    return manifest


def make_plain_scenario(
    config: GeneratorConfig,
    kinematics: Kinematics,
    rng: SplitMix64,
    scenario_id: str = "scenario",
    condition: str = "convex",
) -> Scenario:
    """Single scenario with two convex polygons and an exact tau_gt contact."""
    v_a = np.asarray(kinematics.v_agent, dtype=np.float64)
    v_p = np.asarray(kinematics.v_patient, dtype=np.float64)
    v_rel = v_a - v_p
    speed = float(np.hypot(*v_rel))
    if speed <= 0:
        raise PairConstructionFailed("relative velocity must be nonzero")
    u = v_rel / speed
    n_target = kinematics.tau_gt * kinematics.frame_rate

    for _ in range(_PAIR_ATTEMPTS):
        a = _convex_base(
            rng.randint(*config.vertex_range), config.irregularity, config.spikiness, config.base_radius, rng
        )
        p = _convex_base(
            rng.randint(*config.vertex_range), config.irregularity, config.spikiness, config.base_radius / 2.5, rng
        )
        if a is None or p is None:
            continue
        agent_pos = np.zeros(2)
        patient_pos = (n_target * speed + 2.0 * config.base_radius) * u
        tol = 1e-7 * max(1.0, n_target)
        try:
            for _ in range(4):
                t_now = first_contact_time(a + agent_pos, v_a, p + patient_pos, v_p)
                if abs(t_now - n_target) <= tol:
                    break
                patient_pos = patient_pos + (n_target - t_now) * speed * u
        except NoCollision:
            continue
        t_fix = first_contact_time(a + agent_pos, v_a, p + patient_pos, v_p)
        if abs(t_fix - n_target) > tol:
            continue
        shift = _fit_canvas_shift(np.concatenate([a + agent_pos, p + patient_pos]), config.canvas, 4.0)
        if shift is None:
            continue
        return Scenario(
            id=scenario_id,
            agent=Polygon(a, [], color_index=rng.randint(0, 23)),
            patient=Polygon(p, [], color_index=rng.randint(0, 23)),
            agent_position=tuple(agent_pos + shift),
            patient_position=tuple(patient_pos + shift),
            v_agent=tuple(v_a),
            v_patient=tuple(v_p),
            frame_rate=kinematics.frame_rate,
            tau_gt=kinematics.tau_gt,
            condition=condition,
            pair_id=scenario_id,
        )
    raise PairConstructionFailed("could not place a plain scenario")
