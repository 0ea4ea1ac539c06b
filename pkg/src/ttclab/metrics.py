"""Human-response ingestion and concavity-effect alignment metrics.

The chain is: per-participant responses -> per-video means -> per-(tau,
condition) cells -> concavity effect delta(tau) = cell(concave) -
cell(convex) -> alignment error E(tau) = |delta_model - delta_human| and its
mean over the shared tau set. Aggregation always iterates in sorted key
order so results are bit-stable regardless of input ordering or scheduling.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .errors import (
    EmptyIntersection,
    MissingCell,
    SchemaError,
    TooFewPoints,
    UnknownVideo,
)
from .formats import read_csv, write_csv
from .rng import SplitMix64

HUMAN_CSV_COLUMNS = ["video_id", "participant_id", "ttc_response_s"]

CONCAVE = "concave"
CONVEX = "convex"


@dataclass
class HumanResponseTable:
    rows: list[tuple[str, str, float]]  # (video_id, participant_id, ttc_response_s)
    video_meta: dict[str, dict]
    n_dropped: int = 0

    @property
    def participant_count(self) -> int:
        return len({pid for _, pid, _ in self.rows})


@dataclass
class ConditionTable:
    """Mean TTC per (tau, condition); only taus with both conditions are kept."""

    cells: dict[tuple[float, str], float]
    counts: dict[tuple[float, str], int]
    skipped_taus: list[float] = field(default_factory=list)

    @property
    def taus(self) -> list[float]:
        return sorted({tau for tau, _ in self.cells})


@dataclass
class AlignmentReport:
    per_tau: dict[float, dict]
    mean_error_s: float
    dropped_taus: list[float] = field(default_factory=list)

    @property
    def tau_set(self) -> list[float]:
        return sorted(self.per_tau)


@dataclass
class SweepResult:
    points: list[dict]  # {"param_value", "mean_error_s", "n_excluded"}
    argmin_index: int
    is_u_shaped: bool
    margin_s: float


def load_video_meta(payload: dict) -> dict[str, dict]:
    """Validate the video-meta mapping {video_id -> {tau_gt_s, condition, ...}}."""
    meta = {}
    for vid, entry in payload.items():
        if "tau_gt_s" not in entry or "condition" not in entry:
            raise SchemaError(f"video {vid}: meta needs tau_gt_s and condition")
        if entry["condition"] not in (CONCAVE, CONVEX):
            raise SchemaError(f"video {vid}: condition must be concave or convex")
        meta[str(vid)] = dict(entry)
    return meta


def load_human_csv(path, video_meta: dict[str, dict]) -> HumanResponseTable:
    """Read and validate the human response table.

    Rows with missing or non-positive responses are dropped and counted;
    rows naming a video absent from the metadata raise UnknownVideo.
    """
    header, raw = read_csv(path)
    missing = [c for c in HUMAN_CSV_COLUMNS if c not in header]
    if missing:
        raise SchemaError(f"{path}: missing columns {missing}")
    rows = []
    dropped = 0
    for r in raw:
        vid = r["video_id"]
        if vid not in video_meta:
            raise UnknownVideo(f"{path}: video {vid!r} not present in metadata")
        try:
            v = float(r["ttc_response_s"])
        except (TypeError, ValueError):
            dropped += 1
            continue
        if not (v > 0) or math.isnan(v) or math.isinf(v):
            dropped += 1
            continue
        rows.append((vid, r["participant_id"], v))
    return HumanResponseTable(rows=rows, video_meta=video_meta, n_dropped=dropped)


def write_human_csv(path, rows: list[tuple[str, str, float]], provenance: dict | None = None) -> None:
    write_csv(path, HUMAN_CSV_COLUMNS, [[v, p, t] for v, p, t in rows], provenance)


def per_video_mean(table: HumanResponseTable) -> dict[str, float]:
    """Arithmetic mean response per video, summed in row order."""
    sums: dict[str, float] = {}
    counts: dict[str, int] = {}
    for vid, _, v in table.rows:
        sums[vid] = sums.get(vid, 0.0) + v
        counts[vid] = counts.get(vid, 0) + 1
    return {vid: sums[vid] / counts[vid] for vid in sorted(sums)}


def condition_average(per_video: dict[str, float], video_meta: dict[str, dict]) -> ConditionTable:
    """Mean per (tau_gt, condition) cell over per-video values.

    Taus lacking one of the two conditions are skipped and recorded; an
    entirely empty result raises MissingCell.
    """
    bucket: dict[tuple[float, str], list[float]] = {}
    for vid in sorted(per_video):
        if vid not in video_meta:
            raise UnknownVideo(f"video {vid!r} not present in metadata")
        m = video_meta[vid]
        key = (float(m["tau_gt_s"]), m["condition"])
        bucket.setdefault(key, []).append(per_video[vid])
    taus = sorted({tau for tau, _ in bucket})
    cells = {}
    counts = {}
    skipped = []
    for tau in taus:
        kc, kx = (tau, CONCAVE), (tau, CONVEX)
        if kc not in bucket or kx not in bucket:
            skipped.append(tau)
            continue
        for key in (kc, kx):
            vals = bucket[key]
            cells[key] = sum(vals) / len(vals)
            counts[key] = len(vals)
    if not cells:
        raise MissingCell("no tau has both concave and convex videos")
    return ConditionTable(cells=cells, counts=counts, skipped_taus=skipped)


def concavity_effect(table: ConditionTable) -> dict[float, float]:
    """delta(tau) = cell(tau, concave) - cell(tau, convex)."""
    if not table.cells:
        raise MissingCell("empty condition table")
    return {
        tau: table.cells[(tau, CONCAVE)] - table.cells[(tau, CONVEX)]
        for tau in table.taus
    }


def alignment_error(
    delta_model: dict[float, float],
    delta_human: dict[float, float],
    model_counts: dict[tuple[float, str], int] | None = None,
    n_excluded: dict[float, int] | None = None,
) -> AlignmentReport:
    """Per-tau E(tau) = |delta_model - delta_human| and its mean over shared taus."""
    shared = sorted(set(delta_model) & set(delta_human))
    if not shared:
        raise EmptyIntersection("model and human tables share no tau values")
    dropped = sorted((set(delta_model) | set(delta_human)) - set(shared))
    per_tau = {}
    for tau in shared:
        err = abs(delta_model[tau] - delta_human[tau])
        per_tau[tau] = {
            "delta_human_s": delta_human[tau],
            "delta_model_s": delta_model[tau],
            "error_s": err,
            "n_concave": (model_counts or {}).get((tau, CONCAVE), 0),
            "n_convex": (model_counts or {}).get((tau, CONVEX), 0),
            "n_excluded": (n_excluded or {}).get(tau, 0),
        }
    mean_err = sum(per_tau[tau]["error_s"] for tau in shared) / len(shared)
    return AlignmentReport(per_tau=per_tau, mean_error_s=mean_err, dropped_taus=dropped)


def detect_u_shape(mean_errors: list[float], margin_s: float = 0.02) -> bool:
    """True iff the argmin is strictly interior and both endpoints clear it by margin."""
    if len(mean_errors) < 3:
        raise TooFewPoints(f"need >= 3 points, got {len(mean_errors)}")
    amin = min(range(len(mean_errors)), key=lambda i: mean_errors[i])
    if amin == 0 or amin == len(mean_errors) - 1:
        return False
    lo = mean_errors[amin]
    return (mean_errors[0] - lo) >= margin_s and (mean_errors[-1] - lo) >= margin_s


def synth_human_rows(
    video_meta: dict[str, dict],
    participants: int,
    bias_concave: float,
    bias_convex: float,
    sigma: float,
    seed: int,
) -> list[tuple[str, str, float]]:
    """Synthetic stand-in responses: tau_gt + condition bias + Gaussian noise.

    Response magnitudes are caller-supplied; nothing here encodes a
    particular effect size. Draws that land non-positive are redrawn.
    """
    rng = SplitMix64(seed)
    rows = []
    for vid in sorted(video_meta):
        m = video_meta[vid]
        bias = bias_concave if m["condition"] == CONCAVE else bias_convex
        for p in range(participants):
            value = float(m["tau_gt_s"]) + bias + rng.gauss(0.0, sigma)
            while value <= 0.0:
                value = float(m["tau_gt_s"]) + bias + rng.gauss(0.0, sigma)
            rows.append((vid, f"p{p:03d}", value))
    return rows


def human_deltas(table: HumanResponseTable) -> tuple[dict[float, float], ConditionTable]:
    """Full human chain: per-video means -> condition cells -> deltas."""
    means = per_video_mean(table)
    cond = condition_average(means, table.video_meta)
    return concavity_effect(cond), cond


def model_ttc_for_scenarios(scenarios, op, horizon_s: float, canvas: tuple[int, int]):
    """Exact-raster TTC per scenario under one coarsening operator.

    Returns (per_video values, excluded counts keyed by tau). Scenarios whose
    masks never overlap within the horizon are excluded, not failed.
    """
    from .errors import NoCollisionWithinHorizon, TooFewObjects
    from .masks import coarsen, rasterize
    from .ttc import scenario_ttc

    per_video: dict[str, float] = {}
    excluded: dict[float, int] = {}
    for sc in scenarios:
        m_agent = coarsen(rasterize(sc.agent, sc.agent_position, canvas), op)
        m_patient = coarsen(rasterize(sc.patient, sc.patient_position, canvas), op)
        try:
            result = scenario_ttc(sc, (m_agent, m_patient), horizon_s)
            per_video[sc.id] = result.ttc_seconds
        except (NoCollisionWithinHorizon, TooFewObjects):
            excluded[float(sc.tau_gt)] = excluded.get(float(sc.tau_gt), 0) + 1
    return per_video, excluded


def scenario_video_meta(scenarios) -> dict[str, dict]:
    return {
        sc.id: {
            "tau_gt_s": float(sc.tau_gt),
            "condition": sc.condition,
            "pair_id": sc.pair_id,
            "v_agent": [float(v) for v in sc.v_agent],
            "v_patient": [float(v) for v in sc.v_patient],
            "frame_rate": float(sc.frame_rate),
        }
        for sc in scenarios
    }


def run_sweep(
    scenarios,
    human: HumanResponseTable,
    ops,
    horizon_s: float = 10.0,
    canvas: tuple[int, int] = (512, 512),
    margin_s: float = 0.02,
) -> SweepResult:
    """Mean alignment error per coarsening strength, with a U-shape verdict.

    For each operator the exact scenario masks are coarsened, swept to a
    model TTC, aggregated into concavity effects, and scored against the
    human effects; points arrive sorted by operator strength.
    """
    ops = sorted(ops, key=lambda o: o.strength)
    delta_h, _ = human_deltas(human)
    meta = scenario_video_meta(scenarios)
    points = []
    for op in ops:
        per_video, excluded = model_ttc_for_scenarios(scenarios, op, horizon_s, canvas)
        cond = condition_average(per_video, meta)
        delta_m = concavity_effect(cond)
        report = alignment_error(delta_m, delta_h, cond.counts, excluded)
        points.append(
            {
                "param_value": op.strength,
                "mean_error_s": report.mean_error_s,
                "n_excluded": sum(excluded.values()),
            }
        )
    errors = [p["mean_error_s"] for p in points]
    argmin = min(range(len(errors)), key=lambda i: errors[i])
    u_shaped = detect_u_shape(errors, margin_s) if len(errors) >= 3 else False
    return SweepResult(points=points, argmin_index=argmin, is_u_shaped=u_shaped, margin_s=margin_s)
