"""Command-line orchestration.

Subcommands: gen-dataset, gen-scenarios, gen-human, run-ttc, compare, sweep.
Exit codes: 0 success, 1 runtime failure, 2 usage error. All outputs embed
the seed and normalized configuration and are byte-identical across reruns.
"""

from __future__ import annotations

import argparse
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from . import formats, metrics
from .errors import NoCollisionWithinHorizon, TooFewObjects, TtclabError
from .masks import CoarseningOp, coarsen, mask_from_probability, rasterize, two_largest
from .metrics import load_human_csv, load_video_meta, scenario_video_meta
from .rng import SplitMix64, derive_seed
from .stimulus import (
    GeneratorConfig,
    Kinematics,
    Scenario,
    make_matched_pair,
    render_dataset,
    render_frame,
)
from .ttc import scenario_ttc

DEFAULT_HORIZON_S = 10.0


def _add_generator_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--canvas", type=int, nargs=2, default=[512, 512], metavar=("H", "W"))
    p.add_argument("--vertex-range", type=int, nargs=2, default=[5, 12], metavar=("MIN", "MAX"))
    p.add_argument("--concavity-range", type=int, nargs=2, default=[0, 3], metavar=("MIN", "MAX"))
    p.add_argument("--irregularity", type=float, default=0.35)
    p.add_argument("--spikiness", type=float, default=0.12)


def _config_from_args(args, concavity_range=None) -> GeneratorConfig:
    return GeneratorConfig(
        seed=args.seed,
        vertex_range=tuple(args.vertex_range),
        concavity_range=tuple(concavity_range or args.concavity_range),
        irregularity=args.irregularity,
        spikiness=args.spikiness,
        canvas=tuple(args.canvas),
    )


def cmd_gen_dataset(args) -> int:
    config = _config_from_args(args)
    manifest = render_dataset(config, args.train, args.val, args.out)
    print(f"wrote {len(manifest['items'])} image/mask pairs to {args.out}")
    return 0


def cmd_gen_scenarios(args) -> int:
    taus = []
    for raw in args.taus.split(","):
        v = float(raw)
        if v in taus:
            print(f"warning: duplicate tau {v:g} dropped", file=sys.stderr)
            continue
        taus.append(v)
    if args.pairs > 0 and not taus:
        print("error: --taus must provide at least one value", file=sys.stderr)
        return 2
    config = _config_from_args(args, concavity_range=(1, 1))
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    angle = np.deg2rad(args.angle)
    v_agent = (args.speed * float(np.cos(angle)), args.speed * float(np.sin(angle)))
    scenario_entries = []
    scenarios = []
    for i in range(args.pairs):
        tau = taus[i % len(taus)]
        kin = Kinematics(v_agent=v_agent, v_patient=(0.0, 0.0), frame_rate=args.frame_rate, tau_gt=tau)
        rng = SplitMix64(derive_seed(args.seed, i))
        concave, convex = make_matched_pair(
            config,
            kin,
            rng,
            pair_id=f"pair{i:04d}",
            notch_width=args.notch_width,
            notch_depth=args.notch_depth,
            patient_width_frac=args.patient_frac,
        )
        scenarios.extend([concave, convex])
    for sc in scenarios:
        entry = sc.to_dict()
        entry["agent_mask"] = f"masks/{sc.id}-agent.png"
        entry["patient_mask"] = f"masks/{sc.id}-patient.png"
        prov = {"seed": args.seed, "scenario": sc.id}
        formats.write_mask_png(out / entry["agent_mask"], rasterize(sc.agent, sc.agent_position, config.canvas), prov)
        formats.write_mask_png(
            out / entry["patient_mask"], rasterize(sc.patient, sc.patient_position, config.canvas), prov
        )
        if args.frames:
            entry["frame"] = f"frames/{sc.id}.png"
            formats.write_image_png(out / entry["frame"], render_frame(sc, config), prov)
        scenario_entries.append(entry)
    manifest = {
        "seed": args.seed,
        "config": config.to_dict(),
        "params": {
            "pairs": args.pairs,
            "taus": taus,
            "speed": args.speed,
            "angle_deg": args.angle,
            "frame_rate": args.frame_rate,
            "notch_width": args.notch_width,
            "notch_depth": args.notch_depth,
            "patient_frac": args.patient_frac,
        },
        "scenarios": scenario_entries,
    }
    formats.write_json(out / "manifest.json", manifest)
    formats.write_json(out / "meta.json", scenario_video_meta(scenarios))
    print(f"wrote {len(scenarios)} scenarios ({args.pairs} pairs) to {out}")
    return 0


def cmd_gen_human(args) -> int:
    meta = load_video_meta(formats.read_json(args.meta))
    rows = metrics.synth_human_rows(
        meta, args.participants, args.bias_concave, args.bias_convex, args.sigma, args.seed
    )
    provenance = {
        "seed": args.seed,
        "participants": args.participants,
        "bias_concave": args.bias_concave,
        "bias_convex": args.bias_convex,
        "sigma": args.sigma,
    }
    metrics.write_human_csv(args.out, rows, provenance)
    print(f"wrote {len(rows)} responses to {args.out}")
    return 0


def _load_scenarios(manifest_path: str) -> tuple[dict, GeneratorConfig, list[Scenario]]:
    manifest = formats.read_json(manifest_path)
    config = GeneratorConfig.from_dict(manifest["config"])
    scenarios = [Scenario.from_dict(e) for e in manifest["scenarios"]]
    return manifest, config, scenarios


def _assign_components(fg_mask, scenario: Scenario):
    """Split a foreground mask into (agent, patient) by proximity to the
    known frame-0 object positions."""
    m1, m2 = two_largest(fg_mask)

    def centroid(m):
        cells = m.set_cells()
        return cells.mean(axis=0) + 0.5  # (row, col)

    def anchor(poly, pos):
        c = poly.vertices.mean(axis=0) + np.asarray(pos)
        return np.array([c[1], c[0]])  # (row, col) from (x, y)

    a1 = np.hypot(*(centroid(m1) - anchor(scenario.agent, scenario.agent_position)))
    p2 = np.hypot(*(centroid(m2) - anchor(scenario.patient, scenario.patient_position)))
    a2 = np.hypot(*(centroid(m2) - anchor(scenario.agent, scenario.agent_position)))
    p1 = np.hypot(*(centroid(m1) - anchor(scenario.patient, scenario.patient_position)))
    if a1 + p2 <= a2 + p1:
        return m1, m2
    return m2, m1


def _scenario_masks(entry: dict, scenario: Scenario, base: Path, args, config: GeneratorConfig):
    if args.prob_dir:
        pmap = formats.read_pmap(Path(args.prob_dir) / f"{scenario.id}.pmap")
        return _assign_components(mask_from_probability(pmap), scenario)
    if args.fg_dir:
        fg = formats.read_mask_png(Path(args.fg_dir) / f"{scenario.id}.png")
        return _assign_components(fg, scenario)
    if "agent_mask" in entry:
        return (
            formats.read_mask_png(base / entry["agent_mask"]),
            formats.read_mask_png(base / entry["patient_mask"]),
        )
    return (
        rasterize(scenario.agent, scenario.agent_position, config.canvas),
        rasterize(scenario.patient, scenario.patient_position, config.canvas),
    )


def _ttc_row(payload) -> dict:
    entry, args_ns, base, config = payload
    scenario = Scenario.from_dict(entry)
    row = {
        "scenario_id": scenario.id,
        "pair_id": scenario.pair_id,
        "condition": scenario.condition,
        "tau_gt_s": float(scenario.tau_gt),
        "ttc_model_s": None,
        "first_overlap_frame": None,
        "collided": False,
    }
    try:
        m_agent, m_patient = _scenario_masks(entry, scenario, base, args_ns, config)
        if args_ns.coarsen:
            op = CoarseningOp.parse(args_ns.coarsen)
            m_agent = coarsen(m_agent, op)
            m_patient = coarsen(m_patient, op)
        result = scenario_ttc(scenario, (m_agent, m_patient), args_ns.horizon)
        row.update(
            ttc_model_s=result.ttc_seconds,
            first_overlap_frame=result.first_overlap_frame,
            collided=True,
        )
    except (NoCollisionWithinHorizon, TooFewObjects) as exc:
        print(f"scenario {scenario.id}: excluded ({exc})", file=sys.stderr)
    return row


def cmd_run_ttc(args) -> int:
    manifest, config, scenarios = _load_scenarios(args.scenarios)
    base = Path(args.scenarios).parent
    payloads = [(entry, args, base, config) for entry in manifest["scenarios"]]
    if args.jobs > 1 and payloads:
        with ProcessPoolExecutor(max_workers=args.jobs) as pool:
            rows = list(pool.map(_ttc_row, payloads))
    else:
        rows = [_ttc_row(p) for p in payloads]
    provenance = {
        "seed": manifest.get("seed"),
        "scenarios": str(args.scenarios),
        "coarsen": args.coarsen,
        "horizon_s": args.horizon,
    }
    formats.write_ttc_csv(args.out, rows, provenance)
    n_ok = sum(1 for r in rows if r["collided"])
    print(f"wrote {len(rows)} rows ({len(rows) - n_ok} excluded) to {args.out}")
    return 0


def cmd_compare(args) -> int:
    meta = load_video_meta(formats.read_json(args.meta))
    human = load_human_csv(args.human, meta)
    delta_h, cond_h = metrics.human_deltas(human)
    model_rows = formats.read_ttc_csv(args.model)
    per_video = {}
    excluded: dict[float, int] = {}
    for r in model_rows:
        if r["collided"]:
            per_video[r["scenario_id"]] = r["ttc_model_s"]
        else:
            tau = r["tau_gt_s"]
            excluded[tau] = excluded.get(tau, 0) + 1
    cond_m = metrics.condition_average(per_video, meta)
    delta_m = metrics.concavity_effect(cond_m)
    report = metrics.alignment_error(delta_m, delta_h, cond_m.counts, excluded)
    out = Path(args.out)
    rows = []
    for tau in report.tau_set:
        e = report.per_tau[tau]
        rows.append(
            [tau, e["delta_human_s"], e["delta_model_s"], e["error_s"], e["n_concave"], e["n_convex"], e["n_excluded"]]
        )
    rows.append(["summary", None, None, report.mean_error_s, None, None, None])
    provenance = {"model": str(args.model), "human": str(args.human)}
    formats.write_csv(
        out / "report.csv",
        ["tau_gt_s", "delta_human_s", "delta_model_s", "error_s", "n_concave", "n_convex", "n_excluded"],
        rows,
        provenance,
    )
    formats.write_json(
        out / "report.json",
        {
            "mean_error_s": report.mean_error_s,
            "per_tau": {repr(t): report.per_tau[t] for t in report.tau_set},
            "dropped_taus": report.dropped_taus,
            "provenance": provenance,
        },
    )
    print(f"mean_error_s={report.mean_error_s!r}")
    return 0


def cmd_sweep(args) -> int:
    manifest, config, scenarios = _load_scenarios(args.scenarios)
    meta = load_video_meta(formats.read_json(args.meta)) if args.meta else scenario_video_meta(scenarios)
    human = load_human_csv(args.human, meta)
    ops = [CoarseningOp(args.kind, float(s)) for s in args.strengths.split(",")]
    result = metrics.run_sweep(
        scenarios, human, ops, horizon_s=args.horizon, canvas=config.canvas, margin_s=args.margin
    )
    out = Path(args.out)
    provenance = {
        "seed": manifest.get("seed"),
        "kind": args.kind,
        "strengths": args.strengths,
        "margin_s": args.margin,
        "horizon_s": args.horizon,
    }
    formats.write_csv(
        out / "sweep.csv",
        ["param_value", "mean_error_s", "n_excluded"],
        [[p["param_value"], p["mean_error_s"], p["n_excluded"]] for p in result.points],
        provenance,
    )
    verdict = (
        f"u_shaped={str(result.is_u_shaped).lower()} "
        f"argmin={result.points[result.argmin_index]['param_value']:g}"
    )
    (out / "verdict.txt").write_text(verdict + "\n", encoding="utf-8")
    print(verdict)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ttclab", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen-dataset", help="render a single-polygon image/mask dataset")
    _add_generator_flags(p)
    p.add_argument("--train", type=int, required=True)
    p.add_argument("--val", type=int, required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_gen_dataset)

    p = sub.add_parser("gen-scenarios", help="generate matched concave/convex scenario pairs")
    _add_generator_flags(p)
    p.add_argument("--pairs", type=int, required=True)
    p.add_argument("--taus", default="0.5,1.0,1.5,2.0", help="comma-separated ground-truth TTCs (s)")
    p.add_argument("--speed", type=float, default=1.0, help="agent speed, px/frame")
    p.add_argument("--angle", type=float, default=0.0, help="motion direction, degrees")
    p.add_argument("--frame-rate", type=float, default=60.0)
    p.add_argument("--notch-width", type=float, default=14.0)
    p.add_argument("--notch-depth", type=float, default=16.0)
    p.add_argument("--patient-frac", type=float, default=0.55)
    p.add_argument("--frames", action=argparse.BooleanOptionalAction, default=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_gen_scenarios)

    p = sub.add_parser("gen-human", help="synthesize a stand-in human response table")
    p.add_argument("--meta", required=True)
    p.add_argument("--participants", type=int, default=24)
    p.add_argument("--bias-concave", type=float, required=True)
    p.add_argument("--bias-convex", type=float, default=0.0)
    p.add_argument("--sigma", type=float, default=0.05)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_gen_human)

    p = sub.add_parser("run-ttc", help="simulate mask-sweep TTC for every scenario")
    p.add_argument("--scenarios", required=True, help="scenario manifest JSON")
    p.add_argument("--out", required=True, help="output CSV")
    p.add_argument("--horizon", type=float, default=DEFAULT_HORIZON_S)
    p.add_argument("--coarsen", default=None, help="kind:strength, e.g. closing:8")
    p.add_argument("--prob-dir", default=None, help="directory of <id>.pmap model outputs")
    p.add_argument("--fg-dir", default=None, help="directory of <id>.png foreground masks")
    p.add_argument("--jobs", type=int, default=1)
    p.set_defaults(func=cmd_run_ttc)

    p = sub.add_parser("compare", help="score a model TTC table against human responses")
    p.add_argument("--model", required=True)
    p.add_argument("--human", required=True)
    p.add_argument("--meta", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("sweep", help="alignment error across a coarsening-strength grid")
    p.add_argument("--scenarios", required=True)
    p.add_argument("--human", required=True)
    p.add_argument("--meta", default=None)
    p.add_argument("--kind", default="closing", choices=["closing", "hull_blend", "alpha_smooth", "blur_threshold"])
    p.add_argument("--strengths", required=True, help="comma-separated strengths")
    p.add_argument("--horizon", type=float, default=DEFAULT_HORIZON_S)
    p.add_argument("--margin", type=float, default=0.02)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_sweep)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except TtclabError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"io error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
