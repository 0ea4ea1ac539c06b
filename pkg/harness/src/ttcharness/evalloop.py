"""Checkpoint-series evaluation through the core pipeline's CLI.

For each checkpoint: export per-scenario probability maps, run the core
`run-ttc` over them, score against the human table with `compare`, and
collect the mean alignment error. The core is driven purely through its
command line and file formats.
"""

from __future__ import annotations

import csv
import json
import subprocess
from pathlib import Path

from .export import export_masks
from .train import load_checkpoint

CORE_CLI = "ttclab"


def _run_core(args: list[str]) -> None:
    proc = subprocess.run([CORE_CLI, *args], capture_output=True, text=True)
    if proc.returncode != 0:
        raise RuntimeError(f"{CORE_CLI} {' '.join(args)} failed:\n{proc.stderr}")


def evaluate_checkpoint(checkpoint_path, scenario_manifest, human_csv, meta_json, work_dir) -> dict:
    """One checkpoint -> mean alignment error via the core pipeline."""
    work = Path(work_dir)
    model, payload = load_checkpoint(checkpoint_path)
    mask_dir = work / "masks"
    export_masks(model, scenario_manifest, mask_dir)
    ttc_csv = work / "ttc.csv"
    _run_core(
        [
            "run-ttc",
            "--scenarios", str(scenario_manifest),
            "--prob-dir", str(mask_dir),
            "--out", str(ttc_csv),
        ]
    )
    report_dir = work / "report"
    _run_core(
        [
            "compare",
            "--model", str(ttc_csv),
            "--human", str(human_csv),
            "--meta", str(meta_json),
            "--out", str(report_dir),
        ]
    )
    report = json.loads((report_dir / "report.json").read_text())
    n_rows = sum(1 for _ in open(ttc_csv)) - 2  # comment + header
    return {
        "step": payload["step"],
        "mean_error_s": report["mean_error_s"],
        "n_scenarios": n_rows,
    }


def evaluate_series(run_dir, scenario_manifest, human_csv, meta_json, out_csv, min_step: int = 1) -> list[dict]:
    """Checkpoints of a training run -> ordered (step, error) series.

    min_step defaults to 1: the step-0 snapshot predates any training and
    generally cannot segment two objects at all.
    """
    run = Path(run_dir)
    meta = json.loads((run / "run.json").read_text())
    rows = []
    for ck in meta["checkpoints"]:
        if ck["step"] < min_step:
            continue
        work = run / f"eval_{ck['step']:06d}"
        work.mkdir(parents=True, exist_ok=True)
        rows.append(evaluate_checkpoint(run / ck["path"], scenario_manifest, human_csv, meta_json, work))
    rows.sort(key=lambda r: r["step"])
    out_csv = Path(out_csv)
    out_csv.parent.mkdir(parents=True, exist_ok=True)
    with open(out_csv, "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(["step", "mean_error_s", "n_scenarios"])
        for r in rows:
            w.writerow([r["step"], repr(r["mean_error_s"]), r["n_scenarios"]])
    return rows
