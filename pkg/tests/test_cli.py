import json

import pytest

from ttclab.cli import main
from ttclab.formats import read_csv, read_json, read_ttc_csv


def run(*argv):
    return main([str(a) for a in argv])


def gen_small_scenarios(tmp_path, seed=3, pairs=4, taus="0.5,1.0", canvas=(384, 384)):
    out = tmp_path / f"scen{seed}"
    code = run(
        "gen-scenarios",
        "--pairs", pairs,
        "--taus", taus,
        "--seed", seed,
        "--canvas", canvas[0], canvas[1],
        "--out", out,
    )
    assert code == 0
    return out


# ---------------------------------------------------------------- gen-dataset


def test_gen_dataset_counts(tmp_path):
    out = tmp_path / "ds"
    assert run("gen-dataset", "--train", 4, "--val", 2, "--seed", 7, "--canvas", 64, 64, "--out", out) == 0
    manifest = read_json(out / "manifest.json")
    assert len(manifest["items"]) == 6
    splits = {it["split"] for it in manifest["items"]}
    assert splits == {"train", "val"}


def test_gen_dataset_empty_ok(tmp_path):
    out = tmp_path / "ds0"
    assert run("gen-dataset", "--train", 0, "--val", 0, "--out", out) == 0
    assert read_json(out / "manifest.json")["items"] == []


def test_gen_dataset_missing_out_usage_error(capsys):
    with pytest.raises(SystemExit) as exc:
        run("gen-dataset", "--train", "1", "--val", "0")
    assert exc.value.code == 2


# -------------------------------------------------------------- gen-scenarios


def test_gen_scenarios_counts_and_meta(tmp_path):
    out = gen_small_scenarios(tmp_path, seed=5, pairs=4, taus="0.5,1.0")
    manifest = read_json(out / "manifest.json")
    assert len(manifest["scenarios"]) == 8
    pair_ids = {s["pair_id"] for s in manifest["scenarios"]}
    assert len(pair_ids) == 4
    meta = read_json(out / "meta.json")
    taus = {m["tau_gt_s"] for m in meta.values()}
    assert taus == {0.5, 1.0}
    for s in manifest["scenarios"]:
        assert (out / s["agent_mask"]).exists()
        assert (out / s["patient_mask"]).exists()
        assert (out / s["frame"]).exists()


def test_gen_scenarios_zero_pairs(tmp_path):
    out = tmp_path / "empty"
    assert run("gen-scenarios", "--pairs", 0, "--seed", 1, "--out", out) == 0
    assert read_json(out / "manifest.json")["scenarios"] == []


def test_gen_scenarios_dedupes_taus(tmp_path, capsys):
    out = tmp_path / "dup"
    assert run("gen-scenarios", "--pairs", 2, "--taus", "0.5,0.5,1.0", "--seed", 2,
               "--canvas", 384, 384, "--out", out) == 0
    err = capsys.readouterr().err
    assert "duplicate tau" in err
    manifest = read_json(out / "manifest.json")
    assert manifest["params"]["taus"] == [0.5, 1.0]


# ------------------------------------------------------------------- run-ttc


def test_run_ttc_exact_masks_near_tau(tmp_path):
    scen = gen_small_scenarios(tmp_path)
    out_csv = tmp_path / "ttc.csv"
    assert run("run-ttc", "--scenarios", scen / "manifest.json", "--out", out_csv) == 0
    rows = read_ttc_csv(out_csv)
    assert len(rows) == 8
    for r in rows:
        assert r["collided"]
        assert abs(r["ttc_model_s"] - r["tau_gt_s"]) <= 1 / 60.0 + 2 / (1.0 * 60.0)


def test_run_ttc_never_mutates_inputs(tmp_path):
    scen = gen_small_scenarios(tmp_path, seed=31, pairs=2)
    before = {p: p.read_bytes() for p in scen.rglob("*") if p.is_file()}
    assert run("run-ttc", "--scenarios", scen / "manifest.json", "--out", tmp_path / "t.csv") == 0
    after = {p: p.read_bytes() for p in scen.rglob("*") if p.is_file()}
    assert before == after


def test_run_ttc_all_excluded_still_succeeds(tmp_path, capsys):
    scen = gen_small_scenarios(tmp_path, seed=37, pairs=2)
    out_csv = tmp_path / "ttc.csv"
    # zero horizon: nothing collides, every scenario excluded, exit stays 0
    assert run("run-ttc", "--scenarios", scen / "manifest.json", "--horizon", 0, "--out", out_csv) == 0
    rows = read_ttc_csv(out_csv)
    assert len(rows) == 4
    assert all(not r["collided"] for r in rows)
    assert "excluded" in capsys.readouterr().err


def test_run_ttc_empty_manifest(tmp_path):
    out = tmp_path / "empty"
    run("gen-scenarios", "--pairs", 0, "--seed", 1, "--out", out)
    out_csv = tmp_path / "ttc.csv"
    assert run("run-ttc", "--scenarios", out / "manifest.json", "--out", out_csv) == 0
    header, rows = read_csv(out_csv)
    assert header[0] == "scenario_id"
    assert rows == []


def test_run_ttc_coarsen_concave_earlier(tmp_path):
    scen = gen_small_scenarios(tmp_path, seed=11, pairs=2, taus="1.0")
    out_csv = tmp_path / "ttc_closed.csv"
    assert run("run-ttc", "--scenarios", scen / "manifest.json", "--coarsen", "closing:10", "--out", out_csv) == 0
    rows = read_ttc_csv(out_csv)
    by_pair = {}
    for r in rows:
        by_pair.setdefault(r["pair_id"], {})[r["condition"]] = r["ttc_model_s"]
    for pair, d in by_pair.items():
        assert d["concave"] < d["convex"], pair


def test_run_ttc_foreground_dir_ingestion(tmp_path):
    # single foreground mask per scenario: the pipeline must split it into
    # two components, assign them to agent/patient, and land near tau.
    import numpy as np
    from ttclab.formats import read_json as rj, write_image_png
    from PIL import Image

    scen = gen_small_scenarios(tmp_path, seed=41, pairs=2)
    manifest = rj(scen / "manifest.json")
    fg_dir = tmp_path / "fg"
    fg_dir.mkdir()
    for entry in manifest["scenarios"]:
        a = np.asarray(Image.open(scen / entry["agent_mask"])) >= 128
        p = np.asarray(Image.open(scen / entry["patient_mask"])) >= 128
        write_image_png(fg_dir / f"{entry['id']}.png", ((a | p) * 255).astype(np.uint8))
    out_csv = tmp_path / "ttc.csv"
    assert run("run-ttc", "--scenarios", scen / "manifest.json", "--fg-dir", fg_dir, "--out", out_csv) == 0
    rows = read_ttc_csv(out_csv)
    assert all(r["collided"] for r in rows)
    for r in rows:
        assert abs(r["ttc_model_s"] - r["tau_gt_s"]) <= 1 / 60.0 + 2 / 60.0


def test_run_ttc_jobs_parallel_identical(tmp_path):
    scen = gen_small_scenarios(tmp_path, seed=13, pairs=2)
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    assert run("run-ttc", "--scenarios", scen / "manifest.json", "--out", a) == 0
    assert run("run-ttc", "--scenarios", scen / "manifest.json", "--jobs", 2, "--out", b) == 0
    assert a.read_bytes() == b.read_bytes()


# ------------------------------------------------------------------- compare


def test_compare_equal_means_zero_error(tmp_path):
    scen = gen_small_scenarios(tmp_path, seed=17, pairs=4)
    ttc_csv = tmp_path / "ttc.csv"
    run("run-ttc", "--scenarios", scen / "manifest.json", "--out", ttc_csv)
    # humans that answer exactly the model's per-video TTC
    rows = read_ttc_csv(ttc_csv)
    human_csv = tmp_path / "human.csv"
    lines = ["video_id,participant_id,ttc_response_s"]
    for r in rows:
        lines.append(f"{r['scenario_id']},p000,{r['ttc_model_s']!r}")
    human_csv.write_text("\n".join(lines) + "\n")
    out = tmp_path / "report"
    assert run("compare", "--model", ttc_csv, "--human", human_csv, "--meta", scen / "meta.json", "--out", out) == 0
    report = read_json(out / "report.json")
    assert report["mean_error_s"] == 0.0


def test_compare_disjoint_ids_fails(tmp_path):
    scen = gen_small_scenarios(tmp_path, seed=19, pairs=2)
    ttc_csv = tmp_path / "ttc.csv"
    run("run-ttc", "--scenarios", scen / "manifest.json", "--out", ttc_csv)
    human_csv = tmp_path / "human.csv"
    human_csv.write_text("video_id,participant_id,ttc_response_s\nnope,p0,1.0\n")
    out = tmp_path / "report"
    assert run("compare", "--model", ttc_csv, "--human", human_csv, "--meta", scen / "meta.json", "--out", out) == 1


def test_compare_known_delta_gap(tmp_path):
    # model delta -0.1, human delta -0.3 at one tau -> E = 0.2
    meta = {
        "a": {"tau_gt_s": 1.0, "condition": "concave", "pair_id": "p"},
        "b": {"tau_gt_s": 1.0, "condition": "convex", "pair_id": "p"},
    }
    meta_path = tmp_path / "meta.json"
    meta_path.write_text(json.dumps(meta))
    model_csv = tmp_path / "model.csv"
    model_csv.write_text(
        "scenario_id,pair_id,condition,tau_gt_s,ttc_model_s,first_overlap_frame,collided\n"
        "a,p,concave,1.0,0.9,27,true\n"
        "b,p,convex,1.0,1.0,30,true\n"
    )
    human_csv = tmp_path / "human.csv"
    human_csv.write_text(
        "video_id,participant_id,ttc_response_s\na,p0,0.8\nb,p0,1.1\n"
    )
    out = tmp_path / "rep"
    assert run("compare", "--model", model_csv, "--human", human_csv, "--meta", meta_path, "--out", out) == 0
    report = read_json(out / "report.json")
    assert abs(report["mean_error_s"] - 0.2) < 1e-12


# --------------------------------------------------------------------- sweep


def test_sweep_identity_only_not_u_shaped(tmp_path, capsys):
    scen = gen_small_scenarios(tmp_path, seed=23, pairs=2)
    human_csv = tmp_path / "human.csv"
    run("gen-human", "--meta", scen / "meta.json", "--participants", 4,
        "--bias-concave", "-0.2", "--sigma", 0.05, "--seed", 5, "--out", human_csv)
    out = tmp_path / "sweep"
    assert run("sweep", "--scenarios", scen / "manifest.json", "--human", human_csv,
               "--kind", "closing", "--strengths", "0", "--out", out) == 0
    verdict = (out / "verdict.txt").read_text()
    assert "u_shaped=false" in verdict


def test_sweep_zero_bias_argmin_zero(tmp_path):
    scen = gen_small_scenarios(tmp_path, seed=29, pairs=2)
    human_csv = tmp_path / "human.csv"
    run("gen-human", "--meta", scen / "meta.json", "--participants", 4,
        "--bias-concave", "0.0", "--sigma", 0.01, "--seed", 5, "--out", human_csv)
    out = tmp_path / "sweep"
    assert run("sweep", "--scenarios", scen / "manifest.json", "--human", human_csv,
               "--kind", "closing", "--strengths", "0,6,12", "--out", out) == 0
    assert "argmin=0" in (out / "verdict.txt").read_text()


# -------------------------------------------------------------- determinism


def test_cli_outputs_byte_identical_across_reruns(tmp_path):
    ds = tmp_path / "ds"
    scen = tmp_path / "scen"
    human = tmp_path / "human.csv"
    ttc = tmp_path / "ttc.csv"
    rep = tmp_path / "rep"
    sw = tmp_path / "sweep"

    def run_all():
        assert run("gen-dataset", "--train", 2, "--val", 1, "--seed", 3, "--canvas", 64, 64, "--out", ds) == 0
        assert run("gen-scenarios", "--pairs", 2, "--taus", "0.5,1.0", "--seed", 3,
                   "--canvas", 384, 384, "--out", scen) == 0
        assert run("gen-human", "--meta", scen / "meta.json", "--participants", 3,
                   "--bias-concave", "-0.2", "--sigma", 0.05, "--seed", 3, "--out", human) == 0
        assert run("run-ttc", "--scenarios", scen / "manifest.json", "--out", ttc) == 0
        assert run("compare", "--model", ttc, "--human", human, "--meta", scen / "meta.json", "--out", rep) == 0
        assert run("sweep", "--scenarios", scen / "manifest.json", "--human", human,
                   "--kind", "closing", "--strengths", "0,4,8", "--out", sw) == 0

    tracked = [
        ds / "manifest.json",
        ds / "images/train_00000.png",
        ds / "masks/val_00002.png",
        scen / "manifest.json",
        scen / "meta.json",
        scen / "masks/pair0000-concave-agent.png",
        scen / "frames/pair0001-convex.png",
        human,
        ttc,
        rep / "report.csv",
        rep / "report.json",
        sw / "sweep.csv",
        sw / "verdict.txt",
    ]
    run_all()
    snapshot = {p: p.read_bytes() for p in tracked}
    run_all()
    for p in tracked:
        assert p.read_bytes() == snapshot[p], p
