import json
import subprocess

import numpy as np
import pytest
import torch
from PIL import Image

from ttcharness.export import export_masks
from ttcharness.model import build


@pytest.fixture(scope="module")
def exported(tmp_path_factory, tiny_scenarios):
    torch.manual_seed(11)
    model = build("B0")  # random weights are fine for format contracts
    out = tmp_path_factory.mktemp("export")
    records = export_masks(model, tiny_scenarios / "manifest.json", out)
    return out, records


def test_export_writes_both_formats(exported, tiny_scenarios):
    out, records = exported
    manifest = json.loads((tiny_scenarios / "manifest.json").read_text())
    assert len(records) == len(manifest["scenarios"])
    for rec in records:
        assert (out / rec["pmap"]).exists()
        assert (out / rec["mask"]).exists()


def test_pmap_header_layout(exported):
    out, records = exported
    raw = (out / records[0]["pmap"]).read_bytes()
    assert raw[:4] == b"PMAP"
    h = int.from_bytes(raw[4:8], "little")
    w = int.from_bytes(raw[8:12], "little")
    c = int.from_bytes(raw[12:16], "little")
    assert (h, w, c) == (128, 128, 2)
    assert len(raw) == 16 + h * w * c * 4


def test_roundtrip_bit_exact_into_core(exported):
    # The core's probability ingestion must reproduce the exported argmax
    # mask exactly, byte for byte.
    from ttclab.formats import read_pmap
    from ttclab.masks import mask_from_probability

    out, records = exported
    for rec in records:
        pmap = read_pmap(out / rec["pmap"])
        core_mask = mask_from_probability(pmap)
        exported_png = np.asarray(Image.open(out / rec["mask"])) >= 128
        assert np.array_equal(core_mask.bits, exported_png)


def test_core_run_ttc_ingests_probability_dir(exported, tiny_scenarios, tmp_path):
    # Full external-surface exercise: core CLI consumes the exported pmaps.
    out, records = exported
    ttc_csv = tmp_path / "ttc.csv"
    proc = subprocess.run(
        [
            "ttclab", "run-ttc",
            "--scenarios", str(tiny_scenarios / "manifest.json"),
            "--prob-dir", str(out),
            "--out", str(ttc_csv),
        ],
        capture_output=True,
        text=True,
    )
    assert proc.returncode == 0, proc.stderr
    lines = [ln for ln in ttc_csv.read_text().splitlines() if not ln.startswith("#")]
    assert lines[0].startswith("scenario_id")
    assert len(lines) == 1 + len(records)  # a row per scenario, excluded or not
