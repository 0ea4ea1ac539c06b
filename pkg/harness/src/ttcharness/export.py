"""Per-scenario model outputs in the pipeline's wire formats.

For every scenario in a manifest the initial frame is segmented and two
files are written: `<id>.pmap` (16-byte header: magic "PMAP", u32 height,
width, channels, little-endian; then float32 (H, W, 2) softmax
probabilities) and `<id>.png` ({0, 255} argmax foreground mask).
"""

from __future__ import annotations

import json
import struct
from pathlib import Path

import numpy as np
import torch
from PIL import Image

from .data import load_image
from .model import Segmenter

PMAP_MAGIC = b"PMAP"


def write_pmap(path, probs: np.ndarray) -> None:
    probs = np.ascontiguousarray(probs, dtype="<f4")
    h, w, c = probs.shape
    with open(path, "wb") as f:
        f.write(PMAP_MAGIC)
        f.write(struct.pack("<III", h, w, c))
        f.write(probs.tobytes())


def export_masks(model: Segmenter, scenario_manifest, out_dir) -> list[dict]:
    """Segment every scenario frame; returns per-scenario file records."""
    manifest = json.loads(Path(scenario_manifest).read_text())
    base = Path(scenario_manifest).parent
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    model.eval()
    records = []
    for entry in manifest["scenarios"]:
        if "frame" not in entry:
            raise ValueError(f"scenario {entry['id']} has no rendered frame")
        x = load_image(base / entry["frame"]).unsqueeze(0)
        with torch.no_grad():
            logits = model(x)[0]  # (2, H, W)
            probs = logits.softmax(dim=0).permute(1, 2, 0).numpy()
        pmap_path = out / f"{entry['id']}.pmap"
        write_pmap(pmap_path, probs)
        fg = probs[:, :, 1] > probs[:, :, 0]
        png_path = out / f"{entry['id']}.png"
        Image.fromarray(fg.astype(np.uint8) * 255).save(png_path, format="PNG")
        records.append({"id": entry["id"], "pmap": pmap_path.name, "mask": png_path.name})
    return records
