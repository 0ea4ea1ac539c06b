"""On-disk formats: PMAP probability maps, mask PNGs, manifests, CSV tables.

Everything written here is byte-deterministic for fixed inputs: JSON uses a
fixed key order and indent, CSVs use '\\n' newlines with a single leading
'#'-comment provenance line, and PNGs are encoded with fixed settings.
"""

from __future__ import annotations

import csv
import io
import json
import struct
from pathlib import Path

import numpy as np
from PIL import Image, PngImagePlugin

from .errors import SchemaError
from .masks import BinaryMask, ProbabilityMap

PMAP_MAGIC = b"PMAP"

TTC_CSV_COLUMNS = [
    "scenario_id",
    "pair_id",
    "condition",
    "tau_gt_s",
    "ttc_model_s",
    "first_overlap_frame",
    "collided",
]


# ------------------------------------------------------------------- JSON


def write_json(path: Path, payload: dict) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(payload, indent=2) + "\n", encoding="utf-8")


def read_json(path: Path) -> dict:
    return json.loads(Path(path).read_text(encoding="utf-8"))


# -------------------------------------------------------------------- PNG


def write_image_png(path: Path, array: np.ndarray, provenance: dict | None = None) -> None:
    """8-bit grayscale (H, W) or RGB (H, W, 3) PNG with optional tEXt metadata."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    info = PngImagePlugin.PngInfo()
    if provenance is not None:
        info.add_text("provenance", json.dumps(provenance, sort_keys=True))
    Image.fromarray(array).save(path, format="PNG", pnginfo=info)


def write_mask_png(path: Path, mask: BinaryMask, provenance: dict | None = None) -> None:
    """Mask as {0, 255} grayscale PNG plus a sidecar JSON carrying the origin."""
    path = Path(path)
    write_image_png(path, (mask.bits.astype(np.uint8) * 255), provenance)
    write_json(path.with_suffix(".json"), {"origin": [mask.origin[0], mask.origin[1]]})


def read_mask_png(path: Path) -> BinaryMask:
    path = Path(path)
    arr = np.asarray(Image.open(path).convert("L"))
    sidecar = path.with_suffix(".json")
    origin = (0, 0)
    if sidecar.exists():
        origin = tuple(read_json(sidecar)["origin"])
    return BinaryMask(origin, arr >= 128)


# ------------------------------------------------------------------- PMAP


def write_pmap(path: Path, pmap: ProbabilityMap) -> None:
    """16-byte header (magic, u32 H, u32 W, u32 channels, little-endian) + f32 data."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    h, w = pmap.extent
    with open(path, "wb") as f:
        f.write(PMAP_MAGIC)
        f.write(struct.pack("<III", h, w, 2))
        f.write(np.ascontiguousarray(pmap.values, dtype="<f4").tobytes())


def read_pmap(path: Path) -> ProbabilityMap:
    """Read the PMAP layout; falls back to .npy holding the same (H, W, 2) array."""
    path = Path(path)
    raw = path.read_bytes()
    if raw[:4] == PMAP_MAGIC:
        if len(raw) < 16:
            raise SchemaError(f"{path}: truncated PMAP header")
        h, w, c = struct.unpack("<III", raw[4:16])
        if c != 2:
            raise SchemaError(f"{path}: expected 2 channels, found {c}")
        expect = 16 + h * w * c * 4
        if len(raw) != expect:
            raise SchemaError(f"{path}: expected {expect} bytes, found {len(raw)}")
        values = np.frombuffer(raw, dtype="<f4", offset=16).reshape(h, w, c)
        return ProbabilityMap(values.copy())
    arr = np.load(io.BytesIO(raw))
    if arr.ndim != 3 or arr.shape[2] != 2:
        raise SchemaError(f"{path}: npy array must have shape (H, W, 2)")
    return ProbabilityMap(np.asarray(arr, dtype=np.float32))


# -------------------------------------------------------------------- CSV


def write_csv(path: Path, header: list[str], rows: list[list], provenance: dict | None = None) -> None:
    """CSV with a '#'-prefixed provenance line; floats serialized via repr."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    buf = io.StringIO()
    if provenance is not None:
        buf.write("# " + json.dumps(provenance, sort_keys=True) + "\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([_cell(v) for v in row])
    path.write_text(buf.getvalue(), encoding="utf-8")


def _cell(v):
    if v is None:
        return ""
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return repr(v)
    return v


def read_csv(path: Path) -> tuple[list[str], list[dict]]:
    """Header and row dicts, skipping '#' comment lines."""
    with open(path, newline="", encoding="utf-8") as f:
        lines = [ln for ln in f if not ln.startswith("#")]
    reader = csv.reader(lines)
    try:
        header = next(reader)
    except StopIteration:
        raise SchemaError(f"{path}: empty CSV")
    rows = [dict(zip(header, row)) for row in reader]
    return header, rows


def write_ttc_csv(path: Path, rows: list[dict], provenance: dict | None = None) -> None:
    out = []
    for r in rows:
        out.append([r[c] for c in TTC_CSV_COLUMNS])
    write_csv(path, TTC_CSV_COLUMNS, out, provenance)


def read_ttc_csv(path: Path) -> list[dict]:
    header, rows = read_csv(path)
    missing = [c for c in TTC_CSV_COLUMNS if c not in header]
    if missing:
        raise SchemaError(f"{path}: missing columns {missing}")
    parsed = []
    for r in rows:
        collided = r["collided"] == "true"
        parsed.append(
            {
                "scenario_id": r["scenario_id"],
                "pair_id": r["pair_id"],
                "condition": r["condition"],
                "tau_gt_s": float(r["tau_gt_s"]),
                "ttc_model_s": float(r["ttc_model_s"]) if collided else None,
                "first_overlap_frame": int(r["first_overlap_frame"]) if collided else None,
                "collided": collided,
            }
        )
    return parsed
