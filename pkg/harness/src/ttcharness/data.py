"""Dataset-manifest loading: single-polygon images with binary masks.

The dataset directory layout is the generator's: manifest.json listing
{image_path, mask_path, split}; images 8-bit RGB PNG, masks {0, 255} PNG.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np
import torch
from PIL import Image


class PolygonSegmentationData(torch.utils.data.Dataset):
    def __init__(self, manifest_path, split: str):
        self.root = Path(manifest_path).parent
        manifest = json.loads(Path(manifest_path).read_text())
        self.items = [it for it in manifest["items"] if it["split"] == split]
        if not self.items and manifest["items"]:
            raise ValueError(f"split {split!r} is empty in {manifest_path}")
        self.manifest = manifest

    def __len__(self):
        return len(self.items)

    def __getitem__(self, idx):
        it = self.items[idx]
        img = np.asarray(Image.open(self.root / it["image_path"]).convert("RGB"), dtype=np.float32) / 255.0
        mask = np.asarray(Image.open(self.root / it["mask_path"]).convert("L"))
        x = torch.from_numpy(img.transpose(2, 0, 1))
        y = torch.from_numpy((mask >= 128).astype(np.int64))
        return x, y


def load_image(path) -> torch.Tensor:
    arr = np.asarray(Image.open(path).convert("RGB"), dtype=np.float32) / 255.0
    return torch.from_numpy(arr.transpose(2, 0, 1))
