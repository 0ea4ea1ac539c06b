import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from ttclab.masks import BinaryMask
from ttclab.rng import SplitMix64


@pytest.fixture
def rng():
    return SplitMix64(1234)


def random_blob(seed: int, shape=(48, 48), n_seeds=4, grow=3) -> BinaryMask:
    """Small random connected-ish blob mask for property tests."""
    r = SplitMix64(seed)
    bits = np.zeros(shape, dtype=bool)
    for _ in range(n_seeds):
        cr = r.randint(grow + 2, shape[0] - grow - 3)
        cc = r.randint(grow + 2, shape[1] - grow - 3)
        rr = r.randint(1, grow)
        bits[cr - rr : cr + rr + 1, cc - rr : cc + rr + 1] = True
        # a few extra pixels for ragged boundaries
        for _ in range(6):
            dr = r.randint(-grow, grow)
            dc = r.randint(-grow, grow)
            bits[min(max(cr + dr, 0), shape[0] - 1), min(max(cc + dc, 0), shape[1] - 1)] = True
    return BinaryMask((r.randint(-20, 20), r.randint(-20, 20)), bits)


def notched_square_bits(size=40, notch_w=4, notch_d=10) -> np.ndarray:
    """Square with a rectangular notch centered on its right face."""
    bits = np.ones((size, size), dtype=bool)
    r0 = size // 2 - notch_w // 2
    bits[r0 : r0 + notch_w, size - notch_d :] = False
    return bits
