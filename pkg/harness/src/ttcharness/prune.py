"""Magnitude-based weight pruning without retraining.

Targets every weight tensor of rank >= 2 (linear and conv kernels; biases
and norm scales stay untouched). The default scope ranks all candidate
weights globally by absolute value and zeroes exactly floor(fraction * N) of
the smallest, ties broken by flat traversal order so the count is exact and
re-runnable.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import torch


@dataclass
class PruneConfig:
    fractions: list[float] = field(default_factory=lambda: [round(0.1 * i, 1) for i in range(10)])
    scope: str = "global"  # or "per_layer"

    def __post_init__(self):
        if any(not (0.0 <= f < 1.0) for f in self.fractions):
            raise ValueError("fractions must lie in [0, 1)")
        if sorted(self.fractions) != list(self.fractions) or len(set(self.fractions)) != len(self.fractions):
            raise ValueError("fractions must be strictly increasing")
        if self.scope not in ("global", "per_layer"):
            raise ValueError("scope must be 'global' or 'per_layer'")


def prunable_names(state: dict) -> list[str]:
    return [k for k, v in state.items() if k.endswith(".weight") and v.ndim >= 2]


def prune_state_dict(state: dict, fraction: float, scope: str = "global") -> dict:
    """Return a copy with the smallest-magnitude weights zeroed.

    Exactly floor(fraction * N) weights are zeroed, where N counts all
    prunable weights (global scope) or each tensor's own size (per-layer).
    """
    if not (0.0 <= fraction < 1.0):
        raise ValueError("fraction must lie in [0, 1)")
    out = {k: v.clone() for k, v in state.items()}
    names = prunable_names(state)
    if fraction == 0.0 or not names:
        return out
    if scope == "per_layer":
        for name in names:
            flat = out[name].reshape(-1)
            k = int(fraction * flat.numel())
            if k == 0:
                continue
            order = np.argsort(np.abs(flat.numpy().astype(np.float64)), kind="stable")
            flat[torch.from_numpy(order[:k].copy())] = 0.0
        return out
    sizes = [out[n].numel() for n in names]
    total = sum(sizes)
    k = int(fraction * total)
    if k == 0:
        return out
    magnitudes = np.concatenate([np.abs(out[n].reshape(-1).numpy().astype(np.float64)) for n in names])
    order = np.argsort(magnitudes, kind="stable")[:k]
    offsets = np.cumsum([0] + sizes)
    for i, name in enumerate(names):
        local = order[(order >= offsets[i]) & (order < offsets[i + 1])] - offsets[i]
        if len(local):
            flat = out[name].reshape(-1)
            flat[torch.from_numpy(local.copy())] = 0.0
    return out


def zero_count(state: dict) -> int:
    return int(sum((state[n] == 0).sum() for n in prunable_names(state)))


def prune_checkpoint(payload: dict, fraction: float, scope: str = "global") -> dict:
    """Prune the model weights of a loaded checkpoint payload."""
    return {
        "model": prune_state_dict(payload["model"], fraction, scope),
        "config": dict(payload["config"]),
        "step": payload["step"],
        "pruned_fraction": fraction,
        "prune_scope": scope,
    }
