"""Fine-tuning loop: AdamW, cosine schedule with warmup, CE + Dice loss.

Checkpoints are written at a fixed step interval plus the final step; every
run also leaves a per-step loss log and a metadata JSON recording the full
configuration and seed.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import asdict, dataclass
from pathlib import Path

import torch
import torch.nn.functional as F

from .data import PolygonSegmentationData
from .model import Segmenter, build


@dataclass
class TrainConfig:
    variant: str = "B0"
    learning_rate: float = 5e-5
    warmup_frac: float = 0.1  # cosine schedule warmup share of total steps
    batch_size: int = 4
    weight_decay: float = 0.01
    epochs: int = 10
    ce_weight: float = 1.0
    dice_weight: float = 1.0
    checkpoint_every: int = 50
    checkpoint_steps: tuple[int, ...] = ()  # extra steps to snapshot (e.g. dense early)
    seed: int = 0
    max_steps: int | None = None  # cap for smoke tests; None = epochs * steps/epoch

    def to_dict(self) -> dict:
        return asdict(self)


def dice_loss(logits: torch.Tensor, target: torch.Tensor, eps: float = 1.0) -> torch.Tensor:
    """Soft Dice on the object class; target is (B, H, W) in {0, 1}."""
    p = logits.softmax(dim=1)[:, 1]
    t = target.float()
    inter = (p * t).sum(dim=(1, 2))
    denom = p.sum(dim=(1, 2)) + t.sum(dim=(1, 2))
    return (1.0 - (2.0 * inter + eps) / (denom + eps)).mean()


def combined_loss(logits, target, config: TrainConfig) -> torch.Tensor:
    return config.ce_weight * F.cross_entropy(logits, target) + config.dice_weight * dice_loss(logits, target)


def cosine_warmup_factor(step: int, total: int, warmup: int) -> float:
    if total <= 0:
        return 1.0
    if warmup > 0 and step < warmup:
        return (step + 1) / warmup
    span = max(total - warmup, 1)
    progress = min(max(step - warmup, 0) / span, 1.0)
    return 0.5 * (1.0 + math.cos(math.pi * progress))


def pixel_accuracy(model: Segmenter, dataset, batch_size: int = 4, device: str = "cpu") -> float:
    model.eval()
    correct = total = 0
    with torch.no_grad():
        for i in range(0, len(dataset), batch_size):
            xs, ys = zip(*[dataset[j] for j in range(i, min(i + batch_size, len(dataset)))])
            x = torch.stack(xs).to(device)
            y = torch.stack(ys).to(device)
            pred = model(x).argmax(dim=1)
            correct += int((pred == y).sum())
            total += y.numel()
    return correct / max(total, 1)


def finetune(manifest_path, out_dir, config: TrainConfig) -> list[dict]:
    """Train on the manifest's train split; returns the checkpoint index.

    Checkpoint files hold {"model", "config", "step"}; the returned list and
    the run metadata record (step, path) pairs in training order.
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    torch.manual_seed(config.seed)

    train_set = PolygonSegmentationData(manifest_path, "train")
    if len(train_set) == 0:
        raise ValueError(f"no training items in {manifest_path}")
    steps_per_epoch = max(1, math.ceil(len(train_set) / config.batch_size))
    total_steps = steps_per_epoch * config.epochs
    if config.max_steps is not None:
        total_steps = min(total_steps, config.max_steps)
    warmup = int(round(config.warmup_frac * total_steps))

    model = build(config.variant)
    model.train()
    opt = torch.optim.AdamW(model.parameters(), lr=config.learning_rate, weight_decay=config.weight_decay)
    sched = torch.optim.lr_scheduler.LambdaLR(
        opt, lambda s: cosine_warmup_factor(s, total_steps, warmup)
    )

    gen = torch.Generator().manual_seed(config.seed)
    checkpoints: list[dict] = []

    def save_checkpoint(step: int) -> None:
        path = out / f"checkpoint_{step:06d}.pt"
        torch.save({"model": model.state_dict(), "config": config.to_dict(), "step": step}, path)
        checkpoints.append({"step": step, "path": path.name})

    loss_rows = []
    step = 0
    save_checkpoint(0)
    done = False
    for _epoch in range(config.epochs):
        order = torch.randperm(len(train_set), generator=gen).tolist()
        for i in range(0, len(order), config.batch_size):
            idx = order[i : i + config.batch_size]
            xs, ys = zip(*[train_set[j] for j in idx])
            x = torch.stack(xs)
            y = torch.stack(ys)
            opt.zero_grad()
            loss = combined_loss(model(x), y, config)
            loss.backward()
            opt.step()
            sched.step()
            step += 1
            loss_rows.append((step, float(loss.item()), float(opt.param_groups[0]["lr"])))
            if step % config.checkpoint_every == 0 or step in config.checkpoint_steps:
                save_checkpoint(step)
            if step >= total_steps:
                done = True
                break
        if done:
            break
    if not checkpoints or checkpoints[-1]["step"] != step:
        save_checkpoint(step)

    with open(out / "train_log.csv", "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(["step", "loss", "lr"])
        w.writerows(loss_rows)
    meta = {
        "config": config.to_dict(),
        "total_steps": total_steps,
        "steps_per_epoch": steps_per_epoch,
        "warmup_steps": warmup,
        "dataset_manifest": str(manifest_path),
        "checkpoints": checkpoints,
    }
    (out / "run.json").write_text(json.dumps(meta, indent=2) + "\n")
    return checkpoints


def load_checkpoint(path) -> tuple[Segmenter, dict]:
    payload = torch.load(path, map_location="cpu", weights_only=False)
    model = build(payload["config"]["variant"])
    model.load_state_dict(payload["model"])
    model.eval()
    return model, payload
