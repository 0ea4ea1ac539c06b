"""Harness command line: train, prune, export, eval-series."""

from __future__ import annotations

import argparse
import sys

import torch

from .evalloop import evaluate_series
from .export import export_masks
from .prune import prune_checkpoint
from .train import TrainConfig, finetune, load_checkpoint


def cmd_train(args) -> int:
    extra = tuple(int(s) for s in args.checkpoint_steps.split(",")) if args.checkpoint_steps else ()
    config = TrainConfig(
        variant=args.variant,
        learning_rate=args.lr,
        batch_size=args.batch_size,
        weight_decay=args.weight_decay,
        epochs=args.epochs,
        checkpoint_every=args.checkpoint_every,
        checkpoint_steps=extra,
        seed=args.seed,
        max_steps=args.max_steps,
    )
    checkpoints = finetune(args.dataset, args.out, config)
    print(f"trained {args.variant}: {len(checkpoints)} checkpoints in {args.out}")
    return 0


def cmd_prune(args) -> int:
    payload = torch.load(args.checkpoint, map_location="cpu", weights_only=False)
    pruned = prune_checkpoint(payload, args.fraction, args.scope)
    torch.save(pruned, args.out)
    print(f"pruned fraction={args.fraction} scope={args.scope} -> {args.out}")
    return 0


def cmd_export(args) -> int:
    model, _ = load_checkpoint(args.checkpoint)
    records = export_masks(model, args.scenarios, args.out)
    print(f"exported {len(records)} scenario outputs to {args.out}")
    return 0


def cmd_eval_series(args) -> int:
    rows = evaluate_series(args.run, args.scenarios, args.human, args.meta, args.out, min_step=args.min_step)
    for r in rows:
        print(f"step={r['step']} mean_error_s={r['mean_error_s']!r}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ttc-harness", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("train", help="fine-tune a segmenter on a generated dataset")
    p.add_argument("--dataset", required=True, help="dataset manifest.json")
    p.add_argument("--variant", default="B0", choices=["B0", "B1", "B2", "B3", "B4", "B5"])
    p.add_argument("--lr", type=float, default=5e-5)
    p.add_argument("--batch-size", type=int, default=4)
    p.add_argument("--weight-decay", type=float, default=0.01)
    p.add_argument("--epochs", type=int, default=10)
    p.add_argument("--checkpoint-every", type=int, default=50)
    p.add_argument("--checkpoint-steps", default=None, help="extra comma-separated steps to snapshot")
    p.add_argument("--max-steps", type=int, default=None)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("prune", help="magnitude-prune a checkpoint")
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--fraction", type=float, required=True)
    p.add_argument("--scope", default="global", choices=["global", "per_layer"])
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_prune)

    p = sub.add_parser("export", help="write per-scenario probability maps and masks")
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--scenarios", required=True, help="scenario manifest.json")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_export)

    p = sub.add_parser("eval-series", help="mean alignment error per checkpoint")
    p.add_argument("--run", required=True, help="training run directory")
    p.add_argument("--scenarios", required=True)
    p.add_argument("--human", required=True)
    p.add_argument("--meta", required=True)
    p.add_argument("--min-step", type=int, default=1, help="skip checkpoints before this step")
    p.add_argument("--out", required=True, help="output series CSV")
    p.set_defaults(func=cmd_eval_series)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (RuntimeError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
