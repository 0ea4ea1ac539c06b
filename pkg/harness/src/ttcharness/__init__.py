"""Segmentation-model harness: training, pruning, and mask export for the TTC pipeline."""

from .model import VARIANTS, Segmenter, build, parameter_count
from .prune import PruneConfig, prune_checkpoint, prune_state_dict, zero_count
from .train import TrainConfig, finetune, load_checkpoint

__version__ = "0.1.0"
