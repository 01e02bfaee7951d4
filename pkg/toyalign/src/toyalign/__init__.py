"""Desk-scale two-stage trainer: sensor-text alignment (generative loss on
trend-QA corpora) and task tuning (classifier on the final hidden state),
with a frozen tiny causal LM and frozen series encoder standing in for the
full-size pretrained backbones."""

__version__ = "0.1.0"

from .assemble import (
    assemble_stage1_input,
    assemble_stage2_input,
    normalize_segment,
    stage1_loss,
    stage2_loss,
    stats_prompt_text,
)
from .model import AlignmentModule, ClassifierHead, FrozenSeriesEncoder, MultimodalToyModel, ToyConfig
from .train import (
    frozen_fingerprint,
    load_alignment_into,
    pretrain_lm,
    save_checkpoint,
    train_accuracy,
    train_stage1,
    train_stage2,
)
from .vocab import SpecialTokenTable, TextVocab
