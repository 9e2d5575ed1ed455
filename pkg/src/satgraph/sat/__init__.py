"""Structure-attribute transformer: model, losses, training and inference."""

from .checkpoint import Checkpoint
from .inference import (attribute_latents, complete_attributes, model_from_checkpoint, score_links,
                        structure_latents)
from .losses import (Forward, LossBreakdown, TrainingData, adversarial_losses, attribute_loss,
                     paired_reconstruction_loss, regression_loss)
from .model import GATEncoder, GCNEncoder, MLP, Linear, SatModel, StructureInput, TrainConfig, structure_input
from .train import CURVE_COLUMNS, TrainResult, deterministic_context, resolve_selection_metric, train

__all__ = [
    "CURVE_COLUMNS", "Checkpoint", "Forward", "GATEncoder", "GCNEncoder", "Linear", "LossBreakdown", "MLP",
    "SatModel", "StructureInput", "TrainConfig", "TrainResult", "TrainingData", "adversarial_losses",
    "attribute_latents", "attribute_loss", "complete_attributes", "deterministic_context",
    "model_from_checkpoint", "paired_reconstruction_loss", "regression_loss", "resolve_selection_metric",
    "score_links", "structure_input", "structure_latents", "train",
]
