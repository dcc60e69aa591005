"""A small differentiable graph Transformer for the synthetic experiments."""
from .batch import GraphBatch, make_batch
from .model import ModelConfig, ToyModel, backward, loss, predictions
from .train import Adam, PlateauHalving, TrainConfig, TrainResult, evaluate, train

__all__ = [
    "Adam",
    "GraphBatch",
    "ModelConfig",
    "PlateauHalving",
    "ToyModel",
    "TrainConfig",
    "TrainResult",
    "backward",
    "evaluate",
    "loss",
    "make_batch",
    "predictions",
    "train",
]
