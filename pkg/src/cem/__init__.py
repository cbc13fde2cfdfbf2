"""Contrastive explanations (pertinent positives and negatives) for dense classifiers."""

from .evaluate import EvalReport, evaluate
from .explain import Explanation, explain, render_narrative
from .model import (
    DenseAutoencoder,
    DenseNetwork,
    Layer,
    TrainConfig,
    input_gradient,
    load_weights,
    predict,
    reconstruct,
    reconstruction_gradient,
    save_weights,
    train_autoencoder,
    train_classifier,
)
from .objective import Example, Mode, ObjectiveParams, loss_pn, loss_pp, smooth_gradient, smooth_objective
from .solver import FeasibleSpace, PerturbationResult, SolverConfig, c_search, fista_run, project, shrink

__all__ = [
    "DenseAutoencoder",
    "DenseNetwork",
    "EvalReport",
    "Example",
    "Explanation",
    "FeasibleSpace",
    "Layer",
    "Mode",
    "ObjectiveParams",
    "PerturbationResult",
    "SolverConfig",
    "TrainConfig",
    "c_search",
    "evaluate",
    "explain",
    "fista_run",
    "input_gradient",
    "load_weights",
    "loss_pn",
    "loss_pp",
    "predict",
    "project",
    "reconstruct",
    "reconstruction_gradient",
    "render_narrative",
    "save_weights",
    "shrink",
    "smooth_gradient",
    "smooth_objective",
    "train_autoencoder",
    "train_classifier",
]
