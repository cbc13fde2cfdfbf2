"""Hinge losses for pertinent negatives/positives and the smooth objective.

The smooth objective is everything except the L1 term, which the solver
handles through its shrinkage step::

    PN:  c * loss_pn(Pred(x0 + d)) + ||d||^2 + gamma * ||x0 + d - AE(x0 + d)||^2
    PP:  c * loss_pp(Pred(d))      + ||d||^2 + gamma * ||d - AE(d)||^2
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

from .model import (
    DenseAutoencoder,
    DenseNetwork,
    ShapeError,
    _reconstruction_value_grad,
    predict,
    scores_and_gradient,
)


class Mode(str, Enum):
    PN = "PN"
    PP = "PP"


class LabelMismatchError(ValueError):
    """The example's class is not the model's prediction."""


@dataclass(frozen=True)
class Example:
    x0: np.ndarray
    t0: int
    example_id: str = "0"

    def __post_init__(self):
        x0 = np.array(self.x0, dtype=np.float64)
        if x0.ndim != 1:
            raise ShapeError("x0 must be a vector")
        if not np.all(np.isfinite(x0)):
            raise ValueError("x0 must be finite")
        x0.flags.writeable = False
        object.__setattr__(self, "x0", x0)
        object.__setattr__(self, "t0", int(self.t0))
        object.__setattr__(self, "example_id", str(self.example_id))

    @classmethod
    def from_model(cls, x0, net: DenseNetwork, example_id="0") -> "Example":
        """Example labelled with the model's own prediction."""
        return cls(x0, int(np.argmax(predict(net, x0))), example_id)

    def check(self, net: DenseNetwork) -> None:
        if len(self.x0) != net.input_dim:
            raise ShapeError(f"example has {len(self.x0)} features, model expects {net.input_dim}")
        predicted = int(np.argmax(predict(net, self.x0)))
        if predicted != self.t0:
            raise LabelMismatchError(
                f"example {self.example_id}: t0={self.t0} but the model predicts {predicted}"
            )


@dataclass(frozen=True)
class ObjectiveParams:
    c: float
    beta: float = 0.1
    gamma: float = 0.0
    kappa: float = 0.0
    mode: Mode = Mode.PN

    def __post_init__(self):
        if not self.c > 0:
            raise ValueError("c must be > 0")
        for name in ("beta", "gamma", "kappa"):
            if not getattr(self, name) >= 0:
                raise ValueError(f"{name} must be >= 0")
        object.__setattr__(self, "mode", Mode(self.mode))


def _check_scores(scores, t0: int) -> np.ndarray:
    scores = np.asarray(scores, dtype=np.float64)
    if scores.ndim != 1 or len(scores) < 2:
        raise ValueError("need a score vector with at least 2 classes")
    if not 0 <= t0 < len(scores):
        raise IndexError(f"class index {t0} out of range for {len(scores)} classes")
    return scores


def runner_up(scores: np.ndarray, t0: int) -> int:
    """Highest-scoring class other than ``t0``; ties go to the lowest index."""
    masked = np.array(scores, dtype=np.float64)
    masked[t0] = -np.inf
    return int(np.argmax(masked))


def margin(scores, t0: int, mode: Mode | str) -> float:
    """The argument of the hinge before flooring at ``-kappa``."""
    scores = _check_scores(scores, t0)
    gap = scores[t0] - scores[runner_up(scores, t0)]
    return float(gap if Mode(mode) is Mode.PN else -gap)


def loss_pn(scores, t0: int, kappa: float) -> float:
    """``max(s[t0] - max_{i != t0} s[i], -kappa)``."""
    return max(margin(scores, t0, Mode.PN), -kappa)


def loss_pp(scores, t0: int, kappa: float) -> float:
    """``max(max_{i != t0} s[i] - s[t0], -kappa)``."""
    return max(margin(scores, t0, Mode.PP), -kappa)


def is_success(scores, t0: int, kappa: float, mode: Mode | str) -> bool:
    """Hinge at its floor and the predicted class on the required side of t0.

    For kappa > 0 the argmax check is implied by the floor. At kappa = 0 it
    settles exact score ties the same way ``argmax`` does (lowest index).
    """
    mode = Mode(mode)
    scores = _check_scores(scores, t0)
    if margin(scores, t0, mode) > -kappa:
        return False
    top = int(np.argmax(scores))
    return top != t0 if mode is Mode.PN else top == t0


class SmoothObjective:
    """The smooth part of the PN or PP objective bound to one example."""

    def __init__(self, ex: Example, net: DenseNetwork, ae: DenseAutoencoder | None, p: ObjectiveParams):
        if p.gamma > 0 and ae is None:
            raise ValueError("gamma > 0 requires an autoencoder")
        if len(ex.x0) != net.input_dim:
            raise ShapeError(f"example has {len(ex.x0)} features, model expects {net.input_dim}")
        if ae is not None and ae.input_dim != net.input_dim:
            raise ShapeError("autoencoder and classifier dimensions differ")
        _check_scores(np.zeros(net.n_classes), ex.t0)
        self.ex, self.net, self.p = ex, net, p
        self.ae = ae if p.gamma > 0 else None
        self.mode = p.mode
        self.t0 = ex.t0

    def model_input(self, delta: np.ndarray) -> np.ndarray:
        return self.ex.x0 + delta if self.mode is Mode.PN else delta

    def _hinge_weights(self, scores: np.ndarray):
        """Class weights of the active hinge branch, already scaled by c (None at the floor)."""
        t0 = self.t0
        i = runner_up(scores, t0)
        gap = scores[t0] - scores[i]
        arg = gap if self.mode is Mode.PN else -gap
        if arg < -self.p.kappa:
            return None
        w = np.zeros(len(scores))
        sign = self.p.c if self.mode is Mode.PN else -self.p.c
        w[t0] = sign
        w[i] = -sign
        return w

    def value(self, delta) -> float:
        delta = np.asarray(delta, dtype=np.float64)
        z = self.model_input(delta)
        scores = predict(self.net, z)
        loss = max(margin(scores, self.t0, self.mode), -self.p.kappa)
        total = self.p.c * loss + float(delta @ delta)
        if self.ae is not None:
            total += self.p.gamma * _reconstruction_value_grad(self.ae, z)[0]
        return total

    def gradient(self, delta) -> np.ndarray:
        return self.scores_and_gradient(delta)[1]

    def scores_and_gradient(self, delta):
        """Scores at the model input for ``delta`` and the gradient of the smooth objective."""
        delta = np.asarray(delta, dtype=np.float64)
        z = self.model_input(delta)
        scores, g = scores_and_gradient(self.net, z, self._hinge_weights)
        grad = 2.0 * delta
        if g is not None:
            grad = grad + g
        if self.ae is not None:
            grad = grad + self.p.gamma * _reconstruction_value_grad(self.ae, z)[1]
        return scores, grad


def smooth_objective(delta, ex: Example, net: DenseNetwork, ae: DenseAutoencoder | None, p: ObjectiveParams) -> float:
    return SmoothObjective(ex, net, ae, p).value(delta)


def smooth_gradient(delta, ex: Example, net: DenseNetwork, ae: DenseAutoencoder | None, p: ObjectiveParams) -> np.ndarray:
    """Gradient of :func:`smooth_objective` with respect to ``delta``.

    At the floor boundary (argument exactly ``-kappa``) the score-difference
    branch is used.
    """
    return SmoothObjective(ex, net, ae, p).gradient(delta)


def elastic_net(delta, beta: float) -> float:
    delta = np.asarray(delta, dtype=np.float64)
    return float(beta * np.abs(delta).sum() + delta @ delta)
