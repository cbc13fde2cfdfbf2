"""Projected FISTA with an elastic-net proximal step, and the outer search over c."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .model import DenseAutoencoder, DenseNetwork, ShapeError, predict
from .objective import Example, Mode, ObjectiveParams, SmoothObjective, elastic_net, is_success

logger = logging.getLogger(__name__)


class SolverError(RuntimeError):
    """The iteration produced a non-finite gradient."""

    def __init__(self, iteration: int, message: str = "non-finite gradient"):
        super().__init__(f"{message} at iteration {iteration}")
        self.iteration = iteration


def _vec(v, d: int, name: str) -> np.ndarray:
    arr = np.asarray(v, dtype=np.float64)
    if arr.ndim == 0:
        arr = np.full(d, float(arr))
    if arr.shape != (d,):
        raise ShapeError(f"{name} has shape {arr.shape}, expected ({d},)")
    return arr


@dataclass(frozen=True)
class FeasibleSpace:
    """Box of allowed perturbations around ``anchor`` for one mode.

    ``lo``/``hi`` bound the data space and ``background`` is the no-signal
    level. PN perturbations add signal: ``0 <= d <= hi - x0``. PP
    perturbations keep part of the existing signal:
    ``0 <= d <= max(x0 - background, 0)``.
    """

    lo: np.ndarray
    hi: np.ndarray
    background: np.ndarray
    mode: Mode
    anchor: np.ndarray

    def __post_init__(self):
        anchor = np.asarray(self.anchor, dtype=np.float64)
        if anchor.ndim != 1:
            raise ShapeError("anchor must be a vector")
        d = len(anchor)
        lo = _vec(self.lo, d, "lo")
        hi = _vec(self.hi, d, "hi")
        bg = _vec(self.background, d, "background")
        if np.any(lo > bg) or np.any(bg > hi):
            raise ValueError("need lo <= background <= hi componentwise")
        if np.any(anchor < lo) or np.any(anchor > hi):
            bad = int(np.flatnonzero((anchor < lo) | (anchor > hi))[0])
            raise ValueError(f"anchor feature {bad} = {anchor[bad]} lies outside [lo, hi]")
        mode = Mode(self.mode)
        lower = np.zeros(d)
        upper = hi - anchor if mode is Mode.PN else np.maximum(anchor - bg, 0.0)
        for name, val in (("lo", lo), ("hi", hi), ("background", bg), ("anchor", anchor), ("lower", lower), ("upper", upper)):
            val.flags.writeable = False
            object.__setattr__(self, name, val)
        object.__setattr__(self, "mode", mode)

    @classmethod
    def build(cls, x0, mode, lo=0.0, hi=1.0, background=None) -> "FeasibleSpace":
        """Broadcast scalar bounds; ``background`` defaults to zero, or ``lo`` when 0 is out of range."""
        x0 = np.asarray(x0, dtype=np.float64)
        if background is None:
            background = np.clip(0.0, lo, hi)
        return cls(lo, hi, background, mode, x0)

    @property
    def dim(self) -> int:
        return len(self.anchor)

    def contains(self, delta) -> bool:
        delta = np.asarray(delta)
        return bool(np.all(delta >= self.lower) and np.all(delta <= self.upper))


@dataclass(frozen=True)
class SolverConfig:
    kappa: float = 0.0
    beta: float = 0.1
    gamma: float = 0.0
    c0: float = 0.1
    num_searches: int = 9
    iterations: int = 1000
    lr0: float = 0.01
    seed: int = 0

    def __post_init__(self):
        if self.iterations < 1:
            raise ValueError("iterations must be >= 1")
        if self.num_searches < 1:
            raise ValueError("num_searches must be >= 1")
        if not self.c0 > 0:
            raise ValueError("c0 must be > 0")
        if not self.lr0 > 0:
            raise ValueError("lr0 must be > 0")
        for name in ("kappa", "beta", "gamma"):
            if not getattr(self, name) >= 0:
                raise ValueError(f"{name} must be >= 0")

    def params(self, c: float, mode: Mode | str) -> ObjectiveParams:
        return ObjectiveParams(c=c, beta=self.beta, gamma=self.gamma, kappa=self.kappa, mode=Mode(mode))


@dataclass
class PerturbationResult:
    delta: np.ndarray
    success: bool
    achieved_class: int
    elastic_net_value: float
    c_used: float
    iterations_run: int
    candidate_log: list[tuple[int, float, bool]] = field(default_factory=list)
    mode: Mode = Mode.PN

    @property
    def nonzero(self) -> np.ndarray:
        return np.flatnonzero(self.delta)


def shrink(z, beta: float) -> np.ndarray:
    """Elementwise soft-thresholding: the proximal map of ``beta * ||.||_1``."""
    z = np.asarray(z, dtype=np.float64)
    return np.where(z > beta, z - beta, np.where(z < -beta, z + beta, 0.0))


def project(v, space: FeasibleSpace) -> np.ndarray:
    """Clamp ``v`` onto the perturbation box of ``space``."""
    v = np.asarray(v, dtype=np.float64)
    if v.shape != (space.dim,):
        raise ShapeError(f"vector of shape {v.shape} does not match space dimension {space.dim}")
    return np.minimum(np.maximum(v, space.lower), space.upper)


def step_size(lr0: float, k: int) -> float:
    return lr0 / math.sqrt(k + 1)


def fista(
    grad: Callable[[np.ndarray], np.ndarray],
    lower: np.ndarray,
    upper: np.ndarray,
    beta: float,
    iterations: int,
    lr0: float,
    on_iterate: Callable[[int, np.ndarray], None] | None = None,
) -> np.ndarray:
    """Minimize ``g(d) + beta * ||d||_1`` over the box ``[lower, upper]``.

    Starts from ``d = y = 0`` (clamped into the box). Each iteration takes a
    gradient step at the momentum point ``y``, soft-thresholds with
    ``step * beta``, clamps, and then extrapolates with weight ``k / (k + 3)``
    (k counted from 0), clamping ``y`` as well. ``on_iterate(k, d)`` sees every
    new iterate, ``k = 1..iterations``. Returns the last iterate.
    """
    lower = np.asarray(lower, dtype=np.float64)
    upper = np.asarray(upper, dtype=np.float64)
    delta = np.minimum(np.maximum(np.zeros_like(lower), lower), upper)
    y = delta
    for k in range(iterations):
        alpha = step_size(lr0, k)
        g = grad(y)
        if not np.all(np.isfinite(g)):
            raise SolverError(k + 1)
        z = y - alpha * g
        t = alpha * beta
        z = np.where(z > t, z - t, np.where(z < -t, z + t, 0.0))
        new = np.minimum(np.maximum(z, lower), upper)
        y = new + (k / (k + 3)) * (new - delta)
        y = np.minimum(np.maximum(y, lower), upper)
        delta = new
        if on_iterate is not None:
            on_iterate(k + 1, delta)
    return delta


def fista_run(
    ex: Example,
    net: DenseNetwork,
    ae: DenseAutoencoder | None,
    space: FeasibleSpace,
    p: ObjectiveParams,
    cfg: SolverConfig,
) -> PerturbationResult:
    """One projected FISTA solve at a fixed ``c``.

    Among the iterates whose hinge sits at its floor, returns the one with the
    smallest ``beta * ||d||_1 + ||d||^2`` (earliest on ties). Without any
    such iterate the last one is returned with ``success=False``.
    """
    if space.mode is not p.mode:
        raise ValueError(f"space mode {space.mode.value} differs from objective mode {p.mode.value}")
    if space.dim != net.input_dim or not np.array_equal(space.anchor, ex.x0):
        raise ShapeError("feasible space is not anchored at this example")
    obj = SmoothObjective(ex, net, ae, p)
    t0, kappa, beta = ex.t0, p.kappa, p.beta
    best = {"delta": None, "value": math.inf}

    def grad(y):
        return obj.scores_and_gradient(y)[1]

    def check(k, delta):
        scores = predict(net, obj.model_input(delta))
        if is_success(scores, t0, kappa, p.mode):
            v = beta * float(np.abs(delta).sum()) + float(delta @ delta)
            if v < best["value"]:
                best["value"] = v
                best["delta"] = delta

    last = fista(grad, space.lower, space.upper, beta, cfg.iterations, cfg.lr0, check)
    success = best["delta"] is not None
    delta = best["delta"] if success else last
    achieved = int(np.argmax(predict(net, obj.model_input(delta))))
    value = elastic_net(delta, beta)
    return PerturbationResult(
        delta=delta,
        success=success,
        achieved_class=achieved,
        elastic_net_value=value,
        c_used=p.c,
        iterations_run=cfg.iterations,
        candidate_log=[(0, value, success)],
        mode=p.mode,
    )


def c_search(
    ex: Example,
    net: DenseNetwork,
    ae: DenseAutoencoder | None,
    space: FeasibleSpace,
    cfg: SolverConfig,
) -> PerturbationResult:
    """Repeat :func:`fista_run` while adjusting the loss weight ``c``.

    A failed search raises the lower bound and multiplies ``c`` by 10 until an
    upper bound is known, after which ``c`` is bisected; a successful search
    lowers the upper bound and bisects. The sparsest success across all
    searches is returned.
    """
    c = cfg.c0
    c_lo, c_hi = 0.0, None
    best: PerturbationResult | None = None
    last: PerturbationResult | None = None
    log = []
    for s in range(cfg.num_searches):
        res = fista_run(ex, net, ae, space, cfg.params(c, space.mode), cfg)
        log.append((s, res.elastic_net_value, res.success))
        logger.debug("search %d: c=%g success=%s en=%.6g", s, c, res.success, res.elastic_net_value)
        if res.success:
            if best is None or res.elastic_net_value < best.elastic_net_value:
                best = res
            c_hi = c if c_hi is None else min(c_hi, c)
            c = (c_lo + c_hi) / 2
        else:
            c_lo = max(c_lo, c)
            c = c * 10 if c_hi is None else (c_lo + c_hi) / 2
        last = res
    out = best if best is not None else last
    out.candidate_log = log
    out.iterations_run = cfg.iterations * cfg.num_searches
    return out
