"""Small dense networks with analytic input gradients.

Classifiers return unnormalized scores (logits). Autoencoders are an encoder
stack followed by a decoder stack, with the reconstruction clamped into the
feature range. Everything is float64 numpy; no external ML framework.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

logger = logging.getLogger(__name__)

ACTIVATIONS = ("relu", "identity")


class ShapeError(ValueError):
    """Input dimension does not match the model."""


class WeightFormatError(ValueError):
    """Malformed or inconsistent weight file."""


@dataclass(frozen=True, eq=False)
class Layer:
    weight: np.ndarray  # (out, in)
    bias: np.ndarray  # (out,)
    activation: str = "identity"

    def __post_init__(self):
        w = np.asarray(self.weight, dtype=np.float64)
        b = np.asarray(self.bias, dtype=np.float64)
        if w.ndim != 2:
            raise ShapeError(f"weight must be 2-D, got shape {w.shape}")
        if b.shape != (w.shape[0],):
            raise ShapeError(f"bias shape {b.shape} does not match weight rows {w.shape[0]}")
        if self.activation not in ACTIVATIONS:
            raise ValueError(f"unknown activation {self.activation!r}")
        if not (np.all(np.isfinite(w)) and np.all(np.isfinite(b))):
            raise ValueError("layer parameters must be finite")
        w.flags.writeable = False
        b.flags.writeable = False
        object.__setattr__(self, "weight", w)
        object.__setattr__(self, "bias", b)

    @property
    def n_in(self) -> int:
        return self.weight.shape[1]

    @property
    def n_out(self) -> int:
        return self.weight.shape[0]


def _check_chain(layers: Sequence[Layer]) -> None:
    if not layers:
        raise ShapeError("a network needs at least one layer")
    for k in range(1, len(layers)):
        if layers[k].n_in != layers[k - 1].n_out:
            raise ShapeError(
                f"layer {k} expects {layers[k].n_in} inputs but layer {k - 1} "
                f"produces {layers[k - 1].n_out}"
            )


def _forward(layers: Sequence[Layer], x: np.ndarray):
    """Forward pass keeping pre-activations. Works on (d,) or (n, d)."""
    acts = [x]
    pres = []
    h = x
    for layer in layers:
        z = h @ layer.weight.T + layer.bias
        pres.append(z)
        h = np.maximum(z, 0.0) if layer.activation == "relu" else z
        acts.append(h)
    return acts, pres


def _backward(layers: Sequence[Layer], acts, pres, grad_out, want_params=False):
    """Reverse-mode pass. Returns d/d(input) and optionally parameter grads."""
    g = grad_out
    wgrads = [None] * len(layers)
    for k in range(len(layers) - 1, -1, -1):
        layer = layers[k]
        if layer.activation == "relu":
            # subgradient 0 at a pre-activation of exactly 0
            g = g * (pres[k] > 0.0)
        if want_params:
            a = acts[k]
            if g.ndim == 1:
                wgrads[k] = (np.outer(g, a), g.copy())
            else:
                wgrads[k] = (g.T @ a, g.sum(axis=0))
        g = g @ layer.weight
    return g, wgrads


@dataclass(frozen=True)
class DenseNetwork:
    """Stack of dense layers producing class scores."""

    layers: tuple[Layer, ...]

    def __post_init__(self):
        layers = tuple(self.layers)
        _check_chain(layers)
        object.__setattr__(self, "layers", layers)

    @property
    def input_dim(self) -> int:
        return self.layers[0].n_in

    @property
    def output_dim(self) -> int:
        return self.layers[-1].n_out

    @property
    def n_classes(self) -> int:
        return self.output_dim

    def _check_input(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=np.float64)
        if x.shape[-1:] != (self.input_dim,) or x.ndim > 2:
            raise ShapeError(f"expected input of length {self.input_dim}, got shape {x.shape}")
        return x

    def __call__(self, x) -> np.ndarray:
        return predict(self, x)

    def __eq__(self, other):
        if not isinstance(other, DenseNetwork):
            return NotImplemented
        return len(self.layers) == len(other.layers) and all(
            _layers_equal(a, b) for a, b in zip(self.layers, other.layers)
        )

    __hash__ = None


def _layers_equal(a: Layer, b: Layer) -> bool:
    return (
        a.activation == b.activation
        and a.weight.shape == b.weight.shape
        and np.array_equal(a.weight, b.weight)
        and np.array_equal(a.bias, b.bias)
    )


@dataclass(frozen=True)
class DenseAutoencoder:
    """Encoder and decoder stacks; the output is clamped to ``[lo, hi]``.

    ``clamp=None`` disables clamping (the reconstruction is the raw decoder
    output).
    """

    encoder: DenseNetwork
    decoder: DenseNetwork
    clamp: tuple[float, float] | None = (0.0, 1.0)

    def __post_init__(self):
        if self.encoder.output_dim != self.decoder.input_dim:
            raise ShapeError("encoder output does not feed the decoder input")
        if self.decoder.output_dim != self.encoder.input_dim:
            raise ShapeError("reconstruction dimension differs from input dimension")
        if self.clamp is not None:
            lo, hi = float(self.clamp[0]), float(self.clamp[1])
            if not lo <= hi:
                raise ValueError(f"invalid clamp range ({lo}, {hi})")
            object.__setattr__(self, "clamp", (lo, hi))

    @property
    def input_dim(self) -> int:
        return self.encoder.input_dim

    @property
    def layers(self) -> tuple[Layer, ...]:
        return self.encoder.layers + self.decoder.layers

    def __call__(self, x) -> np.ndarray:
        return reconstruct(self, x)


def predict(net: DenseNetwork, x) -> np.ndarray:
    """Class scores for ``x`` (a vector, or a batch of row vectors)."""
    x = net._check_input(x)
    h = x
    for layer in net.layers:
        h = h @ layer.weight.T + layer.bias
        if layer.activation == "relu":
            h = np.maximum(h, 0.0)
    return h


def predict_class(net: DenseNetwork, x) -> int | np.ndarray:
    """Argmax of the scores; ties go to the lowest class index."""
    return np.argmax(predict(net, x), axis=-1)


def input_gradient(net: DenseNetwork, x, weights) -> np.ndarray:
    """Gradient of ``<weights, predict(net, x)>`` with respect to ``x``."""
    x = net._check_input(x)
    if x.ndim != 1:
        raise ShapeError("input_gradient takes a single input vector")
    weights = np.asarray(weights, dtype=np.float64)
    if weights.shape != (net.n_classes,):
        raise ShapeError(f"expected {net.n_classes} class weights, got shape {weights.shape}")
    acts, pres = _forward(net.layers, x)
    g, _ = _backward(net.layers, acts, pres, weights)
    return g


def scores_and_gradient(net: DenseNetwork, x: np.ndarray, weight_fn):
    """One forward pass, then backprop the class weights chosen by ``weight_fn(scores)``.

    Used by the solver so the scores that decide the hinge branch and the
    gradient come from the same pass. ``weight_fn`` may return None to skip
    the backward pass.
    """
    acts, pres = _forward(net.layers, x)
    scores = acts[-1]
    w = weight_fn(scores)
    if w is None:
        return scores, None
    g, _ = _backward(net.layers, acts, pres, w)
    return scores, g


def _ae_forward(ae: DenseAutoencoder, x: np.ndarray):
    layers = ae.layers
    acts, pres = _forward(layers, x)
    raw = acts[-1]
    if ae.clamp is None:
        return raw, acts, pres, None
    lo, hi = ae.clamp
    out = np.clip(raw, lo, hi)
    inside = (raw >= lo) & (raw <= hi)
    return out, acts, pres, inside


def reconstruct(ae: DenseAutoencoder, x) -> np.ndarray:
    """``decoder(encoder(x))``, clamped into the feature range."""
    x = ae.encoder._check_input(x)
    return _ae_forward(ae, x)[0]


def reconstruction_error(ae: DenseAutoencoder, x) -> float | np.ndarray:
    """Squared L2 residual ``||x - AE(x)||^2`` (per row for a batch)."""
    x = ae.encoder._check_input(x)
    r = x - reconstruct(ae, x)
    return np.sum(r * r, axis=-1)


def reconstruction_gradient(ae: DenseAutoencoder, x) -> np.ndarray:
    """Gradient of ``||x - AE(x)||^2`` with respect to ``x``.

    Differentiates through both the residual and the reconstruction. The
    clamp passes gradient where the raw decoder output lies inside the range
    (bounds included) and blocks it elsewhere.
    """
    x = ae.encoder._check_input(x)
    if x.ndim != 1:
        raise ShapeError("reconstruction_gradient takes a single input vector")
    return _reconstruction_value_grad(ae, x)[1]


def _reconstruction_value_grad(ae: DenseAutoencoder, x: np.ndarray):
    out, acts, pres, inside = _ae_forward(ae, x)
    r = x - out
    # d/dx ||x - AE(x)||^2 = 2r - 2 J^T r
    g_out = -2.0 * r
    if inside is not None:
        g_out = g_out * inside
    g_in, _ = _backward(ae.layers, acts, pres, g_out)
    return float(r @ r), 2.0 * r + g_in


# ---------------------------------------------------------------- training


@dataclass(frozen=True)
class TrainConfig:
    epochs: int = 200
    learning_rate: float = 0.1
    batch_size: int = 32
    seed: int = 0

    def __post_init__(self):
        if self.epochs < 1:
            raise ValueError("epochs must be positive")
        if not self.learning_rate > 0:
            raise ValueError("learning_rate must be > 0")
        if self.batch_size < 1:
            raise ValueError("batch_size must be >= 1")


@dataclass
class TrainResult:
    model: DenseNetwork | DenseAutoencoder
    loss_history: list[float] = field(default_factory=list)
    accuracy: float | None = None


def init_network(sizes: Sequence[int], rng: np.random.Generator, hidden_activation="relu") -> DenseNetwork:
    """He-initialized stack; the last layer is linear."""
    layers = []
    for k, (n_in, n_out) in enumerate(zip(sizes[:-1], sizes[1:])):
        act = "identity" if k == len(sizes) - 2 else hidden_activation
        w = rng.normal(0.0, math.sqrt(2.0 / n_in), size=(n_out, n_in))
        layers.append(Layer(w, np.zeros(n_out), act))
    return DenseNetwork(tuple(layers))


def _softmax_xent(scores: np.ndarray, y: np.ndarray):
    s = scores - scores.max(axis=1, keepdims=True)
    e = np.exp(s)
    p = e / e.sum(axis=1, keepdims=True)
    n = len(y)
    loss = -np.mean(np.log(p[np.arange(n), y] + 1e-300))
    g = p
    g[np.arange(n), y] -= 1.0
    return loss, g / n


def _sgd_step(layers, grads, lr):
    return tuple(
        Layer(layer.weight - lr * gw, layer.bias - lr * gb, layer.activation)
        for layer, (gw, gb) in zip(layers, grads)
    )


def _batches(n: int, batch_size: int, rng: np.random.Generator):
    order = rng.permutation(n)
    for start in range(0, n, batch_size):
        yield order[start : start + batch_size]


def accuracy(net: DenseNetwork, X, y) -> float:
    return float(np.mean(predict_class(net, X) == np.asarray(y)))


def train_classifier(
    X,
    y,
    hidden: Sequence[int] = (16,),
    cfg: TrainConfig = TrainConfig(),
    n_classes: int | None = None,
) -> TrainResult:
    """Fit a relu classifier with plain mini-batch gradient descent on softmax cross-entropy.

    ``n_classes`` defaults to ``max(y) + 1``. ``loss_history`` holds the
    full-data training loss after each epoch.
    """
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y)
    if X.ndim != 2 or len(X) == 0:
        raise ValueError("empty dataset")
    if len(y) != len(X):
        raise ValueError("features and labels differ in length")
    if not np.issubdtype(y.dtype, np.integer):
        if not np.all(y == np.round(y)):
            raise ValueError("labels must be integers")
        y = y.astype(np.int64)
    if y.min() < 0:
        raise ValueError("labels must be non-negative")
    n_classes = int(y.max()) + 1 if n_classes is None else int(n_classes)
    if n_classes < 2:
        raise ValueError("need at least 2 classes to train a classifier")
    if y.max() >= n_classes:
        raise ValueError(f"label {y.max()} out of range for {n_classes} classes")

    rng = np.random.default_rng(cfg.seed)
    net = init_network([X.shape[1], *hidden, n_classes], rng)
    layers = net.layers
    history = []
    for _ in range(cfg.epochs):
        for idx in _batches(len(X), cfg.batch_size, rng):
            acts, pres = _forward(layers, X[idx])
            _, g = _softmax_xent(acts[-1], y[idx])
            _, grads = _backward(layers, acts, pres, g, want_params=True)
            layers = _sgd_step(layers, grads, cfg.learning_rate)
        loss, _ = _softmax_xent(_forward(layers, X)[0][-1], y)
        history.append(float(loss))
    net = DenseNetwork(layers)
    acc = accuracy(net, X, y)
    logger.info("classifier trained: loss %.4g, accuracy %.4f", history[-1], acc)
    return TrainResult(net, history, acc)


def train_autoencoder(
    X,
    hidden: Sequence[int] = (32, 8, 32),
    cfg: TrainConfig = TrainConfig(),
    clamp: tuple[float, float] | None = (0.0, 1.0),
) -> TrainResult:
    """Fit an autoencoder on mean squared reconstruction error.

    ``hidden`` lists the hidden widths; the middle one is the code size and
    splits encoder from decoder. All hidden layers are relu, the output layer
    is linear followed by the clamp.
    """
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2 or len(X) == 0:
        raise ValueError("empty dataset")
    if not hidden:
        raise ValueError("an autoencoder needs at least one hidden layer")
    d = X.shape[1]
    rng = np.random.default_rng(cfg.seed)
    sizes = [d, *hidden, d]
    split = len(hidden) // 2 + 1  # encoder layers
    layers = init_network(sizes, rng).layers

    def build(ls):
        enc = list(ls[:split])
        # encoder ends at the code layer, which keeps its relu
        enc[-1] = Layer(enc[-1].weight, enc[-1].bias, "relu")
        return DenseAutoencoder(DenseNetwork(tuple(enc)), DenseNetwork(tuple(ls[split:])), clamp)

    layers = build(layers).layers
    history = []
    for _ in range(cfg.epochs):
        for idx in _batches(len(X), cfg.batch_size, rng):
            ae = build(layers)
            out, acts, pres, inside = _ae_forward(ae, X[idx])
            g = 2.0 * (out - X[idx]) / (len(idx) * d)
            if inside is not None:
                g = g * inside
            _, grads = _backward(layers, acts, pres, g, want_params=True)
            layers = _sgd_step(layers, grads, cfg.learning_rate)
        ae = build(layers)
        history.append(float(np.mean((reconstruct(ae, X) - X) ** 2)))
    logger.info("autoencoder trained: mse %.4g", history[-1])
    return TrainResult(build(layers), history)


# ------------------------------------------------------------ weight files


def _fmt(v: float) -> str:
    return format(float(v), ".17g")


def _layer_lines(layer: Layer) -> list[str]:
    lines = [f"layer {layer.n_in} {layer.n_out} {layer.activation}"]
    lines += [" ".join(_fmt(v) for v in row) for row in layer.weight]
    lines.append(" ".join(_fmt(v) for v in layer.bias))
    return lines


def _net_lines(net: DenseNetwork) -> list[str]:
    lines = [f"dense-net v1 {len(net.layers)}"]
    for layer in net.layers:
        lines += _layer_lines(layer)
    return lines


def dumps_weights(model: DenseNetwork | DenseAutoencoder) -> str:
    if isinstance(model, DenseNetwork):
        lines = _net_lines(model)
    elif isinstance(model, DenseAutoencoder):
        clamp = "none" if model.clamp is None else f"{_fmt(model.clamp[0])} {_fmt(model.clamp[1])}"
        lines = ["dense-ae v1", f"clamp {clamp}"] + _net_lines(model.encoder) + _net_lines(model.decoder)
    else:
        raise TypeError(f"cannot serialize {type(model).__name__}")
    return "\n".join(lines) + "\n"


def save_weights(model: DenseNetwork | DenseAutoencoder, path) -> None:
    Path(path).write_text(dumps_weights(model))


class _Lines:
    def __init__(self, text: str):
        self.lines = [ln.strip() for ln in text.splitlines()]
        self.pos = 0

    def next(self, what: str) -> str:
        while self.pos < len(self.lines) and not self.lines[self.pos]:
            self.pos += 1
        if self.pos >= len(self.lines):
            raise WeightFormatError(f"unexpected end of file while reading {what}")
        self.pos += 1
        return self.lines[self.pos - 1]

    def at_end(self) -> bool:
        return all(not ln for ln in self.lines[self.pos :])


def _floats(line: str, n: int, what: str) -> np.ndarray:
    parts = line.split()
    if len(parts) != n:
        raise WeightFormatError(f"{what}: expected {n} values, found {len(parts)}")
    try:
        vals = np.array([float(p) for p in parts], dtype=np.float64)
    except ValueError as exc:
        raise WeightFormatError(f"{what}: {exc}") from None
    if not np.all(np.isfinite(vals)):
        raise WeightFormatError(f"{what}: non-finite value")
    return vals


def _parse_net(src: _Lines, label: str) -> DenseNetwork:
    head = src.next(f"{label} header").split()
    if len(head) != 3 or head[:2] != ["dense-net", "v1"]:
        raise WeightFormatError(f"{label}: expected 'dense-net v1 <num_layers>' header")
    try:
        n_layers = int(head[2])
    except ValueError:
        raise WeightFormatError(f"{label}: bad layer count {head[2]!r}") from None
    if n_layers < 1:
        raise WeightFormatError(f"{label}: layer count must be positive")
    layers = []
    for k in range(n_layers):
        where = f"{label} layer {k}"
        spec = src.next(f"{where} header").split()
        if len(spec) != 4 or spec[0] != "layer":
            raise WeightFormatError(f"{where}: expected 'layer <in> <out> <activation>'")
        try:
            n_in, n_out = int(spec[1]), int(spec[2])
        except ValueError:
            raise WeightFormatError(f"{where}: bad dimensions") from None
        if n_in < 1 or n_out < 1:
            raise WeightFormatError(f"{where}: dimensions must be positive")
        if spec[3] not in ACTIVATIONS:
            raise WeightFormatError(f"{where}: unknown activation {spec[3]!r}")
        rows = []
        for r in range(n_out):
            line = src.next(f"{where} weight row {r}")
            if line.startswith(("layer", "dense-")):
                raise WeightFormatError(f"{where}: expected {n_out} weight rows, found {r}")
            rows.append(_floats(line, n_in, f"{where} weight row {r}"))
        bias = _floats(src.next(f"{where} bias"), n_out, f"{where} bias")
        if layers and layers[-1].n_out != n_in:
            raise WeightFormatError(
                f"{where}: input size {n_in} does not match previous output {layers[-1].n_out}"
            )
        layers.append(Layer(np.vstack(rows), bias, spec[3]))
    return DenseNetwork(tuple(layers))


def loads_weights(text: str) -> DenseNetwork | DenseAutoencoder:
    src = _Lines(text)
    first = src.next("header")
    if first.startswith("dense-net"):
        src.pos -= 1
        model = _parse_net(src, "network")
    elif first.split() == ["dense-ae", "v1"]:
        clamp_line = src.next("clamp").split()
        if clamp_line == ["clamp", "none"]:
            clamp = None
        elif len(clamp_line) == 3 and clamp_line[0] == "clamp":
            lo, hi = _floats(" ".join(clamp_line[1:]), 2, "clamp")
            clamp = (float(lo), float(hi))
        else:
            raise WeightFormatError("clamp: expected 'clamp <lo> <hi>' or 'clamp none'")
        enc = _parse_net(src, "encoder")
        dec = _parse_net(src, "decoder")
        try:
            model = DenseAutoencoder(enc, dec, clamp)
        except (ShapeError, ValueError) as exc:
            raise WeightFormatError(f"autoencoder: {exc}") from None
    else:
        raise WeightFormatError(f"header: unrecognized {first!r}")
    if not src.at_end():
        raise WeightFormatError(f"trailing content at line {src.pos + 1}")
    return model


def load_weights(path) -> DenseNetwork | DenseAutoencoder:
    return loads_weights(Path(path).read_text())
