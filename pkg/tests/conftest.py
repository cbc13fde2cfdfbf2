import numpy as np
import pytest

from cem.datasets import make_blobs, make_glyphs
from cem.model import DenseAutoencoder, DenseNetwork, Layer, TrainConfig, _forward, train_autoencoder, train_classifier


def random_net(rng, sizes, scale=1.0):
    layers = []
    for k, (n_in, n_out) in enumerate(zip(sizes[:-1], sizes[1:])):
        act = "identity" if k == len(sizes) - 2 else "relu"
        layers.append(Layer(scale * rng.normal(size=(n_out, n_in)) / np.sqrt(n_in), 0.3 * rng.normal(size=n_out), act))
    return DenseNetwork(tuple(layers))


def random_ae(rng, d, code=3, clamp=(0.0, 1.0)):
    enc = random_net(rng, [d, 6, code])
    enc = DenseNetwork(enc.layers[:-1] + (Layer(enc.layers[-1].weight, enc.layers[-1].bias, "relu"),))
    dec = random_net(rng, [code, 6, d])
    # shift the output toward the middle of the clamp range
    last = dec.layers[-1]
    dec = DenseNetwork(dec.layers[:-1] + (Layer(0.3 * last.weight, last.bias * 0.1 + 0.5, "identity"),))
    return DenseAutoencoder(enc, dec, clamp)


def min_kink_distance(layers, x, clamp=None):
    """Smallest |pre-activation| over relu layers (and distance to clamp bounds)."""
    acts, pres = _forward(layers, x)
    d = np.inf
    for layer, z in zip(layers, pres):
        if layer.activation == "relu":
            d = min(d, np.min(np.abs(z)))
    if clamp is not None:
        d = min(d, np.min(np.abs(acts[-1] - clamp[0])), np.min(np.abs(acts[-1] - clamp[1])))
    return d


def central_diff(f, x, eps=1e-5):
    g = np.zeros_like(x)
    for i in range(len(x)):
        e = np.zeros_like(x)
        e[i] = eps
        g[i] = (f(x + e) - f(x - e)) / (2 * eps)
    return g


def rel_err(a, b):
    return np.linalg.norm(a - b) / max(np.linalg.norm(b), 1e-12)


BLOB_TRAIN = TrainConfig(epochs=100, learning_rate=0.5, batch_size=20, seed=0)
GLYPH_TRAIN = TrainConfig(epochs=100, learning_rate=0.1, batch_size=20, seed=0)
AE_TRAIN = TrainConfig(epochs=300, learning_rate=0.5, batch_size=20, seed=0)


@pytest.fixture(scope="session")
def blob_suite():
    X, y = make_blobs(200, seed=0)
    res = train_classifier(X, y, hidden=(), cfg=BLOB_TRAIN)
    Xt, _ = make_blobs(20, seed=1)
    return res, Xt


@pytest.fixture(scope="session")
def glyph_suite():
    X, y = make_glyphs(200, seed=0)
    res = train_classifier(X, y, hidden=(16,), cfg=GLYPH_TRAIN)
    Xt, _ = make_glyphs(20, seed=1)
    return res, Xt, X


@pytest.fixture(scope="session")
def glyph_ae(glyph_suite):
    return train_autoencoder(glyph_suite[2], hidden=(32, 8, 32), cfg=AE_TRAIN, clamp=(0.0, 1.0)).model


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
