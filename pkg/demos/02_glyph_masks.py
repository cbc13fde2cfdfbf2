"""Pertinent positives and negatives as 8x8 masks on synthetic glyphs.

Class 0 is a vertical bar, class 1 a ring. The PP mask marks the pixels of
the glyph that suffice for the prediction; the PN mask marks background
pixels whose absence keeps the prediction. The second pass adds an
autoencoder penalty (gamma = 100) that pulls x0 + PN toward glyph-like images.
"""

import numpy as np

from cem import (
    Example,
    FeasibleSpace,
    SolverConfig,
    TrainConfig,
    c_search,
    explain,
    train_autoencoder,
    train_classifier,
)
from cem.datasets import make_glyphs
from cem.model import reconstruction_error
from cem.objective import Mode

SHADES = " .:-=+*#%@"


def ascii_image(v, size=8):
    idx = np.clip((np.asarray(v) * (len(SHADES) - 1)).round().astype(int), 0, len(SHADES) - 1)
    return ["".join(SHADES[i] * 2 for i in row) for row in idx.reshape(size, size)]


def show(*panels, titles):
    print("   ".join(t.ljust(16) for t in titles))
    for rows in zip(*(ascii_image(p) for p in panels)):
        print("   ".join(rows))


X, y = make_glyphs(200, seed=0)
net = train_classifier(X, y, hidden=(16,), cfg=TrainConfig(epochs=100, learning_rate=0.1, batch_size=20, seed=0)).model
ae = train_autoencoder(X, hidden=(32, 8, 32), cfg=TrainConfig(epochs=300, learning_rate=0.5, batch_size=20, seed=0)).model

Xt, _ = make_glyphs(2, seed=1)
for i, x in enumerate(Xt):
    ex = Example.from_model(x, net, str(i))
    expl = explain(ex, net, cfg=SolverConfig())
    print(f"\nexample {i}: class {ex.t0}; PN reaches class {expl.pn_target_class}")
    show(x, expl.pp.delta, expl.pn.delta, x + expl.pn.delta, titles=["x0", "PP", "PN", "x0 + PN"])

    # %% same PN problem with the autoencoder term switched on
    pn_ae = c_search(ex, net, ae, FeasibleSpace.build(x, Mode.PN), SolverConfig(gamma=100.0))
    show(pn_ae.delta, x + pn_ae.delta, titles=["PN (gamma=100)", "x0 + PN"])
    print(
        f"reconstruction error of x0 + PN: gamma=0 {reconstruction_error(ae, x + expl.pn.delta):.3f}, "
        f"gamma=100 {reconstruction_error(ae, x + pn_ae.delta):.3f}"
    )
